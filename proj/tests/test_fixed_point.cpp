#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stmem/fixed_point.hpp"
#include "stmem/rng.hpp"

using stmem::dequantize;
using stmem::FixedPointFormat;
using stmem::quantize;

TEST_CASE("quantize basics at F = 12") {
    const FixedPointFormat fmt{12};
    CHECK(quantize(0.0, fmt) == 0x0000);
    CHECK(quantize(1.0, fmt) == 0x1000);
    CHECK(quantize(100.0, fmt) == 0x7fff);   // saturation
    CHECK(quantize(-100.0, fmt) == 0x8000);  // saturation
    CHECK(quantize(-1.0, fmt) == 0xf000);
    CHECK(dequantize(0x1000, fmt) == 1.0);
    CHECK(dequantize(0x8000, fmt) == -8.0);
    CHECK_THAT(fmt.max_value(), Catch::Matchers::WithinAbs(8.0 - fmt.step(), 1e-15));
    CHECK(fmt.min_value() == -8.0);
}

TEST_CASE("round-to-nearest-even at the half step") {
    const FixedPointFormat fmt{12};
    const double s = fmt.step();
    CHECK(quantize(2.5 * s, fmt) == 2);
    CHECK(quantize(3.5 * s, fmt) == 4);
    CHECK(quantize(-2.5 * s, fmt) == static_cast<uint16_t>(-2));
    CHECK(quantize(-3.5 * s, fmt) == static_cast<uint16_t>(-4));
    CHECK(quantize(0.4 * s, fmt) == 0);
    CHECK(quantize(-0.4 * s, fmt) == 0);
    CHECK(quantize(0.6 * s, fmt) == 1);
}

TEST_CASE("dequantize . quantize is identity on grid points", "[property]") {
    stmem::Rng rng(77);
    for (int f = 1; f <= 15; f += 2) {
        const FixedPointFormat fmt{f};
        for (int i = 0; i < 500; ++i) {
            const auto word = static_cast<uint16_t>(rng.next_u64());
            const double x = dequantize(word, fmt);
            CHECK(quantize(x, fmt) == word);
        }
    }
}

TEST_CASE("format validation") {
    CHECK_THROWS_AS(FixedPointFormat{0}.validate(), std::invalid_argument);
    CHECK_THROWS_AS(FixedPointFormat{16}.validate(), std::invalid_argument);
    FixedPointFormat{12}.validate();
}

TEST_CASE("saturation boundary") {
    const FixedPointFormat fmt{12};
    CHECK(quantize(fmt.max_value(), fmt) == 0x7fff);
    CHECK(quantize(fmt.max_value() + 0.49 * fmt.step(), fmt) == 0x7fff);
    CHECK(quantize(fmt.min_value(), fmt) == 0x8000);
    CHECK(quantize(fmt.min_value() - 123.0, fmt) == 0x8000);
    CHECK(quantize(std::nan(""), fmt) == 0);
}
