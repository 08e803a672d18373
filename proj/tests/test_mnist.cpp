#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "stmem/mnist.hpp"
#include "stmem/rng.hpp"

using stmem::IdxError;
using stmem::IdxErrorCode;
using stmem::IdxTensor;

namespace {

std::vector<uint8_t> to_bytes(const IdxTensor& t) {
    std::ostringstream out;
    stmem::write_idx(out, t);
    const std::string s = out.str();
    return std::vector<uint8_t>(s.begin(), s.end());
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "stmem_mnist_test";
    std::filesystem::create_directories(dir);
    return dir;
}

void write_bytes(const std::filesystem::path& p, const std::vector<uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("hand-built 2x2x2 IDX file parses to the oracle layout") {
    // byte-layout oracle written by hand: magic 0x00000803, dims 2,2,2,
    // payload bytes 0..7
    const std::vector<uint8_t> bytes = {
        0x00, 0x00, 0x08, 0x03,              // magic: u8, rank 3
        0x00, 0x00, 0x00, 0x02,              // dim 0
        0x00, 0x00, 0x00, 0x02,              // dim 1
        0x00, 0x00, 0x00, 0x02,              // dim 2
        0, 1, 2, 3, 4, 5, 6, 7,              // payload
    };
    const IdxTensor t = stmem::parse_idx(bytes);
    REQUIRE(t.dims == std::vector<uint32_t>{2, 2, 2});
    REQUIRE(t.data.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(t.data[i] == i);
}

TEST_CASE("IDX error taxonomy") {
    const auto code_of = [](const std::vector<uint8_t>& bytes) {
        try {
            stmem::parse_idx(bytes);
        } catch (const IdxError& e) {
            return e.code();
        }
        FAIL("expected IdxError");
        return IdxErrorCode::BadMagic;
    };

    // unsupported element type / rank
    CHECK(code_of({0x00, 0x00, 0x08, 0x02, 0, 0, 0, 1, 0, 0, 0, 1, 7}) ==
          IdxErrorCode::UnsupportedType);
    CHECK(code_of({0x00, 0x00, 0x0d, 0x01, 0, 0, 0, 0}) == IdxErrorCode::UnsupportedType);
    // bad magic
    CHECK(code_of({0xde, 0xad, 0xbe, 0xef}) == IdxErrorCode::BadMagic);
    CHECK(code_of({0x00}) == IdxErrorCode::BadMagic);
    // truncated payload
    CHECK(code_of({0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x05, 1, 2, 3}) ==
          IdxErrorCode::Truncated);
    // trailing bytes
    CHECK(code_of({0x00, 0x00, 0x08, 0x01, 0x00, 0x00, 0x00, 0x01, 1, 2}) ==
          IdxErrorCode::SizeMismatch);
    // dimension overflow
    CHECK(code_of({0x00, 0x00, 0x08, 0x03, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff, 0xff,
                   0x00, 0x00, 0x08, 0x00}) == IdxErrorCode::DimOverflow);
}

TEST_CASE("parse . serialize identity on synthetic IDX tensors", "[property]") {
    stmem::Rng rng(404);
    for (int trial = 0; trial < 50; ++trial) {
        IdxTensor t;
        if (rng.bernoulli(0.5)) {
            t.dims = {static_cast<uint32_t>(1 + rng.below(50))};
        } else {
            t.dims = {static_cast<uint32_t>(1 + rng.below(8)),
                      static_cast<uint32_t>(1 + rng.below(8)),
                      static_cast<uint32_t>(1 + rng.below(8))};
        }
        size_t total = 1;
        for (uint32_t d : t.dims) total *= d;
        t.data.resize(total);
        for (auto& v : t.data) v = static_cast<uint8_t>(rng.next_u64());

        const IdxTensor back = stmem::parse_idx(to_bytes(t));
        CHECK(back.dims == t.dims);
        CHECK(back.data == t.data);
    }
}

TEST_CASE("synthetic dataset loads, with and without gzip") {
    const auto dir = temp_dir();
    // 3 images of 2x2, labels 0,1,2
    IdxTensor images;
    images.dims = {3, 2, 2};
    images.data = {0, 51, 102, 153, 204, 255, 0, 255, 10, 20, 30, 40};
    IdxTensor labels;
    labels.dims = {3};
    labels.data = {0, 1, 2};

    write_bytes(dir / "train-images-idx3-ubyte", to_bytes(images));
    write_bytes(dir / "train-labels-idx1-ubyte", to_bytes(labels));

    const stmem::Dataset ds = stmem::load_dataset(dir, stmem::Split::Train);
    CHECK(ds.n == 3);
    CHECK(ds.feature_dim == 4);
    CHECK(ds.labels[2] == 2);
    CHECK_THAT(ds.images[1], Catch::Matchers::WithinAbs(51.0 / 255.0, 1e-7));
    CHECK_THAT(ds.images[5], Catch::Matchers::WithinAbs(1.0, 1e-7));

    // the gz variant decodes identically
    const auto t10k_images = to_bytes(images);
    gzFile gz = gzopen((dir / "t10k-images-idx3-ubyte.gz").string().c_str(), "wb");
    REQUIRE(gz != nullptr);
    gzwrite(gz, t10k_images.data(), static_cast<unsigned>(t10k_images.size()));
    gzclose(gz);
    write_bytes(dir / "t10k-labels-idx1-ubyte", to_bytes(labels));
    const stmem::Dataset test = stmem::load_dataset(dir, stmem::Split::Test);
    CHECK(test.n == 3);
    CHECK(test.images == ds.images);

    std::filesystem::remove_all(dir);
}

TEST_CASE("dataset error paths") {
    const auto dir = temp_dir();
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    CHECK_THROWS_AS(stmem::load_dataset(dir, stmem::Split::Train), stmem::DataError);

    IdxTensor images;
    images.dims = {2, 2, 2};
    images.data.assign(8, 0);
    IdxTensor labels;
    labels.dims = {3};  // count mismatch
    labels.data = {0, 1, 2};
    write_bytes(dir / "train-images-idx3-ubyte", to_bytes(images));
    write_bytes(dir / "train-labels-idx1-ubyte", to_bytes(labels));
    try {
        stmem::load_dataset(dir, stmem::Split::Train);
        FAIL("expected DataError");
    } catch (const stmem::DataError& e) {
        CHECK(e.code() == stmem::DataErrorCode::CountMismatch);
    }

    // label out of range
    labels.dims = {2};
    labels.data = {0, 11};
    write_bytes(dir / "train-labels-idx1-ubyte", to_bytes(labels));
    try {
        stmem::load_dataset(dir, stmem::Split::Train);
        FAIL("expected DataError");
    } catch (const stmem::DataError& e) {
        CHECK(e.code() == stmem::DataErrorCode::InvalidLabel);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("canonical MNIST loads with the documented sizes", "[mnist-data]") {
    const char* dir = std::getenv("STMEM_MNIST_DIR");
    if (!dir || !std::filesystem::exists(std::filesystem::path(dir) / "train-images-idx3-ubyte")) {
        SKIP("canonical MNIST not present (set STMEM_MNIST_DIR)");
    }
    const stmem::Dataset train = stmem::load_dataset(dir, stmem::Split::Train);
    const stmem::Dataset test = stmem::load_dataset(dir, stmem::Split::Test);
    CHECK(train.n == 60000);
    CHECK(test.n == 10000);
    CHECK(train.feature_dim == 784);
    for (float v : {train.images[0], train.images[783], train.images[60000 * 784 - 1]}) {
        CHECK(v >= 0.0f);
        CHECK(v <= 1.0f);
    }
}
