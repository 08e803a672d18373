#pragma once

// 16-bit two's-complement fixed-point codec for synaptic weights.

#include <cfenv>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace stmem {

/// Q(16-F).F fixed point: 16-bit word, F fractional bits. F = 12 stores
/// [-8, 8) at step 2^-12, wide enough for tanh-MLP weights on this task.
struct FixedPointFormat {
    static constexpr int total_bits = 16;
    int fractional_bits = 12;

    double step() const { return std::ldexp(1.0, -fractional_bits); }
    double min_value() const { return -32768.0 * step(); }
    double max_value() const { return 32767.0 * step(); }

    void validate() const {
        if (fractional_bits < 1 || fractional_bits >= total_bits) {
            throw std::invalid_argument("FixedPointFormat: need 1 <= F < 16");
        }
    }
};

/// Round-to-nearest-even at step 2^-F with saturating clamp to the int16
/// range. Relies on the default FE_TONEAREST rounding mode.
inline uint16_t quantize(double x, const FixedPointFormat& fmt) {
    const double scaled = std::ldexp(x, fmt.fractional_bits);
    if (std::isnan(scaled)) return 0;
    if (scaled >= 32767.0) return 0x7fff;
    if (scaled <= -32768.0) return 0x8000;
    const long long r = std::llrint(scaled);
    return static_cast<uint16_t>(static_cast<int16_t>(r));
}

inline double dequantize(uint16_t word, const FixedPointFormat& fmt) {
    return std::ldexp(static_cast<double>(static_cast<int16_t>(word)), -fmt.fractional_bits);
}

}  // namespace stmem
