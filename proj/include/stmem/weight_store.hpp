#pragma once

// Fixed-point word array with ST-MRAM programming semantics: every write
// pulses all 16 bits blindly (billing the full word energy), each pulse
// fails with its bit's BER, and a failed bit simply retains its previous
// value. A pulse toward the already-held state is a no-op, so failures are
// sampled only where target and stored bits differ ("relevant" bits).
//
// Sized for ~1e11 simulated bit-writes: the per-word cost is dominated by
// the failure sampler, which never walks bits one by one. Two fast paths,
// both distributionally identical to independent per-bit Bernoulli draws:
//   - BER <= 1e-3: geometric skip-sampling over the flattened stream of
//     relevant bit-writes of the group (failures are rare; the sampler
//     counts down successes in O(1) per word).
//   - higher BER: draw the number of minority outcomes from a precomputed
//     Binomial CDF, then place them uniformly (partial Fisher-Yates).
//     BER exactly 0.5 short-circuits to one draw of random bits.
// A naive per-bit reference sampler is kept as the statistical oracle.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "stmem/fixed_point.hpp"
#include "stmem/profile.hpp"
#include "stmem/rng.hpp"

namespace stmem {

namespace detail {

inline uint16_t nth_set_bit(uint16_t bits, unsigned n) {
    uint32_t b = bits;
    for (unsigned i = 0; i < n; ++i) b &= b - 1;
    return static_cast<uint16_t>(b & (~b + 1));
}

}  // namespace detail

/// Draws failure masks for a profile. Holds the per-group geometric skip
/// counters, i.e. the position of the next failure in each group's stream
/// of relevant bit-writes; the counters persist across words by design.
class FailureSampler {
public:
    explicit FailureSampler(const ProgrammingProfile& profile) : profile_(&profile) {
        skip_.assign(profile.groups().size(), 0);
        primed_ = false;
    }

    /// Failed positions among relevant_mask; distribution = independent
    /// Bernoulli(ber[b]) per relevant bit b.
    uint16_t sample(Rng& rng, uint16_t relevant_mask) {
        if (!primed_) prime(rng);
        uint16_t fail = 0;
        const auto& groups = profile_->groups();
        for (size_t gi = 0; gi < groups.size(); ++gi) {
            const auto& g = groups[gi];
            uint16_t rel = relevant_mask & g.mask;
            if (!rel) continue;
            switch (g.strategy) {
                case detail::FailStrategy::Never:
                    break;
                case detail::FailStrategy::AlwaysFail:
                    fail |= rel;
                    break;
                case detail::FailStrategy::HalfBits:
                    fail |= static_cast<uint16_t>(rng.next_u64()) & rel;
                    break;
                case detail::FailStrategy::Geometric: {
                    uint64_t& skip = skip_[gi];
                    unsigned n = static_cast<unsigned>(std::popcount(rel));
                    uint16_t candidates = rel;
                    while (skip < n) {
                        const uint16_t bit =
                            detail::nth_set_bit(candidates, static_cast<unsigned>(skip));
                        fail |= bit;
                        // drop the failed bit and everything below it
                        candidates &= static_cast<uint16_t>(~((bit << 1) - 1));
                        n = static_cast<unsigned>(std::popcount(candidates));
                        skip = rng.geometric_skips(g.ber);
                    }
                    skip -= n;
                    break;
                }
                case detail::FailStrategy::Binomial: {
                    const unsigned n = static_cast<unsigned>(std::popcount(rel));
                    const auto& cdf = g.count_cdf[n];
                    const double u = rng.uniform();
                    unsigned c = 0;
                    while (c < n && u >= cdf[c]) ++c;
                    uint16_t chosen = 0;
                    if (c == n) {
                        chosen = rel;
                    } else if (c > 0) {
                        uint8_t idx[16];
                        unsigned m = 0;
                        for (uint16_t b = rel; b; b &= static_cast<uint16_t>(b - 1)) {
                            idx[m++] = static_cast<uint8_t>(std::countr_zero(b));
                        }
                        for (unsigned i = 0; i < c; ++i) {
                            const unsigned j =
                                i + static_cast<unsigned>(rng.below(m - i));
                            std::swap(idx[i], idx[j]);
                            chosen |= static_cast<uint16_t>(1u << idx[i]);
                        }
                    }
                    fail |= g.minority_is_failure ? chosen : static_cast<uint16_t>(rel ^ chosen);
                    break;
                }
            }
        }
        return fail;
    }

    const ProgrammingProfile& profile() const { return *profile_; }

private:
    void prime(Rng& rng) {
        const auto& groups = profile_->groups();
        for (size_t gi = 0; gi < groups.size(); ++gi) {
            if (groups[gi].strategy == detail::FailStrategy::Geometric) {
                skip_[gi] = rng.geometric_skips(groups[gi].ber);
            }
        }
        primed_ = true;
    }

    const ProgrammingProfile* profile_;
    std::vector<uint64_t> skip_;
    bool primed_;
};

/// Reference sampler: one Bernoulli draw per relevant bit, low bits first.
/// Slow by construction; exists as the statistical oracle for FailureSampler.
inline uint16_t naive_failure_mask(Rng& rng, const ProgrammingProfile& profile,
                                   uint16_t relevant_mask) {
    uint16_t fail = 0;
    for (uint16_t b = relevant_mask; b; b &= static_cast<uint16_t>(b - 1)) {
        const int pos = std::countr_zero(b);
        if (rng.bernoulli(profile.per_bit()[pos].ber)) {
            fail |= static_cast<uint16_t>(1u << pos);
        }
    }
    return fail;
}

namespace detail {

/// Kahan accumulator; keeps the energy ledger exact to ~1 ulp across 1e11 adds.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

}  // namespace detail

struct SnapshotError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Array of 16-bit words with faulty-program semantics and an energy ledger.
/// Single writer; reads may be concurrent between writes.
class ApproxWeightStore {
public:
    ApproxWeightStore(size_t n_words, FixedPointFormat format, ProgrammingProfile profile,
                      uint64_t seed, bool use_naive_sampler = false)
        : format_(format),
          profile_(std::move(profile)),
          sampler_(profile_),
          rng_(Rng::stream(seed, /*tag=*/0x57524954u)),  // "WRIT"
          words_(n_words, 0),
          use_naive_(use_naive_sampler) {
        format_.validate();
    }

    size_t size() const { return words_.size(); }
    const FixedPointFormat& format() const { return format_; }
    const ProgrammingProfile& profile() const { return profile_; }

    uint16_t word(size_t index) const { return words_[index]; }
    const std::vector<uint16_t>& words() const { return words_; }

    double value(size_t index) const { return dequantize(words_[index], format_); }

    /// Blind write of all 16 bits: failed bits keep their previous value,
    /// the ledger is billed the full word energy regardless of outcomes.
    void program_word(size_t index, uint16_t target) {
        if (index >= words_.size()) {
            throw std::out_of_range("ApproxWeightStore::program_word: index out of range");
        }
        const uint16_t stored = words_[index];
        const uint16_t relevant = static_cast<uint16_t>(stored ^ target);
        uint16_t fail = 0;
        if (relevant != 0) {
            fail = use_naive_ ? naive_failure_mask(rng_, profile_, relevant)
                              : sampler_.sample(rng_, relevant);
        }
        words_[index] = static_cast<uint16_t>(target ^ fail);
        ledger_.add(profile_.word_energy_pj());
        ++words_written_;
    }

    /// Quantize and program; returns the word actually requested.
    uint16_t program_value(size_t index, double x) {
        const uint16_t target = quantize(x, format_);
        program_word(index, target);
        return target;
    }

    /// Overwrite a word without fault injection or billing. Initialization
    /// and snapshot restore only.
    void poke(size_t index, uint16_t word) { words_.at(index) = word; }

    double energy_ledger_pj() const { return ledger_.sum; }
    uint64_t words_written() const { return words_written_; }

    void reset_ledger() {
        ledger_ = {};
        words_written_ = 0;
    }

    // --- snapshot: 16-byte header {magic "AMEM", u32 version, u32 word
    // count, u16 F, u16 reserved}, then the words; all little-endian. ---

    void save_snapshot(std::ostream& out) const {
        char header[16] = {};
        std::memcpy(header, "AMEM", 4);
        const uint32_t version = 1;
        const uint32_t count = static_cast<uint32_t>(words_.size());
        const uint16_t frac = static_cast<uint16_t>(format_.fractional_bits);
        std::memcpy(header + 4, &version, 4);
        std::memcpy(header + 8, &count, 4);
        std::memcpy(header + 12, &frac, 2);
        out.write(header, sizeof header);
        out.write(reinterpret_cast<const char*>(words_.data()),
                  static_cast<std::streamsize>(words_.size() * 2));
        if (!out) throw SnapshotError("snapshot: write failed");
    }

    /// Restore words from a snapshot; word count and format must match.
    void load_snapshot(std::istream& in) {
        char header[16];
        in.read(header, sizeof header);
        if (!in || std::memcmp(header, "AMEM", 4) != 0) {
            throw SnapshotError("snapshot: bad magic");
        }
        uint32_t version = 0, count = 0;
        uint16_t frac = 0;
        std::memcpy(&version, header + 4, 4);
        std::memcpy(&count, header + 8, 4);
        std::memcpy(&frac, header + 12, 2);
        if (version != 1) throw SnapshotError("snapshot: unsupported version");
        if (count != words_.size()) throw SnapshotError("snapshot: word count mismatch");
        if (frac != static_cast<uint16_t>(format_.fractional_bits)) {
            throw SnapshotError("snapshot: fixed-point format mismatch");
        }
        in.read(reinterpret_cast<char*>(words_.data()),
                static_cast<std::streamsize>(words_.size() * 2));
        if (!in) throw SnapshotError("snapshot: truncated payload");
    }

private:
    FixedPointFormat format_;
    ProgrammingProfile profile_;
    FailureSampler sampler_;
    Rng rng_;
    std::vector<uint16_t> words_;
    detail::KahanSum ledger_;
    uint64_t words_written_ = 0;
    bool use_naive_ = false;
};

}  // namespace stmem
