#pragma once

// Two-layer tanh MLP trained by minibatch backpropagation with every
// parameter resident in an approximate weight store. Reads are error-free;
// corruption enters only through programming failures on writes.
//
// Loss is mean squared error between the tanh outputs and +-1 one-hot
// targets, averaged over the minibatch. Each step computes gradients in
// full floating-point precision from the currently stored (possibly
// corrupted) weights, then programs quantize(w - lr * g) for every
// parameter through the store.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "stmem/fixed_point.hpp"
#include "stmem/mnist.hpp"
#include "stmem/profile.hpp"
#include "stmem/rng.hpp"
#include "stmem/weight_store.hpp"

namespace stmem {

struct NetworkTopology {
    int input = 784;
    int hidden = 300;
    int output = 10;

    size_t param_count() const {
        return static_cast<size_t>(input) * hidden + hidden +
               static_cast<size_t>(hidden) * output + output;
    }
};

/// Learning rate frozen from a coarse grid search over
/// {0.01, 0.02, 0.05, 0.1, 0.2} on the fault-free baseline (see README).
inline constexpr double kDefaultLearningRate = 0.05;

struct TrainConfig {
    int minibatch = 10;
    int epochs = 5;
    double learning_rate = kDefaultLearningRate;
    uint64_t seed = 1;
    int n_seeds = 5;

    void validate() const {
        if (minibatch < 1 || epochs < 1 || n_seeds < 1 || !(learning_rate > 0.0)) {
            throw std::invalid_argument("TrainConfig: invalid field");
        }
    }
};

struct TrainReport {
    double recognition_rate = 0.0;  // mean of per_seed_rates
    std::vector<double> per_seed_rates;
    double total_programming_energy_pj = 0.0;  // per training run (mean over seeds)
    double energy_per_weight_pj = 0.0;
    uint64_t words_written = 0;  // per training run
    SchemeTag profile_descriptor;
};

/// Exact storage backend with the same surface the trainer programs
/// against: writes always take effect, nothing is billed. This is the
/// dense reference for fault-free equivalence checks.
class DenseStore {
public:
    DenseStore(size_t n_words, FixedPointFormat format) : format_(format), words_(n_words, 0) {}

    size_t size() const { return words_.size(); }
    const FixedPointFormat& format() const { return format_; }
    uint16_t word(size_t index) const { return words_[index]; }
    void program_word(size_t index, uint16_t target) { words_.at(index) = target; }
    void poke(size_t index, uint16_t w) { words_.at(index) = w; }
    double energy_ledger_pj() const { return 0.0; }
    uint64_t words_written() const { return 0; }

private:
    FixedPointFormat format_;
    std::vector<uint16_t> words_;
};

template <typename Scalar, typename Store>
class MlpTrainer {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    MlpTrainer(NetworkTopology topo, Store& store)
        : topo_(topo),
          store_(&store),
          w1_(topo.hidden, topo.input),
          b1_(topo.hidden),
          w2_(topo.output, topo.hidden),
          b2_(topo.output) {
        if (store.size() != topo.param_count()) {
            throw std::invalid_argument("MlpTrainer: store size != parameter count");
        }
        off_w1_ = 0;
        off_b1_ = off_w1_ + static_cast<size_t>(topo.hidden) * topo.input;
        off_w2_ = off_b1_ + static_cast<size_t>(topo.hidden);
        off_b2_ = off_w2_ + static_cast<size_t>(topo.output) * topo.hidden;
    }

    /// Glorot-uniform draw, quantized and written directly into the store
    /// (initialization is a preset, not a programming pulse: the energy
    /// ledger covers the learning operation only).
    void init_weights(Rng& rng) {
        const auto fill = [&](Scalar* data, size_t count, size_t offset, double limit) {
            const FixedPointFormat& fmt = store_->format();
            for (size_t i = 0; i < count; ++i) {
                const double v = (2.0 * rng.uniform() - 1.0) * limit;
                const uint16_t w = quantize(v, fmt);
                store_->poke(offset + i, w);
                data[i] = static_cast<Scalar>(dequantize(w, fmt));
            }
        };
        fill(w1_.data(), w1_.size(), off_w1_, glorot_limit(topo_.input, topo_.hidden));
        fill(b1_.data(), b1_.size(), off_b1_, glorot_limit(topo_.input, topo_.hidden));
        fill(w2_.data(), w2_.size(), off_w2_, glorot_limit(topo_.hidden, topo_.output));
        fill(b2_.data(), b2_.size(), off_b2_, glorot_limit(topo_.hidden, topo_.output));
    }

    /// Re-mirror every parameter from the store (weights-as-read).
    void refresh_from_store() {
        const auto pull = [&](Scalar* data, size_t count, size_t offset) {
            const FixedPointFormat& fmt = store_->format();
            for (size_t i = 0; i < count; ++i) {
                data[i] = static_cast<Scalar>(dequantize(store_->word(offset + i), fmt));
            }
        };
        pull(w1_.data(), w1_.size(), off_w1_);
        pull(b1_.data(), b1_.size(), off_b1_);
        pull(w2_.data(), w2_.size(), off_w2_);
        pull(b2_.data(), b2_.size(), off_b2_);
    }

    /// Class scores for a batch (columns are samples).
    Matrix forward(const Matrix& x) const {
        Matrix h = ((w1_ * x).colwise() + b1_).array().tanh().matrix();
        return ((w2_ * h).colwise() + b2_).array().tanh().matrix();
    }

    /// argmax with lowest-index tie-break.
    static int predict(const Vector& scores) {
        int best = 0;
        for (int i = 1; i < scores.size(); ++i) {
            if (scores[i] > scores[best]) best = i;
        }
        return best;
    }

    /// MSE loss against +-1 one-hot targets, averaged over the batch.
    double loss(const Matrix& x, const Matrix& targets) const {
        const Matrix y = forward(x);
        return (y - targets).squaredNorm() / static_cast<double>(x.cols());
    }

    struct Gradients {
        Matrix w1;
        Vector b1;
        Matrix w2;
        Vector b2;
    };

    /// Full-precision loss gradients at the current (as-read) parameters.
    Gradients compute_gradients(const Matrix& x, const Matrix& targets) const {
        const auto b = static_cast<Scalar>(x.cols());
        Matrix h = ((w1_ * x).colwise() + b1_).array().tanh().matrix();
        Matrix y = ((w2_ * h).colwise() + b2_).array().tanh().matrix();

        Matrix d2 = ((y - targets).array() * (Scalar(1) - y.array().square()) *
                     (Scalar(2) / b))
                        .matrix();
        Gradients g;
        g.w2 = d2 * h.transpose();
        g.b2 = d2.rowwise().sum();
        Matrix d1 = ((w2_.transpose() * d2).array() * (Scalar(1) - h.array().square())).matrix();
        g.w1 = d1 * x.transpose();
        g.b1 = d1.rowwise().sum();
        return g;
    }

    /// One backpropagation step: gradients from the current stored weights,
    /// then every parameter programmed through the store.
    void train_step(const Matrix& x, const Matrix& targets, Scalar lr) {
        const Gradients g = compute_gradients(x, targets);
        write_block(w1_.data(), g.w1.data(), w1_.size(), off_w1_, lr);
        write_block(b1_.data(), g.b1.data(), b1_.size(), off_b1_, lr);
        write_block(w2_.data(), g.w2.data(), w2_.size(), off_w2_, lr);
        write_block(b2_.data(), g.b2.data(), b2_.size(), off_b2_, lr);
    }

    /// Inject parameters directly (bypasses the store; gradient checks and
    /// snapshot-style loads).
    template <typename M1, typename V1, typename M2, typename V2>
    void set_params(const M1& w1, const V1& b1, const M2& w2, const V2& b2) {
        w1_ = w1;
        b1_ = b1;
        w2_ = w2;
        b2_ = b2;
    }

    /// Fraction of the dataset classified correctly.
    double evaluate(const Dataset& data, int batch = 2048) const {
        if (data.feature_dim != static_cast<size_t>(topo_.input)) {
            throw std::invalid_argument("evaluate: feature dim != network input");
        }
        size_t correct = 0;
        Matrix x(topo_.input, batch);
        for (size_t start = 0; start < data.n; start += batch) {
            const int cols = static_cast<int>(std::min<size_t>(batch, data.n - start));
            for (int c = 0; c < cols; ++c) {
                const float* img = data.image(start + c);
                for (int r = 0; r < topo_.input; ++r) x(r, c) = static_cast<Scalar>(img[r]);
            }
            const Matrix y = forward(x.leftCols(cols));
            for (int c = 0; c < cols; ++c) {
                int best = 0;
                for (int r = 1; r < topo_.output; ++r) {
                    if (y(r, c) > y(best, c)) best = r;
                }
                correct += (best == data.labels[start + c]) ? 1 : 0;
            }
        }
        return static_cast<double>(correct) / static_cast<double>(data.n);
    }

    const Matrix& w1() const { return w1_; }
    const Vector& b1() const { return b1_; }
    const Matrix& w2() const { return w2_; }
    const Vector& b2() const { return b2_; }
    const NetworkTopology& topology() const { return topo_; }

private:
    static double glorot_limit(int fan_in, int fan_out) {
        return std::sqrt(6.0 / (static_cast<double>(fan_in) + fan_out));
    }

    void write_block(Scalar* params, const Scalar* grads, Eigen::Index count, size_t offset,
                     Scalar lr) {
        const FixedPointFormat& fmt = store_->format();
        for (Eigen::Index i = 0; i < count; ++i) {
            const double updated =
                static_cast<double>(params[i]) - static_cast<double>(lr) * grads[i];
            store_->program_word(offset + i, quantize(updated, fmt));
            params[i] = static_cast<Scalar>(dequantize(store_->word(offset + i), fmt));
        }
    }

    NetworkTopology topo_;
    Store* store_;
    Matrix w1_;
    Vector b1_;
    Matrix w2_;
    Vector b2_;
    size_t off_w1_, off_b1_, off_w2_, off_b2_;
};

namespace detail {

/// One seeded training run; returns (test recognition rate, ledger pJ, words).
template <typename Scalar = float>
struct SingleRunResult {
    double rate = 0.0;
    double energy_pj = 0.0;
    uint64_t words = 0;
};

template <typename Scalar = float>
SingleRunResult<Scalar> run_training(const TrainConfig& cfg, uint64_t run_seed,
                                     const ProgrammingProfile& profile,
                                     const Dataset& train, const Dataset& test,
                                     const FixedPointFormat& fmt,
                                     NetworkTopology topo = {}) {
    using Matrix = typename MlpTrainer<Scalar, ApproxWeightStore>::Matrix;

    ApproxWeightStore store(topo.param_count(), fmt, profile, run_seed);
    MlpTrainer<Scalar, ApproxWeightStore> trainer(topo, store);

    Rng init_rng = Rng::stream(run_seed, 1);
    Rng shuffle_rng = Rng::stream(run_seed, 2);
    trainer.init_weights(init_rng);

    const int bsz = cfg.minibatch;
    Matrix x(topo.input, bsz);
    Matrix targets(topo.output, bsz);
    std::vector<uint32_t> order(train.n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        // fresh permutation per epoch from the shuffle stream
        for (size_t i = train.n - 1; i > 0; --i) {
            std::swap(order[i], order[shuffle_rng.below(i + 1)]);
        }
        for (size_t start = 0; start + bsz <= train.n; start += bsz) {
            for (int c = 0; c < bsz; ++c) {
                const uint32_t idx = order[start + c];
                const float* img = train.image(idx);
                for (int r = 0; r < topo.input; ++r) x(r, c) = static_cast<Scalar>(img[r]);
                for (int r = 0; r < topo.output; ++r) targets(r, c) = Scalar(-1);
                targets(train.labels[idx], c) = Scalar(1);
            }
            trainer.train_step(x, targets, static_cast<Scalar>(cfg.learning_rate));
        }
    }
    SingleRunResult<Scalar> out;
    out.rate = trainer.evaluate(test);
    out.energy_pj = store.energy_ledger_pj();
    out.words = store.words_written();
    return out;
}

}  // namespace detail

/// Train n_seeds independent networks (seed-derived init/shuffle/failure
/// streams) and aggregate recognition rates and the energy ledger.
/// Runs are independent; jobs > 1 executes them on a small thread pool with
/// ordering-independent aggregation, so the report is deterministic in
/// (seed, config, profile) regardless of scheduling.
inline TrainReport train_and_evaluate(const TrainConfig& cfg, const ProgrammingProfile& profile,
                                      const Dataset& train, const Dataset& test,
                                      const FixedPointFormat& fmt = {},
                                      NetworkTopology topo = {}, int jobs = 1) {
    cfg.validate();
    std::vector<detail::SingleRunResult<float>> results(cfg.n_seeds);
    std::atomic<int> next{0};
    const int workers = std::max(1, std::min(jobs, cfg.n_seeds));
    const auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= cfg.n_seeds) return;
            results[i] = detail::run_training<float>(cfg, cfg.seed + static_cast<uint64_t>(i),
                                                     profile, train, test, fmt, topo);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    TrainReport report;
    report.profile_descriptor = profile.tag();
    report.per_seed_rates.reserve(cfg.n_seeds);
    double rate_acc = 0.0, energy_acc = 0.0;
    for (const auto& r : results) {
        report.per_seed_rates.push_back(r.rate);
        rate_acc += r.rate;
        energy_acc += r.energy_pj;
    }
    report.recognition_rate = rate_acc / cfg.n_seeds;
    report.total_programming_energy_pj = energy_acc / cfg.n_seeds;
    report.energy_per_weight_pj =
        report.total_programming_energy_pj / static_cast<double>(topo.param_count());
    report.words_written = results.empty() ? 0 : results.front().words;
    return report;
}

}  // namespace stmem
