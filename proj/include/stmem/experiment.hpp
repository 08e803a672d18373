#pragma once

// Deterministic experiment orchestration: expands sweep grids into scheme
// points, runs each point's seeds, and writes CSV rows in grid order.
// Re-running a finished sweep reproduces the file byte for byte apart from
// the timestamp comment; --resume reuses finished rows keyed by the scheme
// columns and computes only what is missing.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "stmem/config.hpp"
#include "stmem/mnist.hpp"
#include "stmem/network.hpp"
#include "stmem/profile.hpp"

namespace stmem {

/// Everything a sweep needs, loaded and calibrated once.
struct ExperimentContext {
    ExperimentConfig cfg;
    CalibratedModels models;
    Dataset train_set;
    Dataset test_set;
    FixedPointFormat fmt;
    double baseline_energy_per_weight_pj = 0.0;  // 16 bits at BER 1e-10
};

inline constexpr double kBaselineBer = 1e-10;

inline double baseline_energy_per_weight(const CalibratedModels& models, bool use_variability) {
    return 16.0 * energy_for_ber_pj(models.energy, models.switching, models.variability,
                                    kBaselineBer, use_variability, models.v_pulse_mv,
                                    models.max_duration_ns);
}

/// Calibrate and load datasets. Throws ConfigError / CalibrationError /
/// DataError; the CLI maps those onto its exit codes.
inline ExperimentContext make_context(const ExperimentConfig& cfg, bool need_data = true) {
    ExperimentContext ctx;
    ctx.cfg = cfg;
    ctx.models = cfg.calibrate_models();
    ctx.fmt = FixedPointFormat{cfg.fractional_bits};
    ctx.fmt.validate();
    ctx.baseline_energy_per_weight_pj =
        baseline_energy_per_weight(ctx.models, cfg.use_variability);
    if (need_data) {
        ctx.train_set = load_dataset(cfg.mnist_dir, Split::Train);
        ctx.test_set = load_dataset(cfg.mnist_dir, Split::Test);
    }
    return ctx;
}

inline std::vector<SchemeTag> uniform_sweep_points(const ExperimentConfig& cfg) {
    std::vector<SchemeTag> points;
    for (double b : cfg.uniform_bers) {
        points.push_back(SchemeTag{SchemeKind::Uniform, 0, b, b});
    }
    return points;
}

inline std::vector<SchemeTag> tier_sweep_points(const ExperimentConfig& cfg) {
    std::vector<SchemeTag> points;
    for (int n : cfg.n_lsb_list) {
        for (double bl : cfg.lsb_bers) {
            points.push_back(SchemeTag{SchemeKind::TwoTier, n, cfg.sweep_hsb_ber, bl});
        }
    }
    return points;
}

inline TrainReport run_point(const ExperimentContext& ctx, const SchemeTag& tag, int jobs) {
    const ProgrammingProfile profile =
        make_profile(tag, ctx.models, ctx.cfg.use_variability);
    return train_and_evaluate(ctx.cfg.train, profile, ctx.train_set, ctx.test_set, ctx.fmt,
                              NetworkTopology{}, jobs);
}

// --- CSV ---------------------------------------------------------------------

inline const char* train_csv_header() {
    return "scheme,n_lsb,ber_hsb,ber_lsb,seed_count,rr_mean,rr_min,rr_max,"
           "energy_per_weight_pj,energy_saving_vs_baseline";
}

/// The identifying prefix of a row; resume keys rows by this.
inline std::string scheme_key(const SchemeTag& tag, int seed_count) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s,%d,%.6g,%.6g,%d", tag.name().c_str(), tag.n_lsb,
                  tag.ber_hsb, tag.ber_lsb, seed_count);
    return buf;
}

inline std::string format_train_row(const SchemeTag& tag, const TrainReport& report,
                                    double baseline_epw_pj) {
    double lo = 1.0, hi = 0.0;
    for (double r : report.per_seed_rates) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    const double saving = 1.0 - report.energy_per_weight_pj / baseline_epw_pj;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.8g,%.6f",
                  scheme_key(tag, static_cast<int>(report.per_seed_rates.size())).c_str(),
                  report.recognition_rate, lo, hi, report.energy_per_weight_pj, saving);
    return buf;
}

inline std::string timestamp_comment() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[80];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof buf, "# generated: %Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

/// Pull finished data rows out of an existing sweep CSV, keyed by the
/// scheme columns. Comments and the header are skipped.
inline std::map<std::string, std::string> read_completed_rows(const std::string& path) {
    std::map<std::string, std::string> rows;
    std::ifstream in(path);
    if (!in) return rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("scheme,", 0) == 0) continue;
        // key = first five comma-separated fields
        size_t pos = 0;
        for (int commas = 0; commas < 5 && pos != std::string::npos; ++commas) {
            pos = line.find(',', pos == 0 && commas == 0 ? 0 : pos + 1);
        }
        if (pos == std::string::npos) continue;
        rows[line.substr(0, pos)] = line;
    }
    return rows;
}

/// Run a list of sweep points and stream rows to out_path in grid order.
/// Rows are flushed as they finish, so an interrupted sweep leaves a valid
/// prefix for --resume.
inline void run_sweep(const ExperimentContext& ctx, const std::vector<SchemeTag>& points,
                      const std::string& out_path, const std::string& title, int jobs,
                      bool resume) {
    std::map<std::string, std::string> done;
    if (resume) done = read_completed_rows(out_path);

    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open output file: " + out_path);
    out << "# stmem " << title << "\n";
    out << timestamp_comment() << "\n";
    out << train_csv_header() << "\n";
    for (const SchemeTag& tag : points) {
        const std::string key = scheme_key(tag, ctx.cfg.train.n_seeds);
        const auto hit = done.find(key);
        std::string row;
        if (hit != done.end()) {
            row = hit->second;
        } else {
            const TrainReport report = run_point(ctx, tag, jobs);
            row = format_train_row(tag, report, ctx.baseline_energy_per_weight_pj);
        }
        out << row << "\n";
        out.flush();
    }
}

/// Fig. 2 reproduction: per-bit programming energy against target BER, with
/// and without the population layer, plus the relative increase column.
inline void write_energy_curve(std::ostream& out, const CalibratedModels& models,
                               const std::vector<double>& ber_grid) {
    out << "# stmem energy-curve\n";
    out << timestamp_comment() << "\n";
    out << "target_ber,t_pulse_ns,energy_pj,variability_flag,relative_increase\n";
    for (double ber : ber_grid) {
        const double t0 = tpulse_for_ber(models.switching, ber);
        const double e0 = pulse_energy_pj(models.energy, PulseSpec{models.v_pulse_mv, t0});
        const double t1 =
            tpulse_for_array_ber(models.switching, models.variability, ber, models.max_duration_ns);
        const double e1 = pulse_energy_pj(models.energy, PulseSpec{models.v_pulse_mv, t1});
        char buf[192];
        std::snprintf(buf, sizeof buf, "%.6g,%.8g,%.8g,0,%.6f\n", ber, t0, e0, 0.0);
        out << buf;
        std::snprintf(buf, sizeof buf, "%.6g,%.8g,%.8g,1,%.6f\n", ber, t1, e1, e1 / e0 - 1.0);
        out << buf;
    }
}

/// Default Fig. 2 grid: decades 1e-10 .. 1e-1 at {1, 2, 5} per decade.
inline std::vector<double> default_energy_curve_grid() {
    std::vector<double> grid;
    for (int d = -10; d <= -2; ++d) {
        for (double m : {1.0, 2.0, 5.0}) {
            grid.push_back(m * std::pow(10.0, d));
        }
    }
    grid.push_back(1e-1);
    return grid;
}

}  // namespace stmem
