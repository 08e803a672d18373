// stmem command-line front end.
//
// Subcommands reproduce the simulator's headline experiments as CSV:
//   calibrate     fit switching/energy/variability models, dump + residuals
//   energy-curve  per-bit programming energy vs target BER
//   sweep-ber     recognition rate vs uniform programming BER
//   sweep-tier    recognition rate for two-tier HSB/LSB schemes
//   train         one training configuration, single CSV row
//
// Exit codes: 0 success, 2 config error, 3 calibration failure, 4 data error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stmem/stmem.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_path;
    std::string mnist_dir;
    uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    int epochs = 0;  // 0: keep config value
    bool no_variability = false;
    bool resume = false;
};

stmem::ExperimentConfig build_config(const CliOptions& opt) {
    stmem::ExperimentConfig cfg;
    if (!opt.config_path.empty()) {
        cfg = stmem::load_config(opt.config_path);
    }
    if (opt.seed_set) cfg.train.seed = opt.seed;
    if (opt.epochs > 0) cfg.train.epochs = opt.epochs;
    if (opt.no_variability) cfg.use_variability = false;
    if (!opt.mnist_dir.empty()) cfg.mnist_dir = opt.mnist_dir;
    if (!opt.out_path.empty()) cfg.out_path = opt.out_path;
    cfg.jobs = opt.jobs;
    cfg.resume = opt.resume;
    cfg.validate();
    return cfg;
}

int cmd_calibrate(const stmem::ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const fs::path dir = cfg.out_path.empty() ? fs::path(".") : fs::path(cfg.out_path);
    fs::create_directories(dir);
    const stmem::CalibratedModels models = cfg.calibrate_models();

    {
        std::ofstream out(dir / "switching_model.txt");
        stmem::write_switching_model(out, models.switching);
    }
    {
        std::ofstream out(dir / "energy_model.txt");
        stmem::write_energy_model(out, models.energy);
    }
    {
        std::ofstream out(dir / "variability_model.txt");
        stmem::write_variability_model(out, models.variability);
    }
    {
        std::ofstream out(dir / "calibration_report.txt");
        out << "# anchor reproduction (pulse duration)\n";
        for (const auto& [ber, frac] : models.switching.fit_residuals) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "ber %.3g: T error %+.4f %%\n", ber, 100.0 * frac);
            out << buf;
        }
        const double t_arr = stmem::tpulse_for_array_ber(
            models.switching, models.variability, cfg.variability_anchor_ber,
            cfg.max_duration_ns);
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "variability: sigma_scale %.6g reproduces BER %.3g at %.4g ns "
                      "(anchor %.4g ns)\n",
                      models.variability.sigma_scale(), cfg.variability_anchor_ber, t_arr,
                      cfg.variability_anchor_t_ns);
        out << buf;
    }
    std::cout << "calibration written to " << dir.string() << "\n";
    return 0;
}

int cmd_energy_curve(const stmem::ExperimentConfig& cfg) {
    const stmem::CalibratedModels models = cfg.calibrate_models();
    const std::string path = cfg.out_path.empty() ? "energy_curve.csv" : cfg.out_path;
    std::ofstream out(path);
    if (!out) throw stmem::ConfigError("cannot open output file: " + path);
    stmem::write_energy_curve(out, models, stmem::default_energy_curve_grid());
    std::cout << "energy curve written to " << path << "\n";
    return 0;
}

int cmd_sweep(const stmem::ExperimentConfig& cfg, bool tier) {
    const stmem::ExperimentContext ctx = stmem::make_context(cfg);
    const auto points =
        tier ? stmem::tier_sweep_points(cfg) : stmem::uniform_sweep_points(cfg);
    const std::string path =
        cfg.out_path.empty() ? (tier ? "sweep_tier.csv" : "sweep_ber.csv") : cfg.out_path;
    stmem::run_sweep(ctx, points, path, tier ? "sweep-tier" : "sweep-ber", cfg.jobs,
                     cfg.resume);
    std::cout << "sweep written to " << path << "\n";
    return 0;
}

int cmd_train(const stmem::ExperimentConfig& cfg) {
    const stmem::ExperimentContext ctx = stmem::make_context(cfg);
    stmem::SchemeTag tag;
    if (cfg.scheme == "uniform") {
        tag = stmem::SchemeTag{stmem::SchemeKind::Uniform, 0, cfg.uniform_ber, cfg.uniform_ber};
    } else {
        tag = stmem::SchemeTag{stmem::SchemeKind::TwoTier, cfg.n_lsb, cfg.ber_hsb, cfg.ber_lsb};
    }
    const stmem::TrainReport report = stmem::run_point(ctx, tag, cfg.jobs);
    const std::string row =
        stmem::format_train_row(tag, report, ctx.baseline_energy_per_weight_pj);
    if (!cfg.out_path.empty()) {
        std::ofstream out(cfg.out_path);
        out << "# stmem train\n" << stmem::timestamp_comment() << "\n";
        out << stmem::train_csv_header() << "\n" << row << "\n";
    }
    std::cout << stmem::train_csv_header() << "\n" << row << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ST-MRAM approximate-storage simulator"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "experiment config file");
    app.add_option("--out", opt.out_path, "output path (file, or directory for calibrate)");
    app.add_option("--mnist", opt.mnist_dir, "directory with the MNIST IDX files");
    app.add_option("--seed", opt.seed, "seed base for run derivation")
        ->each([&](const std::string&) { opt.seed_set = true; });
    app.add_option("--jobs", opt.jobs, "worker threads for independent runs");
    app.add_option("--epochs", opt.epochs, "override training epochs");
    app.add_flag("--no-variability", opt.no_variability,
                 "use the no-variability switching model");
    app.add_flag("--resume", opt.resume, "reuse finished rows from an existing sweep CSV");

    auto* calibrate = app.add_subcommand("calibrate", "fit models and dump them");
    auto* energy = app.add_subcommand("energy-curve", "energy vs target BER CSV");
    auto* sweep_ber = app.add_subcommand("sweep-ber", "uniform-BER training sweep");
    auto* sweep_tier = app.add_subcommand("sweep-tier", "two-tier training sweep");
    auto* train = app.add_subcommand("train", "single training configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const stmem::ExperimentConfig cfg = build_config(opt);
        if (calibrate->parsed()) return cmd_calibrate(cfg);
        if (energy->parsed()) return cmd_energy_curve(cfg);
        if (sweep_ber->parsed()) return cmd_sweep(cfg, false);
        if (sweep_tier->parsed()) return cmd_sweep(cfg, true);
        if (train->parsed()) return cmd_train(cfg);
        return 2;
    } catch (const stmem::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const stmem::CalibrationError& e) {
        std::cerr << "calibration failure: " << e.what() << "\n";
        return 3;
    } catch (const stmem::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    } catch (const stmem::IdxError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
