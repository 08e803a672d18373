#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "stmem/config.hpp"
#include "stmem/experiment.hpp"

using stmem::ConfigError;
using stmem::ExperimentConfig;

TEST_CASE("config parses sections, comments, and lists") {
    std::istringstream in(
        "# experiment setup\n"
        "[device]\n"
        "diameter_nm = 28\n"
        "[train]\n"
        "epochs = 3          # short run\n"
        "learning_rate = 0.1\n"
        "seed_base = 99\n"
        "[sweep]\n"
        "uniform_bers = 1e-10, 1e-3, 1e-2\n"
        "n_lsb_list = 8,10\n"
        "[data]\n"
        "mnist_dir = /tmp/mnist\n");
    ExperimentConfig cfg;
    stmem::parse_config(in, cfg);
    CHECK(cfg.device.diameter_nm == 28.0);
    CHECK(cfg.train.epochs == 3);
    CHECK(cfg.train.learning_rate == 0.1);
    CHECK(cfg.train.seed == 99);
    CHECK(cfg.uniform_bers == std::vector<double>{1e-10, 1e-3, 1e-2});
    CHECK(cfg.n_lsb_list == std::vector<int>{8, 10});
    CHECK(cfg.mnist_dir == "/tmp/mnist");
    // untouched defaults survive
    CHECK(cfg.train.minibatch == 10);
    CHECK(cfg.fractional_bits == 12);
    cfg.validate();
}

TEST_CASE("config rejects unknown keys and sections") {
    ExperimentConfig cfg;
    std::istringstream bad_key("[train]\nepochz = 3\n");
    CHECK_THROWS_AS(stmem::parse_config(bad_key, cfg), ConfigError);

    std::istringstream bad_section("[trainer]\nepochs = 3\n");
    CHECK_THROWS_AS(stmem::parse_config(bad_section, cfg), ConfigError);

    std::istringstream top_level("epochs = 3\n");
    CHECK_THROWS_AS(stmem::parse_config(top_level, cfg), ConfigError);

    std::istringstream no_eq("[train]\nepochs 3\n");
    CHECK_THROWS_AS(stmem::parse_config(no_eq, cfg), ConfigError);

    std::istringstream bad_value("[train]\nepochs = three\n");
    CHECK_THROWS_AS(stmem::parse_config(bad_value, cfg), ConfigError);
}

TEST_CASE("config validation catches bad values") {
    ExperimentConfig cfg;
    cfg.uniform_bers.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = ExperimentConfig{};
    cfg.fractional_bits = 16;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = ExperimentConfig{};
    cfg.scheme = "three_tier";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = ExperimentConfig{};
    cfg.uniform_bers = {0.0};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    cfg = ExperimentConfig{};
    cfg.anchors_file = "/nonexistent/anchors.txt";
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    CHECK_THROWS_AS(stmem::load_config("/nonexistent/config.cfg"), ConfigError);
}

TEST_CASE("default config calibrates the paper models") {
    ExperimentConfig cfg;
    cfg.validate();
    const stmem::CalibratedModels m = cfg.calibrate_models();
    CHECK_THAT(stmem::tpulse_for_ber(m.switching, 1e-10),
               Catch::Matchers::WithinRel(15.0, 0.05));
    CHECK_THAT(stmem::pulse_energy_pj(m.energy, stmem::PulseSpec{381.0, 15.0}),
               Catch::Matchers::WithinAbs(0.48, 1e-12));
    CHECK(m.variability.sigma_scale() > 0.0);
}

TEST_CASE("sweep point expansion follows the grids") {
    ExperimentConfig cfg;
    cfg.uniform_bers = {1e-3, 1e-2};
    cfg.n_lsb_list = {8, 10};
    cfg.lsb_bers = {0.5, 1.0};
    cfg.sweep_hsb_ber = 1e-2;

    const auto uni = stmem::uniform_sweep_points(cfg);
    REQUIRE(uni.size() == 2);
    CHECK(uni[0].kind == stmem::SchemeKind::Uniform);
    CHECK(uni[0].ber_hsb == 1e-3);
    CHECK(uni[0].ber_lsb == 1e-3);

    const auto tier = stmem::tier_sweep_points(cfg);
    REQUIRE(tier.size() == 4);
    CHECK(tier[0].n_lsb == 8);
    CHECK(tier[0].ber_lsb == 0.5);
    CHECK(tier[3].n_lsb == 10);
    CHECK(tier[3].ber_lsb == 1.0);
    for (const auto& t : tier) CHECK(t.ber_hsb == 1e-2);
}

TEST_CASE("train CSV rows have the documented shape") {
    stmem::TrainReport report;
    report.per_seed_rates = {0.97, 0.962, 0.975};
    report.recognition_rate = (0.97 + 0.962 + 0.975) / 3.0;
    report.energy_per_weight_pj = 2.0;
    const stmem::SchemeTag tag{stmem::SchemeKind::TwoTier, 10, 1e-2, 0.5};
    const std::string row = stmem::format_train_row(tag, report, 8.0);
    CHECK(row.rfind("two_tier,10,0.01,0.5,3,", 0) == 0);
    CHECK(row.find(",0.750000") != std::string::npos);  // saving 1 - 2/8
    CHECK(std::string(stmem::train_csv_header()).rfind("scheme,", 0) == 0);
}
