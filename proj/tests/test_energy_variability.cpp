#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stmem/device.hpp"
#include "stmem/energy_variability.hpp"
#include "stmem/rng.hpp"
#include "stmem/switching.hpp"

using stmem::DeviceParams;
using stmem::EnergyModel;
using stmem::PulseSpec;
using stmem::SwitchingModel;
using stmem::VariabilityModel;

namespace {

struct Calibrated {
    SwitchingModel sw = stmem::calibrate(stmem::default_anchors());
    DeviceParams device{};
    EnergyModel energy = stmem::calibrate_energy(device, PulseSpec{381.0, 15.0}, 0.48);
    VariabilityModel var = stmem::calibrate_variability(sw, 1e-10, 20.5);
};

const Calibrated& models() {
    static const Calibrated c;
    return c;
}

}  // namespace

TEST_CASE("device geometry gives the expected parallel resistance") {
    DeviceParams d;
    CHECK_THAT(d.parallel_resistance_ohm(), Catch::Matchers::WithinAbs(4973.6, 0.5));
    CHECK_THAT(d.antiparallel_resistance_ohm() / d.parallel_resistance_ohm(),
               Catch::Matchers::WithinAbs(2.5, 1e-12));
    d.tmr = 0.0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("energy calibration reproduces the published operating point") {
    const auto& m = models();
    // the anchor itself is exact
    CHECK_THAT(stmem::pulse_energy_pj(m.energy, PulseSpec{381.0, 15.0}),
               Catch::Matchers::WithinAbs(0.48, 1e-12));
    // bare V^2 T / R_P arithmetic and the driver-overhead factor
    EnergyModel bare;
    bare.r_effective_ohm = m.device.parallel_resistance_ohm();
    bare.calibration_factor = 1.0;
    CHECK_THAT(stmem::pulse_energy_pj(bare, PulseSpec{381.0, 15.0}),
               Catch::Matchers::WithinAbs(0.438, 0.001));
    CHECK_THAT(m.energy.calibration_factor, Catch::Matchers::WithinAbs(1.0964, 0.005));
    // anchor equal to the model prediction is a fixed point
    const double e = stmem::pulse_energy_pj(bare, PulseSpec{400.0, 10.0});
    const EnergyModel recal = stmem::calibrate_energy(m.device, PulseSpec{400.0, 10.0}, e);
    CHECK_THAT(recal.calibration_factor, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THROWS_AS(stmem::calibrate_energy(m.device, PulseSpec{381.0, 15.0}, -1.0),
                    stmem::CalibrationError);
}

TEST_CASE("pulse energy is linear in duration, quadratic in amplitude", "[property]") {
    const auto& m = models();
    stmem::Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        const double v = 100.0 + 500.0 * rng.uniform();
        const double t = 30.0 * rng.uniform();
        const double a = 4.0 * rng.uniform();
        const double e1 = stmem::pulse_energy_pj(m.energy, PulseSpec{v, t});
        CHECK_THAT(stmem::pulse_energy_pj(m.energy, PulseSpec{v, a * t}),
                   Catch::Matchers::WithinRel(a * e1, 1e-12));
        CHECK_THAT(stmem::pulse_energy_pj(m.energy, PulseSpec{2.0 * v, t}),
                   Catch::Matchers::WithinRel(4.0 * e1, 1e-12));
    }
    CHECK(stmem::pulse_energy_pj(m.energy, PulseSpec{381.0, 0.0}) == 0.0);
}

TEST_CASE("Gauss-Hermite nodes integrate known moments") {
    const VariabilityModel v(0.1, 64);
    double mass = 0.0, second = 0.0;
    for (size_t i = 0; i < v.nodes().size(); ++i) {
        mass += v.weights()[i];
        second += v.weights()[i] * v.nodes()[i] * v.nodes()[i];
    }
    CHECK_THAT(mass, Catch::Matchers::WithinRel(std::sqrt(M_PI), 1e-12));
    CHECK_THAT(second, Catch::Matchers::WithinRel(0.5 * std::sqrt(M_PI), 1e-12));
}

TEST_CASE("array_ber degenerates exactly at sigma_scale = 0") {
    const auto& m = models();
    const VariabilityModel none(0.0);
    for (double t : {0.0, 5.0, 15.0, 30.0}) {
        CHECK(stmem::array_ber(m.sw, none, t) == stmem::ber_at(m.sw, t));
    }
    CHECK(stmem::tpulse_for_array_ber(m.sw, none, 1e-7) ==
          stmem::tpulse_for_ber(m.sw, 1e-7));
}

TEST_CASE("variability calibration hits the published pulse duration") {
    const auto& m = models();
    CHECK(m.var.sigma_scale() > 0.0);
    CHECK(std::isfinite(m.var.sigma_scale()));
    const double t = stmem::tpulse_for_array_ber(m.sw, m.var, 1e-10);
    CHECK_THAT(t, Catch::Matchers::WithinAbs(20.5, 20.5 * 0.001));
    // published validation point, NOT a fit point: 1.176 x 9.45 ns at 1e-4
    CHECK_THAT(stmem::tpulse_for_array_ber(m.sw, m.var, 1e-4),
               Catch::Matchers::WithinAbs(11.11, 11.11 * 0.07));
}

TEST_CASE("variability calibration edge cases") {
    const auto& m = models();
    const double t_det = stmem::tpulse_for_ber(m.sw, 1e-10);
    // anchor equal to the deterministic duration: degenerate model
    const VariabilityModel zero = stmem::calibrate_variability(m.sw, 1e-10, t_det);
    CHECK(zero.sigma_scale() == 0.0);
    // anchor below the deterministic duration is impossible
    CHECK_THROWS_AS(stmem::calibrate_variability(m.sw, 1e-10, 0.9 * t_det),
                    stmem::CalibrationError);
    // anchor beyond the configured maximum pulse duration
    CHECK_THROWS_AS(stmem::calibrate_variability(m.sw, 1e-10, 250.0),
                    stmem::CalibrationError);
}

TEST_CASE("cross-validation: energy increase at BER 1e-4 matches the paper") {
    const auto& m = models();
    const double t_det = stmem::tpulse_for_ber(m.sw, 1e-4);
    const double t_arr = stmem::tpulse_for_array_ber(m.sw, m.var, 1e-4);
    const double increase = t_arr / t_det - 1.0;  // energy is linear in T
    INFO("relative energy increase at 1e-4: " << increase);
    CHECK(increase >= 0.12);
    CHECK(increase <= 0.24);
}

TEST_CASE("variability penalty sign and growth", "[property]") {
    const auto& m = models();
    for (double ber : {1e-10, 1e-8, 1e-6, 1e-4, 1e-3}) {
        CHECK(stmem::tpulse_for_array_ber(m.sw, m.var, ber) >
              stmem::tpulse_for_ber(m.sw, ber));
    }
    const double inc_deep = stmem::tpulse_for_array_ber(m.sw, m.var, 1e-10) /
                                stmem::tpulse_for_ber(m.sw, 1e-10) -
                            1.0;
    const double inc_mild = stmem::tpulse_for_array_ber(m.sw, m.var, 1e-4) /
                                stmem::tpulse_for_ber(m.sw, 1e-4) -
                            1.0;
    CHECK(inc_deep > inc_mild);
}

TEST_CASE("array BER round-trips through its duration solver", "[property]") {
    const auto& m = models();
    for (double exp10 = -10.0; exp10 <= -1.0; exp10 += 1.5) {
        const double ber = std::pow(10.0, exp10);
        const double t = stmem::tpulse_for_array_ber(m.sw, m.var, ber);
        const double back = stmem::array_ber(m.sw, m.var, t);
        CHECK_THAT(std::log(back) / std::log(ber), Catch::Matchers::WithinAbs(1.0, 1e-9));
    }
    // with a very wide population, deep-tail targets never come in reach
    const VariabilityModel wide(1.5, 64);
    CHECK_THROWS_AS(stmem::tpulse_for_array_ber(m.sw, wide, 1e-10),
                    stmem::CalibrationError);
}

TEST_CASE("quadrature matches a 1e7-sample Monte-Carlo oracle", "[slow]") {
    const auto& m = models();
    std::mt19937_64 gen(99);
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr int n = 10'000'000;

    for (double target : {1e-2, 1e-3, 1e-4, 1e-5}) {
        const double t = stmem::tpulse_for_array_ber(m.sw, m.var, target);
        const double x0 = t / m.sw.scale_theta_ns;
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double f = std::exp(m.var.sigma_scale() * normal(gen));
            const double q = stmem::upper_reg_gamma(m.sw.shape_k, x0 / f);
            sum += q;
            sq += q * q;
        }
        const double mc = sum / n;
        const double sigma = std::sqrt((sq / n - mc * mc) / n);
        const double quad = stmem::array_ber(m.sw, m.var, t);
        INFO("target " << target << " quad " << quad << " mc " << mc << " sigma " << sigma);
        CHECK(std::fabs(quad - mc) <= 3.0 * sigma);
    }
}

TEST_CASE("energy for target BER reproduces the published savings") {
    const auto& m = models();
    // no-variability column
    CHECK_THAT(stmem::energy_for_ber_pj(m.energy, m.sw, m.var, 1e-10, false),
               Catch::Matchers::WithinRel(0.48, 0.05));
    CHECK_THAT(stmem::energy_for_ber_pj(m.energy, m.sw, m.var, 1e-2, false),
               Catch::Matchers::WithinRel(0.2256, 0.05));
    // variability-aware savings vs the 1e-10 baseline
    const double base = stmem::energy_for_ber_pj(m.energy, m.sw, m.var, 1e-10, true);
    const double save_1e3 =
        1.0 - stmem::energy_for_ber_pj(m.energy, m.sw, m.var, 1e-3, true) / base;
    const double save_1e2 =
        1.0 - stmem::energy_for_ber_pj(m.energy, m.sw, m.var, 1e-2, true) / base;
    INFO("savings: " << save_1e3 << " " << save_1e2);
    CHECK_THAT(save_1e3, Catch::Matchers::WithinAbs(0.544, 0.03));
    CHECK_THAT(save_1e2, Catch::Matchers::WithinAbs(0.627, 0.03));
    // monotone: lower target BER costs more
    double prev = 0.0;
    for (double exp10 = -1.0; exp10 >= -10.0; exp10 -= 1.0) {
        const double e =
            stmem::energy_for_ber_pj(m.energy, m.sw, m.var, std::pow(10.0, exp10), true);
        CHECK(e > prev);
        prev = e;
    }
}
