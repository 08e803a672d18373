#pragma once

// Gamma-distributed switching-time statistics of one MTJ at fixed programming
// voltage. The model carries the two gamma parameters fitted to published
// (pulse duration, bit error rate) operating points; programming failure is
// the event "switching time exceeds the pulse", so BER(T) = Q(k, T/theta).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stmem/gamma.hpp"

namespace stmem {

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One published operating point: pulse duration (ns) and the BER it ensures.
struct Anchor {
    double t_pulse_ns;
    double ber;
};

/// The paper's four operating points at v_ratio = 2.0.
inline std::vector<Anchor> default_anchors() {
    return {{15.0, 1e-10}, {9.45, 1e-4}, {8.25, 1e-3}, {7.05, 1e-2}};
}

/// Reported BERs below this are clamped for display; the tail extrapolation
/// of a two-parameter fit carries no meaning that far out.
inline constexpr double kBerReportFloor = 1e-14;

struct SwitchingModel {
    double shape_k = 1.0;
    double scale_theta_ns = 1.0;
    double v_ratio = 2.0;  // Vpulse/Vc at which the fit holds
    std::vector<std::pair<double, double>> fit_residuals;  // (anchor BER, T error fraction)

    double mean_switching_time_ns() const { return shape_k * scale_theta_ns; }
    double skewness() const { return 2.0 / std::sqrt(shape_k); }
};

/// Probability that a pulse of duration t_pulse_ns fails to switch the bit.
inline double ber_at(const SwitchingModel& model, double t_pulse_ns) {
    if (!(t_pulse_ns >= 0.0)) {
        throw std::domain_error("ber_at: t_pulse must be >= 0");
    }
    return upper_reg_gamma(model.shape_k, t_pulse_ns / model.scale_theta_ns);
}

/// Pulse duration that hits the requested BER; exact inverse of ber_at.
inline double tpulse_for_ber(const SwitchingModel& model, double target_ber) {
    if (!(target_ber > 0.0 && target_ber < 1.0)) {
        throw std::domain_error("tpulse_for_ber: target BER must be in (0,1)");
    }
    return model.scale_theta_ns * upper_reg_gamma_inv(model.shape_k, target_ber);
}

namespace detail {

// Closed-form scale for a given shape: with x_i = Qinv(k, b_i) the model
// predicts T_i = theta * x_i, so log theta is the mean log offset.
inline double scale_for_shape(double k, const std::vector<Anchor>& anchors) {
    double acc = 0.0;
    for (const Anchor& a : anchors) {
        acc += std::log(a.t_pulse_ns) - std::log(upper_reg_gamma_inv(k, a.ber));
    }
    return std::exp(acc / static_cast<double>(anchors.size()));
}

// Least-squares objective in log10-BER space.
inline double fit_objective(double k, double theta, const std::vector<Anchor>& anchors) {
    double j = 0.0;
    for (const Anchor& a : anchors) {
        const double q = upper_reg_gamma(k, a.t_pulse_ns / theta);
        const double d = std::log10(std::max(q, 1e-300)) - std::log10(a.ber);
        j += d * d;
    }
    return j;
}

}  // namespace detail

/// Fit (shape_k, scale_theta) to a set of anchors by least squares in
/// log10-BER space: a coarse residual scan over log k picks the bracket,
/// golden-section refines k with theta solved in closed form per k.
/// Throws CalibrationError if any fitted pulse duration misses its anchor
/// by more than residual_bound (default 5 %), which signals an anchor set
/// the two-parameter gamma cannot represent.
inline SwitchingModel calibrate(std::vector<Anchor> anchors, double v_ratio = 2.0,
                                double residual_bound = 0.05) {
    if (anchors.size() < 2) {
        throw CalibrationError("calibrate: need at least 2 anchors");
    }
    std::sort(anchors.begin(), anchors.end(),
              [](const Anchor& a, const Anchor& b) { return a.t_pulse_ns < b.t_pulse_ns; });
    for (size_t i = 0; i < anchors.size(); ++i) {
        if (!(anchors[i].t_pulse_ns > 0.0) || !(anchors[i].ber > 0.0) ||
            !(anchors[i].ber < 1.0)) {
            throw CalibrationError("calibrate: anchors need T > 0 and BER in (0,1)");
        }
        if (i > 0 && (!(anchors[i].t_pulse_ns > anchors[i - 1].t_pulse_ns) ||
                      !(anchors[i].ber < anchors[i - 1].ber))) {
            throw CalibrationError("calibrate: BER must strictly decrease with T");
        }
    }

    const auto objective = [&](double k) {
        return detail::fit_objective(k, detail::scale_for_shape(k, anchors), anchors);
    };

    // residual scan over log k
    const double lk_min = std::log(0.25), lk_max = std::log(400.0);
    constexpr int kScan = 96;
    double best_lk = lk_min, best_j = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kScan; ++i) {
        const double lk = lk_min + (lk_max - lk_min) * i / (kScan - 1);
        const double j = objective(std::exp(lk));
        if (j < best_j) {
            best_j = j;
            best_lk = lk;
        }
    }
    const double step = (lk_max - lk_min) / (kScan - 1);
    double a = best_lk - step, b = best_lk + step;

    // golden-section on log k
    constexpr double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = objective(std::exp(c));
    double fd = objective(std::exp(d));
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = objective(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = objective(std::exp(d));
        }
    }

    SwitchingModel model;
    model.shape_k = std::exp(0.5 * (a + b));
    model.scale_theta_ns = detail::scale_for_shape(model.shape_k, anchors);
    model.v_ratio = v_ratio;
    model.fit_residuals.clear();
    double worst = 0.0;
    for (const Anchor& an : anchors) {
        const double t_fit = tpulse_for_ber(model, an.ber);
        const double frac = (t_fit - an.t_pulse_ns) / an.t_pulse_ns;
        model.fit_residuals.emplace_back(an.ber, frac);
        worst = std::max(worst, std::fabs(frac));
    }
    if (worst > residual_bound) {
        std::ostringstream msg;
        msg << "calibrate: worst pulse-duration residual " << worst * 100.0
            << " % exceeds bound " << residual_bound * 100.0 << " %";
        throw CalibrationError(msg.str());
    }
    return model;
}

/// Mean-switching-time scaling hook for voltages other than the calibrated
/// one. The default mu(v) ~ 1/(v - 1) overdrive law is an approximation and
/// is NOT calibrated against any published number; every quantitative result
/// in this project runs at the calibrated v_ratio.
using VoltageScaleHook = std::function<double(double v_ratio)>;

inline double inverse_overdrive_scale(double v_ratio) {
    if (!(v_ratio > 1.0)) {
        throw std::domain_error("voltage scale hook: v_ratio must exceed 1");
    }
    return 1.0 / (v_ratio - 1.0);
}

/// Rescale a calibrated model to a different v_ratio: the mean follows the
/// hook, the skewness (hence shape_k) is held constant. Approximation,
/// uncalibrated; see hook comment.
inline SwitchingModel rescale_to_voltage(const SwitchingModel& model, double new_v_ratio,
                                         const VoltageScaleHook& hook = inverse_overdrive_scale) {
    SwitchingModel out = model;
    out.scale_theta_ns = model.scale_theta_ns * hook(new_v_ratio) / hook(model.v_ratio);
    out.v_ratio = new_v_ratio;
    out.fit_residuals.clear();  // residuals refer to the calibrated voltage only
    return out;
}

// --- plain-text interfaces ---------------------------------------------------

/// Parse anchors from text: one "t_pulse_ns<TAB>ber" pair per line,
/// '#' starts a comment, blank lines ignored.
inline std::vector<Anchor> parse_anchors(std::istream& in) {
    std::vector<Anchor> anchors;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double t, b;
        if (ls >> t) {
            if (!(ls >> b)) {
                throw CalibrationError("anchor file: line " + std::to_string(lineno) +
                                       ": expected 't_pulse_ns<TAB>ber'");
            }
            anchors.push_back({t, b});
        }
    }
    return anchors;
}

inline void write_anchors(std::ostream& out, const std::vector<Anchor>& anchors) {
    out << "# t_pulse_ns\tber\n";
    for (const Anchor& a : anchors) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g\t%.17g\n", a.t_pulse_ns, a.ber);
        out << buf;
    }
}

/// Dump the fitted model as a key=value block.
inline void write_switching_model(std::ostream& out, const SwitchingModel& m) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "shape_k = %.17g\n", m.shape_k);
    out << buf;
    std::snprintf(buf, sizeof buf, "scale_theta_ns = %.17g\n", m.scale_theta_ns);
    out << buf;
    std::snprintf(buf, sizeof buf, "v_ratio = %.17g\n", m.v_ratio);
    out << buf;
    std::snprintf(buf, sizeof buf, "mean_switching_time_ns = %.17g\n",
                  m.mean_switching_time_ns());
    out << buf;
    std::snprintf(buf, sizeof buf, "skewness = %.17g\n", m.skewness());
    out << buf;
    out << "residuals =";
    for (size_t i = 0; i < m.fit_residuals.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%s%.3g:%.6g", i ? "," : " ",
                      m.fit_residuals[i].first, m.fit_residuals[i].second);
        out << buf;
    }
    out << "\n";
}

/// Parse a key=value block produced by write_switching_model. Derived keys
/// (mean, skewness) are ignored on input.
inline SwitchingModel read_switching_model(std::istream& in) {
    SwitchingModel m;
    m.fit_residuals.clear();
    std::string line;
    bool have_k = false, have_theta = false;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "shape_k") {
            m.shape_k = std::stod(val);
            have_k = true;
        } else if (key == "scale_theta_ns") {
            m.scale_theta_ns = std::stod(val);
            have_theta = true;
        } else if (key == "v_ratio") {
            m.v_ratio = std::stod(val);
        } else if (key == "residuals") {
            std::istringstream rs(val);
            std::string item;
            while (std::getline(rs, item, ',')) {
                const auto colon = item.find(':');
                if (colon == std::string::npos) continue;
                m.fit_residuals.emplace_back(std::stod(item.substr(0, colon)),
                                             std::stod(item.substr(colon + 1)));
            }
        }
    }
    if (!have_k || !have_theta) {
        throw CalibrationError("switching model file: missing shape_k or scale_theta_ns");
    }
    return m;
}

}  // namespace stmem
