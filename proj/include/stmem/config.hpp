#pragma once

// Experiment configuration: flat `key = value` text with [section] headers,
// '#' comments. Unknown sections or keys are errors, not warnings, so a
// typo cannot silently fall back to a default.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stmem/device.hpp"
#include "stmem/network.hpp"
#include "stmem/profile.hpp"

namespace stmem {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    DeviceParams device;

    // calibration inputs
    std::string anchors_file;  // empty: builtin paper anchors
    double energy_anchor_v_mv = 381.0;
    double energy_anchor_t_ns = 15.0;
    double energy_anchor_pj = 0.48;
    double variability_anchor_ber = 1e-10;
    double variability_anchor_t_ns = 20.5;
    int quadrature_order = 64;
    double v_pulse_mv = 381.0;
    double max_duration_ns = 200.0;
    bool use_variability = true;

    // memory
    int fractional_bits = 12;

    // training
    TrainConfig train;
    std::string scheme = "uniform";  // uniform | two_tier for `train`
    double uniform_ber = 1e-10;
    int n_lsb = 10;
    double ber_hsb = 1e-2;
    double ber_lsb = 0.5;

    // sweep grids
    std::vector<double> uniform_bers = {1e-10, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1};
    std::vector<int> n_lsb_list = {4, 6, 8, 10, 12, 14};
    std::vector<double> lsb_bers = {0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
    double sweep_hsb_ber = 1e-2;

    // data / output
    std::string mnist_dir = "data/mnist";
    std::string out_path;

    int jobs = 1;
    bool resume = false;

    void validate() const {
        device.validate();
        train.validate();
        if (fractional_bits < 1 || fractional_bits >= 16) {
            throw ConfigError("config: fractional_bits must be in [1,15]");
        }
        if (uniform_bers.empty() || n_lsb_list.empty() || lsb_bers.empty()) {
            throw ConfigError("config: sweep grids must be non-empty");
        }
        if (scheme != "uniform" && scheme != "two_tier") {
            throw ConfigError("config: scheme must be 'uniform' or 'two_tier'");
        }
        if (!anchors_file.empty() && !std::filesystem::exists(anchors_file)) {
            throw ConfigError("config: anchors_file does not exist: " + anchors_file);
        }
        for (double b : uniform_bers) {
            if (!(b > 0.0 && b <= 1.0)) throw ConfigError("config: uniform_bers outside (0,1]");
        }
        for (double b : lsb_bers) {
            if (!(b > 0.0 && b <= 1.0)) throw ConfigError("config: lsb_bers outside (0,1]");
        }
        for (int n : n_lsb_list) {
            if (n < 0 || n > 16) throw ConfigError("config: n_lsb_list outside [0,16]");
        }
    }

    /// Run the calibration chain with this config's anchors and device.
    CalibratedModels calibrate_models() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const double d = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + val);
    }
}

inline long parse_int(const std::string& key, const std::string& val) {
    try {
        size_t pos = 0;
        const long v = std::stol(val, &pos);
        if (pos != val.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value for '" + key + "': " + val);
    }
}

inline bool parse_bool(const std::string& key, const std::string& val) {
    if (val == "true" || val == "1" || val == "yes") return true;
    if (val == "false" || val == "0" || val == "no") return false;
    throw ConfigError("config: bad boolean value for '" + key + "': " + val);
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& val) {
    std::vector<double> out;
    std::istringstream ss(val);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& val) {
    std::vector<int> out;
    std::istringstream ss(val);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(static_cast<int>(parse_int(key, item)));
    }
    return out;
}

}  // namespace detail

/// Parse a config stream over the defaults in `cfg`.
inline void parse_config(std::istream& in, ExperimentConfig& cfg) {
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("config line " + std::to_string(lineno) + ": bad section");
            }
            section = detail::trim(line.substr(1, line.size() - 2));
            if (section != "device" && section != "calibration" && section != "memory" &&
                section != "train" && section != "sweep" && section != "data" &&
                section != "output") {
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": unknown section [" + section + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        const std::string qual = section.empty() ? key : section + "." + key;

        using namespace detail;
        if (qual == "device.diameter_nm") cfg.device.diameter_nm = parse_double(qual, val);
        else if (qual == "device.storage_thickness_nm") cfg.device.storage_thickness_nm = parse_double(qual, val);
        else if (qual == "device.saturation_magnetization_t") cfg.device.saturation_magnetization_t = parse_double(qual, val);
        else if (qual == "device.resistance_area_ohm_um2") cfg.device.resistance_area_ohm_um2 = parse_double(qual, val);
        else if (qual == "device.tmr") cfg.device.tmr = parse_double(qual, val);
        else if (qual == "device.v_critical_mv") cfg.device.v_critical_mv = parse_double(qual, val);
        else if (qual == "device.delta_e_kbt") cfg.device.delta_e_kbt = parse_double(qual, val);
        else if (qual == "calibration.anchors_file") cfg.anchors_file = val;
        else if (qual == "calibration.energy_anchor_v_mv") cfg.energy_anchor_v_mv = parse_double(qual, val);
        else if (qual == "calibration.energy_anchor_t_ns") cfg.energy_anchor_t_ns = parse_double(qual, val);
        else if (qual == "calibration.energy_anchor_pj") cfg.energy_anchor_pj = parse_double(qual, val);
        else if (qual == "calibration.variability_anchor_ber") cfg.variability_anchor_ber = parse_double(qual, val);
        else if (qual == "calibration.variability_anchor_t_ns") cfg.variability_anchor_t_ns = parse_double(qual, val);
        else if (qual == "calibration.quadrature_order") cfg.quadrature_order = static_cast<int>(parse_int(qual, val));
        else if (qual == "calibration.v_pulse_mv") cfg.v_pulse_mv = parse_double(qual, val);
        else if (qual == "calibration.max_duration_ns") cfg.max_duration_ns = parse_double(qual, val);
        else if (qual == "calibration.use_variability") cfg.use_variability = parse_bool(qual, val);
        else if (qual == "memory.fractional_bits") cfg.fractional_bits = static_cast<int>(parse_int(qual, val));
        else if (qual == "train.minibatch") cfg.train.minibatch = static_cast<int>(parse_int(qual, val));
        else if (qual == "train.epochs") cfg.train.epochs = static_cast<int>(parse_int(qual, val));
        else if (qual == "train.learning_rate") cfg.train.learning_rate = parse_double(qual, val);
        else if (qual == "train.seed_base") cfg.train.seed = static_cast<uint64_t>(parse_int(qual, val));
        else if (qual == "train.n_seeds") cfg.train.n_seeds = static_cast<int>(parse_int(qual, val));
        else if (qual == "train.scheme") cfg.scheme = val;
        else if (qual == "train.uniform_ber") cfg.uniform_ber = parse_double(qual, val);
        else if (qual == "train.n_lsb") cfg.n_lsb = static_cast<int>(parse_int(qual, val));
        else if (qual == "train.ber_hsb") cfg.ber_hsb = parse_double(qual, val);
        else if (qual == "train.ber_lsb") cfg.ber_lsb = parse_double(qual, val);
        else if (qual == "sweep.uniform_bers") cfg.uniform_bers = parse_double_list(qual, val);
        else if (qual == "sweep.n_lsb_list") cfg.n_lsb_list = parse_int_list(qual, val);
        else if (qual == "sweep.lsb_bers") cfg.lsb_bers = parse_double_list(qual, val);
        else if (qual == "sweep.hsb_ber") cfg.sweep_hsb_ber = parse_double(qual, val);
        else if (qual == "data.mnist_dir") cfg.mnist_dir = val;
        else if (qual == "output.out_path") cfg.out_path = val;
        else {
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                              qual + "'");
        }
    }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    ExperimentConfig cfg;
    parse_config(in, cfg);
    cfg.validate();
    return cfg;
}

inline CalibratedModels ExperimentConfig::calibrate_models() const {
    CalibratedModels m;
    m.device = device;
    std::vector<Anchor> anchors;
    if (anchors_file.empty()) {
        anchors = default_anchors();
    } else {
        std::ifstream in(anchors_file);
        if (!in) throw ConfigError("config: cannot open anchors_file " + anchors_file);
        anchors = parse_anchors(in);
    }
    m.switching = calibrate(anchors, 2.0);
    m.energy = calibrate_energy(device, PulseSpec{energy_anchor_v_mv, energy_anchor_t_ns},
                                energy_anchor_pj);
    m.variability = calibrate_variability(m.switching, variability_anchor_ber,
                                          variability_anchor_t_ns, quadrature_order);
    m.v_pulse_mv = v_pulse_mv;
    m.max_duration_ns = max_duration_ns;
    return m;
}

}  // namespace stmem
