#pragma once

// Magnetic tunnel junction device constants and the pulse applied to it.

#include <cmath>
#include <stdexcept>

namespace stmem {

/// MTJ geometry and electrical constants of a 32 nm perpendicular-anisotropy
/// node. Defaults are the reference technology this simulator is calibrated
/// for; all experiments run against them unless a config overrides.
struct DeviceParams {
    double diameter_nm = 32.0;               // junction diameter
    double storage_thickness_nm = 1.3;       // storage layer thickness
    double saturation_magnetization_t = 1.58;  // Ms, tesla per mu0
    double resistance_area_ohm_um2 = 4.0;    // RA product
    double tmr = 1.5;                        // (R_AP - R_P) / R_P
    double v_critical_mv = 190.0;            // critical switching voltage
    double delta_e_kbt = 70.0;               // retention barrier, units of kB*T

    /// Parallel-state resistance from the RA product and junction area, ohms.
    double parallel_resistance_ohm() const {
        const double radius_um = 0.5 * diameter_nm * 1e-3;
        return resistance_area_ohm_um2 / (M_PI * radius_um * radius_um);
    }

    /// Anti-parallel resistance via the TMR ratio, ohms.
    double antiparallel_resistance_ohm() const {
        return parallel_resistance_ohm() * (1.0 + tmr);
    }

    void validate() const {
        if (!(diameter_nm > 0.0) || !(storage_thickness_nm > 0.0) ||
            !(saturation_magnetization_t > 0.0) || !(resistance_area_ohm_um2 > 0.0) ||
            !(tmr > 0.0) || !(v_critical_mv > 0.0)) {
            throw std::invalid_argument("DeviceParams: all fields must be > 0");
        }
        if (!(delta_e_kbt >= 1.0)) {
            throw std::invalid_argument("DeviceParams: delta_e must be >= 1 kB*T");
        }
        const double rp = parallel_resistance_ohm();
        if (!std::isfinite(rp) || !(rp > 0.0)) {
            throw std::invalid_argument("DeviceParams: derived R_P not positive finite");
        }
    }
};

/// One programming pulse: amplitude in millivolts, duration in nanoseconds.
struct PulseSpec {
    double v_pulse_mv = 381.0;
    double t_pulse_ns = 15.0;

    void validate() const {
        if (!(v_pulse_mv > 0.0)) throw std::invalid_argument("PulseSpec: v_pulse must be > 0");
        if (!(t_pulse_ns >= 0.0)) throw std::invalid_argument("PulseSpec: t_pulse must be >= 0");
    }
};

}  // namespace stmem
