#pragma once

#include "foldsense/config.hpp"

#include <string>
#include <vector>

namespace foldsense {

/// Published characterization targets the calibration aims at.
constexpr double kTorqueTargetNmm = 0.06;  // at 30 deg twist, zero offset
constexpr double kCRestTargetPf = 0.1;     // at 0 deg twist, zero offset

struct SummaryRow {
    double delta_mm = 0.0;
    double peak_torque_nmm = 0.0;
    double peak_force_n = 0.0;
    double c_min_pf = 0.0;
    double c_max_pf = 0.0;
    double sensitivity_pf_per_deg = 0.0;
    bool within_validity = true;
    int solver_failures = 0;
};

struct ProtocolOutputs {
    std::vector<SummaryRow> summary;
    std::vector<std::string> files;  // paths written, relative to output_dir
};

/// Runs the full simulated characterization: per axial offset, rotation
/// cycles between 0 and theta_max with mechanics, capacitance and the
/// acquisition chain, emitting CSV tables, SVG plots and a summary.
ProtocolOutputs run_protocol(const Config& cfg);

struct CalibrationReport {
    double fold_coeff = 0.0;
    double torque_nmm = 0.0;   // achieved at theta_max, delta 0
    bool floor_limited = false;
    double area_scale = 0.0;
    double c_rest_pf = 0.0;    // after scaling
};

/// Fits the hinge stiffness coefficient to the torque target (respecting the
/// stability floor) and the electrode area scale to the rest capacitance,
/// then stores both back into the config.
CalibrationReport calibrate(Config& cfg);

}  // namespace foldsense
