#pragma once

#include "foldsense/capacitance.hpp"
#include "foldsense/geometry.hpp"
#include "foldsense/signal_chain.hpp"
#include "foldsense/structural.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace foldsense {

/// Flat dotted-key configuration file: `key = value` lines, `#` comments,
/// versioned with `schema_version`.
class Config {
public:
    static constexpr int kSchemaVersion = 1;

    Config() = default;
    static Config from_file(const std::string& path);

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_list(const std::string& key, std::vector<double> fallback) const;

    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);

    void save(const std::string& path) const;
    const std::map<std::string, std::string>& entries() const { return kv_; }

private:
    std::map<std::string, std::string> kv_;
};

/// Protocol settings mirroring the published test procedure: per axial
/// offset, repeated rotation cycles between 0 and theta_max.
struct ProtocolConfig {
    std::vector<double> axial_offsets = {-15, -10, -5, 0, 5, 10, 15};
    int cycles = 10;
    double theta_max = 30.0;
    int theta_points = 16;  // samples per half-cycle
    double sample_dt = 0.1; // pseudo-time per sample, s
    std::string output_dir = "out";
    std::uint64_t seed = 1;
    bool json_summary = false;
    std::size_t calib_window = 0;  // 0 = unbounded min/max tracking

    void validate() const;
};

OrigamiParams origami_from_config(const Config& c);
MaterialParams material_from_config(const Config& c);
StiffnessCoeffs stiffness_from_config(const Config& c);
SolverOptions solver_from_config(const Config& c);
ElectrodeSpec electrodes_from_config(const Config& c);
TankConfig tank_from_config(const Config& c);
ProtocolConfig protocol_from_config(const Config& c);

/// Lowest fold coefficient the torque calibration is allowed to reach; keeps
/// the surrogate away from the near-mechanism regime where the quasi-static
/// path starts to snap.
double fold_coeff_floor_from_config(const Config& c);

void store_origami(Config& c, const OrigamiParams& p);
void store_material(Config& c, const MaterialParams& m);
void store_stiffness(Config& c, const StiffnessCoeffs& s);
void store_electrodes(Config& c, const ElectrodeSpec& e);
void store_tank(Config& c, const TankConfig& t);
void store_protocol(Config& c, const ProtocolConfig& p);

}  // namespace foldsense
