#include "foldsense/config.hpp"

#include "foldsense/errors.hpp"
#include "foldsense/text.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace foldsense {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
        c.kv_[key] = val;
    }
    const int version = c.get_int("schema_version", kSchemaVersion);
    if (version != kSchemaVersion)
        throw ConfigError("unsupported schema_version " + std::to_string(version));
    return c;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for " + key + ": " + it->second);
    }
}

int Config::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, fallback);
    const int i = static_cast<int>(v);
    if (v != i) throw ConfigError("expected integer for " + key);
    return i;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError("bad unsigned value for " + key + ": " + it->second);
    }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw ConfigError("expected boolean for " + key + ": " + it->second);
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = kv_.find(key);
    return it == kv_.end() ? fallback : it->second;
}

std::vector<double> Config::get_list(const std::string& key, std::vector<double> fallback) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad list entry for " + key + ": " + item);
        }
    }
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

void Config::set(const std::string& key, const std::string& value) { kv_[key] = value; }

void Config::set_double(const std::string& key, double value) { kv_[key] = g9(value); }

void Config::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write config file: " + path);
    out << "# foldsense configuration (flat dotted keys)\n";
    std::map<std::string, std::string> kv = kv_;
    kv["schema_version"] = std::to_string(kSchemaVersion);
    for (const auto& [k, v] : kv) out << k << " = " << v << "\n";
    if (!out) throw IoError("write failed: " + path);
}

void ProtocolConfig::validate() const {
    if (cycles < 1) throw ValidationError("cycles must be >= 1");
    if (!(theta_max > 0.0)) throw ValidationError("theta_max must be positive");
    if (theta_points < 2) throw ValidationError("theta_points must be >= 2");
    if (!(sample_dt > 0.0)) throw ValidationError("sample_dt must be positive");
    if (axial_offsets.empty()) throw ValidationError("need at least one axial offset");
    for (double d : axial_offsets)
        if (!std::isfinite(d)) throw ValidationError("non-finite axial offset");
}

OrigamiParams origami_from_config(const Config& c) {
    OrigamiParams p;
    p.n = c.get_int("geometry.n", p.n);
    p.footprint = c.get_double("geometry.footprint_mm", p.footprint);
    p.hex_radius = c.get_double("geometry.hex_radius_mm", p.hex_radius);
    p.beta = c.get_double("geometry.beta_deg", p.beta);
    p.h = c.get_double("geometry.h_mm", p.h);
    p.stories = c.get_int("geometry.stories", p.stories);
    p.wall_t = c.get_double("geometry.wall_t_mm", p.wall_t);
    p.lid_t = c.get_double("geometry.lid_t_mm", p.lid_t);
    p.seed_frac_a = c.get_double("geometry.seed_frac_a", p.seed_frac_a);
    p.seed_frac_b = c.get_double("geometry.seed_frac_b", p.seed_frac_b);
    p.refine = c.get_int("geometry.refine", p.refine);
    return p;
}

MaterialParams material_from_config(const Config& c) {
    MaterialParams m;
    m.c10 = c.get_double("material.c10_mpa", m.c10);
    m.d1 = c.get_double("material.d1_per_mpa", m.d1);
    m.density = c.get_double("material.density_kg_m3", m.density);
    m.nu = c.get_double("material.nu", m.nu);
    return m;
}

StiffnessCoeffs stiffness_from_config(const Config& c) {
    StiffnessCoeffs s;
    s.fold_coeff = c.get_double("structural.fold_coeff", s.fold_coeff);
    s.facet_ratio = c.get_double("structural.facet_ratio", s.facet_ratio);
    return s;
}

SolverOptions solver_from_config(const Config& c) {
    SolverOptions s;
    s.tol = c.get_double("structural.solver_tol", s.tol);
    s.max_iter = c.get_int("structural.solver_max_iter", s.max_iter);
    return s;
}

double fold_coeff_floor_from_config(const Config& c) {
    return c.get_double("structural.fold_coeff_floor", 1e-3);
}

ElectrodeSpec electrodes_from_config(const Config& c) {
    ElectrodeSpec e;
    e.pairs = c.get_int("capacitance.pairs", e.pairs);
    e.placement =
        electrode_placement_from_string(c.get_string("capacitance.placement", "valley_a"));
    e.eps_r = c.get_double("capacitance.eps_r", e.eps_r);
    e.electrode_frac = c.get_double("capacitance.electrode_frac", e.electrode_frac);
    e.area_scale = c.get_double("capacitance.area_scale", e.area_scale);
    e.story = c.get_int("capacitance.story", e.story);
    return e;
}

TankConfig tank_from_config(const Config& c) {
    TankConfig t;
    t.inductance = c.get_double("tank.inductance_h", t.inductance);
    t.c_fixed_pf = c.get_double("tank.c_fixed_pf", t.c_fixed_pf);
    t.c_parasitic_pf = c.get_double("tank.c_parasitic_pf", t.c_parasitic_pf);
    t.f_ref_hz = c.get_double("tank.f_ref_hz", t.f_ref_hz);
    t.bits = c.get_int("tank.bits", t.bits);
    t.noise_sigma = c.get_double("tank.noise_sigma_counts", t.noise_sigma);
    t.drift.amplitude_counts = c.get_double("tank.drift_amp_counts", t.drift.amplitude_counts);
    t.drift.period_s = c.get_double("tank.drift_period_s", t.drift.period_s);
    t.drift.slope_counts_per_s =
        c.get_double("tank.drift_slope_counts_per_s", t.drift.slope_counts_per_s);
    t.spikes = c.get_bool("tank.spikes", t.spikes);
    t.spike_prob = c.get_double("tank.spike_prob", t.spike_prob);
    t.spike_amp_counts = c.get_double("tank.spike_amp_counts", t.spike_amp_counts);
    return t;
}

ProtocolConfig protocol_from_config(const Config& c) {
    ProtocolConfig p;
    p.axial_offsets = c.get_list("protocol.axial_offsets_mm", p.axial_offsets);
    p.cycles = c.get_int("protocol.cycles", p.cycles);
    p.theta_max = c.get_double("protocol.theta_max_deg", p.theta_max);
    p.theta_points = c.get_int("protocol.theta_points", p.theta_points);
    p.sample_dt = c.get_double("protocol.sample_dt_s", p.sample_dt);
    p.output_dir = c.get_string("protocol.output_dir", p.output_dir);
    p.seed = c.get_u64("protocol.seed", p.seed);
    p.calib_window = static_cast<std::size_t>(c.get_int("protocol.calib_window", 0));
    return p;
}

namespace {
std::string list_to_string(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += g9(v[i]);
    }
    return out;
}
}  // namespace

void store_origami(Config& c, const OrigamiParams& p) {
    c.set("geometry.n", std::to_string(p.n));
    c.set_double("geometry.footprint_mm", p.footprint);
    c.set_double("geometry.hex_radius_mm", p.hex_radius);
    c.set_double("geometry.beta_deg", p.beta);
    c.set_double("geometry.h_mm", p.h);
    c.set("geometry.stories", std::to_string(p.stories));
    c.set_double("geometry.wall_t_mm", p.wall_t);
    c.set_double("geometry.lid_t_mm", p.lid_t);
    c.set_double("geometry.seed_frac_a", p.seed_frac_a);
    c.set_double("geometry.seed_frac_b", p.seed_frac_b);
    c.set("geometry.refine", std::to_string(p.refine));
}

void store_material(Config& c, const MaterialParams& m) {
    c.set_double("material.c10_mpa", m.c10);
    c.set_double("material.d1_per_mpa", m.d1);
    c.set_double("material.density_kg_m3", m.density);
    c.set_double("material.nu", m.nu);
}

void store_stiffness(Config& c, const StiffnessCoeffs& s) {
    c.set_double("structural.fold_coeff", s.fold_coeff);
    c.set_double("structural.facet_ratio", s.facet_ratio);
}

void store_electrodes(Config& c, const ElectrodeSpec& e) {
    c.set("capacitance.pairs", std::to_string(e.pairs));
    const char* name = "valley_a";
    switch (e.placement) {
        case ElectrodePlacement::ValleyA: name = "valley_a"; break;
        case ElectrodePlacement::ValleyB: name = "valley_b"; break;
        case ElectrodePlacement::FoldPair: name = "fold_pair"; break;
        case ElectrodePlacement::BridgePair: name = "bridge_pair"; break;
        case ElectrodePlacement::MirrorPair: name = "mirror_pair"; break;
        case ElectrodePlacement::BridgeMirrorPair: name = "bridge_mirror_pair"; break;
    }
    c.set("capacitance.placement", name);
    c.set_double("capacitance.eps_r", e.eps_r);
    c.set_double("capacitance.electrode_frac", e.electrode_frac);
    c.set_double("capacitance.area_scale", e.area_scale);
    c.set("capacitance.story", std::to_string(e.story));
}

void store_tank(Config& c, const TankConfig& t) {
    c.set_double("tank.inductance_h", t.inductance);
    c.set_double("tank.c_fixed_pf", t.c_fixed_pf);
    c.set_double("tank.c_parasitic_pf", t.c_parasitic_pf);
    c.set_double("tank.f_ref_hz", t.f_ref_hz);
    c.set("tank.bits", std::to_string(t.bits));
    c.set_double("tank.noise_sigma_counts", t.noise_sigma);
    c.set_double("tank.drift_amp_counts", t.drift.amplitude_counts);
    c.set_double("tank.drift_period_s", t.drift.period_s);
    c.set_double("tank.drift_slope_counts_per_s", t.drift.slope_counts_per_s);
    c.set("tank.spikes", t.spikes ? "true" : "false");
    c.set_double("tank.spike_prob", t.spike_prob);
    c.set_double("tank.spike_amp_counts", t.spike_amp_counts);
}

void store_protocol(Config& c, const ProtocolConfig& p) {
    c.set("protocol.axial_offsets_mm", list_to_string(p.axial_offsets));
    c.set("protocol.cycles", std::to_string(p.cycles));
    c.set_double("protocol.theta_max_deg", p.theta_max);
    c.set("protocol.theta_points", std::to_string(p.theta_points));
    c.set_double("protocol.sample_dt_s", p.sample_dt);
    c.set("protocol.output_dir", p.output_dir);
    c.set("protocol.seed", std::to_string(p.seed));
    c.set("protocol.calib_window", std::to_string(p.calib_window));
}

}  // namespace foldsense
