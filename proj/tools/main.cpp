#include "foldsense/capacitance.hpp"
#include "foldsense/config.hpp"
#include "foldsense/errors.hpp"
#include "foldsense/geometry.hpp"
#include "foldsense/mesh_io.hpp"
#include "foldsense/protocol.hpp"
#include "foldsense/signal_chain.hpp"
#include "foldsense/structural.hpp"
#include "foldsense/text.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace foldsense;

constexpr int kExitUsage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

Config load_config(const std::string& path) {
    if (path.empty()) return Config{};
    return Config::from_file(path);
}

int cmd_generate(const std::string& config_path, const std::string& out,
                 const std::string& format) {
    const Config cfg = load_config(config_path);
    auto params = origami_from_config(cfg);
    params.validate();
    const auto mesh = assemble(params);
    write_mesh(out, mesh, mesh_format_from_string(format));
    const auto [lo, hi] = mesh.bounding_box();
    std::cout << "wrote " << out << ": " << mesh.vertices.size() << " vertices, "
              << mesh.faces.size() << " faces, bounding box " << g9(hi.x() - lo.x()) << " x "
              << g9(hi.y() - lo.y()) << " x " << g9(hi.z() - lo.z()) << " mm"
              << (mesh.watertight() ? ", watertight" : ", open") << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out, double delta,
                 double theta_max, int points) {
    const Config cfg = load_config(config_path);
    auto params = origami_from_config(cfg);
    params.validate();
    const auto mesh = assemble(params);
    const auto model =
        from_mesh(mesh, material_from_config(cfg), params.wall_t, stiffness_from_config(cfg));
    const auto curve =
        torque_rotation_curve(model, delta, theta_max, points, solver_from_config(cfg));

    std::ostringstream body;
    body << "theta_deg,delta_mm,torque_Nmm,force_N,energy_Nmm,residual,valid_flag\n";
    for (const auto& p : curve)
        body << g9(p.theta_deg) << ',' << g9(p.delta_mm) << ',' << g9(p.torque) << ','
             << g9(p.force) << ',' << g9(p.energy) << ',' << g9(p.residual) << ','
             << (p.within_validity ? "ok" : "outside_model") << '\n';
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write: " + out);
    f << body.str();
    std::cout << "wrote " << out << ": torque(" << g9(theta_max)
              << " deg) = " << g9(curve.back().torque) << " N mm\n";
    return 0;
}

int cmd_capacitance(const std::string& config_path, const std::string& out, double delta,
                    double theta_max, int points) {
    const Config cfg = load_config(config_path);
    auto params = origami_from_config(cfg);
    params.validate();
    const auto mesh = assemble(params);
    const auto model =
        from_mesh(mesh, material_from_config(cfg), params.wall_t, stiffness_from_config(cfg));
    const auto pairs = electrode_placement(mesh, electrodes_from_config(cfg));

    QuasiStaticDriver driver(model, solver_from_config(cfg));
    if (delta != 0.0)
        driver.continue_to(0.0, delta, std::max(1, (int)std::ceil(std::abs(delta) / 2.5)));

    std::ostringstream body;
    body << "theta_deg,delta_mm,C_pF,gap_eff_mm,overlap_mm2,pair\n";
    double prev = 0.0, c_first = 0.0, c_last = 0.0;
    for (int i = 0; i < points; ++i) {
        const double th = theta_max * i / (points - 1);
        auto r = driver.continue_to(th, delta,
                                    std::max(1, (int)std::ceil(std::abs(th - prev) / 2.0)));
        prev = th;
        if (!r.converged)
            throw SolverError("capacitance sweep did not converge at theta " + g9(th),
                              r.residual);
        const auto cap = capacitance_at(pairs, mesh, r.positions, th, delta);
        for (std::size_t k = 0; k < cap.per_pair.size(); ++k) {
            const auto& pr = cap.per_pair[k];
            body << g9(th) << ',' << g9(delta) << ',' << g9(pr.c_pf) << ',' << g9(pr.gap_eff)
                 << ',' << g9(pr.overlap) << ',' << k << '\n';
        }
        body << g9(th) << ',' << g9(delta) << ',' << g9(cap.c_total_pf) << ",,,total\n";
        if (i == 0) c_first = cap.c_total_pf;
        c_last = cap.c_total_pf;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write: " + out);
    f << body.str();
    std::cout << "wrote " << out << ": C(0) = " << g9(c_first) << " pF, C(" << g9(theta_max)
              << ") = " << g9(c_last) << " pF, sensitivity = "
              << g9((c_last - c_first) / theta_max) << " pF/deg\n";
    return 0;
}

int cmd_signal(const std::string& config_path, const std::string& input, const std::string& out,
               std::uint64_t seed, std::size_t window) {
    const Config cfg = load_config(config_path);
    const auto tank = tank_from_config(cfg);

    std::ifstream in(input);
    if (!in) throw IoError("cannot open timeline: " + input);
    std::vector<double> t, c;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b)) continue;
        try {
            const double tv = std::stod(a), cv = std::stod(b);
            t.push_back(tv);
            c.push_back(cv);
        } catch (const std::exception&) {
            continue;  // header or comment row
        }
    }
    if (t.empty()) throw IoError("timeline has no samples: " + input);

    const auto samples = synthesize_acquisition(
        t, c, tank, seed, window > 0 ? std::optional<std::size_t>(window) : std::nullopt);
    std::ofstream f(out, std::ios::binary);
    if (!f) throw IoError("cannot write: " + out);
    f << "t_s,counts,normalized,derivative\n";
    for (const auto& s : samples)
        f << g9(s.t) << ',' << s.counts << ',' << g9(s.normalized) << ',' << g9(s.derivative)
          << '\n';
    std::cout << "wrote " << out << ": " << samples.size() << " samples\n";
    return 0;
}

int cmd_protocol(const std::string& config_path, const std::string& out_dir,
                 const std::string& offsets, int cycles, double theta_max, std::uint64_t seed,
                 bool seed_set, bool json_summary) {
    Config cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.set("protocol.output_dir", out_dir);
    if (!offsets.empty()) cfg.set("protocol.axial_offsets_mm", offsets);
    if (cycles > 0) cfg.set("protocol.cycles", std::to_string(cycles));
    if (theta_max > 0) cfg.set_double("protocol.theta_max_deg", theta_max);
    if (seed_set) cfg.set("protocol.seed", std::to_string(seed));
    if (json_summary) cfg.set("protocol.json_summary", "true");

    const auto outputs = run_protocol(cfg);
    std::cout << "protocol complete: " << outputs.summary.size() << " offsets, "
              << outputs.files.size() << " files in "
              << cfg.get_string("protocol.output_dir", "out") << "\n";
    for (const auto& r : outputs.summary)
        std::cout << "  delta " << g9(r.delta_mm) << " mm: peak torque "
                  << g9(r.peak_torque_nmm) << " N mm, C range [" << g9(r.c_min_pf) << ", "
                  << g9(r.c_max_pf) << "] pF"
                  << (r.within_validity ? "" : " (outside model validity)")
                  << (r.solver_failures ? " [" + std::to_string(r.solver_failures) +
                                              " unconverged points]"
                                        : "")
                  << "\n";
    return 0;
}

int cmd_calibrate(const std::string& config_path, const std::string& out) {
    Config cfg = load_config(config_path);
    const auto report = calibrate(cfg);
    const std::string target = out.empty() ? (config_path.empty() ? "foldsense.cfg" : config_path)
                                           : out;
    cfg.save(target);
    std::cout << "fold coefficient: " << g9(report.fold_coeff)
              << (report.floor_limited ? " (stability floor)" : "") << ", torque at sweep end "
              << g9(report.torque_nmm) << " N mm\n";
    std::cout << "electrode area scale: " << g9(report.area_scale) << ", rest capacitance "
              << g9(report.c_rest_pf) << " pF\n";
    std::cout << "wrote " << target << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation toolkit for an inverted folded-pattern capacitive twist sensor"};
    app.require_subcommand(1);

    std::string config_path, out, format = "stl", input, offsets;
    double delta = 0.0, theta_max = 30.0;
    int points = 16, cycles = 0;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    bool json_summary = false;

    auto add_config = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "config file (flat dotted keys)");
    };

    auto* gen = app.add_subcommand("generate", "build the folded mesh and export STL/OBJ");
    add_config(gen);
    gen->add_option("--out", out, "output mesh path")->default_val("mesh.stl");
    gen->add_option("--format", format, "stl|obj")->default_val("stl");

    auto* sim = app.add_subcommand("simulate", "one torque-rotation curve");
    add_config(sim);
    sim->add_option("--out", out, "output CSV")->default_val("curve.csv");
    sim->add_option("--delta", delta, "axial offset (mm)");
    sim->add_option("--theta-max", theta_max, "sweep end (deg)");
    sim->add_option("--points", points, "grid points");

    auto* cap = app.add_subcommand("capacitance", "one capacitance-rotation curve");
    add_config(cap);
    cap->add_option("--out", out, "output CSV")->default_val("cap.csv");
    cap->add_option("--delta", delta, "axial offset (mm)");
    cap->add_option("--theta-max", theta_max, "sweep end (deg)");
    cap->add_option("--points", points, "grid points");

    auto* sig = app.add_subcommand("signal", "run the acquisition chain on a t,C timeline");
    add_config(sig);
    sig->add_option("--input", input, "timeline CSV (t_s,C_pF)")->required();
    sig->add_option("--out", out, "output CSV")->default_val("signal.csv");
    sig->add_option("--seed", seed, "rng seed");
    sig->add_option("--window", window, "calibrator window (samples, 0 = unbounded)");

    auto* prot = app.add_subcommand("protocol", "full simulated characterization run");
    add_config(prot);
    prot->add_option("--out", out, "output directory");
    prot->add_option("--offsets", offsets, "axial offsets (mm, comma separated)");
    prot->add_option("--cycles", cycles, "rotation cycles per offset");
    prot->add_option("--theta-max", theta_max, "cycle amplitude (deg)");
    auto* seed_opt = prot->add_option("--seed", seed, "rng seed");
    prot->add_flag("--json-summary", json_summary, "also write summary.json");

    auto* cal = app.add_subcommand("calibrate",
                                   "fit hinge stiffness and electrode area to the targets");
    add_config(cal);
    cal->add_option("--out", out, "config file to write (default: --config path)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) return cmd_generate(config_path, out, format);
        if (sim->parsed()) return cmd_simulate(config_path, out, delta, theta_max, points);
        if (cap->parsed()) return cmd_capacitance(config_path, out, delta, theta_max, points);
        if (sig->parsed()) return cmd_signal(config_path, input, out, seed, window);
        if (prot->parsed())
            return cmd_protocol(config_path, out, offsets, cycles,
                                prot->count("--theta-max") ? theta_max : 0.0, seed,
                                seed_opt->count() > 0, json_summary);
        if (cal->parsed()) return cmd_calibrate(config_path, out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const TopologyError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
