#include "foldsense/structural.hpp"

#include "foldsense/errors.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace foldsense {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

Vec3 rotate_about(const Vec3& p, const Vec3& origin, const Vec3& dir, double angle_rad) {
    return origin + Eigen::AngleAxisd(angle_rad, dir) * (p - origin);
}

}  // namespace

void MaterialParams::validate() const {
    if (!(c10 > 0.0)) throw ValidationError("c10 must be positive");
    if (d1 < 0.0) throw ValidationError("d1 must be >= 0");
    if (!(nu >= 0.0 && nu < 0.5)) throw ValidationError("nu must lie in [0, 0.5)");
    if (!(density > 0.0)) throw ValidationError("density must be positive");
}

double bend_angle(const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& pd) {
    const Vec3 e = pb - pa;
    const double l = e.norm();
    if (l < 1e-14) throw GeometryError("zero-length hinge edge");
    const Vec3 n1 = e.cross(pc - pa);
    const Vec3 n2 = (pd - pa).cross(e);
    const double l1 = n1.norm(), l2 = n2.norm();
    if (l1 < 1e-14 || l2 < 1e-14) throw GeometryError("degenerate hinge face");
    const Vec3 n1h = n1 / l1, n2h = n2 / l2;
    const double s = n1h.cross(n2h).dot(e / l);
    const double c = n1h.dot(n2h);
    return std::atan2(s, c);
}

double bend_angle_gradient(const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& pd,
                           Vec3 grad[4]) {
    const Vec3 e = pb - pa;
    const double l = e.norm();
    if (l < 1e-14) throw GeometryError("zero-length hinge edge");
    const Vec3 n1 = e.cross(pc - pa);
    const Vec3 n2 = (pd - pa).cross(e);
    const double sq1 = n1.squaredNorm(), sq2 = n2.squaredNorm();
    if (sq1 < 1e-28 || sq2 < 1e-28) throw GeometryError("degenerate hinge face");

    const Vec3 gc = (l / sq1) * n1;
    const Vec3 gd = (l / sq2) * n2;
    const double tc = (pc - pa).dot(e) / (l * l);
    const double td = (pd - pa).dot(e) / (l * l);

    grad[0] = (1.0 - tc) * gc + (1.0 - td) * gd;
    grad[1] = tc * gc + td * gd;
    grad[2] = -gc;
    grad[3] = -gd;

    const Vec3 n1h = n1 / std::sqrt(sq1), n2h = n2 / std::sqrt(sq2);
    return std::atan2(n1h.cross(n2h).dot(e / l), n1h.dot(n2h));
}

double dihedral_angle(const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& pd) {
    double phi = kPi - bend_angle(pa, pb, pc, pd);
    if (phi > kPi) phi -= 2.0 * kPi;
    return phi;
}

BarHingeModel from_mesh(const FoldMesh& mesh, const MaterialParams& mat, double wall_t,
                        const StiffnessCoeffs& coeffs) {
    mat.validate();
    if (!(wall_t > 0.0)) throw ValidationError("wall thickness must be positive");

    BarHingeModel model;
    model.nodes = mesh.vertices;
    model.fixed_nodes = mesh.bottom_lid_nodes;
    model.driven_nodes = mesh.top_lid_nodes;

    std::vector<int> group(mesh.vertices.size(), -1);
    for (int i : mesh.bottom_lid_nodes) group[i] = 0;
    for (int i : mesh.top_lid_nodes) group[i] = 1;
    auto same_rigid = [&](int a, int b) { return group[a] >= 0 && group[a] == group[b]; };

    const double E = mat.youngs();
    const double plate = E * wall_t * wall_t * wall_t / 12.0;  // N*mm per unit length

    for (const auto& e : mesh.edges) {
        const double L = (mesh.vertices[e.a] - mesh.vertices[e.b]).norm();
        if (L < 1e-12) throw GeometryError("zero-length mesh edge");

        if (!same_rigid(e.a, e.b)) {
            double area_adj = 0.0;
            for (int s = 0; s < e.face_count; ++s) area_adj += mesh.face_area(e.faces[s]);
            const double width = area_adj / (3.0 * L);  // tributary strip
            model.bars.push_back({e.a, e.b, L, E * wall_t * width / L});
        }

        if (e.face_count == 2) {
            auto third = [&](int f) {
                for (int v : mesh.faces[f])
                    if (v != e.a && v != e.b) return v;
                throw TopologyError("face does not contain its edge");
            };
            const int c = third(e.faces[0]);
            const int d = third(e.faces[1]);
            if (group[e.a] >= 0 && group[e.a] == group[e.b] && group[e.a] == group[c] &&
                group[e.a] == group[d])
                continue;  // hinge fully inside a rigid lid
            double k = coeffs.fold_coeff * plate * L;
            if (e.cls == EdgeClass::Facet || e.cls == EdgeClass::Lid) k *= coeffs.facet_ratio;
            const double rest = bend_angle(mesh.vertices[e.a], mesh.vertices[e.b],
                                           mesh.vertices[c], mesh.vertices[d]);
            model.hinges.push_back({e.a, e.b, c, d, rest, k, e.cls});
        }
    }

    double fs = 0.0;
    for (const auto& b : model.bars) fs += b.k * b.rest_len;
    if (!model.bars.empty()) fs /= model.bars.size();
    model.force_scale = std::max(fs, 1e-9);
    return model;
}

namespace {

void check_finite(std::span<const Vec3> positions) {
    for (const auto& p : positions)
        if (!p.allFinite()) throw ValidationError("non-finite node positions");
}

double bar_energy(const Bar& b, std::span<const Vec3> x) {
    const double L = (x[b.b] - x[b.a]).norm();
    const double d = L - b.rest_len;
    return 0.5 * b.k * d * d;
}

// Hinge deviation measured on the circle, so a panel folding past the
// flat-against state (no self-contact in this model) does not cross the
// atan2 branch cut of the raw angle.
double wrap_angle(double x) {
    while (x > kPi) x -= 2.0 * kPi;
    while (x <= -kPi) x += 2.0 * kPi;
    return x;
}

double hinge_energy(const Hinge& h, std::span<const Vec3> x) {
    const double d = wrap_angle(bend_angle(x[h.a], x[h.b], x[h.c], x[h.d]) - h.rest_bend);
    return 0.5 * h.k * d * d;
}

void hinge_gradient(const Hinge& h, const Vec3 p[4], Vec3 out[4]) {
    Vec3 g[4];
    const double psi = bend_angle_gradient(p[0], p[1], p[2], p[3], g);
    const double f = h.k * wrap_angle(psi - h.rest_bend);
    for (int i = 0; i < 4; ++i) out[i] = f * g[i];
}

}  // namespace

double total_energy(const BarHingeModel& model, std::span<const Vec3> positions) {
    check_finite(positions);
    double e = 0.0;
    for (const auto& b : model.bars) e += bar_energy(b, positions);
    for (const auto& h : model.hinges) e += hinge_energy(h, positions);
    return e;
}

std::vector<Vec3> energy_gradient(const BarHingeModel& model, std::span<const Vec3> positions) {
    check_finite(positions);
    std::vector<Vec3> g(positions.size(), Vec3::Zero());
    for (const auto& b : model.bars) {
        const Vec3 d = positions[b.b] - positions[b.a];
        const double L = d.norm();
        const Vec3 f = b.k * (L - b.rest_len) / L * d;
        g[b.a] -= f;
        g[b.b] += f;
    }
    Vec3 hg[4];
    for (const auto& h : model.hinges) {
        const Vec3 p[4] = {positions[h.a], positions[h.b], positions[h.c], positions[h.d]};
        hinge_gradient(h, p, hg);
        g[h.a] += hg[0];
        g[h.b] += hg[1];
        g[h.c] += hg[2];
        g[h.d] += hg[3];
    }
    return g;
}

namespace {

using Mat3 = Eigen::Matrix3d;

/// Exact 6x6 stretch Hessian of one bar, returned as the (aa) block; the
/// (ab) block is its negative and (bb) equals (aa).
Mat3 bar_hessian_block(const Bar& b, std::span<const Vec3> x) {
    const Vec3 d = x[b.b] - x[b.a];
    const double L = d.norm();
    const Vec3 u = d / L;
    return b.k * (u * u.transpose()) +
           b.k * (L - b.rest_len) / L * (Mat3::Identity() - u * u.transpose());
}

/// 12x12 hinge-energy Hessian by central differences of the analytic
/// element gradient; exact enough for Newton directions.
void hinge_hessian(const Hinge& h, const Vec3 p0[4], Eigen::Matrix<double, 12, 12>& H) {
    const double scale = (p0[1] - p0[0]).norm();
    const double step = 1e-6 * std::max(scale, 1e-3);
    Vec3 p[4] = {p0[0], p0[1], p0[2], p0[3]};
    Vec3 gp[4], gm[4];
    for (int j = 0; j < 12; ++j) {
        const int node = j / 3, comp = j % 3;
        const double saved = p[node][comp];
        p[node][comp] = saved + step;
        hinge_gradient(h, p, gp);
        p[node][comp] = saved - step;
        hinge_gradient(h, p, gm);
        p[node][comp] = saved;
        for (int i = 0; i < 12; ++i)
            H(i, j) = (gp[i / 3][i % 3] - gm[i / 3][i % 3]) / (2.0 * step);
    }
    H = 0.5 * (H + H.transpose()).eval();
}

}  // namespace

QuasiStaticDriver::QuasiStaticDriver(const BarHingeModel& model, SolverOptions opts)
    : model_(model), opts_(opts) {
    if (model_.fixed_nodes.empty())
        throw ValidationError("model has no fixed nodes; rigid-body modes are unconstrained");
    dof_of_node_.assign(model_.nodes.size(), -1);
    is_driven_.assign(model_.nodes.size(), 0);
    std::vector<char> constrained(model_.nodes.size(), 0);
    for (int i : model_.fixed_nodes) constrained[i] = 1;
    for (int i : model_.driven_nodes) {
        constrained[i] = 1;
        is_driven_[i] = 1;
    }
    int q = 0;
    for (std::size_t i = 0; i < model_.nodes.size(); ++i) {
        if (constrained[i]) continue;
        dof_of_node_[i] = q;
        q += 3;
        free_nodes_.push_back(static_cast<int>(i));
    }
    reset();
}

template <class EntryFn>
void QuasiStaticDriver::traverse_block(int ni, int nj, const Eigen::Matrix3d& B, bool axial_free,
                                       int n_q, EntryFn&& fn) const {
    const int qi = dof_of_node_[ni], qj = dof_of_node_[nj];
    const bool di = axial_free && qi < 0 && is_driven_[ni];
    const bool dj = axial_free && qj < 0 && is_driven_[nj];
    const Vec3& dir = model_.axis_dir;
    if (qi >= 0 && qj >= 0) {
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) fn(qi + r, qj + c, B(r, c));
    } else if (qi >= 0 && dj) {
        const Vec3 col = B * dir;
        for (int r = 0; r < 3; ++r) fn(qi + r, n_q - 1, col[r]);
    } else if (di && qj >= 0) {
        const Vec3 row = B.transpose() * dir;
        for (int c = 0; c < 3; ++c) fn(n_q - 1, qj + c, row[c]);
    } else if (di && dj) {
        fn(n_q - 1, n_q - 1, dir.dot(B * dir));
    }
}

QuasiStaticDriver::AssemblyPlan& QuasiStaticDriver::plan(bool axial_free) {
    AssemblyPlan& p = plans_[axial_free ? 1 : 0];
    if (p.built) return p;
    p.n_q = 3 * static_cast<int>(free_nodes_.size()) + (axial_free ? 1 : 0);

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<std::pair<int, int>> coords;
    const Mat3 ones = Mat3::Ones();
    auto record = [&](int r, int c, double) {
        trip.emplace_back(r, c, 0.0);
        coords.emplace_back(r, c);
    };
    for (const auto& b : model_.bars) {
        traverse_block(b.a, b.a, ones, axial_free, p.n_q, record);
        traverse_block(b.b, b.b, ones, axial_free, p.n_q, record);
        traverse_block(b.a, b.b, ones, axial_free, p.n_q, record);
        traverse_block(b.b, b.a, ones, axial_free, p.n_q, record);
    }
    for (const auto& h : model_.hinges) {
        const int nodes[4] = {h.a, h.b, h.c, h.d};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                traverse_block(nodes[i], nodes[j], ones, axial_free, p.n_q, record);
    }
    for (int i = 0; i < p.n_q; ++i) trip.emplace_back(i, i, 0.0);

    p.H.resize(p.n_q, p.n_q);
    p.H.setFromTriplets(trip.begin(), trip.end());
    p.H.makeCompressed();

    auto slot_of = [&](int r, int c) {
        const int* begin = p.H.innerIndexPtr() + p.H.outerIndexPtr()[c];
        const int* end = p.H.innerIndexPtr() + p.H.outerIndexPtr()[c + 1];
        const int* it = std::lower_bound(begin, end, r);
        return static_cast<int>(it - p.H.innerIndexPtr());
    };
    p.slots.reserve(coords.size());
    for (const auto& [r, c] : coords) p.slots.push_back(slot_of(r, c));
    p.diag_slots.resize(p.n_q);
    for (int i = 0; i < p.n_q; ++i) p.diag_slots[i] = slot_of(i, i);

    p.ldlt.analyzePattern(p.H);
    p.built = true;
    return p;
}

void QuasiStaticDriver::fill_hessian(AssemblyPlan& p, bool axial_free) {
    std::fill(p.H.valuePtr(), p.H.valuePtr() + p.H.nonZeros(), 0.0);
    double* vals = p.H.valuePtr();
    std::size_t k = 0;
    auto add = [&](int, int, double v) { vals[p.slots[k++]] += v; };

    for (const auto& b : model_.bars) {
        const Mat3 B = bar_hessian_block(b, positions_);
        traverse_block(b.a, b.a, B, axial_free, p.n_q, add);
        traverse_block(b.b, b.b, B, axial_free, p.n_q, add);
        traverse_block(b.a, b.b, -B, axial_free, p.n_q, add);
        traverse_block(b.b, b.a, -B, axial_free, p.n_q, add);
    }
    Eigen::Matrix<double, 12, 12> Hh;
    for (const auto& h : model_.hinges) {
        const Vec3 pts[4] = {positions_[h.a], positions_[h.b], positions_[h.c], positions_[h.d]};
        hinge_hessian(h, pts, Hh);
        const int nodes[4] = {h.a, h.b, h.c, h.d};
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                traverse_block(nodes[i], nodes[j], Hh.block<3, 3>(3 * i, 3 * j), axial_free,
                               p.n_q, add);
    }
}

void QuasiStaticDriver::reset() {
    positions_ = model_.nodes;
    theta_now_ = 0.0;
    delta_now_ = 0.0;
}

void QuasiStaticDriver::apply_driven(double theta_deg, double delta_mm) {
    const double a = deg2rad(theta_deg);
    for (int i : model_.driven_nodes)
        positions_[i] = rotate_about(model_.nodes[i], model_.axis_origin, model_.axis_dir, a) +
                        delta_mm * model_.axis_dir;
}

EquilibriumResult QuasiStaticDriver::minimize(double theta_deg, double delta_prescribed,
                                              bool axial_free) {
    const int n_free = static_cast<int>(free_nodes_.size());
    AssemblyPlan& pl = plan(axial_free);
    const int n_q = pl.n_q;
    const Vec3 dir = model_.axis_dir;

    Eigen::VectorXd q(n_q);
    for (int i = 0; i < n_free; ++i) q.segment<3>(3 * i) = positions_[free_nodes_[i]];
    if (axial_free) q[n_q - 1] = delta_now_;

    auto scatter = [&](const Eigen::VectorXd& qv) {
        for (int i = 0; i < n_free; ++i) positions_[free_nodes_[i]] = qv.segment<3>(3 * i);
        apply_driven(theta_deg, axial_free ? qv[n_q - 1] : delta_prescribed);
    };
    scatter(q);

    const double tol_abs = opts_.tol * model_.force_scale;
    double energy = total_energy(model_, positions_);
    double res = std::numeric_limits<double>::infinity();
    std::vector<Vec3> grad;
    Eigen::VectorXd gq(n_q);

    auto project_gradient = [&]() {
        grad = energy_gradient(model_, positions_);
        for (int i = 0; i < n_free; ++i) gq.segment<3>(3 * i) = grad[free_nodes_[i]];
        if (axial_free) {
            double gd = 0.0;
            for (int i : model_.driven_nodes) gd += grad[i].dot(dir);
            gq[n_q - 1] = gd;
        }
        res = gq.norm();
    };

    double reg_seed = 0.0;  // damping carried across iterations
    int iter = 0;
    for (; iter < opts_.max_iter; ++iter) {
        project_gradient();
        if (res <= tol_abs) break;

        fill_hessian(pl, axial_free);
        double diag_scale = 0.0;
        for (int i = 0; i < n_q; ++i)
            diag_scale = std::max(diag_scale, std::abs(pl.H.valuePtr()[pl.diag_slots[i]]));
        if (diag_scale <= 0.0) diag_scale = 1.0;

        // Levenberg-style loop: a rejected line search raises the diagonal
        // damping until the step turns into scaled gradient descent.
        const double noise =
            1e3 * std::numeric_limits<double>::epsilon() * (std::abs(energy) + 1.0);
        bool accepted = false;
        double reg = reg_seed;
        double reg_applied = 0.0;
        Eigen::VectorXd step, q_try;
        for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
            if (reg != reg_applied) {
                const double bump = reg - reg_applied;
                for (int i = 0; i < n_q; ++i) pl.H.valuePtr()[pl.diag_slots[i]] += bump;
                reg_applied = reg;
            }
            bool have_dir = false;
            pl.ldlt.factorize(pl.H);
            if (pl.ldlt.info() == Eigen::Success) {
                step = pl.ldlt.solve(-gq);
                have_dir = step.allFinite() && gq.dot(step) < 0.0;
            }
            if (have_dir) {
                const double slope = gq.dot(step);
                double alpha = 1.0;
                for (int ls = 0; ls < 24; ++ls) {
                    q_try = q + alpha * step;
                    scatter(q_try);
                    const double e_try = total_energy(model_, positions_);
                    if (e_try <= energy + 1e-4 * alpha * slope || e_try <= energy + noise) {
                        q = q_try;
                        energy = e_try;
                        accepted = true;
                        break;
                    }
                    alpha *= 0.5;
                }
            }
            if (!accepted) reg = (reg == 0.0) ? 1e-10 * diag_scale : reg * 32.0;
        }
        if (!accepted) {
            scatter(q);  // restore best point
            break;       // stagnated; convergence check below decides
        }
        reg_seed = reg / 64.0;
        if (reg_seed < 1e-14 * diag_scale) reg_seed = 0.0;
    }

    project_gradient();

    EquilibriumResult r;
    r.converged = res <= tol_abs;
    r.positions = positions_;
    r.energy = energy;
    r.residual = res;
    r.iterations = iter;
    r.theta_deg = theta_deg;
    r.delta_mm = axial_free ? q[n_q - 1] : delta_prescribed;
    double torque = 0.0, force = 0.0;
    for (int i : model_.driven_nodes) {
        const Vec3 arm = positions_[i] - model_.axis_origin;
        torque += grad[i].dot(model_.axis_dir.cross(arm));
        force += grad[i].dot(model_.axis_dir);
    }
    r.torque = torque;
    r.axial_force = force;
    return r;
}

EquilibriumResult QuasiStaticDriver::continue_to(double theta_deg, double delta_mm, int steps,
                                                 bool axial_free) {
    if (steps < 1) throw ValidationError("continuation needs at least one step");
    const double theta0 = theta_now_, delta0 = delta_now_;
    const double zb = axis_height(model_.axis_origin);
    double z_top = zb;
    for (const auto& n : model_.nodes) z_top = std::max(z_top, axis_height(n));
    double z_bot = z_top;
    for (const auto& n : model_.nodes) z_bot = std::min(z_bot, axis_height(n));
    const double span = std::max(z_top - z_bot, 1e-9);

    EquilibriumResult result;
    std::vector<std::pair<double, double>> step_energies;
    for (int k = 1; k <= steps; ++k) {
        const double s = static_cast<double>(k) / steps;
        const double th = theta0 + (theta_deg - theta0) * s;
        const double de = delta0 + (delta_mm - delta0) * s;
        const double dth = th - theta_now_;
        const double dde = axial_free ? 0.0 : de - delta_now_;

        // Linear-in-height twist predictor for the free nodes.
        for (std::size_t i = 0; i < model_.nodes.size(); ++i) {
            if (dof_of_node_[i] < 0) continue;
            const double w =
                std::clamp((axis_height(model_.nodes[i]) - z_bot) / span, 0.0, 1.0);
            positions_[i] = rotate_about(positions_[i], model_.axis_origin, model_.axis_dir,
                                         deg2rad(dth * w)) +
                            dde * w * model_.axis_dir;
        }
        apply_driven(th, axial_free ? delta_now_ : de);
        const double e_init = total_energy(model_, positions_);

        result = minimize(th, de, axial_free);
        theta_now_ = th;
        delta_now_ = axial_free ? result.delta_mm : de;
        step_energies.emplace_back(e_init, result.energy);
    }
    result.step_energies = std::move(step_energies);
    return result;
}

EquilibriumResult solve_equilibrium(const BarHingeModel& model, const LoadCase& load,
                                    const SolverOptions& opts) {
    QuasiStaticDriver driver(model, opts);
    auto r = driver.continue_to(load.theta_deg, load.delta_mm, load.steps, load.axial_free);
    if (!r.converged)
        throw SolverError("equilibrium solve did not converge (residual " +
                              std::to_string(r.residual) + ")",
                          r.residual);
    return r;
}

std::vector<CurvePoint> torque_rotation_curve(const BarHingeModel& model, double delta_mm,
                                              double theta_max_deg, int n_points,
                                              const SolverOptions& opts) {
    if (n_points < 2) throw ValidationError("curve needs at least two points");
    QuasiStaticDriver driver(model, opts);
    const bool within = delta_mm > kValidityDeltaMin + 1e-9;

    // Axial preload first, then the twist sweep, all warm-started.
    if (delta_mm != 0.0) {
        auto pre =
            driver.continue_to(0.0, delta_mm, std::max(1, (int)std::ceil(std::abs(delta_mm) / 2.5)));
        if (!pre.converged)
            throw SolverError("axial preload did not converge (residual " +
                                  std::to_string(pre.residual) + ")",
                              pre.residual);
    }

    std::vector<CurvePoint> curve;
    curve.reserve(n_points);
    for (int i = 0; i < n_points; ++i) {
        const double th = theta_max_deg * i / (n_points - 1);
        const double dth = std::abs(th - (i == 0 ? 0.0 : curve.back().theta_deg));
        auto r = driver.continue_to(th, delta_mm, std::max(1, (int)std::ceil(dth / 2.0)));
        if (!r.converged)
            throw SolverError("torque curve solve did not converge (theta " +
                                  std::to_string(th) + " deg, residual " +
                                  std::to_string(r.residual) + ")",
                              r.residual);
        curve.push_back({th, delta_mm, r.torque, r.axial_force, r.energy, r.residual, within});
    }
    return curve;
}

BarHingeModel rotate_model(const BarHingeModel& model, const Eigen::Matrix3d& rot) {
    BarHingeModel out = model;
    for (auto& n : out.nodes) n = rot * n;
    out.axis_origin = rot * model.axis_origin;
    out.axis_dir = rot * model.axis_dir;
    return out;
}

}  // namespace foldsense
