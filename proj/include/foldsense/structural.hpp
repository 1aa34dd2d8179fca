#pragma once

#include "foldsense/geometry.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <span>
#include <vector>

namespace foldsense {

/// Neo-Hookean constants; stiffnesses use the incompressible small-strain
/// conversions mu = 2*C10, E = 3*mu.
struct MaterialParams {
    double c10 = 0.34;       // MPa
    double d1 = 0.0;         // 1/MPa
    double density = 1240.0; // kg/m^3
    double nu = 0.49;

    double mu() const { return 2.0 * c10; }
    double youngs() const { return 3.0 * mu(); }
    void validate() const;
};

/// Hinge calibration constants. fold_coeff scales the plate-bending
/// rigidity of crease hinges; facet hinges are facet_ratio times stiffer.
struct StiffnessCoeffs {
    double fold_coeff = 1.0;
    double facet_ratio = 5.0;
};

struct Bar {
    int a, b;
    double rest_len;  // mm
    double k;         // N/mm
};

/// Rotational spring on the edge (a, b); c and d are the opposite vertices
/// of the two incident faces. rest_bend is the signed deviation from flat at
/// rest (radians), so the rest configuration has exactly zero energy.
struct Hinge {
    int a, b, c, d;
    double rest_bend;  // rad
    double k;          // N*mm/rad
    EdgeClass cls;
};

struct BarHingeModel {
    std::vector<Vec3> nodes;  // rest positions
    std::vector<Bar> bars;
    std::vector<Hinge> hinges;
    std::vector<int> fixed_nodes;   // bottom lid rigid group
    std::vector<int> driven_nodes;  // top lid rigid group
    Vec3 axis_origin = Vec3::Zero();
    Vec3 axis_dir = Vec3(0, 0, 1);
    double force_scale = 1.0;  // characteristic force for tolerances
};

BarHingeModel from_mesh(const FoldMesh& mesh, const MaterialParams& mat, double wall_t,
                        const StiffnessCoeffs& coeffs = {});

/// Signed dihedral between faces (a,b,c) and (b,a,d) sharing edge (a,b);
/// flat configuration maps to pi, result wrapped into (-pi, pi].
double dihedral_angle(const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& pd);

/// Smooth bend deviation (zero when flat) used by the hinge energy, plus its
/// exact gradient with respect to the four stencil points.
double bend_angle(const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& pd);
double bend_angle_gradient(const Vec3& pa, const Vec3& pb, const Vec3& pc, const Vec3& pd,
                           Vec3 grad[4]);

double total_energy(const BarHingeModel& model, std::span<const Vec3> positions);
std::vector<Vec3> energy_gradient(const BarHingeModel& model, std::span<const Vec3> positions);

struct SolverOptions {
    double tol = 1e-8;  // gradient norm threshold, relative to force_scale
    int max_iter = 500;
};

struct LoadCase {
    double theta_deg = 0.0;
    double delta_mm = 0.0;
    int steps = 1;
    bool axial_free = false;  // top group rotates but floats axially
};

struct EquilibriumResult {
    std::vector<Vec3> positions;
    double torque = 0.0;      // N*mm, dE/dtheta (theta in radians)
    double axial_force = 0.0; // N, dE/ddelta
    double energy = 0.0;      // N*mm
    double residual = 0.0;    // gradient norm at convergence
    double theta_deg = 0.0;
    double delta_mm = 0.0;    // solved value when axial_free
    int iterations = 0;
    bool converged = false;
    std::vector<std::pair<double, double>> step_energies;  // (initial, final) per step
};

/// Warm-startable quasi-static driver: Newton with backtracking line search
/// on the energy and adaptive diagonal damping when a step is rejected.
class QuasiStaticDriver {
public:
    QuasiStaticDriver(const BarHingeModel& model, SolverOptions opts = {});

    void reset();
    EquilibriumResult continue_to(double theta_deg, double delta_mm, int steps = 1,
                                  bool axial_free = false);
    const std::vector<Vec3>& positions() const { return positions_; }

private:
    // Fixed sparsity pattern plus per-element value slots, built once per
    // constraint mode so each Newton iteration only refills values.
    struct AssemblyPlan {
        bool built = false;
        int n_q = 0;
        Eigen::SparseMatrix<double> H;
        std::vector<int> slots;       // element entries in traversal order
        std::vector<int> diag_slots;  // damping
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    };

    EquilibriumResult minimize(double theta_deg, double delta_prescribed, bool axial_free);
    void apply_driven(double theta_deg, double delta_mm);
    double axis_height(const Vec3& p) const { return model_.axis_dir.dot(p - model_.axis_origin); }
    AssemblyPlan& plan(bool axial_free);
    template <class EntryFn>
    void traverse_block(int ni, int nj, const Eigen::Matrix3d& B, bool axial_free, int n_q,
                        EntryFn&& fn) const;
    void fill_hessian(AssemblyPlan& p, bool axial_free);

    const BarHingeModel& model_;
    SolverOptions opts_;
    std::vector<Vec3> positions_;
    std::vector<int> dof_of_node_;  // -1 fixed/driven, else base q index
    std::vector<int> free_nodes_;
    std::vector<char> is_driven_;
    AssemblyPlan plans_[2];  // indexed by axial_free
    double theta_now_ = 0.0;
    double delta_now_ = 0.0;
};

EquilibriumResult solve_equilibrium(const BarHingeModel& model, const LoadCase& load,
                                    const SolverOptions& opts = {});

struct CurvePoint {
    double theta_deg;
    double delta_mm;
    double torque;      // N*mm
    double force;       // N
    double energy;      // N*mm
    double residual;
    bool within_validity;  // false once delta is at or below the contact-dominated regime
};

/// Deep-compression threshold below which face contact (not modelled)
/// dominates the response; points there are flagged, not dropped.
constexpr double kValidityDeltaMin = -10.0;

std::vector<CurvePoint> torque_rotation_curve(const BarHingeModel& model, double delta_mm,
                                              double theta_max_deg, int n_points,
                                              const SolverOptions& opts = {});

/// Rigidly reorients a model (nodes and drive axis); rest lengths and rest
/// angles are untouched.
BarHingeModel rotate_model(const BarHingeModel& model, const Eigen::Matrix3d& rot);

}  // namespace foldsense
