#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "foldsense/errors.hpp"
#include "foldsense/geometry.hpp"
#include "foldsense/structural.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace foldsense;

namespace {

constexpr double kPi = std::numbers::pi;

FoldMesh two_triangle_mesh() {
    // Shared edge (0,1); opposite vertices 2 and 3.
    std::vector<SoupTri> soup;
    soup.push_back({{Vec3(0, 0, 0), Vec3(0, 1, 0), Vec3(1, 0.5, 0)},
                    {EdgeClass::Fold, EdgeClass::Boundary, EdgeClass::Boundary},
                    {}});
    soup.push_back({{Vec3(0, 1, 0), Vec3(0, 0, 0), Vec3(-1, 0.5, 0.4)},
                    {EdgeClass::Fold, EdgeClass::Boundary, EdgeClass::Boundary},
                    {}});
    return weld(soup);
}

FoldMesh single_triangle_mesh() {
    std::vector<SoupTri> soup;
    soup.push_back({{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, std::sqrt(3.0) / 2.0, 0)},
                    {EdgeClass::Boundary, EdgeClass::Boundary, EdgeClass::Boundary},
                    {}});
    return weld(soup);
}

OrigamiParams coarse_params() {
    OrigamiParams p;
    p.hex_radius = 12.0;
    p.footprint = 26.0;
    p.h = 5.0;
    p.stories = 1;
    p.lid_t = 2.0;
    return p;
}

BarHingeModel coarse_model(StackStyle style = StackStyle::Mirrored) {
    auto p = coarse_params();
    return from_mesh(assemble(p, style), MaterialParams{}, p.wall_t, {0.01, 5.0});
}

// Central-difference oracle for the energy gradient.
std::vector<Vec3> fd_gradient(const BarHingeModel& m, std::vector<Vec3> x, double step) {
    std::vector<Vec3> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (int c = 0; c < 3; ++c) {
            const double saved = x[i][c];
            x[i][c] = saved + step;
            const double ep = total_energy(m, x);
            x[i][c] = saved - step;
            const double em = total_energy(m, x);
            x[i][c] = saved;
            g[i][c] = (ep - em) / (2.0 * step);
        }
    return g;
}

}  // namespace

TEST_CASE("material derivations from the Neo-Hookean constant") {
    MaterialParams mat;  // C10 = 0.34 MPa
    CHECK(mat.mu() == doctest::Approx(0.68));
    CHECK(mat.youngs() == doctest::Approx(2.04));
    MaterialParams bad = mat;
    bad.c10 = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = mat;
    bad.nu = 0.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("from_mesh topology counts") {
    auto single = from_mesh(single_triangle_mesh(), MaterialParams{}, 0.6);
    CHECK(single.bars.size() == 3);
    CHECK(single.hinges.empty());

    auto pair = from_mesh(two_triangle_mesh(), MaterialParams{}, 0.6);
    CHECK(pair.bars.size() == 5);
    CHECK(pair.hinges.size() == 1);
}

TEST_CASE("dihedral angle: flat, right angle, swap symmetry") {
    const Vec3 a(0, 0, 0), b(0, 1, 0);
    const Vec3 c_flat(1, 0.5, 0), d_flat(-1, 0.5, 0);
    CHECK(dihedral_angle(a, b, c_flat, d_flat) == doctest::Approx(kPi));

    // Faces in the z=0 and x=0 planes meet at 90 degrees.
    const Vec3 d_up(0, 0.5, 1);
    CHECK(std::abs(dihedral_angle(a, b, c_flat, d_up)) == doctest::Approx(kPi / 2));

    // Swapping the face order maps phi to 2*pi - phi modulo the wrap.
    const Vec3 d_tilt(-1, 0.5, 0.3);
    const double phi = dihedral_angle(a, b, c_flat, d_tilt);
    double swapped = dihedral_angle(a, b, d_tilt, c_flat);
    double expect = 2.0 * kPi - phi;
    if (expect > kPi) expect -= 2.0 * kPi;
    CHECK(swapped == doctest::Approx(expect));

    CHECK_THROWS_AS(dihedral_angle(a, a, c_flat, d_tilt), GeometryError);
}

TEST_CASE("bend angle gradient matches finite differences") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec3 p[4] = {Vec3(0, 0, 0), Vec3(1 + 0.1 * u(rng), u(rng) * 0.2, u(rng) * 0.2),
                     Vec3(0.5, 1 + u(rng) * 0.3, u(rng)), Vec3(0.5, -1 + u(rng) * 0.3, u(rng))};
        Vec3 g[4];
        bend_angle_gradient(p[0], p[1], p[2], p[3], g);
        const double step = 1e-6;
        for (int i = 0; i < 4; ++i)
            for (int c = 0; c < 3; ++c) {
                Vec3 q[4] = {p[0], p[1], p[2], p[3]};
                q[i][c] += step;
                const double ap = bend_angle(q[0], q[1], q[2], q[3]);
                q[i][c] -= 2.0 * step;
                const double am = bend_angle(q[0], q[1], q[2], q[3]);
                const double fd = (ap - am) / (2.0 * step);
                CHECK(g[i][c] == doctest::Approx(fd).epsilon(1e-5));
            }
    }
}

TEST_CASE("energy basics: rest state and a single stretched bar") {
    auto model = from_mesh(two_triangle_mesh(), MaterialParams{}, 0.6);
    CHECK(total_energy(model, model.nodes) == doctest::Approx(0.0));
    for (const auto& g : energy_gradient(model, model.nodes))
        CHECK(g.norm() < 1e-12 * model.force_scale);

    BarHingeModel one;
    one.nodes = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    one.bars = {{0, 1, 1.0, 2.0}};
    std::vector<Vec3> x = {Vec3(0, 0, 0), Vec3(1.5, 0, 0)};
    CHECK(total_energy(one, x) == doctest::Approx(0.25));  // 0.5 * 2 * 0.5^2

    x[1] = Vec3(std::nan(""), 0, 0);
    CHECK_THROWS_AS(total_energy(one, x), ValidationError);
}

TEST_CASE("analytic gradient vs finite-difference oracle on random states") {
    auto model = coarse_model();
    double mean_edge = 0.0;
    for (const auto& b : model.bars) mean_edge += b.rest_len;
    mean_edge /= model.bars.size();

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        auto x = model.nodes;
        for (auto& p : x)
            p += 0.05 * mean_edge * Vec3(u(rng), u(rng), u(rng));
        const auto ga = energy_gradient(model, x);
        const auto gf = fd_gradient(model, x, 1e-6 * mean_edge);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < ga.size(); ++i) {
            num += (ga[i] - gf[i]).squaredNorm();
            den += gf[i].squaredNorm();
        }
        CHECK(std::sqrt(num / den) < 1e-5);
    }
}

TEST_CASE("zero load gives zero reaction") {
    auto model = coarse_model();
    auto r = solve_equilibrium(model, {0.0, 0.0, 1, false});
    CHECK(std::abs(r.torque) < 1e-9);
    CHECK(std::abs(r.axial_force) < 1e-9);
    CHECK(r.energy == doctest::Approx(0.0));
}

TEST_CASE("continuation energies never increase within a step") {
    auto model = coarse_model();
    auto r = solve_equilibrium(model, {20.0, -2.0, 8, false});
    REQUIRE(r.step_energies.size() == 8);
    for (const auto& [e0, e1] : r.step_energies) CHECK(e1 <= e0 + 1e-12);
}

TEST_CASE("torque equals dE/dtheta by central differences") {
    auto model = coarse_model();
    const double theta = 12.0;
    QuasiStaticDriver driver(model);
    auto r = driver.continue_to(theta, 0.0, 6);

    const double dth = 0.05;  // degrees
    QuasiStaticDriver dp(model);
    dp.continue_to(theta, 0.0, 6);
    const double ep = dp.continue_to(theta + dth, 0.0, 1).energy;
    QuasiStaticDriver dm(model);
    dm.continue_to(theta, 0.0, 6);
    const double em = dm.continue_to(theta - dth, 0.0, 1).energy;

    const double fd = (ep - em) / (2.0 * dth * kPi / 180.0);
    CHECK(r.torque == doctest::Approx(fd).epsilon(1e-4));
}

TEST_CASE("axial force equals dE/ddelta by central differences") {
    auto model = coarse_model();
    QuasiStaticDriver driver(model);
    auto r = driver.continue_to(8.0, 1.0, 6);

    const double dd = 1e-3;
    QuasiStaticDriver dp(model);
    dp.continue_to(8.0, 1.0, 6);
    const double ep = dp.continue_to(8.0, 1.0 + dd, 1).energy;
    QuasiStaticDriver dm(model);
    dm.continue_to(8.0, 1.0, 6);
    const double em = dm.continue_to(8.0, 1.0 - dd, 1).energy;

    CHECK(r.axial_force == doctest::Approx((ep - em) / (2.0 * dd)).epsilon(1e-4));
}

TEST_CASE("frame invariance of energy and torque magnitude") {
    auto model = coarse_model();
    QuasiStaticDriver d0(model);
    auto r0 = d0.continue_to(15.0, 1.0, 6);

    const Eigen::Matrix3d rot =
        Eigen::AngleAxisd(0.7, Vec3(1, 2, 0.5).normalized()).toRotationMatrix();
    auto rotated = rotate_model(model, rot);
    QuasiStaticDriver d1(rotated);
    auto r1 = d1.continue_to(15.0, 1.0, 6);

    CHECK(r1.energy == doctest::Approx(r0.energy).epsilon(1e-9));
    CHECK(std::abs(r1.torque) == doctest::Approx(std::abs(r0.torque)).epsilon(1e-9));
}

TEST_CASE("torque curve: zero at rest, monotone under twist, grid independent") {
    auto model = coarse_model();
    auto curve = torque_rotation_curve(model, 0.0, 30.0, 16);
    REQUIRE(curve.size() == 16);
    CHECK(std::abs(curve.front().torque) < 1e-9);
    for (std::size_t i = 1; i < curve.size(); ++i)
        CHECK(curve[i].torque >= curve[i - 1].torque - 1e-9);

    auto coarse = torque_rotation_curve(model, 0.0, 30.0, 2);
    CHECK(coarse.front().torque == doctest::Approx(curve.front().torque).epsilon(1e-6));
    CHECK(coarse.back().torque ==
          doctest::Approx(curve.back().torque).epsilon(1e-3).scale(0.01));
}

TEST_CASE("validity flag follows the compression threshold") {
    auto model = coarse_model();
    CHECK_FALSE(torque_rotation_curve(model, -10.0, 5.0, 2).front().within_validity);
    CHECK(torque_rotation_curve(model, -5.0, 5.0, 2).front().within_validity);
}

TEST_CASE("inverted stack suppresses twist-induced axial motion") {
    auto pm = coarse_params();
    auto mirrored = from_mesh(assemble(pm, StackStyle::Mirrored), MaterialParams{}, pm.wall_t,
                              {0.01, 5.0});
    auto plain = from_mesh(assemble(pm, StackStyle::Plain), MaterialParams{}, pm.wall_t,
                           {0.01, 5.0});

    const double theta = 15.0;
    QuasiStaticDriver dm(mirrored), dp(plain);
    const double dz_mirrored = dm.continue_to(theta, 0.0, 8, true).delta_mm;
    const double dz_plain = dp.continue_to(theta, 0.0, 8, true).delta_mm;
    CHECK(std::abs(dz_mirrored) < std::abs(dz_plain));
}

TEST_CASE("unconstrained model is rejected") {
    auto model = from_mesh(two_triangle_mesh(), MaterialParams{}, 0.6);
    CHECK_THROWS_AS(solve_equilibrium(model, {5.0, 0.0, 1, false}), ValidationError);
}
