#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "foldsense/capacitance.hpp"
#include "foldsense/errors.hpp"
#include "foldsense/geometry.hpp"
#include "foldsense/structural.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace foldsense;

namespace {

// Right triangle of the given area in the z = z0 plane, optionally tilted
// about the x axis.
std::vector<Vec3> plate(double area, double z0, double tilt_rad = 0.0) {
    const double s = std::sqrt(2.0 * area);
    std::vector<Vec3> tri = {Vec3(0, 0, 0), Vec3(s, 0, 0), Vec3(0, s, 0)};
    for (auto& v : tri) {
        const double y = v.y(), z = v.z();
        v.y() = y * std::cos(tilt_rad) - z * std::sin(tilt_rad);
        v.z() = y * std::sin(tilt_rad) + z * std::cos(tilt_rad) + z0;
    }
    return tri;
}

}  // namespace

TEST_CASE("parallel plates: closed-form value") {
    // 1 cm^2 plates, 1 mm apart: C = eps0 * A / d.
    const auto a = plate(100.0, 0.0);
    const auto b = plate(100.0, 1.0);
    const auto r = plate_capacitance(a, b, 1.0);
    const double expect = kEps0PfPerMm * 100.0 / 1.0;  // 0.88541878... pF
    CHECK(r.c_pf == doctest::Approx(expect).epsilon(1e-9));
    CHECK(r.c_pf == doctest::Approx(0.8854).epsilon(1e-4));
    CHECK(r.gap_eff == doctest::Approx(1.0));
    CHECK(r.overlap == doctest::Approx(100.0));
}

TEST_CASE("doubling the gap halves the capacitance") {
    const auto a = plate(100.0, 0.0);
    const double c1 = plate_capacitance(a, plate(100.0, 1.0), 1.0).c_pf;
    const double c2 = plate_capacitance(a, plate(100.0, 2.0), 1.0).c_pf;
    CHECK(c1 == doctest::Approx(2.0 * c2));
}

TEST_CASE("relative permittivity and area scale are linear factors") {
    const auto a = plate(50.0, 0.0);
    const auto b = plate(50.0, 0.5);
    const double c1 = plate_capacitance(a, b, 1.0).c_pf;
    CHECK(plate_capacitance(a, b, 3.0).c_pf == doctest::Approx(3.0 * c1));
    CHECK(plate_capacitance(a, b, 1.0, 2.5).c_pf == doctest::Approx(2.5 * c1));
}

TEST_CASE("parallel-plate limit under decreasing tilt") {
    const auto a = plate(100.0, 0.0);
    const double ideal = kEps0PfPerMm * 100.0 / 2.0;
    double last_err = 1.0;
    for (double tilt : {0.2, 0.1, 0.05, 0.02, 0.005}) {
        const double c = plate_capacitance(a, plate(100.0, 2.0, tilt), 1.0).c_pf;
        last_err = std::abs(c - ideal) / ideal;
    }
    CHECK(last_err < 0.01);
}

TEST_CASE("interpenetrating plates are rejected") {
    // Second plate crossing the first one's plane.
    std::vector<Vec3> crossing = {Vec3(0, 0, -0.2), Vec3(14.14, 0, -0.2), Vec3(0, 14.14, -0.2)};
    CHECK_THROWS_AS(plate_capacitance(plate(100.0, 0.0), crossing, 1.0), GeometryError);
}

TEST_CASE("electrode placement: counts, disjoint patches, symmetry") {
    auto mesh = assemble(OrigamiParams{});
    ElectrodeSpec spec;
    auto pairs = electrode_placement(mesh, spec);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].area > 0.0);
    for (int fa : pairs[0].faces_a)
        for (int fb : pairs[0].faces_b) CHECK(fa != fb);

    spec.pairs = 4;
    CHECK(electrode_placement(mesh, spec).size() == 4);

    // Symmetric placement: rotating pair 0 by one sector lands on pair 1.
    spec.pairs = 2;
    auto two = electrode_placement(mesh, spec);
    const double step = 2.0 * std::numbers::pi / 6.0;
    const Eigen::Matrix3d rot = Eigen::AngleAxisd(step, Vec3(0, 0, 1)).toRotationMatrix();
    auto world = [&](const ElectrodePair& p, std::size_t i, int corner) {
        const auto& fc = mesh.faces[p.faces_a[i]];
        const Vec3& b = p.bary_a[i][corner];
        return Vec3(b.x() * mesh.vertices[fc[0]] + b.y() * mesh.vertices[fc[1]] +
                    b.z() * mesh.vertices[fc[2]]);
    };
    REQUIRE(two[0].faces_a.size() == two[1].faces_a.size());
    for (std::size_t i = 0; i < two[0].faces_a.size(); ++i)
        for (int corner = 0; corner < 3; ++corner) {
            const Vec3 rotated = rot * world(two[0], i, corner);
            double best = 1e18;
            for (std::size_t j = 0; j < two[1].faces_a.size(); ++j)
                for (int c2 = 0; c2 < 3; ++c2)
                    best = std::min(best, (rotated - world(two[1], j, c2)).norm());
            CHECK(best < 1e-6);
        }

    spec.pairs = 99;
    CHECK_THROWS_AS(electrode_placement(mesh, spec), ValidationError);
}

TEST_CASE("rest-state reading is positive with a positive gap") {
    auto mesh = assemble(OrigamiParams{});
    auto pairs = electrode_placement(mesh, ElectrodeSpec{});
    auto pt = capacitance_at(pairs, mesh, mesh.vertices, 0.0, 0.0);
    CHECK(pt.c_total_pf > 0.0);
    CHECK(pt.per_pair[0].gap_eff > 0.0);
    CHECK(pt.per_pair[0].overlap > 0.0);
}

TEST_CASE("capacitance stays positive under small random perturbations") {
    auto mesh = assemble(OrigamiParams{});
    auto pairs = electrode_placement(mesh, ElectrodeSpec{});
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.05, 0.05);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = mesh.vertices;
        for (auto& p : x) p += Vec3(u(rng), u(rng), u(rng));
        CHECK(capacitance_at(pairs, mesh, x, 0.0, 0.0).c_total_pf > 0.0);
    }
}

TEST_CASE("capacitance rises with twist at zero offset") {
    OrigamiParams params;
    auto mesh = assemble(params);
    auto model = from_mesh(mesh, MaterialParams{}, params.wall_t, {1e-3, 5.0});
    auto pairs = electrode_placement(mesh, ElectrodeSpec{});
    QuasiStaticDriver driver(model);
    const double c0 = capacitance_at(pairs, mesh, mesh.vertices, 0, 0).c_total_pf;
    auto r = driver.continue_to(10.0, 0.0, 5);
    REQUIRE(r.converged);
    CHECK(capacitance_at(pairs, mesh, r.positions, 10, 0).c_total_pf > c0);
}

TEST_CASE("sensitivity: definition and degenerate cases") {
    std::vector<CapCurvePoint> curve(4);
    for (int i = 0; i < 4; ++i) {
        curve[i].theta_deg = 10.0 * i;
        curve[i].c_total_pf = 0.1 + 0.02 * (10.0 * i);  // slope 0.02 pF/deg
    }
    CHECK(sensitivity(curve) == doctest::Approx(0.02));

    for (auto& p : curve) p.c_total_pf = 0.5;
    CHECK(sensitivity(curve) == doctest::Approx(0.0));

    std::vector<CapCurvePoint> single(1);
    CHECK_THROWS_AS(sensitivity(single), ValidationError);
    std::vector<CapCurvePoint> flat(2);
    flat[0].theta_deg = flat[1].theta_deg = 0.0;
    CHECK_THROWS_AS(sensitivity(flat), ValidationError);
}

TEST_CASE("placement parsing") {
    CHECK(electrode_placement_from_string("valley_a") == ElectrodePlacement::ValleyA);
    CHECK(electrode_placement_from_string("mirror_pair") == ElectrodePlacement::MirrorPair);
    CHECK_THROWS_AS(electrode_placement_from_string("nonsense"), ValidationError);
}
