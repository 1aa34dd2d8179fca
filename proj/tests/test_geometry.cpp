#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "foldsense/errors.hpp"
#include "foldsense/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

using namespace foldsense;

namespace {

constexpr double kPi = std::numbers::pi;

OrigamiParams paper_params() { return OrigamiParams{}; }

double tri_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

// Independent edge-incidence audit straight off the face list; does not
// trust FoldMesh::edges.
bool audit_watertight(const FoldMesh& m) {
    std::map<std::pair<int, int>, int> incidence;
    for (const auto& f : m.faces)
        for (int i = 0; i < 3; ++i) {
            int a = f[i], b = f[(i + 1) % 3];
            if (a > b) std::swap(a, b);
            incidence[{a, b}]++;
        }
    return std::all_of(incidence.begin(), incidence.end(),
                       [](const auto& kv) { return kv.second == 2; });
}

// Max distance from each point of A to its nearest point of B.
double one_sided_hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    double worst = 0.0;
    for (const auto& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : b) best = std::min(best, (p - q).norm());
        worst = std::max(worst, best);
    }
    return worst;
}

std::vector<Vec3> soup_points(const std::vector<SoupTri>& soup) {
    std::vector<Vec3> pts;
    for (const auto& f : soup)
        for (const auto& v : f.v) pts.push_back(v);
    return pts;
}

OrigamiParams random_params(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    OrigamiParams p;
    p.n = 3 + static_cast<int>(u(rng) * 5.99);
    p.hex_radius = 5.0 + 25.0 * u(rng);
    p.footprint = 2.0 * p.hex_radius * (1.0 + 0.5 * u(rng));
    p.beta = 10.0 + 150.0 * u(rng);
    p.h = 2.0 + 15.0 * u(rng);
    p.stories = 1 + static_cast<int>(u(rng) * 3.99);
    p.wall_t = 0.2 + 1.5 * u(rng);
    p.lid_t = 0.5 + 5.0 * u(rng);
    p.seed_frac_a = 0.05 + 0.4 * u(rng);
    p.seed_frac_b = p.seed_frac_a + 0.1 + (0.93 - p.seed_frac_a - 0.1) * u(rng);
    return p;
}

}  // namespace

TEST_CASE("base polygon: first vertex on +x, CCW spacing") {
    OrigamiParams p;
    p.hex_radius = 1.0;
    p.footprint = 2.0;
    auto pts = base_hexagon(p);
    REQUIRE(pts.size() == 6);
    CHECK(pts[0].x() == doctest::Approx(1.0));
    CHECK(pts[0].y() == doctest::Approx(0.0));
    for (int k = 0; k < 6; ++k) {
        const double a = std::atan2(pts[k].y(), pts[k].x());
        const double expect = 2.0 * kPi * k / 6.0;
        const double wrapped = expect > kPi ? expect - 2.0 * kPi : expect;
        CHECK(a == doctest::Approx(wrapped).epsilon(1e-12));
    }
}

TEST_CASE("base polygon: all vertices at the circumradius") {
    auto pts = base_hexagon(paper_params());
    for (const auto& v : pts) CHECK(v.norm() == doctest::Approx(22.8).epsilon(1e-12));
}

TEST_CASE("base polygon: triangle case") {
    OrigamiParams p;
    p.n = 3;
    p.hex_radius = 1.0;
    p.footprint = 2.0;
    auto pts = base_hexagon(p);
    REQUIRE(pts.size() == 3);
    CHECK(pts[1].x() == doctest::Approx(std::cos(2.0 * kPi / 3.0)));
    CHECK(pts[1].y() == doctest::Approx(std::sin(2.0 * kPi / 3.0)));
    CHECK(pts[2].y() == doctest::Approx(std::sin(4.0 * kPi / 3.0)));
}

TEST_CASE("parameter validation rejects bad inputs") {
    auto bad = [](auto mutate) {
        OrigamiParams p;
        mutate(p);
        CHECK_THROWS_AS(p.validate(), ValidationError);
    };
    bad([](OrigamiParams& p) { p.n = 2; });
    bad([](OrigamiParams& p) { p.beta = 0.0; });
    bad([](OrigamiParams& p) { p.beta = 180.0; });
    bad([](OrigamiParams& p) { p.h = -1.0; });
    bad([](OrigamiParams& p) { p.wall_t = 0.0; });
    bad([](OrigamiParams& p) { p.stories = 0; });
    bad([](OrigamiParams& p) { p.seed_frac_a = 0.0; });
    bad([](OrigamiParams& p) { p.seed_frac_b = 1.0; });
    bad([](OrigamiParams& p) { std::swap(p.seed_frac_a, p.seed_frac_b); });
    bad([](OrigamiParams& p) { p.footprint = p.hex_radius; });  // polygon outside lid
}

TEST_CASE("rotate_lift: identity, paper values, radius preservation") {
    const Vec3 p(3.0, -1.0, 0.5);
    CHECK((rotate_lift(p, 0.0, 0.0) - p).norm() == doctest::Approx(0.0));

    const double r = 22.8;
    const Vec3 q = rotate_lift(Vec3(r, 0, 0), 75.0, 6.0);
    CHECK(q.x() == doctest::Approx(r * std::cos(75.0 * kPi / 180.0)));
    CHECK(q.y() == doctest::Approx(r * std::sin(75.0 * kPi / 180.0)));
    CHECK(q.z() == doctest::Approx(6.0));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const Vec3 a(u(rng), u(rng), u(rng));
        const double beta = u(rng) * 10.0;
        const Vec3 b = rotate_lift(a, beta, u(rng));
        CHECK(std::hypot(b.x(), b.y()) ==
              doctest::Approx(std::hypot(a.x(), a.y())).epsilon(1e-12));
    }
}

TEST_CASE("build_unit: two non-degenerate triangles sharing one edge") {
    auto unit = build_unit(paper_params());
    REQUIRE(unit.size() == 2);
    CHECK(tri_area(unit[0].v[0], unit[0].v[1], unit[0].v[2]) > 1.0);
    CHECK(tri_area(unit[1].v[0], unit[1].v[1], unit[1].v[2]) > 1.0);

    int shared = 0;
    for (const auto& a : unit[0].v)
        for (const auto& b : unit[1].v)
            if ((a - b).norm() < 1e-12) ++shared;
    CHECK(shared == 2);
}

TEST_CASE("build_unit: beta = 0 degenerates to a vertical plane") {
    OrigamiParams p = paper_params();
    p.beta = 0.0;  // bypass validate(); the op itself tolerates it
    auto unit = build_unit(p);
    for (const auto& f : unit) {
        const Vec3 n = (f.v[1] - f.v[0]).cross(f.v[2] - f.v[0]).normalized();
        CHECK(std::abs(n.z()) < 1e-12);
    }
}

TEST_CASE("build_unit: symmetric seed fractions give equal panel areas") {
    OrigamiParams p = paper_params();
    p.seed_frac_a = 0.25;
    p.seed_frac_b = 0.75;
    auto unit = build_unit(p);
    const double a1 = tri_area(unit[0].v[0], unit[0].v[1], unit[0].v[2]);
    const double a2 = tri_area(unit[1].v[0], unit[1].v[1], unit[1].v[2]);
    CHECK(a1 == doctest::Approx(a2).epsilon(1e-9));
}

TEST_CASE("build_unit: coincident seed points rejected") {
    OrigamiParams p = paper_params();
    p.seed_frac_a = 0.5;
    p.seed_frac_b = 0.5;
    CHECK_THROWS_AS(build_unit(p), GeometryError);
}

TEST_CASE("mirror_unit: reflection arithmetic and symmetry") {
    const double h = 6.0;
    SoupTri t{{Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, h)},
              {EdgeClass::Fold, EdgeClass::Fold, EdgeClass::Fold},
              {}};
    auto out = mirror_unit({t}, h);
    REQUIRE(out.size() == 2);
    double zmax = 0.0;
    for (const auto& v : out[1].v) zmax = std::max(zmax, v.z());
    CHECK(zmax == doctest::Approx(2.0 * h));

    // Paper unit: 4 faces, mirror-symmetric about z = 6.
    auto unit = mirror_unit(build_unit(paper_params()), h);
    CHECK(unit.size() == 4);
    auto pts = soup_points(unit);
    auto reflected = pts;
    for (auto& v : reflected) v.z() = 2.0 * h - v.z();
    CHECK(one_sided_hausdorff(reflected, pts) < 1e-12);

    // Mirroring the mirrored half again recovers the original point set.
    std::vector<SoupTri> mirrored_half(unit.begin() + 2, unit.end());
    auto twice = mirror_unit(mirrored_half, h);
    std::vector<SoupTri> back(twice.begin() + 2, twice.end());
    CHECK(one_sided_hausdorff(soup_points(back), soup_points({unit[0], unit[1]})) < 1e-12);
}

TEST_CASE("circular_array: face count and rotational closure") {
    auto unit = build_unit(paper_params());
    auto ring = circular_array(unit, 6);
    CHECK(ring.size() == unit.size() * 6);

    auto pts = soup_points(ring);
    auto rotated = pts;
    const double a = 2.0 * kPi / 6.0;
    for (auto& v : rotated) v = rotate_lift(v, a * 180.0 / kPi, 0.0);
    CHECK(one_sided_hausdorff(rotated, pts) < 1e-9);
}

TEST_CASE("linear_array: stories=1 is the identity") {
    auto unit = build_unit(paper_params());
    auto out = linear_array(unit, 1, 12.0);
    CHECK(out.size() == unit.size());
    CHECK(one_sided_hausdorff(soup_points(out), soup_points(unit)) == 0.0);
}

TEST_CASE("assembled wall: one story spans 2h") {
    OrigamiParams p = paper_params();
    p.stories = 1;
    auto wall = assemble_wall(p);
    auto [lo, hi] = wall.bounding_box();
    CHECK(hi.z() - lo.z() == doctest::Approx(12.0).epsilon(1e-12));  // 2h, h = 6
}

TEST_CASE("assemble: paper bounding box 45.6 x 45.6 x 60.0 within 0.1 mm") {
    auto mesh = assemble(paper_params());
    auto [lo, hi] = mesh.bounding_box();
    CHECK(hi.x() - lo.x() == doctest::Approx(45.6).epsilon(0.1 / 45.6));
    CHECK(hi.y() - lo.y() == doctest::Approx(45.6).epsilon(0.1 / 45.6));
    CHECK(hi.z() - lo.z() == doctest::Approx(60.0).epsilon(0.1 / 60.0));
}

TEST_CASE("assemble: lid_t = 0 leaves an open tube of height 2h*stories") {
    OrigamiParams p = paper_params();
    p.stories = 1;
    p.lid_t = 0.0;
    auto mesh = assemble(p);
    auto [lo, hi] = mesh.bounding_box();
    CHECK(hi.z() - lo.z() == doctest::Approx(2.0 * p.h));
    CHECK_FALSE(mesh.watertight());
}

TEST_CASE("assemble: watertight after lids (independent audit)") {
    auto mesh = assemble(paper_params());
    CHECK(audit_watertight(mesh));
    CHECK(mesh.watertight());
    CHECK(mesh.vent.has_value());
}

TEST_CASE("assemble: edge classes are consistent") {
    auto mesh = assemble(paper_params());
    int folds = 0, facets = 0, boundary = 0, lid = 0;
    for (const auto& e : mesh.edges) {
        switch (e.cls) {
            case EdgeClass::Fold: ++folds; break;
            case EdgeClass::Facet: ++facets; break;
            case EdgeClass::Boundary: ++boundary; break;
            case EdgeClass::Lid: ++lid; break;
        }
        CHECK(e.face_count == 2);
    }
    CHECK(folds > 0);
    CHECK(facets > 0);
    CHECK(lid > 0);
    // Rim rings survive as Boundary-class edges shared wall/lid.
    CHECK(boundary > 0);
}

TEST_CASE("wall symmetry: n-fold rotation maps the wall vertex set to itself") {
    auto mesh = assemble(paper_params());
    auto pts = mesh.wall_vertices();
    auto rotated = pts;
    for (auto& v : rotated) v = rotate_lift(v, 60.0, 0.0);
    CHECK(one_sided_hausdorff(rotated, pts) < 1e-9 * 22.8);
}

TEST_CASE("wall symmetry: per-story mirror planes") {
    OrigamiParams p = paper_params();
    auto mesh = assemble(p);
    auto pts = mesh.wall_vertices();
    for (int k = 0; k < p.stories; ++k) {
        const double zc = (2.0 * k + 1.0) * p.h;
        std::vector<Vec3> story, reflected;
        for (const auto& v : pts)
            if (v.z() > zc - p.h - 1e-9 && v.z() < zc + p.h + 1e-9) {
                story.push_back(v);
                reflected.emplace_back(v.x(), v.y(), 2.0 * zc - v.z());
            }
        CHECK(one_sided_hausdorff(reflected, story) < 1e-9 * p.hex_radius);
    }
}

TEST_CASE("random parameter sets stay watertight and symmetric") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        auto p = random_params(rng);
        CAPTURE(p.n);
        CAPTURE(p.beta);
        CAPTURE(p.stories);
        auto mesh = assemble(p);
        CHECK(audit_watertight(mesh));
        auto pts = mesh.wall_vertices();
        auto rotated = pts;
        for (auto& v : rotated) v = rotate_lift(v, 360.0 / p.n, 0.0);
        CHECK(one_sided_hausdorff(rotated, pts) < 1e-9 * p.hex_radius);
    }
}

TEST_CASE("plain stack differs from the mirrored build but still closes") {
    OrigamiParams p = paper_params();
    p.stories = 1;
    auto mirrored = assemble(p, StackStyle::Mirrored);
    auto plain = assemble(p, StackStyle::Plain);
    CHECK(audit_watertight(mirrored));
    CHECK(audit_watertight(plain));
    auto [mlo, mhi] = mirrored.bounding_box();
    auto [plo, phi] = plain.bounding_box();
    CHECK(mhi.z() - mlo.z() == doctest::Approx(phi.z() - plo.z()));
    // The plain stack has no mirror plane at z = h.
    auto pts = plain.wall_vertices();
    auto reflected = pts;
    for (auto& v : reflected) v.z() = 2.0 * p.h - v.z();
    CHECK(one_sided_hausdorff(reflected, pts) > 1e-3);
}

TEST_CASE("faces are planar and non-degenerate") {
    auto mesh = assemble(paper_params());
    for (int f = 0; f < static_cast<int>(mesh.faces.size()); ++f)
        CHECK(mesh.face_area(f) > 1e-9);
}
