#include "foldsense/capacitance.hpp"

#include "foldsense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace foldsense {

ElectrodePlacement electrode_placement_from_string(const std::string& s) {
    if (s == "valley_a") return ElectrodePlacement::ValleyA;
    if (s == "valley_b") return ElectrodePlacement::ValleyB;
    if (s == "fold_pair") return ElectrodePlacement::FoldPair;
    if (s == "bridge_pair") return ElectrodePlacement::BridgePair;
    if (s == "mirror_pair") return ElectrodePlacement::MirrorPair;
    if (s == "bridge_mirror_pair") return ElectrodePlacement::BridgeMirrorPair;
    throw ValidationError("unknown electrode placement: " + s);
}

void ElectrodeSpec::validate() const {
    if (pairs < 1) throw ValidationError("electrode spec needs at least one pair");
    if (!(eps_r >= 1.0)) throw ValidationError("eps_r must be >= 1");
    if (!(electrode_frac > 0.0 && electrode_frac <= 1.0))
        throw ValidationError("electrode_frac must lie in (0, 1]");
    if (!(area_scale > 0.0)) throw ValidationError("area_scale must be positive");
}

namespace {

using Vec2d = Eigen::Vector2d;
using Poly2 = std::vector<Vec2d>;

double poly_area(const Poly2& p) {
    double a = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Vec2d& u = p[i];
        const Vec2d& v = p[(i + 1) % p.size()];
        a += u.x() * v.y() - v.x() * u.y();
    }
    return 0.5 * a;
}

void make_ccw(Poly2& p) {
    if (poly_area(p) < 0.0) std::reverse(p.begin(), p.end());
}

/// Sutherland-Hodgman: clips `subject` against convex CCW `clip`.
Poly2 clip_convex(Poly2 subject, const Poly2& clip) {
    for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
        const Vec2d a = clip[i];
        const Vec2d b = clip[(i + 1) % clip.size()];
        const Vec2d n(b.y() - a.y(), a.x() - b.x());  // inward normal for CCW
        auto inside = [&](const Vec2d& p) { return n.dot(a - p) >= 0.0; };
        auto intersect = [&](const Vec2d& p, const Vec2d& q) {
            const double dp = n.dot(a - p), dq = n.dot(a - q);
            const double t = dp / (dp - dq);
            return Vec2d(p + t * (q - p));
        };
        Poly2 out;
        for (std::size_t j = 0; j < subject.size(); ++j) {
            const Vec2d& cur = subject[j];
            const Vec2d& prev = subject[(j + subject.size() - 1) % subject.size()];
            const bool cin = inside(cur), pin = inside(prev);
            if (cin) {
                if (!pin) out.push_back(intersect(prev, cur));
                out.push_back(cur);
            } else if (pin) {
                out.push_back(intersect(prev, cur));
            }
        }
        subject = std::move(out);
    }
    return subject;
}

struct PatchGeom {
    double area = 0.0;
    Vec3 centroid = Vec3::Zero();
    Vec3 normal = Vec3::Zero();  // unit, area-weighted
};

PatchGeom patch_geometry(std::span<const std::array<Vec3, 3>> tris) {
    PatchGeom g;
    Vec3 nsum = Vec3::Zero();
    for (const auto& t : tris) {
        const Vec3 n = (t[1] - t[0]).cross(t[2] - t[0]);
        const double a = 0.5 * n.norm();
        g.area += a;
        g.centroid += a * (t[0] + t[1] + t[2]) / 3.0;
        nsum += 0.5 * n;
    }
    if (g.area <= 0.0) throw GeometryError("electrode patch has zero area");
    g.centroid /= g.area;
    const double nl = nsum.norm();
    if (nl <= 1e-14) throw GeometryError("electrode patch normal is undefined");
    g.normal = nsum / nl;
    return g;
}

CapacitanceReading patch_capacitance(std::span<const std::array<Vec3, 3>> tris_a,
                                     std::span<const std::array<Vec3, 3>> tris_b, double eps_r,
                                     double area_scale) {
    PatchGeom ga = patch_geometry(tris_a);
    PatchGeom gb = patch_geometry(tris_b);
    if (ga.normal.dot(gb.centroid - ga.centroid) < 0.0) ga.normal = -ga.normal;
    if (gb.normal.dot(ga.centroid - gb.centroid) < 0.0) gb.normal = -gb.normal;

    auto mean_gap = [](std::span<const std::array<Vec3, 3>> tris, const PatchGeom& other) {
        double acc = 0.0, area = 0.0;
        for (const auto& t : tris) {
            const double a = 0.5 * (t[1] - t[0]).cross(t[2] - t[0]).norm();
            const Vec3 c = (t[0] + t[1] + t[2]) / 3.0;
            acc += a * (c - other.centroid).dot(other.normal);
            area += a;
        }
        return acc / area;
    };
    const double gap = 0.5 * (mean_gap(tris_a, gb) + mean_gap(tris_b, ga));
    if (!(gap > 0.0)) throw GeometryError("electrode patches interpenetrate");

    // Overlap: project both patches onto the bisector plane and accumulate
    // pairwise clipped areas.
    Vec3 nm = ga.normal - gb.normal;
    if (nm.norm() < 1e-9) nm = ga.normal;
    nm.normalize();
    Vec3 u = nm.cross(Vec3(0, 0, 1));
    if (u.norm() < 1e-6) u = nm.cross(Vec3(1, 0, 0));
    u.normalize();
    const Vec3 v = nm.cross(u);
    const Vec3 origin = 0.5 * (ga.centroid + gb.centroid);

    auto project = [&](const std::array<Vec3, 3>& t) {
        Poly2 p(3);
        for (int i = 0; i < 3; ++i)
            p[i] = Vec2d((t[i] - origin).dot(u), (t[i] - origin).dot(v));
        make_ccw(p);
        return p;
    };

    double overlap = 0.0;
    for (const auto& ta : tris_a) {
        const Poly2 pa = project(ta);
        if (std::abs(poly_area(pa)) < 1e-14) continue;
        for (const auto& tb : tris_b) {
            Poly2 pb = project(tb);
            if (std::abs(poly_area(pb)) < 1e-14) continue;
            const Poly2 isect = clip_convex(pb, pa);
            if (isect.size() >= 3) overlap += std::abs(poly_area(isect));
        }
    }

    CapacitanceReading r;
    r.gap_eff = gap;
    r.overlap = overlap;
    r.c_pf = kEps0PfPerMm * eps_r * area_scale * overlap / gap;
    return r;
}

std::array<Vec3, 3> bary_to_world(const std::array<Vec3, 3>& bary, const Vec3& a, const Vec3& b,
                                  const Vec3& c) {
    std::array<Vec3, 3> out;
    for (int i = 0; i < 3; ++i) out[i] = bary[i].x() * a + bary[i].y() * b + bary[i].z() * c;
    return out;
}

/// 2D convex hull (monotone chain); the rest patch is planar so this
/// recovers the outline of the carrier panel.
Poly2 convex_hull(Poly2 pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2d& a, const Vec2d& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2d& a, const Vec2d& b) { return (a - b).norm() < 1e-12; }),
              pts.end());
    if (pts.size() < 3) throw GeometryError("degenerate electrode panel");
    auto cross = [](const Vec2d& o, const Vec2d& a, const Vec2d& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    Poly2 hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

/// Cuts the shrunken panel outline against each carrier child face and
/// stores the pieces barycentrically.
void build_patch(const FoldMesh& mesh, const std::vector<int>& faces, const Vec3& anchor,
                 double frac, std::vector<int>& out_faces,
                 std::vector<std::array<Vec3, 3>>& out_bary, double& out_area) {
    // Rest-plane frame from the first face.
    const auto& f0 = mesh.faces[faces[0]];
    const Vec3 n = mesh.face_normal(faces[0]);
    Vec3 u = (mesh.vertices[f0[1]] - mesh.vertices[f0[0]]).normalized();
    const Vec3 v = n.cross(u);
    const Vec3 origin = anchor;
    auto to2d = [&](const Vec3& p) {
        return Vec2d((p - origin).dot(u), (p - origin).dot(v));
    };

    std::set<int> vert_ids;
    for (int f : faces)
        for (int i : mesh.faces[f]) vert_ids.insert(i);
    Poly2 pts;
    for (int i : vert_ids) pts.push_back(to2d(mesh.vertices[i]));
    Poly2 outline = convex_hull(pts);
    for (auto& p : outline) p *= frac;  // shrink toward the anchor (frame origin)
    make_ccw(outline);

    for (int f : faces) {
        const auto& fc = mesh.faces[f];
        Poly2 tri = {to2d(mesh.vertices[fc[0]]), to2d(mesh.vertices[fc[1]]),
                     to2d(mesh.vertices[fc[2]])};
        Poly2 tri_ccw = tri;
        make_ccw(tri_ccw);
        Poly2 piece = clip_convex(outline, tri_ccw);
        if (piece.size() < 3 || std::abs(poly_area(piece)) < 1e-10) continue;
        make_ccw(piece);

        // Barycentric coordinates of each piece corner in the carrier face.
        const Vec2d& A = tri[0];
        const Vec2d& B = tri[1];
        const Vec2d& C = tri[2];
        const double det = (B.x() - A.x()) * (C.y() - A.y()) - (C.x() - A.x()) * (B.y() - A.y());
        auto bary = [&](const Vec2d& p) {
            const double wb =
                ((p.x() - A.x()) * (C.y() - A.y()) - (C.x() - A.x()) * (p.y() - A.y())) / det;
            const double wc =
                ((B.x() - A.x()) * (p.y() - A.y()) - (p.x() - A.x()) * (B.y() - A.y())) / det;
            return Vec3(1.0 - wb - wc, wb, wc);
        };
        // Fan triangulation of the clipped polygon.
        for (std::size_t i = 1; i + 1 < piece.size(); ++i) {
            out_faces.push_back(f);
            out_bary.push_back({bary(piece[0]), bary(piece[i]), bary(piece[i + 1])});
            out_area += 0.5 * std::abs((piece[i] - piece[0]).x() * (piece[i + 1] - piece[0]).y() -
                                       (piece[i + 1] - piece[0]).x() * (piece[i] - piece[0]).y());
        }
    }
    if (out_faces.empty()) throw GeometryError("electrode patch came out empty");
}

std::vector<int> faces_with_tag(const FoldMesh& mesh, FaceKind kind, int story, int sector,
                                bool upper) {
    std::vector<int> out;
    for (int f = 0; f < static_cast<int>(mesh.faces.size()); ++f) {
        const FaceTag& t = mesh.tags[f];
        if (t.kind == kind && t.story == story && t.sector == sector && t.upper == upper)
            out.push_back(f);
    }
    return out;
}

Vec3 shared_edge_midpoint(const FoldMesh& mesh, const std::vector<int>& fa,
                          const std::vector<int>& fb) {
    std::set<int> va, vb;
    for (int f : fa)
        for (int i : mesh.faces[f]) va.insert(i);
    std::vector<int> shared;
    for (int f : fb)
        for (int i : mesh.faces[f])
            if (va.count(i)) shared.push_back(i);
    if (shared.empty()) throw TopologyError("electrode panels share no crease");
    Vec3 lo = mesh.vertices[shared[0]], hi = lo;
    for (int i : shared) {
        const Vec3& p = mesh.vertices[i];
        if ((p - lo).squaredNorm() > (hi - lo).squaredNorm()) hi = p;
    }
    // Midpoint of the crease span.
    Vec3 far_lo = hi;
    for (int i : shared) {
        const Vec3& p = mesh.vertices[i];
        if ((p - hi).squaredNorm() > (far_lo - hi).squaredNorm()) far_lo = p;
    }
    return 0.5 * (hi + far_lo);
}

}  // namespace

std::vector<ElectrodePair> electrode_placement(const FoldMesh& mesh, const ElectrodeSpec& spec) {
    spec.validate();
    int max_story = 0, max_sector = 0;
    for (const auto& t : mesh.tags) {
        max_story = std::max(max_story, t.story);
        max_sector = std::max(max_sector, t.sector);
    }
    const int n_sectors = max_sector + 1;
    if (spec.pairs > n_sectors)
        throw ValidationError("more electrode pairs requested than sectors available");
    const int story = spec.story >= 0 ? spec.story : max_story / 2;
    if (story > max_story) throw ValidationError("electrode story out of range");

    std::vector<ElectrodePair> pairs;
    for (int s = 0; s < spec.pairs; ++s) {
        std::vector<int> fa, fb;
        switch (spec.placement) {
            case ElectrodePlacement::ValleyA:
                fa = faces_with_tag(mesh, FaceKind::PanelA, story, s, false);
                fb = faces_with_tag(mesh, FaceKind::BridgeA, story, s, false);
                break;
            case ElectrodePlacement::ValleyB:
                fa = faces_with_tag(mesh, FaceKind::PanelB, story, s, false);
                fb = faces_with_tag(mesh, FaceKind::BridgeB, story, s, false);
                break;
            case ElectrodePlacement::FoldPair:
                fa = faces_with_tag(mesh, FaceKind::PanelA, story, s, false);
                fb = faces_with_tag(mesh, FaceKind::PanelB, story, s, false);
                break;
            case ElectrodePlacement::BridgePair:
                fa = faces_with_tag(mesh, FaceKind::BridgeA, story, s, false);
                fb = faces_with_tag(mesh, FaceKind::BridgeB, story, s, false);
                break;
            case ElectrodePlacement::MirrorPair:
                fa = faces_with_tag(mesh, FaceKind::PanelB, story, s, false);
                fb = faces_with_tag(mesh, FaceKind::PanelB, story, s, true);
                break;
            case ElectrodePlacement::BridgeMirrorPair:
                fa = faces_with_tag(mesh, FaceKind::BridgeB, story, s, false);
                fb = faces_with_tag(mesh, FaceKind::BridgeB, story, s, true);
                break;
        }
        if (fa.empty() || fb.empty())
            throw ValidationError("electrode spec references missing faces");

        ElectrodePair pair;
        pair.sector = s;
        pair.eps_r = spec.eps_r;
        pair.area_scale = spec.area_scale;
        const Vec3 anchor = shared_edge_midpoint(mesh, fa, fb);
        double area_a = 0.0, area_b = 0.0;
        build_patch(mesh, fa, anchor, spec.electrode_frac, pair.faces_a, pair.bary_a, area_a);
        build_patch(mesh, fb, anchor, spec.electrode_frac, pair.faces_b, pair.bary_b, area_b);
        pair.area = 0.5 * (area_a + area_b);
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

CapacitanceReading plate_capacitance(std::span<const Vec3> tri_a, std::span<const Vec3> tri_b,
                                     double eps_r, double area_scale) {
    const std::array<Vec3, 3> a = {tri_a[0], tri_a[1], tri_a[2]};
    const std::array<Vec3, 3> b = {tri_b[0], tri_b[1], tri_b[2]};
    return patch_capacitance(std::span(&a, 1), std::span(&b, 1), eps_r, area_scale);
}

CapacitanceReading pair_capacitance(const ElectrodePair& pair, const FoldMesh& mesh,
                                    std::span<const Vec3> positions) {
    std::vector<std::array<Vec3, 3>> tris_a, tris_b;
    tris_a.reserve(pair.faces_a.size());
    for (std::size_t i = 0; i < pair.faces_a.size(); ++i) {
        const auto& fc = mesh.faces[pair.faces_a[i]];
        tris_a.push_back(
            bary_to_world(pair.bary_a[i], positions[fc[0]], positions[fc[1]], positions[fc[2]]));
    }
    tris_b.reserve(pair.faces_b.size());
    for (std::size_t i = 0; i < pair.faces_b.size(); ++i) {
        const auto& fc = mesh.faces[pair.faces_b[i]];
        tris_b.push_back(
            bary_to_world(pair.bary_b[i], positions[fc[0]], positions[fc[1]], positions[fc[2]]));
    }
    return patch_capacitance(tris_a, tris_b, pair.eps_r, pair.area_scale);
}

CapCurvePoint capacitance_at(const std::vector<ElectrodePair>& pairs, const FoldMesh& mesh,
                             std::span<const Vec3> positions, double theta_deg, double delta_mm) {
    CapCurvePoint pt;
    pt.theta_deg = theta_deg;
    pt.delta_mm = delta_mm;
    pt.within_validity = delta_mm > -10.0 + 1e-9;
    for (const auto& p : pairs) {
        pt.per_pair.push_back(pair_capacitance(p, mesh, positions));
        pt.c_total_pf += pt.per_pair.back().c_pf;
    }
    return pt;
}

double sensitivity(std::span<const CapCurvePoint> curve) {
    if (curve.size() < 2) throw ValidationError("sensitivity needs at least two points");
    const double dth = curve.back().theta_deg - curve.front().theta_deg;
    if (std::abs(dth) < 1e-12) throw ValidationError("sensitivity needs a theta span");
    return (curve.back().c_total_pf - curve.front().c_total_pf) / dth;
}

}  // namespace foldsense
