#include "foldsense/geometry.hpp"

#include "foldsense/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <unordered_map>

namespace foldsense {

namespace {

constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

Vec3 rotate_z(const Vec3& p, double angle_rad) {
    const double c = std::cos(angle_rad), s = std::sin(angle_rad);
    return {c * p.x() - s * p.y(), s * p.x() + c * p.y(), p.z()};
}

SoupTri transform(const SoupTri& f, double angle_rad, double dz) {
    SoupTri out = f;
    for (auto& v : out.v) v = rotate_z(v, angle_rad) + Vec3(0, 0, dz);
    return out;
}

}  // namespace

void OrigamiParams::validate() const {
    if (n < 3) throw ValidationError("polygon order n must be >= 3");
    if (!(beta > 0.0 && beta < 180.0)) throw ValidationError("beta must lie in (0, 180) degrees");
    if (!(h > 0.0)) throw ValidationError("story half-height h must be positive");
    if (!(wall_t > 0.0)) throw ValidationError("wall thickness must be positive");
    if (stories < 1) throw ValidationError("stories must be >= 1");
    if (!(hex_radius > 0.0)) throw ValidationError("hex_radius must be positive");
    if (lid_t < 0.0) throw ValidationError("lid thickness must be >= 0");
    if (!(seed_frac_a > 0.0 && seed_frac_b < 1.0 && seed_frac_a < seed_frac_b))
        throw ValidationError("seed fractions must satisfy 0 < a < b < 1");
    if (refine < 0 || refine > 4) throw ValidationError("refine must lie in [0, 4]");
    if (2.0 * hex_radius > footprint + 1e-12)
        throw ValidationError("polygon does not fit the lid footprint");
    for (double v : {footprint, hex_radius, beta, h, wall_t, lid_t, seed_frac_a, seed_frac_b})
        if (!std::isfinite(v)) throw ValidationError("non-finite parameter");
}

std::vector<Vec2> base_hexagon(const OrigamiParams& p) {
    p.validate();
    std::vector<Vec2> pts(p.n);
    for (int k = 0; k < p.n; ++k) {
        const double a = 2.0 * kPi * k / p.n;
        pts[k] = Vec2(p.hex_radius * std::cos(a), p.hex_radius * std::sin(a));
    }
    return pts;
}

Vec3 rotate_lift(const Vec3& pt, double beta_deg, double h) {
    return rotate_z(pt, deg2rad(beta_deg)) + Vec3(0, 0, h);
}

std::vector<Vec3> rotate_lift(const std::vector<Vec2>& pts, double beta_deg, double h) {
    std::vector<Vec3> out;
    out.reserve(pts.size());
    for (const auto& q : pts) out.push_back(rotate_lift(Vec3(q.x(), q.y(), 0.0), beta_deg, h));
    return out;
}

namespace {

struct SeedPoints {
    Vec3 p1, p2;  // seed points on side 0..1, z = 0
    Vec3 m1, m2;  // their rotated-lifted images, z = h
    Vec3 q1, qm1; // next sector's p1 / m1
};

SeedPoints seed_points(const OrigamiParams& p) {
    const double step = 2.0 * kPi / p.n;
    const Vec3 v0(p.hex_radius, 0.0, 0.0);
    const Vec3 v1 = rotate_z(v0, step);
    SeedPoints s;
    s.p1 = v0 + p.seed_frac_a * (v1 - v0);
    s.p2 = v0 + p.seed_frac_b * (v1 - v0);
    s.m1 = rotate_lift(s.p1, p.beta, p.h);
    s.m2 = rotate_lift(s.p2, p.beta, p.h);
    s.q1 = rotate_z(s.p1, step);
    s.qm1 = rotate_z(s.m1, step);
    return s;
}

}  // namespace

std::vector<SoupTri> build_unit(const OrigamiParams& p) {
    const SeedPoints s = seed_points(p);
    if ((s.p2 - s.p1).norm() < 1e-12 * std::max(1.0, p.hex_radius))
        throw GeometryError("coincident seed points");
    // F1/F2 split the seed quad along its short diagonal (p2, m1).
    SoupTri f1{{s.p1, s.p2, s.m1},
               {EdgeClass::Boundary, EdgeClass::Fold, EdgeClass::Fold},
               {FaceKind::PanelA, 0, 0, false}};
    SoupTri f2{{s.p2, s.m2, s.m1},
               {EdgeClass::Fold, EdgeClass::Fold, EdgeClass::Fold},
               {FaceKind::PanelB, 0, 0, false}};
    return {f1, f2};
}

std::vector<SoupTri> bridge_unit(const OrigamiParams& p) {
    const SeedPoints s = seed_points(p);
    SoupTri c1{{s.p2, s.q1, s.m2},
               {EdgeClass::Boundary, EdgeClass::Facet, EdgeClass::Fold},
               {FaceKind::BridgeA, 0, 0, false}};
    SoupTri c2{{s.q1, s.qm1, s.m2},
               {EdgeClass::Fold, EdgeClass::Fold, EdgeClass::Facet},
               {FaceKind::BridgeB, 0, 0, false}};
    return {c1, c2};
}

std::vector<SoupTri> mirror_unit(const std::vector<SoupTri>& faces, double h) {
    std::vector<SoupTri> out = faces;
    out.reserve(2 * faces.size());
    for (const auto& f : faces) {
        SoupTri m;
        // Reflect across z = h, then swap two vertices to restore winding.
        const Vec3 r0(f.v[0].x(), f.v[0].y(), 2.0 * h - f.v[0].z());
        const Vec3 r1(f.v[1].x(), f.v[1].y(), 2.0 * h - f.v[1].z());
        const Vec3 r2(f.v[2].x(), f.v[2].y(), 2.0 * h - f.v[2].z());
        m.v = {r0, r2, r1};
        m.ec = {f.ec[2], f.ec[1], f.ec[0]};
        m.tag = f.tag;
        m.tag.upper = true;
        out.push_back(m);
    }
    return out;
}

std::vector<SoupTri> circular_array(const std::vector<SoupTri>& faces, int n) {
    std::vector<SoupTri> out;
    out.reserve(faces.size() * static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * kPi * k / n;
        for (const auto& f : faces) {
            SoupTri g = transform(f, a, 0.0);
            g.tag.sector = k;
            out.push_back(g);
        }
    }
    return out;
}

std::vector<SoupTri> linear_array(const std::vector<SoupTri>& faces, int stories, double pitch) {
    std::vector<SoupTri> out;
    out.reserve(faces.size() * static_cast<std::size_t>(stories));
    for (int j = 0; j < stories; ++j) {
        for (const auto& f : faces) {
            SoupTri g = transform(f, 0.0, pitch * j);
            g.tag.story = j;
            out.push_back(g);
        }
    }
    return out;
}

namespace {

EdgeClass merge_class(EdgeClass a, EdgeClass b) {
    if (a == b) return a;
    if (a == EdgeClass::Boundary && b == EdgeClass::Lid) return EdgeClass::Boundary;
    if (b == EdgeClass::Boundary && a == EdgeClass::Lid) return EdgeClass::Boundary;
    // Rim authoring loses against an interior crease class.
    if (a == EdgeClass::Boundary) return b;
    if (b == EdgeClass::Boundary) return a;
    throw TopologyError("conflicting edge classes at shared edge");
}

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

int find_or_add_edge(FoldMesh& m, std::unordered_map<std::uint64_t, int>& map, int a, int b,
                     EdgeClass cls, int face) {
    const auto key = edge_key(a, b);
    auto it = map.find(key);
    if (it == map.end()) {
        MeshEdge e;
        e.a = std::min(a, b);
        e.b = std::max(a, b);
        e.cls = cls;
        e.faces[0] = face;
        e.face_count = 1;
        m.edges.push_back(e);
        map.emplace(key, static_cast<int>(m.edges.size()) - 1);
        return static_cast<int>(m.edges.size()) - 1;
    }
    MeshEdge& e = m.edges[it->second];
    e.cls = merge_class(e.cls, cls);
    if (e.face_count < 2) e.faces[e.face_count] = face;
    e.face_count++;
    return it->second;
}

/// Spatial hash welder; tolerance defaults to 1e-6 of the coordinate scale.
class VertexWelder {
public:
    explicit VertexWelder(double tol) : tol_(tol) {}

    int add(std::vector<Vec3>& verts, const Vec3& p) {
        const long ix = cell(p.x()), iy = cell(p.y()), iz = cell(p.z());
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy)
                for (long dz = -1; dz <= 1; ++dz) {
                    auto it = cells_.find(key(ix + dx, iy + dy, iz + dz));
                    if (it == cells_.end()) continue;
                    for (int id : it->second)
                        if ((verts[id] - p).norm() <= tol_) return id;
                }
        verts.push_back(p);
        const int id = static_cast<int>(verts.size()) - 1;
        cells_[key(ix, iy, iz)].push_back(id);
        return id;
    }

private:
    long cell(double x) const { return static_cast<long>(std::floor(x / (2.0 * tol_))); }
    static std::uint64_t key(long x, long y, long z) {
        auto h = static_cast<std::uint64_t>(x) * 73856093ull;
        h ^= static_cast<std::uint64_t>(y) * 19349663ull;
        h ^= static_cast<std::uint64_t>(z) * 83492791ull;
        return h;
    }
    double tol_;
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
};

void rebuild_edges(FoldMesh& m, const std::vector<EdgeClass>* authored) {
    // authored[3*f + i] = class of edge (face[f][i], face[f][i+1]); null keeps
    // existing classes by edge lookup.
    std::unordered_map<std::uint64_t, EdgeClass> old_cls;
    if (!authored)
        for (const auto& e : m.edges) old_cls[edge_key(e.a, e.b)] = e.cls;
    m.edges.clear();
    std::unordered_map<std::uint64_t, int> map;
    for (int f = 0; f < static_cast<int>(m.faces.size()); ++f) {
        for (int i = 0; i < 3; ++i) {
            const int a = m.faces[f][i], b = m.faces[f][(i + 1) % 3];
            EdgeClass cls = EdgeClass::Boundary;
            if (authored)
                cls = (*authored)[3 * f + i];
            else if (auto it = old_cls.find(edge_key(a, b)); it != old_cls.end())
                cls = it->second;
            find_or_add_edge(m, map, a, b, cls, f);
        }
    }
}

/// Makes face windings consistent across shared edges, then flips the whole
/// mesh if it is inside-out (signed volume for closed meshes, radial normal
/// heuristic for open bands).
void orient_consistently(FoldMesh& m) {
    const int nf = static_cast<int>(m.faces.size());
    if (nf == 0) return;

    std::unordered_map<std::uint64_t, std::vector<int>> edge_faces;
    for (int f = 0; f < nf; ++f)
        for (int i = 0; i < 3; ++i)
            edge_faces[edge_key(m.faces[f][i], m.faces[f][(i + 1) % 3])].push_back(f);

    auto traverses = [&](int f, int a, int b) {
        for (int i = 0; i < 3; ++i)
            if (m.faces[f][i] == a && m.faces[f][(i + 1) % 3] == b) return true;
        return false;
    };

    std::vector<char> visited(nf, 0);
    for (int seed = 0; seed < nf; ++seed) {
        if (visited[seed]) continue;
        std::queue<int> q;
        q.push(seed);
        visited[seed] = 1;
        while (!q.empty()) {
            const int f = q.front();
            q.pop();
            for (int i = 0; i < 3; ++i) {
                const int a = m.faces[f][i], b = m.faces[f][(i + 1) % 3];
                for (int g : edge_faces[edge_key(a, b)]) {
                    if (g == f || visited[g]) continue;
                    if (traverses(g, a, b)) std::swap(m.faces[g][1], m.faces[g][2]);
                    visited[g] = 1;
                    q.push(g);
                }
            }
        }
    }

    double score = 0.0;
    if (m.watertight()) {
        for (int f = 0; f < nf; ++f) {
            const Vec3& a = m.vertices[m.faces[f][0]];
            const Vec3& b = m.vertices[m.faces[f][1]];
            const Vec3& c = m.vertices[m.faces[f][2]];
            score += a.dot(b.cross(c));  // 6x signed volume
        }
    } else {
        for (int f = 0; f < nf; ++f) {
            Vec3 r = m.face_centroid(f);
            r.z() = 0.0;
            score += m.face_area(f) * m.face_normal(f).dot(r);
        }
    }
    if (score < 0.0)
        for (auto& fc : m.faces) std::swap(fc[1], fc[2]);
}

}  // namespace

FoldMesh weld(const std::vector<SoupTri>& soup, double tol) {
    double scale = 0.0;
    for (const auto& f : soup)
        for (const auto& v : f.v) scale = std::max(scale, v.cwiseAbs().maxCoeff());
    if (tol < 0.0) tol = std::max(1e-9, 1e-6 * scale);

    FoldMesh m;
    VertexWelder welder(tol);
    std::vector<EdgeClass> authored;
    authored.reserve(soup.size() * 3);
    for (const auto& f : soup) {
        std::array<int, 3> idx{};
        for (int i = 0; i < 3; ++i) idx[i] = welder.add(m.vertices, f.v[i]);
        if (idx[0] == idx[1] || idx[1] == idx[2] || idx[2] == idx[0])
            throw GeometryError("degenerate face after welding");
        m.faces.push_back(idx);
        m.tags.push_back(f.tag);
        for (int i = 0; i < 3; ++i) authored.push_back(f.ec[i]);
    }
    rebuild_edges(m, &authored);

    // Edges authored as rim by both faces are story-interface creases.
    for (auto& e : m.edges)
        if (e.cls == EdgeClass::Boundary && e.face_count == 2) e.cls = EdgeClass::Fold;

    orient_consistently(m);
    rebuild_edges(m, nullptr);
    return m;
}

FoldMesh assemble_wall(const OrigamiParams& p, StackStyle style) {
    p.validate();
    std::vector<SoupTri> unit = build_unit(p);
    {
        auto bridge = bridge_unit(p);
        unit.insert(unit.end(), bridge.begin(), bridge.end());
    }

    std::vector<SoupTri> soup;
    if (style == StackStyle::Mirrored) {
        soup = linear_array(circular_array(mirror_unit(unit, p.h), p.n), p.stories, 2.0 * p.h);
    } else {
        // Same half-bands, restacked with cumulative rotation instead of a
        // reflection; total height matches the mirrored build.
        const auto band = circular_array(unit, p.n);
        const double beta_rad = deg2rad(p.beta);
        for (int layer = 0; layer < 2 * p.stories; ++layer) {
            for (const auto& f : band) {
                SoupTri g = transform(f, beta_rad * layer, p.h * layer);
                g.tag.story = layer / 2;
                g.tag.upper = (layer % 2) != 0;
                soup.push_back(g);
            }
        }
    }
    return weld(soup);
}

namespace {

std::vector<std::vector<int>> boundary_loops(const FoldMesh& m) {
    std::unordered_map<int, std::vector<int>> adj;
    for (const auto& e : m.edges) {
        if (e.face_count != 1) continue;
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    for (auto& [v, nbrs] : adj) std::sort(nbrs.begin(), nbrs.end());

    std::vector<std::vector<int>> loops;
    std::vector<char> used(m.vertices.size(), 0);
    for (int start = 0; start < static_cast<int>(m.vertices.size()); ++start) {
        auto it = adj.find(start);
        if (it == adj.end() || used[start]) continue;
        std::vector<int> loop;
        int prev = -1, cur = start;
        while (true) {
            loop.push_back(cur);
            used[cur] = 1;
            const auto& nn = adj[cur];
            if (nn.size() != 2) throw TopologyError("non-manifold rim");
            const int next = (nn[0] == prev) ? nn[1] : nn[0];
            prev = cur;
            cur = next;
            if (cur == start) break;
        }
        loops.push_back(std::move(loop));
    }
    return loops;
}

double loop_mean_z(const FoldMesh& m, const std::vector<int>& loop) {
    double z = 0.0;
    for (int id : loop) z += m.vertices[id].z();
    return z / loop.size();
}

void make_ccw(const FoldMesh& m, std::vector<int>& loop) {
    double area2 = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const Vec3& a = m.vertices[loop[i]];
        const Vec3& b = m.vertices[loop[(i + 1) % loop.size()]];
        area2 += a.x() * b.y() - b.x() * a.y();
    }
    if (area2 < 0.0) std::reverse(loop.begin(), loop.end());
}

/// One strip triangle between the two loops, in loop-local indices.
struct ZipStep {
    int i0, i1;  // inner vertex and its successor
    int j0, j1;  // outer vertex and its successor
    bool advance_inner;
};

/// Merges two angularly sorted CCW cycles (both star-shaped about the axis)
/// into a closed strip of inner.size() + outer.size() triangles.
std::vector<ZipStep> zip_loops(const std::vector<double>& inner_ang,
                               const std::vector<double>& outer_ang) {
    const int ni = static_cast<int>(inner_ang.size());
    const int no = static_cast<int>(outer_ang.size());

    // Outer walk starts at the vertex angularly just below inner[0].
    int jstart = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < no; ++j) {
        double d = outer_ang[j] - inner_ang[0];
        while (d > 0.0) d -= 2.0 * kPi;
        if (d > best) {
            best = d;
            jstart = j;
        }
    }

    auto positive_step = [](double d) {
        while (d <= 0.0) d += 2.0 * kPi;
        while (d > 2.0 * kPi) d -= 2.0 * kPi;
        return d;
    };

    std::vector<double> ui(ni + 1), uo(no + 1);
    ui[0] = inner_ang[0];
    for (int k = 1; k < ni; ++k)
        ui[k] = ui[k - 1] + positive_step(inner_ang[k] - inner_ang[k - 1]);
    ui[ni] = ui[0] + 2.0 * kPi;
    uo[0] = ui[0] + best;
    for (int k = 1; k < no; ++k)
        uo[k] = uo[k - 1] + positive_step(outer_ang[(jstart + k) % no] -
                                          outer_ang[(jstart + k - 1) % no]);
    uo[no] = uo[0] + 2.0 * kPi;

    std::vector<ZipStep> steps;
    int i = 0, j = 0;
    while (i < ni || j < no) {
        ZipStep s;
        s.i0 = i % ni;
        s.i1 = (i + 1) % ni;
        s.j0 = (jstart + j) % no;
        s.j1 = (jstart + j + 1) % no;
        s.advance_inner = (j >= no) || (i < ni && ui[i + 1] <= uo[j + 1]);
        steps.push_back(s);
        if (s.advance_inner)
            ++i;
        else
            ++j;
    }
    return steps;
}

void append_face(FoldMesh& m, int a, int b, int c, const FaceTag& tag) {
    if (a == b || b == c || c == a) throw GeometryError("degenerate lid face");
    m.faces.push_back({a, b, c});
    m.tags.push_back(tag);
}

}  // namespace

bool FoldMesh::watertight() const {
    if (edges.empty()) return false;
    return std::all_of(edges.begin(), edges.end(),
                       [](const MeshEdge& e) { return e.face_count == 2; });
}

std::pair<Vec3, Vec3> FoldMesh::bounding_box() const {
    Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 hi = -lo;
    for (const auto& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return {lo, hi};
}

double FoldMesh::face_area(int f) const {
    const Vec3& a = vertices[faces[f][0]];
    const Vec3& b = vertices[faces[f][1]];
    const Vec3& c = vertices[faces[f][2]];
    return 0.5 * (b - a).cross(c - a).norm();
}

Vec3 FoldMesh::face_normal(int f) const {
    const Vec3& a = vertices[faces[f][0]];
    const Vec3& b = vertices[faces[f][1]];
    const Vec3& c = vertices[faces[f][2]];
    const Vec3 n = (b - a).cross(c - a);
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

Vec3 FoldMesh::face_centroid(int f) const {
    return (vertices[faces[f][0]] + vertices[faces[f][1]] + vertices[faces[f][2]]) / 3.0;
}

std::vector<Vec3> FoldMesh::wall_vertices() const {
    std::vector<char> used(vertices.size(), 0);
    for (int f = 0; f < static_cast<int>(faces.size()); ++f)
        if (is_wall_face(f))
            for (int i : faces[f]) used[i] = 1;
    std::vector<Vec3> out;
    for (std::size_t i = 0; i < vertices.size(); ++i)
        if (used[i]) out.push_back(vertices[i]);
    return out;
}

FoldMesh add_lids(FoldMesh mesh, const OrigamiParams& p) {
    if (p.lid_t <= 0.0) return mesh;  // no lids: tube stays open

    auto loops = boundary_loops(mesh);
    if (loops.size() != 2) throw TopologyError("expected exactly two open rims");
    if (loop_mean_z(mesh, loops[0]) > loop_mean_z(mesh, loops[1])) std::swap(loops[0], loops[1]);

    const double half = 0.5 * p.footprint;
    const FaceTag skirt_tag{FaceKind::LidSkirt, -1, -1, false};
    const FaceTag cap_tag{FaceKind::LidCap, -1, -1, false};

    for (int side = 0; side < 2; ++side) {
        auto loop = loops[side];
        make_ccw(mesh, loop);
        const double z_rim = loop_mean_z(mesh, loop);
        const double z_plate = (side == 0) ? z_rim - p.lid_t : z_rim + p.lid_t;

        std::vector<int> corners(4);
        const double cx[4] = {half, -half, -half, half};
        const double cy[4] = {half, half, -half, -half};
        for (int k = 0; k < 4; ++k) {
            mesh.vertices.emplace_back(cx[k], cy[k], z_plate);
            corners[k] = static_cast<int>(mesh.vertices.size()) - 1;
        }

        std::vector<double> ring_ang(loop.size()), sq_ang(4);
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Vec3& v = mesh.vertices[loop[i]];
            ring_ang[i] = std::atan2(v.y(), v.x());
        }
        for (int k = 0; k < 4; ++k) sq_ang[k] = std::atan2(cy[k], cx[k]);

        for (const auto& s : zip_loops(ring_ang, sq_ang)) {
            if (s.advance_inner)
                append_face(mesh, loop[s.i0], loop[s.i1], corners[s.j0], skirt_tag);
            else
                append_face(mesh, loop[s.i0], corners[s.j1], corners[s.j0], skirt_tag);
        }
        // Plate cap, fanned from the first corner.
        append_face(mesh, corners[0], corners[1], corners[2], cap_tag);
        append_face(mesh, corners[0], corners[2], corners[3], cap_tag);

        auto& group = (side == 0) ? mesh.bottom_lid_nodes : mesh.top_lid_nodes;
        group = loop;
        group.insert(group.end(), corners.begin(), corners.end());

        if (side == 0)
            mesh.vent = VentMarker{Vec3(0.0, 0.0, z_plate), 0.05 * p.footprint};
    }

    rebuild_edges(mesh, nullptr);
    // Newly created lid edges come back as Boundary; reclassify.
    for (auto& e : mesh.edges) {
        if (e.cls != EdgeClass::Boundary) continue;
        const bool wall_a = e.face_count > 0 && mesh.is_wall_face(e.faces[0]);
        const bool wall_b = e.face_count > 1 && mesh.is_wall_face(e.faces[1]);
        if (!wall_a && !wall_b) e.cls = EdgeClass::Lid;
    }
    orient_consistently(mesh);
    rebuild_edges(mesh, nullptr);

    if (!mesh.watertight()) throw TopologyError("lid construction left open edges");
    return mesh;
}

FoldMesh refine_mesh(const FoldMesh& mesh) {
    FoldMesh out;
    out.vertices = mesh.vertices;
    out.vent = mesh.vent;

    std::unordered_map<std::uint64_t, int> midpoint;
    std::unordered_map<std::uint64_t, EdgeClass> parent_cls;
    for (const auto& e : mesh.edges) parent_cls[edge_key(e.a, e.b)] = e.cls;

    auto mid = [&](int a, int b) {
        const auto key = edge_key(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        out.vertices.push_back(0.5 * (out.vertices[a] + out.vertices[b]));
        const int id = static_cast<int>(out.vertices.size()) - 1;
        midpoint.emplace(key, id);
        return id;
    };

    std::vector<EdgeClass> authored;
    auto emit = [&](int a, int b, int c, EdgeClass eab, EdgeClass ebc, EdgeClass eca,
                    const FaceTag& tag) {
        out.faces.push_back({a, b, c});
        out.tags.push_back(tag);
        authored.push_back(eab);
        authored.push_back(ebc);
        authored.push_back(eca);
    };

    for (int f = 0; f < static_cast<int>(mesh.faces.size()); ++f) {
        const auto& fc = mesh.faces[f];
        const FaceTag& tag = mesh.tags[f];
        const EdgeClass interior = tag.story < 0 ? EdgeClass::Lid : EdgeClass::Facet;
        const int m01 = mid(fc[0], fc[1]), m12 = mid(fc[1], fc[2]), m20 = mid(fc[2], fc[0]);
        const EdgeClass c01 = parent_cls.at(edge_key(fc[0], fc[1]));
        const EdgeClass c12 = parent_cls.at(edge_key(fc[1], fc[2]));
        const EdgeClass c20 = parent_cls.at(edge_key(fc[2], fc[0]));
        emit(fc[0], m01, m20, c01, interior, c20, tag);
        emit(m01, fc[1], m12, c01, c12, interior, tag);
        emit(m20, m12, fc[2], interior, c12, c20, tag);
        emit(m01, m12, m20, interior, interior, interior, tag);
    }

    rebuild_edges(out, &authored);

    // Rigid lid groups: every vertex touched by a lid face, plus the rim.
    std::vector<char> on_lid(out.vertices.size(), 0);
    for (int f = 0; f < static_cast<int>(out.faces.size()); ++f)
        if (!out.is_wall_face(f))
            for (int v : out.faces[f]) on_lid[v] = 1;
    if (!mesh.bottom_lid_nodes.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto& v : out.vertices) {
            lo = std::min(lo, v.z());
            hi = std::max(hi, v.z());
        }
        const double zc = 0.5 * (lo + hi);
        for (int v = 0; v < static_cast<int>(out.vertices.size()); ++v) {
            if (!on_lid[v]) continue;
            if (out.vertices[v].z() < zc)
                out.bottom_lid_nodes.push_back(v);
            else
                out.top_lid_nodes.push_back(v);
        }
    }
    return out;
}

FoldMesh assemble(const OrigamiParams& p, StackStyle style) {
    FoldMesh mesh = add_lids(assemble_wall(p, style), p);
    for (int level = 0; level < p.refine; ++level) mesh = refine_mesh(mesh);
    return mesh;
}

}  // namespace foldsense
