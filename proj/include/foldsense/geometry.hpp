#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <vector>

namespace foldsense {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Design parameters of the mirrored-pair twist cell. Lengths in mm,
/// angles in degrees. Defaults reproduce the published 45.6 x 45.6 x 60.0
/// envelope (square lids of side `footprint`, `stories` mirrored pairs of
/// pitch 2h, lid slabs of thickness `lid_t` on both ends).
struct OrigamiParams {
    int n = 6;                  // polygon order
    double footprint = 45.6;    // lid square side
    double hex_radius = 14.0;   // polygon circumradius
    double beta = 75.0;         // fold rotation angle, degrees
    double h = 6.0;             // half-story offset
    int stories = 3;            // mirrored unit pairs
    double wall_t = 0.6;        // wall thickness (stiffness only; midsurface mesh)
    double lid_t = 12.0;        // lid slab thickness; 0 disables lids
    double seed_frac_a = 0.35;  // side fractions of the two seed points
    double seed_frac_b = 0.65;
    int refine = 1;             // midpoint subdivision levels of the final mesh

    void validate() const;  // throws ValidationError
};

enum class EdgeClass { Fold, Facet, Boundary, Lid };

struct MeshEdge {
    int a = -1, b = -1;  // vertex ids, a < b
    EdgeClass cls = EdgeClass::Boundary;
    int faces[2] = {-1, -1};
    int face_count = 0;
};

enum class FaceKind { PanelA, PanelB, BridgeA, BridgeB, LidSkirt, LidCap };

struct FaceTag {
    FaceKind kind = FaceKind::PanelA;
    int story = 0;       // -1 for lid faces
    int sector = 0;      // -1 for lid faces
    bool upper = false;  // mirrored half of the story
};

/// Vent opening on the bottom lid, kept as an annotation so the mesh stays
/// closed for the edge-incidence audits.
struct VentMarker {
    Vec3 center = Vec3::Zero();
    double radius = 0.0;
};

struct FoldMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<MeshEdge> edges;
    std::vector<FaceTag> tags;

    std::vector<int> bottom_lid_nodes;  // rim ring + lid plate, rigid group
    std::vector<int> top_lid_nodes;
    std::optional<VentMarker> vent;

    bool watertight() const;  // every edge shared by exactly two faces
    std::pair<Vec3, Vec3> bounding_box() const;
    double face_area(int f) const;
    Vec3 face_normal(int f) const;  // unit normal, zero if degenerate
    Vec3 face_centroid(int f) const;
    bool is_wall_face(int f) const { return tags[f].story >= 0; }

    /// Vertices referenced by wall (non-lid) faces; the lids are square and
    /// intentionally break the n-fold symmetry of the folded tube.
    std::vector<Vec3> wall_vertices() const;
};

/// Intermediate face soup carried through the construction steps; edge
/// classes are authored per face and merged when the soup is welded.
struct SoupTri {
    std::array<Vec3, 3> v;
    std::array<EdgeClass, 3> ec;  // class of edge (v[i], v[(i+1)%3])
    FaceTag tag;
};

std::vector<Vec2> base_hexagon(const OrigamiParams& p);

Vec3 rotate_lift(const Vec3& pt, double beta_deg, double h);
std::vector<Vec3> rotate_lift(const std::vector<Vec2>& pts, double beta_deg, double h);

/// The two seed panels connecting the seed points to their rotated-lifted
/// images (slab z in [0, h]).
std::vector<SoupTri> build_unit(const OrigamiParams& p);

/// Gap-closing panels between a sector and its rotated neighbour. The seed
/// panels alone tile only part of the band when the seed points sit strictly
/// inside a side, so each sector contributes one bridging quad, split by a
/// facet diagonal.
std::vector<SoupTri> bridge_unit(const OrigamiParams& p);

std::vector<SoupTri> mirror_unit(const std::vector<SoupTri>& faces, double h);
std::vector<SoupTri> circular_array(const std::vector<SoupTri>& faces, int n);
std::vector<SoupTri> linear_array(const std::vector<SoupTri>& faces, int stories, double pitch);

/// Mirrored: each story is a unit band plus its reflection (the inverted
/// pattern). Plain: the same band restacked with cumulative rotation and no
/// reflection; used for the inversion comparisons.
enum class StackStyle { Mirrored, Plain };

FoldMesh weld(const std::vector<SoupTri>& soup, double tol = -1.0);

FoldMesh assemble_wall(const OrigamiParams& p, StackStyle style = StackStyle::Mirrored);

/// Closes the open rims with square lid slabs (skirt ring + outer plate) and
/// records the vent marker. lid_t == 0 is a no-op (open tube).
FoldMesh add_lids(FoldMesh mesh, const OrigamiParams& p);

/// Midpoint 1:4 subdivision. Panels pick up interior facet creases so they
/// can bend; fold/boundary classes carry over to the split halves.
FoldMesh refine_mesh(const FoldMesh& mesh);

FoldMesh assemble(const OrigamiParams& p, StackStyle style = StackStyle::Mirrored);

}  // namespace foldsense
