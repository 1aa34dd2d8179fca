#pragma once

#include "foldsense/geometry.hpp"

#include <span>
#include <string>
#include <vector>

namespace foldsense {

/// Which opposing slanted faces of a story carry the plates. The valley
/// pairs put the plates on the two panels flanking a groove of the pattern
/// (they approach each other as the structure twists); ValleyA flanks the
/// second seed panel, ValleyB flanks the first bridging panel. FoldPair and
/// BridgePair use two panels sharing a crease; the mirror variants pair a
/// panel with its reflection across the story mid-plane.
enum class ElectrodePlacement {
    ValleyA,
    ValleyB,
    FoldPair,
    BridgePair,
    MirrorPair,
    BridgeMirrorPair,
};

ElectrodePlacement electrode_placement_from_string(const std::string& s);

struct ElectrodeSpec {
    int pairs = 1;
    ElectrodePlacement placement = ElectrodePlacement::ValleyA;
    double eps_r = 1.0;
    /// Electrode side length as a fraction of the carrier panel, shrunk
    /// toward the point where the pair meets.
    double electrode_frac = 1.0;
    /// Single documented calibration factor scaling the effective overlap
    /// area so C(0 deg, delta 0) matches the published baseline.
    double area_scale = 1.0;
    int story = -1;  // -1: middle story

    void validate() const;
};

/// One plate pair. Electrode corners are stored barycentrically on their
/// carrier faces so they ride along with the deformed mesh.
struct ElectrodePair {
    std::vector<int> faces_a, faces_b;                 // carrier face indices
    std::vector<std::array<Vec3, 3>> bary_a, bary_b;   // electrode corners per carrier
    double area = 0.0;                                 // undeformed electrode area, mm^2
    double eps_r = 1.0;
    double area_scale = 1.0;
    int sector = 0;
};

struct CapacitanceReading {
    double c_pf = 0.0;
    double gap_eff = 0.0;   // mm
    double overlap = 0.0;   // mm^2 (before the area_scale factor)
};

constexpr double kEps0PfPerMm = 8.8541878128e-3;

std::vector<ElectrodePair> electrode_placement(const FoldMesh& mesh, const ElectrodeSpec& spec);

/// Effective parallel-plate model on two triangles: area-weighted mean
/// point-to-plane distance and projected common area on the bisector plane.
CapacitanceReading plate_capacitance(std::span<const Vec3> tri_a, std::span<const Vec3> tri_b,
                                     double eps_r, double area_scale = 1.0);

CapacitanceReading pair_capacitance(const ElectrodePair& pair, const FoldMesh& mesh,
                                    std::span<const Vec3> positions);

struct CapCurvePoint {
    double theta_deg = 0.0;
    double delta_mm = 0.0;
    double c_total_pf = 0.0;
    std::vector<CapacitanceReading> per_pair;
    bool within_validity = true;
};

/// Capacitances over precomputed equilibrium states (pairs wired in
/// parallel, so they sum).
CapCurvePoint capacitance_at(const std::vector<ElectrodePair>& pairs, const FoldMesh& mesh,
                             std::span<const Vec3> positions, double theta_deg, double delta_mm);

/// Secant slope (C(theta_max) - C(0)) / theta_max in pF per degree.
double sensitivity(std::span<const CapCurvePoint> curve);

}  // namespace foldsense
