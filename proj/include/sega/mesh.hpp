#pragma once

#include "sega/ranking.hpp"
#include "sega/volume.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace sega {

using Triangle = std::array<std::uint32_t, 3>;
using Tet = std::array<std::uint32_t, 4>;

struct SurfaceMesh {
    std::vector<Vec3> vertices;  ///< world mm
    std::vector<Triangle> triangles;
};

struct TetMesh {
    std::vector<Vec3> nodes;
    std::vector<Tet> tets;
};

/// Iso-0.5 surface of the binary field sampled at voxel centres. The mask is
/// zero-padded by one voxel so the result is closed. Vertices sit on lattice
/// edges and are welded by edge id; triangles face outward.
/// Throws EmptyMask.
SurfaceMesh marching_cubes(const LabelMask& mask);

/// Two-coefficient (shrink/inflate) Laplacian smoothing. Each iteration is a
/// pass with factor `lambda` followed by one with mu, where
/// 1/lambda + 1/mu = pass_band.
struct SmoothOptions {
    int iterations = 25;
    double lambda = 0.5;
    double pass_band = 0.1;
};

SurfaceMesh smooth(const SurfaceMesh& mesh, const SmoothOptions& options = {});

struct WatertightReport {
    bool is_watertight = false;
    std::size_t boundary_edges = 0;     ///< edges used by one triangle
    std::size_t nonmanifold_edges = 0;  ///< edges used by more than two triangles
    std::size_t misoriented_edges = 0;  ///< two-triangle edges traversed in the same direction
    std::size_t component_count = 0;
    bool self_intersections_checked = false;
    std::size_t self_intersections = 0;  ///< intersecting triangle pairs (when checked)
};

/// Combinatorial edge audit; with `check_self_intersections` also scans
/// non-adjacent triangle pairs for crossings.
WatertightReport watertight_check(const SurfaceMesh& mesh, bool check_self_intersections = false);

/// Signed enclosed volume (divergence theorem); positive for outward faces.
double enclosed_volume(const SurfaceMesh& mesh);

/// Drops triangles with repeated indices or zero area. Returns removed count.
std::size_t remove_degenerate_triangles(SurfaceMesh& mesh);

/// sqrt(2) * J / (largest product of the three edge lengths at a corner),
/// J = (p1-p0) . ((p2-p0) x (p3-p0)). Regular tet = 1, inverted < 0,
/// degenerate = 0. Odd vertex permutations negate the value.
double scaled_jacobian(const std::array<Vec3, 4>& tet);

struct MeshQualityReport {
    std::vector<double> scaled_jacobians;
    RobustStats stats;
    std::size_t invalid_count = 0;  ///< elements with SJ < 0
    std::size_t element_count() const { return scaled_jacobians.size(); }
};

/// Throws DomainError for a mesh without elements.
MeshQualityReport tet_quality_report(const TetMesh& mesh);

/// TetGen-style .node/.ele reader. The index base (0 or 1) comes from the
/// first node index. Throws CorruptFile or IoError.
TetMesh read_tetmesh(const std::filesystem::path& node_path, const std::filesystem::path& ele_path);
void write_tetmesh(const TetMesh& mesh, const std::filesystem::path& node_path, const std::filesystem::path& ele_path,
                   int index_base = 0);

/// Binary STL: 80-byte header, uint32 count, 50 bytes per triangle.
void write_stl(const SurfaceMesh& mesh, const std::filesystem::path& path);

}  // namespace sega
