#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace sega {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;  // row-major: m[row][col]
using Index3 = std::array<std::int64_t, 3>;
using Dims3 = std::array<std::size_t, 3>;

/// Physical layout shared by images and masks. Direction columns are the
/// world-space unit vectors of the three index axes.
struct Geometry {
    Dims3 dims{1, 1, 1};
    Vec3 spacing{1.0, 1.0, 1.0};
    Vec3 origin{0.0, 0.0, 0.0};
    Mat3 direction{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};

    std::size_t voxel_count() const { return dims[0] * dims[1] * dims[2]; }

    std::size_t linear(std::size_t i, std::size_t j, std::size_t k) const {
        return i + dims[0] * (j + dims[1] * k);
    }
    Index3 unravel(std::size_t idx) const {
        const auto i = idx % dims[0];
        const auto rest = idx / dims[0];
        return {static_cast<std::int64_t>(i), static_cast<std::int64_t>(rest % dims[1]),
                static_cast<std::int64_t>(rest / dims[1])};
    }
    bool contains(const Index3& p) const {
        for (int a = 0; a < 3; ++a)
            if (p[a] < 0 || p[a] >= static_cast<std::int64_t>(dims[a])) return false;
        return true;
    }

    /// Checks positive dims/spacing and orthonormal direction (tolerance 1e-6).
    /// Throws InvalidGeometry.
    void validate() const;

    /// Exact field equality: same dims, spacing, origin and direction.
    bool same_as(const Geometry& other, double tol = 1e-9) const;

    /// World-space length of the field of view diagonal, sqrt(sum (dims*spacing)^2).
    double extent_diagonal_mm() const;
};

enum class ScalarType { UInt8, Int16, UInt16, Float32 };

std::string_view scalar_type_name(ScalarType t);
std::size_t scalar_type_size(ScalarType t);

/// Dense scalar volume. Values are held as float, which represents every
/// supported on-disk type exactly; `type` records the storage type.
struct VoxelGrid {
    Geometry geometry;
    ScalarType type = ScalarType::Float32;
    std::vector<float> values;

    VoxelGrid() = default;
    VoxelGrid(Geometry g, ScalarType t);

    float& at(std::size_t i, std::size_t j, std::size_t k) { return values[geometry.linear(i, j, k)]; }
    float at(std::size_t i, std::size_t j, std::size_t k) const { return values[geometry.linear(i, j, k)]; }

    void validate() const;
};

/// Binary mask; every value is 0 or 1.
struct LabelMask {
    Geometry geometry;
    std::vector<std::uint8_t> values;

    LabelMask() = default;
    explicit LabelMask(Geometry g);

    std::uint8_t& at(std::size_t i, std::size_t j, std::size_t k) { return values[geometry.linear(i, j, k)]; }
    std::uint8_t at(std::size_t i, std::size_t j, std::size_t k) const { return values[geometry.linear(i, j, k)]; }
    bool at(const Index3& p) const {
        return geometry.contains(p) && values[geometry.linear(p[0], p[1], p[2])] != 0;
    }

    std::size_t count() const;
    bool empty() const { return count() == 0; }

    void validate() const;
};

/// world = origin + direction * (spacing .* index)
Vec3 index_to_world(const Geometry& g, const Vec3& index);
Vec3 world_to_index(const Geometry& g, const Vec3& world);

/// Re-orthonormalizes `m` (columns) when it is within `tol` of orthonormal,
/// otherwise throws InvalidGeometry.
Mat3 orthonormalize_direction(const Mat3& m, double tol = 1e-6);

double determinant(const Mat3& m);

}  // namespace sega
