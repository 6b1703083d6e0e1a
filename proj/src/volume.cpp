#include "sega/volume.hpp"

#include "sega/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace sega {

namespace {

Vec3 column(const Mat3& m, int c) { return {m[0][c], m[1][c], m[2][c]}; }

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

}  // namespace

void Geometry::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] == 0) throw InvalidGeometry("zero-sized axis");
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
            throw InvalidGeometry(fmt::format("spacing[{}] must be > 0, got {}", a, spacing[a]));
        if (!std::isfinite(origin[a])) throw InvalidGeometry("non-finite origin");
    }
    for (int a = 0; a < 3; ++a) {
        const auto ca = column(direction, a);
        if (std::abs(std::sqrt(dot(ca, ca)) - 1.0) > 1e-6)
            throw InvalidGeometry(fmt::format("direction column {} is not unit norm", a));
        for (int b = a + 1; b < 3; ++b)
            if (std::abs(dot(ca, column(direction, b))) > 1e-6)
                throw InvalidGeometry("direction columns are not orthogonal");
    }
}

bool Geometry::same_as(const Geometry& other, double tol) const {
    if (dims != other.dims) return false;
    for (int a = 0; a < 3; ++a) {
        if (std::abs(spacing[a] - other.spacing[a]) > tol) return false;
        if (std::abs(origin[a] - other.origin[a]) > tol) return false;
        for (int b = 0; b < 3; ++b)
            if (std::abs(direction[a][b] - other.direction[a][b]) > tol) return false;
    }
    return true;
}

double Geometry::extent_diagonal_mm() const {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
        const double len = static_cast<double>(dims[a]) * spacing[a];
        s += len * len;
    }
    return std::sqrt(s);
}

std::string_view scalar_type_name(ScalarType t) {
    switch (t) {
        case ScalarType::UInt8: return "uint8";
        case ScalarType::Int16: return "int16";
        case ScalarType::UInt16: return "uint16";
        case ScalarType::Float32: return "float";
    }
    return "unknown";
}

std::size_t scalar_type_size(ScalarType t) {
    switch (t) {
        case ScalarType::UInt8: return 1;
        case ScalarType::Int16:
        case ScalarType::UInt16: return 2;
        case ScalarType::Float32: return 4;
    }
    return 0;
}

VoxelGrid::VoxelGrid(Geometry g, ScalarType t)
    : geometry(g), type(t), values(g.voxel_count(), 0.0f) {}

void VoxelGrid::validate() const {
    geometry.validate();
    if (values.size() != geometry.voxel_count())
        throw InvalidGeometry("value count does not match dims");
}

LabelMask::LabelMask(Geometry g) : geometry(g), values(g.voxel_count(), 0) {}

std::size_t LabelMask::count() const {
    return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](std::uint8_t v) { return v != 0; }));
}

void LabelMask::validate() const {
    geometry.validate();
    if (values.size() != geometry.voxel_count())
        throw InvalidGeometry("value count does not match dims");
    if (std::any_of(values.begin(), values.end(), [](std::uint8_t v) { return v > 1; }))
        throw DomainError("label mask values must be 0 or 1");
}

Vec3 index_to_world(const Geometry& g, const Vec3& index) {
    Vec3 scaled{index[0] * g.spacing[0], index[1] * g.spacing[1], index[2] * g.spacing[2]};
    Vec3 w = g.origin;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) w[r] += g.direction[r][c] * scaled[c];
    return w;
}

Vec3 world_to_index(const Geometry& g, const Vec3& world) {
    // Orthonormal direction: inverse is the transpose.
    Vec3 d{world[0] - g.origin[0], world[1] - g.origin[1], world[2] - g.origin[2]};
    Vec3 idx{0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int r = 0; r < 3; ++r) s += g.direction[r][c] * d[r];
        idx[c] = s / g.spacing[c];
    }
    return idx;
}

Mat3 orthonormalize_direction(const Mat3& m, double tol) {
    std::array<Vec3, 3> cols{column(m, 0), column(m, 1), column(m, 2)};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(std::sqrt(dot(cols[a], cols[a])) - 1.0) > tol)
            throw InvalidGeometry(fmt::format("space direction {} is not unit norm", a));
        for (int b = a + 1; b < 3; ++b)
            if (std::abs(dot(cols[a], cols[b])) > tol)
                throw InvalidGeometry("space directions are not orthogonal");
    }
    // Modified Gram-Schmidt.
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < a; ++b) {
            const double p = dot(cols[a], cols[b]);
            for (int r = 0; r < 3; ++r) cols[a][r] -= p * cols[b][r];
        }
        const double n = std::sqrt(dot(cols[a], cols[a]));
        for (int r = 0; r < 3; ++r) cols[a][r] /= n;
    }
    Mat3 out{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) out[r][c] = cols[c][r];
    return out;
}

double determinant(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace sega
