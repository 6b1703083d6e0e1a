#include "sega/augment.hpp"

#include "sega/errors.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace sega {

namespace {

constexpr double kRotationStdDeg = 5.0;
constexpr double kMaxDisplacementMm = 2.0;
constexpr double kBetaStd = 0.05;
constexpr double kMaxNoiseStd = 0.03;
constexpr double kUnitClamp = 1e-9;

// Resampling positions closer than this to a grid index are snapped onto it,
// so identity transforms reproduce the input bit for bit.
constexpr double kSnap = 1e-6;

double inverse_normal_cdf(double u) {
    static const boost::math::normal_distribution<double> standard;
    return boost::math::quantile(standard, std::clamp(u, kUnitClamp, 1.0 - kUnitClamp));
}

double snap(double x) {
    const double r = std::round(x);
    return std::abs(x - r) < kSnap ? r : x;
}

// Source index (fractional) for output voxel `out_idx`.
struct InverseMap {
    const Geometry& g;
    Vec3 centre;
    double cos_a, sin_a, shift_x;

    Vec3 operator()(const Vec3& out_idx) const {
        const auto x = index_to_world(g, out_idx);
        const double y0 = x[0] - centre[0] - shift_x;
        const double y1 = x[1] - centre[1];
        // Inverse rotation R(-alpha).
        const Vec3 src{cos_a * y0 + sin_a * y1 + centre[0], -sin_a * y0 + cos_a * y1 + centre[1], x[2]};
        auto s = world_to_index(g, src);
        for (auto& c : s) c = snap(c);
        return s;
    }
};

InverseMap make_inverse_map(const Geometry& g, const AugmentationParams& p) {
    const Vec3 mid{(static_cast<double>(g.dims[0]) - 1.0) / 2.0, (static_cast<double>(g.dims[1]) - 1.0) / 2.0,
                   (static_cast<double>(g.dims[2]) - 1.0) / 2.0};
    const double a = p.alpha_deg * std::numbers::pi / 180.0;
    return {g, index_to_world(g, mid), p.alpha_deg == 0.0 ? 1.0 : std::cos(a), p.alpha_deg == 0.0 ? 0.0 : std::sin(a),
            p.d_mm};
}

float trilinear(const VoxelGrid& img, const Vec3& s, float background) {
    const auto& d = img.geometry.dims;
    std::array<std::size_t, 3> lo{};
    std::array<double, 3> frac{};
    for (int a = 0; a < 3; ++a) {
        const double n = static_cast<double>(d[a]);
        if (s[a] < 0.0 || s[a] > n - 1.0) return background;
        const double f = std::floor(s[a]);
        lo[a] = static_cast<std::size_t>(f);
        frac[a] = s[a] - f;
    }
    double acc = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
        double w = 1.0;
        std::array<std::size_t, 3> idx = lo;
        for (int a = 0; a < 3; ++a) {
            if (corner & (1 << a)) {
                w *= frac[a];
                idx[a] += 1;
            } else {
                w *= 1.0 - frac[a];
            }
        }
        if (w == 0.0) continue;
        acc += w * static_cast<double>(img.at(idx[0], idx[1], idx[2]));
    }
    return static_cast<float>(acc);
}

}  // namespace

double AugmentationParams::gamma() const { return std::exp(beta); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double counter_normal(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t a = splitmix64(seed ^ splitmix64(counter));
    const std::uint64_t b = splitmix64(a);
    const double u1 = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

AugmentationParams sample_params(const std::array<double, kAugmentationFactors>& u, std::uint64_t noise_seed) {
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!(u[i] >= 0.0 && u[i] <= 1.0))
            throw DomainError(fmt::format("unit coordinate {} = {} is outside [0,1]", i + 1, u[i]));
    AugmentationParams p;
    p.unit_point = u;
    p.noise_seed = noise_seed;
    p.alpha_deg = kRotationStdDeg * inverse_normal_cdf(u[0]);
    p.d_mm = kMaxDisplacementMm * u[1];
    p.beta = kBetaStd * inverse_normal_cdf(u[2]);
    p.sigma = kMaxNoiseStd * u[3];
    return p;
}

std::pair<VoxelGrid, LabelMask> apply_geometric(const VoxelGrid& image, const LabelMask& mask,
                                                const AugmentationParams& params) {
    if (!image.geometry.same_as(mask.geometry)) throw GeometryMismatch("image and mask geometries differ");
    const auto& g = image.geometry;
    const auto inv = make_inverse_map(g, params);

    VoxelGrid out_img(g, ScalarType::Float32);
    LabelMask out_mask(g);
    for (std::size_t k = 0; k < g.dims[2]; ++k)
        for (std::size_t j = 0; j < g.dims[1]; ++j)
            for (std::size_t i = 0; i < g.dims[0]; ++i) {
                const auto s = inv(Vec3{static_cast<double>(i), static_cast<double>(j), static_cast<double>(k)});
                const auto lin = g.linear(i, j, k);
                out_img.values[lin] = trilinear(image, s, 0.0f);
                const Index3 nn{static_cast<std::int64_t>(std::floor(s[0] + 0.5)),
                                static_cast<std::int64_t>(std::floor(s[1] + 0.5)),
                                static_cast<std::int64_t>(std::floor(s[2] + 0.5))};
                out_mask.values[lin] = mask.at(nn) ? 1 : 0;
            }
    return {std::move(out_img), std::move(out_mask)};
}

VoxelGrid apply_intensity(const VoxelGrid& image, const AugmentationParams& params) {
    constexpr double tol = 1e-6;
    for (const float v : image.values)
        if (!(v >= -tol && v <= 1.0 + tol))
            throw DomainError(fmt::format("intensity {} is outside the normalized range [0,1]", v));
    if (!(params.sigma >= 0.0)) throw DomainError("noise standard deviation must be >= 0");

    const double gamma = params.gamma();
    VoxelGrid out(image.geometry, ScalarType::Float32);
    for (std::size_t i = 0; i < image.values.size(); ++i) {
        double v = std::clamp(static_cast<double>(image.values[i]), 0.0, 1.0);
        if (gamma != 1.0) v = std::pow(v, gamma);
        if (params.sigma > 0.0) v += params.sigma * counter_normal(params.noise_seed, i);
        out.values[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
    return out;
}

VoxelGrid normalize_intensity(const VoxelGrid& image) {
    VoxelGrid out(image.geometry, ScalarType::Float32);
    constexpr double width = kWindowHighHu - kWindowLowHu;
    for (std::size_t i = 0; i < image.values.size(); ++i)
        out.values[i] = static_cast<float>(std::clamp((image.values[i] - kWindowLowHu) / width, 0.0, 1.0));
    return out;
}

AugmentedCase augment_case(const VoxelGrid& image, const LabelMask& mask, const AugmentationParams& params,
                           std::string base_case, std::size_t design_row) {
    auto [geo_img, geo_mask] = apply_geometric(normalize_intensity(image), mask, params);
    AugmentedCase out;
    out.image = apply_intensity(geo_img, params);
    out.mask = std::move(geo_mask);
    out.params = params;
    out.base_case = std::move(base_case);
    out.design_row = design_row;
    return out;
}

}  // namespace sega
