#pragma once

// Independent reference implementations used as test oracles. Nothing here
// calls into the library beyond plain data types.

#include "sega/volume.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using sega::Geometry;
using sega::Index3;
using sega::LabelMask;

inline Geometry random_geometry(std::mt19937_64& rng, std::size_t max_dim = 12, bool dyadic_spacing = true) {
    std::uniform_int_distribution<std::size_t> dim(1, max_dim);
    Geometry g;
    g.dims = {dim(rng), dim(rng), dim(rng)};
    if (dyadic_spacing) {
        // multiples of 1/8 keep every squared distance exactly representable
        std::uniform_int_distribution<int> eighths(2, 24);
        for (auto& s : g.spacing) s = eighths(rng) / 8.0;
    } else {
        std::uniform_real_distribution<double> u(0.3, 3.0);
        for (auto& s : g.spacing) s = u(rng);
    }
    return g;
}

inline LabelMask random_mask(std::mt19937_64& rng, const Geometry& g, double density) {
    LabelMask m(g);
    std::bernoulli_distribution fg(density);
    for (auto& v : m.values) v = fg(rng) ? 1 : 0;
    return m;
}

/// Voxels whose value is set, in linear order.
inline std::vector<Index3> foreground(const LabelMask& m) {
    std::vector<Index3> out;
    for (std::size_t i = 0; i < m.values.size(); ++i)
        if (m.values[i]) out.push_back(m.geometry.unravel(i));
    return out;
}

inline bool fg_at(const LabelMask& m, std::int64_t i, std::int64_t j, std::int64_t k) {
    const auto& d = m.geometry.dims;
    if (i < 0 || j < 0 || k < 0 || i >= (std::int64_t)d[0] || j >= (std::int64_t)d[1] || k >= (std::int64_t)d[2])
        return false;
    return m.values[m.geometry.linear(i, j, k)] != 0;
}

inline std::vector<Index3> surface(const LabelMask& m) {
    std::vector<Index3> out;
    for (const auto& p : foreground(m)) {
        const bool inner = fg_at(m, p[0] - 1, p[1], p[2]) && fg_at(m, p[0] + 1, p[1], p[2]) &&
                           fg_at(m, p[0], p[1] - 1, p[2]) && fg_at(m, p[0], p[1] + 1, p[2]) &&
                           fg_at(m, p[0], p[1], p[2] - 1) && fg_at(m, p[0], p[1], p[2] + 1);
        if (!inner) out.push_back(p);
    }
    return out;
}

inline double sq_dist(const sega::Vec3& spacing, const Index3& a, const Index3& b) {
    const double dx = static_cast<double>(a[0] - b[0]);
    const double dy = static_cast<double>(a[1] - b[1]);
    const double dz = static_cast<double>(a[2] - b[2]);
    const double wx = spacing[0] * spacing[0], wy = spacing[1] * spacing[1], wz = spacing[2] * spacing[2];
    return ((wx * (dx * dx)) + (wy * (dy * dy))) + (wz * (dz * dz));
}

/// All-pairs squared distance from each voxel to the nearest foreground voxel.
inline std::vector<double> brute_sq_edt(const LabelMask& m) {
    const auto fg = foreground(m);
    std::vector<double> out(m.values.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto p = m.geometry.unravel(i);
        for (const auto& q : fg) out[i] = std::min(out[i], sq_dist(m.geometry.spacing, p, q));
    }
    return out;
}

inline double brute_hausdorff(const LabelMask& a, const LabelMask& b) {
    const auto sa = surface(a), sb = surface(b);
    auto directed = [&](const std::vector<Index3>& from, const std::vector<Index3>& to) {
        double worst = 0.0;
        for (const auto& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& q : to) best = std::min(best, sq_dist(a.geometry.spacing, p, q));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::sqrt(std::max(directed(sa, sb), directed(sb, sa)));
}

inline double brute_dice(const LabelMask& a, const LabelMask& b) {
    std::size_t both = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        na += a.values[i] != 0;
        nb += b.values[i] != 0;
        both += a.values[i] && b.values[i];
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf cdf) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

inline double normal_cdf(double x, double mean, double sd) { return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0))); }

inline double uniform_cdf(double x, double lo, double hi) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); }

/// Analytic Ishigami indices for a, b with inputs uniform on [-pi, pi].
struct IshigamiIndices {
    double s1, s2, s3, st1, st2, st3;
};

inline IshigamiIndices ishigami_indices(double a, double b) {
    const double pi = std::acos(-1.0);
    const double pi4 = std::pow(pi, 4), pi8 = pi4 * pi4;
    const double v1 = 0.5 * std::pow(1.0 + b * pi4 / 5.0, 2);
    const double v2 = a * a / 8.0;
    const double v13 = b * b * pi8 * (1.0 / 18.0 - 1.0 / 50.0);
    const double v = v1 + v2 + v13;
    return {v1 / v, v2 / v, 0.0, (v1 + v13) / v, v2 / v, v13 / v};
}

inline double ishigami(double x1, double x2, double x3, double a = 7.0, double b = 0.1) {
    return std::sin(x1) + a * std::sin(x2) * std::sin(x2) + b * std::pow(x3, 4) * std::sin(x1);
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("sega_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace oracle
