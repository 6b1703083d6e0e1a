#include "sega/metrics.hpp"

#include "sega/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace sega {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_same_geometry(const LabelMask& a, const LabelMask& b) {
    if (!a.geometry.same_as(b.geometry)) throw GeometryMismatch("prediction and reference geometries differ");
    if (a.values.size() != b.values.size()) throw GeometryMismatch("mask value counts differ");
}

// One 1D pass of the lower-envelope transform:
//   out[q] = min_p ( weight * (q - p)^2 + f[p] )
// The value is always evaluated as fl(weight * (q-p)^2) + f[p] so results are
// reproducible by a brute-force oracle using the same summation order.
class EnvelopePass {
public:
    explicit EnvelopePass(std::size_t n) : v_(n), z_(n + 1), f_(n), out_(n) {}

    void run(std::span<double> line, double weight, std::size_t n) {
        std::copy_n(line.begin(), n, f_.begin());
        std::ptrdiff_t k = -1;
        for (std::size_t q = 0; q < n; ++q) {
            if (f_[q] == kInf) continue;
            const double qq = static_cast<double>(q);
            double s = -kInf;
            while (k >= 0) {
                const double p = static_cast<double>(v_[k]);
                s = ((f_[q] + weight * qq * qq) - (f_[v_[k]] + weight * p * p)) / (2.0 * weight * (qq - p));
                if (s > z_[k]) break;
                --k;
            }
            ++k;
            v_[k] = q;
            z_[k] = k == 0 ? -kInf : s;
            z_[k + 1] = kInf;
        }
        if (k < 0) {
            std::fill_n(line.begin(), n, kInf);
            return;
        }
        std::ptrdiff_t j = 0;
        for (std::size_t q = 0; q < n; ++q) {
            const double qq = static_cast<double>(q);
            while (z_[j + 1] < qq) ++j;
            // Rounding in the breakpoints can only misplace a boundary by one
            // parabola; checking the neighbours keeps the result exact.
            double best = kInf;
            for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(0, j - 2); c <= std::min(k, j + 2); ++c) {
                const double d = qq - static_cast<double>(v_[c]);
                best = std::min(best, weight * (d * d) + f_[v_[c]]);
            }
            out_[q] = best;
        }
        std::copy_n(out_.begin(), n, line.begin());
    }

private:
    std::vector<std::size_t> v_;
    std::vector<double> z_;
    std::vector<double> f_;
    std::vector<double> out_;
};

std::vector<double> edt_squared(const std::vector<std::uint8_t>& fg, const Dims3& dims, const Vec3& spacing) {
    std::vector<double> d(fg.size());
    for (std::size_t i = 0; i < fg.size(); ++i) d[i] = fg[i] ? 0.0 : kInf;

    const std::size_t nx = dims[0], ny = dims[1], nz = dims[2];
    std::vector<double> line(std::max({nx, ny, nz}));
    EnvelopePass pass(line.size());

    // x: contiguous rows
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t j = 0; j < ny; ++j) {
            std::span<double> row(d.data() + nx * (j + ny * k), nx);
            pass.run(row, spacing[0] * spacing[0], nx);
        }
    // y
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) line[j] = d[i + nx * (j + ny * k)];
            pass.run(line, spacing[1] * spacing[1], ny);
            for (std::size_t j = 0; j < ny; ++j) d[i + nx * (j + ny * k)] = line[j];
        }
    // z
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t k = 0; k < nz; ++k) line[k] = d[i + nx * (j + ny * k)];
            pass.run(line, spacing[2] * spacing[2], nz);
            for (std::size_t k = 0; k < nz; ++k) d[i + nx * (j + ny * k)] = line[k];
        }
    return d;
}

bool is_surface(const LabelMask& m, std::int64_t i, std::int64_t j, std::int64_t k) {
    static constexpr int offs[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    for (const auto& o : offs)
        if (!m.at(Index3{i + o[0], j + o[1], k + o[2]})) return true;
    return false;
}

struct Box {
    Index3 lo{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(),
              std::numeric_limits<std::int64_t>::max()};
    Index3 hi{-1, -1, -1};
    void add(const Index3& p) {
        for (int a = 0; a < 3; ++a) {
            lo[a] = std::min(lo[a], p[a]);
            hi[a] = std::max(hi[a], p[a]);
        }
    }
};

// Squared distance from each point in `from` to the nearest point in `to`,
// maximised over `from`. Both sets live in the box; EDT runs on the box only.
double directed_max_sq(const std::vector<Index3>& from, const std::vector<Index3>& to, const Box& box,
                       const Vec3& spacing) {
    Dims3 dims{};
    for (int a = 0; a < 3; ++a) dims[a] = static_cast<std::size_t>(box.hi[a] - box.lo[a] + 1);
    std::vector<std::uint8_t> fg(dims[0] * dims[1] * dims[2], 0);
    auto lin = [&](const Index3& p) {
        return static_cast<std::size_t>(p[0] - box.lo[0]) +
               dims[0] * (static_cast<std::size_t>(p[1] - box.lo[1]) + dims[1] * static_cast<std::size_t>(p[2] - box.lo[2]));
    };
    for (const auto& p : to) fg[lin(p)] = 1;
    const auto d = edt_squared(fg, dims, spacing);
    double worst = 0.0;
    for (const auto& p : from) worst = std::max(worst, d[lin(p)]);
    return worst;
}

}  // namespace

std::string_view degenerate_flag_name(DegenerateFlag f) {
    switch (f) {
        case DegenerateFlag::None: return "None";
        case DegenerateFlag::EmptyPrediction: return "EmptyPrediction";
        case DegenerateFlag::EmptyReference: return "EmptyReference";
    }
    return "None";
}

double dice(const LabelMask& pred, const LabelMask& gt) {
    require_same_geometry(pred, gt);
    std::size_t inter = 0, np = 0, ng = 0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
        const bool p = pred.values[i] != 0, g = gt.values[i] != 0;
        np += p;
        ng += g;
        inter += p && g;
    }
    if (np + ng == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

std::vector<Index3> surface_voxels(const LabelMask& mask) {
    std::vector<Index3> out;
    const auto& g = mask.geometry;
    for (std::size_t idx = 0; idx < mask.values.size(); ++idx) {
        if (!mask.values[idx]) continue;
        const auto p = g.unravel(idx);
        if (is_surface(mask, p[0], p[1], p[2])) out.push_back(p);
    }
    return out;
}

std::vector<double> squared_distance_transform(const LabelMask& mask) {
    if (mask.empty()) throw EmptyMask("distance transform of an empty mask");
    return edt_squared(mask.values, mask.geometry.dims, mask.geometry.spacing);
}

std::vector<double> distance_transform(const LabelMask& mask) {
    auto d = squared_distance_transform(mask);
    for (auto& v : d) v = std::sqrt(v);
    return d;
}

double hausdorff(const LabelMask& pred, const LabelMask& gt) {
    require_same_geometry(pred, gt);
    const bool pe = pred.empty(), ge = gt.empty();
    if (pe && ge) return 0.0;
    if (pe || ge) return gt.geometry.extent_diagonal_mm();

    const auto sp = surface_voxels(pred);
    const auto sg = surface_voxels(gt);
    Box box;
    for (const auto& p : sp) box.add(p);
    for (const auto& p : sg) box.add(p);
    const auto& spacing = gt.geometry.spacing;
    const double h2 = std::max(directed_max_sq(sp, sg, box, spacing), directed_max_sq(sg, sp, box, spacing));
    return std::sqrt(h2);
}

double mask_volume_ml(const LabelMask& mask) {
    const auto& s = mask.geometry.spacing;
    return static_cast<double>(mask.count()) * s[0] * s[1] * s[2] / 1000.0;
}

MetricResult evaluate_pair(const LabelMask& pred, const LabelMask& gt) {
    require_same_geometry(pred, gt);
    MetricResult r;
    r.volume_ml_pred = mask_volume_ml(pred);
    r.volume_ml_gt = mask_volume_ml(gt);
    const bool pe = pred.empty(), ge = gt.empty();
    if (pe && !ge) r.degenerate = DegenerateFlag::EmptyPrediction;
    else if (ge && !pe) r.degenerate = DegenerateFlag::EmptyReference;
    r.dsc = dice(pred, gt);
    r.hd_mm = hausdorff(pred, gt);
    return r;
}

}  // namespace sega
