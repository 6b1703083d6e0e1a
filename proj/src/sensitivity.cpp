#include "sega/sensitivity.hpp"

#include "sega/augment.hpp"
#include "sega/errors.hpp"

#include <bit>
#include <cmath>
#include <fmt/format.h>

namespace sega {

namespace {

struct DirectionParams {
    unsigned degree;
    unsigned poly;
    std::array<std::uint32_t, 6> m;
};

// new-joe-kuo-6.21201, dimensions 2..16.
constexpr DirectionParams kJoeKuo[] = {
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
};

std::array<std::uint32_t, 32> direction_numbers(std::size_t dim) {
    std::array<std::uint32_t, 32> v{};
    if (dim == 0) {
        for (unsigned i = 0; i < 32; ++i) v[i] = 1u << (31 - i);
        return v;
    }
    const auto& p = kJoeKuo[dim - 1];
    const unsigned s = p.degree;
    for (unsigned i = 0; i < s; ++i) v[i] = p.m[i] << (31 - i);
    for (unsigned i = s; i < 32; ++i) {
        std::uint32_t x = v[i - s] ^ (v[i - s] >> s);
        for (unsigned k = 1; k < s; ++k)
            if ((p.poly >> (s - 1 - k)) & 1u) x ^= v[i - k];
        v[i] = x;
    }
    return v;
}

}  // namespace

SobolSequence::SobolSequence(std::size_t dims, std::uint64_t seed)
    : dims_(dims), state_(dims, 0), shift_(dims), directions_(dims) {
    if (dims == 0 || dims > kMaxDims) throw DomainError(fmt::format("Sobol' dimension {} not in [1, {}]", dims, kMaxDims));
    std::uint64_t s = seed;
    for (std::size_t d = 0; d < dims; ++d) {
        directions_[d] = direction_numbers(d);
        s = splitmix64(s);
        shift_[d] = static_cast<std::uint32_t>(s >> 32);
    }
}

std::vector<double> SobolSequence::next() {
    if (index_ > 0) {
        // Gray-code update: flip the direction number of the lowest zero bit of index-1.
        const auto c = static_cast<unsigned>(std::countr_one(index_ - 1));
        for (std::size_t d = 0; d < dims_; ++d) state_[d] ^= directions_[d][c];
    }
    ++index_;
    std::vector<double> x(dims_);
    for (std::size_t d = 0; d < dims_; ++d)
        x[d] = (static_cast<double>(state_[d] ^ shift_[d]) + 0.5) * 0x1.0p-32;
    return x;
}

std::size_t SaltelliDesign::row_index(RowKind kind, std::size_t factor, std::size_t base) const {
    switch (kind) {
        case RowKind::A: return base;
        case RowKind::B: return n_base + base;
        case RowKind::AB: return n_base * (2 + factor) + base;
    }
    return 0;
}

DesignRow classify_row(std::size_t row, std::size_t n_base, std::size_t m_factors) {
    if (n_base == 0 || row >= n_base * (m_factors + 2)) throw DomainError(fmt::format("row {} outside the design", row));
    DesignRow r;
    const std::size_t block = row / n_base;
    r.base = row % n_base;
    if (block == 0) r.kind = RowKind::A;
    else if (block == 1) r.kind = RowKind::B;
    else {
        r.kind = RowKind::AB;
        r.factor = block - 2;
    }
    return r;
}

SaltelliDesign build_saltelli_design(std::size_t n_base, std::size_t m_factors, std::uint64_t seed) {
    if (n_base < 2) throw DomainError("n_base must be >= 2");
    if (m_factors == 0 || 2 * m_factors > SobolSequence::kMaxDims)
        throw DomainError(fmt::format("m_factors must be in [1, {}]", SobolSequence::kMaxDims / 2));

    SobolSequence seq(2 * m_factors, seed);
    std::vector<std::vector<double>> a(n_base), b(n_base);
    for (std::size_t n = 0; n < n_base; ++n) {
        const auto x = seq.next();
        a[n].assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m_factors));
        b[n].assign(x.begin() + static_cast<std::ptrdiff_t>(m_factors), x.end());
    }

    SaltelliDesign design{n_base, m_factors, seed, {}};
    design.rows.reserve(n_base * (m_factors + 2));
    for (std::size_t n = 0; n < n_base; ++n) design.rows.push_back({RowKind::A, 0, n, a[n]});
    for (std::size_t n = 0; n < n_base; ++n) design.rows.push_back({RowKind::B, 0, n, b[n]});
    for (std::size_t i = 0; i < m_factors; ++i)
        for (std::size_t n = 0; n < n_base; ++n) {
            auto u = a[n];
            u[i] = b[n][i];
            design.rows.push_back({RowKind::AB, i, n, std::move(u)});
        }
    return design;
}

SobolIndices estimate_sobol(std::span<const double> y_a, std::span<const double> y_b,
                            const std::vector<std::vector<double>>& y_ab, std::string output_name) {
    const std::size_t n = y_a.size();
    if (n < 2 || y_b.size() != n) throw DomainError("A and B output vectors must have equal length >= 2");
    for (const auto& v : y_ab)
        if (v.size() != n) throw DomainError("every AB_i output vector must have N entries");

    const std::size_t m = y_ab.size();
    SobolIndices out;
    out.output_name = std::move(output_name);
    out.n_base = n;
    out.s1.assign(m, 0.0);
    out.st.assign(m, 0.0);

    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += y_a[k] + y_b[k];
    mean /= static_cast<double>(2 * n);
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        ss += (y_a[k] - mean) * (y_a[k] - mean);
        ss += (y_b[k] - mean) * (y_b[k] - mean);
    }
    out.variance = ss / static_cast<double>(2 * n - 1);
    if (!(out.variance > 0.0)) {
        out.variance = 0.0;
        out.degenerate = true;
        return out;
    }

    for (std::size_t i = 0; i < m; ++i) {
        double first = 0.0, total = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            first += y_b[k] * (y_ab[i][k] - y_a[k]);
            const double diff = y_a[k] - y_ab[i][k];
            total += diff * diff;
        }
        out.s1[i] = first / static_cast<double>(n) / out.variance;
        out.st[i] = total / static_cast<double>(n) / (2.0 * out.variance);
    }
    return out;
}

SobolIndices estimate_sobol(const SaltelliDesign& design, std::span<const double> outputs, std::string output_name) {
    const std::size_t n = design.n_base, m = design.m_factors;
    if (outputs.size() != n * (m + 2))
        throw IncompleteDesign(fmt::format("expected {} outputs, got {}", n * (m + 2), outputs.size()));
    std::vector<std::vector<double>> ab(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto first = outputs.begin() + static_cast<std::ptrdiff_t>(design.row_index(RowKind::AB, i, 0));
        ab[i].assign(first, first + static_cast<std::ptrdiff_t>(n));
    }
    return estimate_sobol(outputs.subspan(0, n), outputs.subspan(n, n), ab, std::move(output_name));
}

RobustnessScores robustness_scores(const SobolIndices& indices) {
    const std::size_t m = indices.s1.size();
    if (m == 0 || indices.st.size() != m) throw DomainError("indices must cover every factor");
    RobustnessScores r;
    const double uniform = 1.0 / static_cast<double>(m);
    double dev = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        dev += std::abs(indices.s1[i] - uniform);
        r.p_inter += indices.st[i] - indices.s1[i];
    }
    r.p_var = 1.0 - dev;
    return r;
}

}  // namespace sega
