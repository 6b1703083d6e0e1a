#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sega {

/// Digitally shifted Sobol' sequence (Joe-Kuo direction numbers), up to 16
/// dimensions. Points lie strictly inside (0,1).
class SobolSequence {
public:
    static constexpr std::size_t kMaxDims = 16;

    SobolSequence(std::size_t dims, std::uint64_t seed);

    std::vector<double> next();
    std::size_t dims() const { return dims_; }

private:
    std::size_t dims_;
    std::uint64_t index_ = 0;
    std::vector<std::uint32_t> state_;
    std::vector<std::uint32_t> shift_;
    std::vector<std::array<std::uint32_t, 32>> directions_;
};

enum class RowKind { A, B, AB };

struct DesignRow {
    RowKind kind = RowKind::A;
    std::size_t factor = 0;  ///< substituted factor (0-based) for AB rows
    std::size_t base = 0;    ///< base sample index n in [0, N)
    std::vector<double> unit_point;
};

/// Saltelli A/B/AB_i design. Rows are laid out in blocks: N rows of A, N of B,
/// then N rows per AB_i for i = 1..M. Row count is N*(M+2).
struct SaltelliDesign {
    std::size_t n_base = 0;
    std::size_t m_factors = 0;
    std::uint64_t seed = 0;
    std::vector<DesignRow> rows;

    std::size_t row_index(RowKind kind, std::size_t factor, std::size_t base) const;
};

/// Throws DomainError if n_base < 2 or m_factors is 0 or exceeds 8.
SaltelliDesign build_saltelli_design(std::size_t n_base, std::size_t m_factors, std::uint64_t seed);

/// Describes a row by position alone (the layout is fixed by N and M).
DesignRow classify_row(std::size_t row, std::size_t n_base, std::size_t m_factors);

struct SobolIndices {
    std::string output_name;
    std::size_t n_base = 0;
    std::vector<double> s1;
    std::vector<double> st;
    double variance = 0.0;
    bool degenerate = false;  ///< zero output variance; indices reported as 0
};

/// First order: Saltelli (2010) mean(yB (yAB_i - yA)) / V.
/// Total order: Jansen mean((yA - yAB_i)^2) / (2V).
/// V is the sample variance of the pooled A and B outputs.
/// `y_ab` holds one vector of N outputs per factor.
SobolIndices estimate_sobol(std::span<const double> y_a, std::span<const double> y_b,
                            const std::vector<std::vector<double>>& y_ab, std::string output_name = {});

/// Splits a full design-ordered output vector into A/B/AB blocks and estimates.
SobolIndices estimate_sobol(const SaltelliDesign& design, std::span<const double> outputs,
                            std::string output_name = {});

struct RobustnessScores {
    double p_var = 0.0;
    double p_inter = 0.0;
};

/// p_var = 1 - sum |S1_i - 1/M|, p_inter = sum (ST_i - S1_i). No clamping.
RobustnessScores robustness_scores(const SobolIndices& indices);

}  // namespace sega
