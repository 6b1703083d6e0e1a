#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sega {

struct RobustStats {
    double median = 0.0;
    double variance = 0.0;  ///< unbiased sample variance, 0 for one value
    double skewness = 0.0;  ///< adjusted Fisher-Pearson G1, 0 for fewer than 3 values
};

/// Throws DomainError on an empty input.
RobustStats robust_stats(std::span<const double> values);

enum class RankDirection { LowerBetter, HigherBetter };

/// Fractional ranks, best = 1, ties share the mean of the spanned ranks.
std::vector<double> rank_values(std::span<const double> values, RankDirection direction);

/// 0.6 r_m + 0.25 r_var + 0.15 r_skew (used for both p_DSC and p_HD).
double p_metric(double rank_median, double rank_variance, double rank_skewness);

/// 0.3 r_m + 0.25 r_var + 0.15 r_skew + 0.3 r_invalid.
double p_jacobian(double rank_median, double rank_variance, double rank_skewness, double rank_invalid);

/// r_fin score: (r_DSC + r_HD)/6 + (r_var + r_inter)/3.
double final_score(double r_dsc, double r_hd, double r_var, double r_inter);

/// How a skewness column is turned into a "lower is better" key.
enum class SkewConvention { AbsoluteAscending, SignedAscending };

struct RankingConventions {
    SkewConvention dsc_skew = SkewConvention::AbsoluteAscending;
    SkewConvention hd_skew = SkewConvention::SignedAscending;
};

/// Per-team inputs for the main-task ranking.
struct TeamRecord {
    std::string team_id;
    std::vector<double> dsc_values;
    std::vector<double> hd_values;
    double p_var = 0.0;
    double p_inter = 0.0;
    double mean_runtime_s = 0.0;
    bool nr_flag = false;
};

/// One leaderboard row. Optional fields are empty for non-ranked teams or
/// when a stage has not been computed.
struct TeamStanding {
    std::string team_id;
    bool nr = false;
    double mean_runtime_s = 0.0;
    std::optional<double> p_dsc, p_hd, p_var, p_inter, p_fin;
    std::optional<double> r_dsc, r_hd, r_var, r_inter;
    std::size_t position = 0;  ///< final place, 1-based, NR teams last
};

struct Leaderboard {
    std::vector<TeamStanding> rows;  ///< ordered by final position
};

/// Computes p_DSC, p_HD (from median/variance/skewness ranks), keeps p_var and
/// p_inter, and ranks all four among non-NR teams. p_var is ranked higher
/// better, p_inter by distance from 0.
std::vector<TeamStanding> intermediate_ranking(const std::vector<TeamRecord>& records,
                                               const RankingConventions& conventions = {});

/// Orders teams by r_fin score; exact ties go to the lower mean runtime, then
/// to team id. NR teams follow all ranked teams. Throws IncompleteRecord when
/// a ranked team lacks an intermediate rank.
Leaderboard final_ranking(std::vector<TeamStanding> standings);

/// Convenience: intermediate_ranking followed by final_ranking. Throws EmptyField.
Leaderboard build_leaderboard(const std::vector<TeamRecord>& records, const RankingConventions& conventions = {});

/// Per-team inputs for the volumetric meshing subtask.
struct MeshTeamRecord {
    std::string team_id;
    RobustStats stats;          ///< over the scaled Jacobians of all submitted meshes
    double mean_invalid = 0.0;  ///< invalid elements per mesh, averaged over runs
    bool nr_flag = false;
};

struct MeshStanding {
    std::string team_id;
    bool nr = false;
    std::optional<double> r_median, r_variance, r_skewness, r_invalid, p_j;
    std::size_t position = 0;
};

/// Ranks median SJ (higher better), variance, |skewness| and mean invalid
/// count (lower better), combines them into p_J and orders teams by it.
/// Throws EmptyField.
std::vector<MeshStanding> jacobian_ranking(const std::vector<MeshTeamRecord>& records);

}  // namespace sega
