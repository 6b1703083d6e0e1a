#pragma once

#include "sega/metrics.hpp"
#include "sega/ranking.hpp"
#include "sega/sensitivity.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sega {

inline constexpr int kSchemaVersion = 1;

inline constexpr const char* kFactorNames[] = {"alpha", "d", "beta", "sigma"};

struct EvaluationConfig {
    std::filesystem::path ground_truth_dir;
    std::filesystem::path submissions_dir;
    std::filesystem::path output_dir;
    std::filesystem::path design_path;  ///< defaults to <ground_truth_dir>/design.csv
    std::size_t n_base = 25;
    std::uint64_t seed = 0;
    unsigned threads = 0;  ///< 0 = hardware concurrency

    std::filesystem::path design_manifest() const;
    unsigned worker_count() const;
};

/// Parses `key = value` lines (`#` comments). Relative paths resolve against
/// the config file's directory. Throws DomainError on unknown keys.
EvaluationConfig load_config(const std::filesystem::path& path);

enum ExitCode : int { kExitSuccess = 0, kExitFatal = 1, kExitPartial = 2 };

struct CommandResult {
    int exit_code = kExitSuccess;
    std::vector<std::string> errors;
};

/// Runs `task(i)` for i in [0, n) on `workers` threads. Each index runs
/// exactly once; exceptions are captured per index and returned as messages
/// (empty string on success).
std::vector<std::string> run_work_queue(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task);

struct CaseResult {
    std::string case_id;
    std::string team_id;
    std::optional<MetricResult> metrics;  ///< empty when the case errored
    double wall_time_s = 0.0;
    bool missing_prediction = false;
    std::string error;
};

struct TeamEvaluation {
    std::string team_id;
    bool nr = false;
    double mean_runtime_s = 0.0;
    std::vector<CaseResult> cases;
};

/// `<case>_r<row>` -> (case, row).
std::optional<std::pair<std::string, std::size_t>> parse_augmented_case_id(const std::string& case_id);

struct DesignManifestRow {
    std::size_t row = 0;
    std::array<double, 4> unit{};
    double alpha = 0.0, d = 0.0, beta = 0.0, sigma = 0.0;
    std::uint64_t noise_seed = 0;
};

std::string design_manifest_csv(const std::vector<DesignManifestRow>& rows);
std::vector<DesignManifestRow> read_design_manifest(const std::filesystem::path& path);

struct OutputIndices {
    SobolIndices indices;
    RobustnessScores scores;
};

struct TeamSensitivity {
    std::string team_id;
    std::string error;
    std::optional<OutputIndices> dsc, hd;
    double p_var = 0.0;    ///< mean of the DSC and HD values
    double p_inter = 0.0;  ///< mean of the DSC and HD values
};

/// Builds the Sobol' analysis for one team from its per-case metrics. Each
/// design row's output is the metric averaged over all base cases. Throws
/// IncompleteDesign naming the missing `<case>_r<row>` entries.
TeamSensitivity team_sensitivity(const TeamEvaluation& team, const std::vector<std::string>& base_cases,
                                 std::size_t n_base, std::size_t m_factors);

CommandResult cmd_augment(const EvaluationConfig& config);
CommandResult cmd_evaluate(const EvaluationConfig& config);
CommandResult cmd_sensitivity(const EvaluationConfig& config);
CommandResult cmd_leaderboard(const EvaluationConfig& config);
CommandResult cmd_meshqc(const EvaluationConfig& config);

}  // namespace sega
