#include "sega/harness.hpp"

#include "sega/augment.hpp"
#include "sega/errors.hpp"
#include "sega/mesh.hpp"
#include "sega/nrrd.hpp"
#include "svg.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace sega {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::size_t kFactors = 4;
constexpr std::uint64_t kNoiseSalt = 0x6e6f6973655f7365ULL;
constexpr const char* kMaskSuffix = ".seg.nrrd";

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string num(double v) { return fmt::format("{}", v); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

ordered_json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile(fmt::format("{}: {}", path.string(), e.what()));
    }
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
    const auto t = trim(text);
    T v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        throw DomainError(fmt::format("invalid {} '{}'", what, text));
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(line);
    while (std::getline(in, cur, ',')) out.push_back(trim(cur));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        rows.push_back(split_csv(line));
    }
    return rows;
}

// Case ids for every `<case>.seg.nrrd` in a directory, sorted.
std::vector<std::string> list_mask_cases(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError(fmt::format("'{}' is not a directory", dir.string()));
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (entry.is_regular_file() && ends_with(name, kMaskSuffix))
            out.push_back(name.substr(0, name.size() - std::string(kMaskSuffix).size()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> list_subdirs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError(fmt::format("'{}' is not a directory", dir.string()));
    std::vector<std::string> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) out.push_back(entry.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

CommandResult finish(std::vector<std::string> errors, std::size_t failed, std::size_t total) {
    CommandResult r;
    r.errors = std::move(errors);
    if (total > 0 && failed == total) r.exit_code = kExitFatal;
    else if (!r.errors.empty()) r.exit_code = kExitPartial;
    return r;
}

// ---------------------------------------------------------------- evaluation report

ordered_json metric_json(const CaseResult& c) {
    ordered_json j;
    j["case"] = c.case_id;
    if (c.metrics) {
        j["dsc"] = c.metrics->dsc;
        j["hd_mm"] = c.metrics->hd_mm;
        j["volume_ml_pred"] = c.metrics->volume_ml_pred;
        j["volume_ml_gt"] = c.metrics->volume_ml_gt;
        j["degenerate"] = std::string(degenerate_flag_name(c.metrics->degenerate));
    } else {
        j["dsc"] = nullptr;
        j["hd_mm"] = nullptr;
        j["volume_ml_pred"] = nullptr;
        j["volume_ml_gt"] = nullptr;
        j["degenerate"] = nullptr;
    }
    j["missing_prediction"] = c.missing_prediction;
    j["wall_time_s"] = c.wall_time_s;
    j["error"] = c.error.empty() ? ordered_json(nullptr) : ordered_json(c.error);
    return j;
}

DegenerateFlag parse_flag(const std::string& s) {
    if (s == "EmptyPrediction") return DegenerateFlag::EmptyPrediction;
    if (s == "EmptyReference") return DegenerateFlag::EmptyReference;
    return DegenerateFlag::None;
}

std::vector<TeamEvaluation> read_evaluation(const fs::path& path) {
    const auto j = read_json(path);
    std::vector<TeamEvaluation> teams;
    try {
        for (const auto& t : j.at("teams")) {
            TeamEvaluation te;
            te.team_id = t.at("team").get<std::string>();
            te.nr = t.at("nr").get<bool>();
            te.mean_runtime_s = t.at("mean_runtime_s").get<double>();
            for (const auto& c : t.at("cases")) {
                CaseResult cr;
                cr.case_id = c.at("case").get<std::string>();
                cr.team_id = te.team_id;
                if (!c.at("dsc").is_null()) {
                    MetricResult m;
                    m.dsc = c.at("dsc").get<double>();
                    m.hd_mm = c.at("hd_mm").get<double>();
                    m.volume_ml_pred = c.at("volume_ml_pred").get<double>();
                    m.volume_ml_gt = c.at("volume_ml_gt").get<double>();
                    m.degenerate = parse_flag(c.at("degenerate").get<std::string>());
                    cr.metrics = m;
                }
                cr.missing_prediction = c.at("missing_prediction").get<bool>();
                cr.wall_time_s = c.at("wall_time_s").get<double>();
                if (!c.at("error").is_null()) cr.error = c.at("error").get<std::string>();
                te.cases.push_back(std::move(cr));
            }
            teams.push_back(std::move(te));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile(fmt::format("{}: {}", path.string(), e.what()));
    }
    return teams;
}

std::map<std::string, double> read_runtimes(const fs::path& team_dir) {
    std::map<std::string, double> out;
    const auto path = team_dir / "runtime.csv";
    if (!fs::exists(path)) return out;
    for (const auto& row : read_csv(path)) {
        if (row.size() < 2 || row[0] == "case") continue;
        out[row[0]] = parse_number<double>(row[1], "runtime");
    }
    return out;
}

std::map<std::string, fs::path> read_case_overrides(const fs::path& team_dir) {
    std::map<std::string, fs::path> out;
    const auto path = team_dir / "cases.csv";
    if (!fs::exists(path)) return out;
    for (const auto& row : read_csv(path)) {
        if (row.size() < 2 || row[0] == "case") continue;
        const fs::path p = row[1];
        out[row[0]] = p.is_absolute() ? p : team_dir / p;
    }
    return out;
}

// ---------------------------------------------------------------- sensitivity report

ordered_json indices_json(const OutputIndices& o) {
    ordered_json j;
    ordered_json factors = ordered_json::object();
    for (std::size_t i = 0; i < o.indices.s1.size(); ++i)
        factors[kFactorNames[i]] = {{"s1", o.indices.s1[i]}, {"st", o.indices.st[i]}};
    j["factors"] = factors;
    j["variance"] = o.indices.variance;
    j["degenerate"] = o.indices.degenerate;
    j["p_var"] = o.scores.p_var;
    j["p_inter"] = o.scores.p_inter;
    return j;
}

std::optional<OutputIndices> indices_from_json(const ordered_json& j, const std::string& name, std::size_t n_base) {
    if (j.is_null()) return std::nullopt;
    OutputIndices o;
    o.indices.output_name = name;
    o.indices.n_base = n_base;
    for (const auto* f : kFactorNames) {
        o.indices.s1.push_back(j.at("factors").at(f).at("s1").get<double>());
        o.indices.st.push_back(j.at("factors").at(f).at("st").get<double>());
    }
    o.indices.variance = j.at("variance").get<double>();
    o.indices.degenerate = j.at("degenerate").get<bool>();
    o.scores.p_var = j.at("p_var").get<double>();
    o.scores.p_inter = j.at("p_inter").get<double>();
    return o;
}

std::vector<TeamSensitivity> read_sensitivity(const fs::path& path) {
    const auto j = read_json(path);
    std::vector<TeamSensitivity> out;
    try {
        const auto n_base = j.at("n_base").get<std::size_t>();
        for (const auto& t : j.at("teams")) {
            TeamSensitivity ts;
            ts.team_id = t.at("team").get<std::string>();
            if (!t.at("error").is_null()) ts.error = t.at("error").get<std::string>();
            ts.dsc = indices_from_json(t.at("outputs").at("DSC"), "DSC", n_base);
            ts.hd = indices_from_json(t.at("outputs").at("HD"), "HD", n_base);
            if (!t.at("p_var").is_null()) ts.p_var = t.at("p_var").get<double>();
            if (!t.at("p_inter").is_null()) ts.p_inter = t.at("p_inter").get<double>();
            out.push_back(std::move(ts));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFile(fmt::format("{}: {}", path.string(), e.what()));
    }
    return out;
}

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }
std::string opt_csv(const std::optional<double>& v) { return v ? num(*v) : std::string("NR"); }

}  // namespace

// ---------------------------------------------------------------- config & queue

fs::path EvaluationConfig::design_manifest() const {
    return design_path.empty() ? ground_truth_dir / "design.csv" : design_path;
}

unsigned EvaluationConfig::worker_count() const {
    return threads > 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
}

EvaluationConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& v) {
        const fs::path p = v;
        return p.is_absolute() || base.empty() ? p : base / p;
    };
    EvaluationConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DomainError(fmt::format("{}:{}: expected key = value", path.string(), lineno));
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key == "ground_truth_dir") c.ground_truth_dir = resolve(value);
        else if (key == "submissions_dir") c.submissions_dir = resolve(value);
        else if (key == "output_dir") c.output_dir = resolve(value);
        else if (key == "design") c.design_path = resolve(value);
        else if (key == "n_base") c.n_base = parse_number<std::size_t>(value, "n_base");
        else if (key == "seed") c.seed = parse_number<std::uint64_t>(value, "seed");
        else if (key == "threads") c.threads = value == "auto" ? 0u : parse_number<unsigned>(value, "threads");
        else throw DomainError(fmt::format("{}:{}: unknown key '{}'", path.string(), lineno, key));
    }
    return c;
}

std::vector<std::string> run_work_queue(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& task) {
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                task(i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
                if (errors[i].empty()) errors[i] = "unknown error";
            }
        }
    };
    const auto count = static_cast<std::size_t>(std::max(1u, workers));
    if (count == 1 || n <= 1) {
        worker();
        return errors;
    }
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(count, n); ++t) pool.emplace_back(worker);
    return errors;
}

std::optional<std::pair<std::string, std::size_t>> parse_augmented_case_id(const std::string& case_id) {
    const auto pos = case_id.rfind("_r");
    if (pos == std::string::npos || pos == 0 || pos + 2 >= case_id.size()) return std::nullopt;
    std::size_t row = 0;
    const char* first = case_id.data() + pos + 2;
    const char* last = case_id.data() + case_id.size();
    const auto [ptr, ec] = std::from_chars(first, last, row);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return std::make_pair(case_id.substr(0, pos), row);
}

// ---------------------------------------------------------------- design manifest

std::string design_manifest_csv(const std::vector<DesignManifestRow>& rows) {
    std::string out = "row,u1,u2,u3,u4,alpha,d,beta,sigma,noise_seed\n";
    for (const auto& r : rows)
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.row, r.unit[0], r.unit[1], r.unit[2], r.unit[3], r.alpha,
                           r.d, r.beta, r.sigma, r.noise_seed);
    return out;
}

std::vector<DesignManifestRow> read_design_manifest(const fs::path& path) {
    const auto csv = read_csv(path);
    if (csv.empty() || csv[0].empty() || csv[0][0] != "row")
        throw CorruptFile(fmt::format("{}: missing design manifest header", path.string()));
    std::vector<DesignManifestRow> rows;
    for (std::size_t i = 1; i < csv.size(); ++i) {
        const auto& f = csv[i];
        if (f.size() != 10) throw CorruptFile(fmt::format("{}: line {} has {} fields", path.string(), i + 1, f.size()));
        DesignManifestRow r;
        r.row = parse_number<std::size_t>(f[0], "row");
        for (int u = 0; u < 4; ++u) r.unit[u] = parse_number<double>(f[1 + u], "unit coordinate");
        r.alpha = parse_number<double>(f[5], "alpha");
        r.d = parse_number<double>(f[6], "d");
        r.beta = parse_number<double>(f[7], "beta");
        r.sigma = parse_number<double>(f[8], "sigma");
        r.noise_seed = parse_number<std::uint64_t>(f[9], "noise_seed");
        if (r.row != rows.size()) throw CorruptFile(fmt::format("{}: rows must be numbered 0..R-1", path.string()));
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------- sensitivity core

TeamSensitivity team_sensitivity(const TeamEvaluation& team, const std::vector<std::string>& base_cases,
                                 std::size_t n_base, std::size_t m_factors) {
    const std::size_t rows = n_base * (m_factors + 2);
    std::map<std::string, const MetricResult*> by_case;
    for (const auto& c : team.cases)
        if (c.metrics) by_case[c.case_id] = &*c.metrics;

    std::vector<double> dsc(rows, 0.0), hd(rows, 0.0);
    std::vector<std::string> missing;
    for (std::size_t r = 0; r < rows; ++r)
        for (const auto& base : base_cases) {
            const auto id = fmt::format("{}_r{}", base, r);
            const auto it = by_case.find(id);
            if (it == by_case.end()) {
                missing.push_back(id);
                continue;
            }
            dsc[r] += it->second->dsc;
            hd[r] += it->second->hd_mm;
        }
    if (base_cases.empty()) throw IncompleteDesign("no augmented cases found");
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 20); ++i) list += (i ? ", " : "") + missing[i];
        if (missing.size() > 20) list += fmt::format(", ... ({} total)", missing.size());
        throw IncompleteDesign(fmt::format("team '{}' is missing design rows: {}", team.team_id, list));
    }
    const double nb = static_cast<double>(base_cases.size());
    for (std::size_t r = 0; r < rows; ++r) {
        dsc[r] /= nb;
        hd[r] /= nb;
    }

    SaltelliDesign layout{n_base, m_factors, 0, {}};
    TeamSensitivity ts;
    ts.team_id = team.team_id;
    OutputIndices d{estimate_sobol(layout, dsc, "DSC"), {}};
    d.scores = robustness_scores(d.indices);
    OutputIndices h{estimate_sobol(layout, hd, "HD"), {}};
    h.scores = robustness_scores(h.indices);
    ts.p_var = 0.5 * (d.scores.p_var + h.scores.p_var);
    ts.p_inter = 0.5 * (d.scores.p_inter + h.scores.p_inter);
    ts.dsc = std::move(d);
    ts.hd = std::move(h);
    return ts;
}

// ---------------------------------------------------------------- commands

CommandResult cmd_augment(const EvaluationConfig& config) {
    const auto cases = list_mask_cases(config.ground_truth_dir);
    if (cases.empty()) throw EmptyField(fmt::format("no base cases in '{}'", config.ground_truth_dir.string()));
    fs::create_directories(config.output_dir);

    const auto design = build_saltelli_design(config.n_base, kFactors, config.seed);
    const std::uint64_t noise_seed = splitmix64(config.seed ^ kNoiseSalt);
    std::vector<AugmentationParams> params;
    std::vector<DesignManifestRow> manifest;
    for (std::size_t r = 0; r < design.rows.size(); ++r) {
        const auto& u = design.rows[r].unit_point;
        const auto p = sample_params({u[0], u[1], u[2], u[3]}, noise_seed);
        params.push_back(p);
        manifest.push_back({r, p.unit_point, p.alpha_deg, p.d_mm, p.beta, p.sigma, p.noise_seed});
    }
    write_text(config.output_dir / "design.csv", design_manifest_csv(manifest));

    std::vector<std::string> errors;
    std::size_t failed = 0;
    ordered_json report;
    report["schema_version"] = kSchemaVersion;
    report["n_base"] = config.n_base;
    report["m_factors"] = kFactors;
    report["seed"] = config.seed;
    report["rows_per_case"] = design.rows.size();
    report["cases"] = ordered_json::array();
    for (const auto& c : cases) {
        ordered_json entry{{"case", c}, {"pairs_written", 0}, {"error", nullptr}};
        try {
            const auto image = read_nrrd(config.ground_truth_dir / (c + ".nrrd"));
            const auto mask = read_nrrd_mask(config.ground_truth_dir / (c + kMaskSuffix));
            const auto row_errors = run_work_queue(params.size(), config.worker_count(), [&](std::size_t r) {
                const auto aug = augment_case(image, mask, params[r], c, r);
                const auto stem = fmt::format("{}_r{}", c, r);
                write_nrrd(aug.image, config.output_dir / (stem + ".nrrd"), NrrdEncoding::Gzip);
                write_nrrd(aug.mask, config.output_dir / (stem + kMaskSuffix), NrrdEncoding::Gzip);
            });
            std::size_t written = 0;
            for (std::size_t r = 0; r < row_errors.size(); ++r) {
                if (row_errors[r].empty()) ++written;
                else errors.push_back(fmt::format("{} row {}: {}", c, r, row_errors[r]));
            }
            entry["pairs_written"] = written;
            if (written != params.size()) {
                entry["error"] = "some rows failed";
                if (written == 0) ++failed;
            }
        } catch (const std::exception& e) {
            ++failed;
            entry["error"] = e.what();
            errors.push_back(fmt::format("{}: {}", c, e.what()));
        }
        report["cases"].push_back(entry);
    }
    write_text(config.output_dir / "augment.json", report.dump(2) + "\n");
    return finish(std::move(errors), failed, cases.size());
}

CommandResult cmd_evaluate(const EvaluationConfig& config) {
    const auto cases = list_mask_cases(config.ground_truth_dir);
    if (cases.empty()) throw EmptyField(fmt::format("no reference masks in '{}'", config.ground_truth_dir.string()));
    const auto team_ids = list_subdirs(config.submissions_dir);
    if (team_ids.empty()) throw EmptyField(fmt::format("no team directories in '{}'", config.submissions_dir.string()));
    fs::create_directories(config.output_dir);

    std::vector<TeamEvaluation> teams(team_ids.size());
    std::vector<std::map<std::string, double>> runtimes(team_ids.size());
    std::vector<std::map<std::string, fs::path>> overrides(team_ids.size());
    std::vector<std::string> errors;
    for (std::size_t t = 0; t < team_ids.size(); ++t) {
        const auto dir = config.submissions_dir / team_ids[t];
        teams[t].team_id = team_ids[t];
        teams[t].cases.resize(cases.size());
        try {
            runtimes[t] = read_runtimes(dir);
            overrides[t] = read_case_overrides(dir);
        } catch (const std::exception& e) {
            errors.push_back(fmt::format("{}: {}", team_ids[t], e.what()));
        }
    }

    const std::size_t n_items = team_ids.size() * cases.size();
    const auto item_errors = run_work_queue(n_items, config.worker_count(), [&](std::size_t i) {
        const std::size_t t = i / cases.size(), c = i % cases.size();
        auto& cr = teams[t].cases[c];
        cr.case_id = cases[c];
        cr.team_id = team_ids[t];
        if (const auto it = runtimes[t].find(cases[c]); it != runtimes[t].end()) cr.wall_time_s = it->second;

        const auto gt = read_nrrd_mask(config.ground_truth_dir / (cases[c] + kMaskSuffix));
        fs::path pred_path = config.submissions_dir / team_ids[t] / (cases[c] + kMaskSuffix);
        if (const auto it = overrides[t].find(cases[c]); it != overrides[t].end()) pred_path = it->second;
        if (!fs::exists(pred_path)) {
            cr.missing_prediction = true;
            cr.metrics = evaluate_pair(LabelMask(gt.geometry), gt);
            return;
        }
        cr.metrics = evaluate_pair(read_nrrd_mask(pred_path), gt);
    });

    std::size_t failed = 0;
    for (std::size_t i = 0; i < n_items; ++i) {
        if (item_errors[i].empty()) continue;
        const std::size_t t = i / cases.size(), c = i % cases.size();
        auto& cr = teams[t].cases[c];
        cr.case_id = cases[c];
        cr.team_id = team_ids[t];
        cr.metrics.reset();
        cr.error = item_errors[i];
        errors.push_back(fmt::format("{}/{}: {}", team_ids[t], cases[c], item_errors[i]));
        ++failed;
    }

    ordered_json report;
    report["schema_version"] = kSchemaVersion;
    report["teams"] = ordered_json::array();
    std::string csv = "team,case,dsc,hd_mm,volume_ml_pred,volume_ml_gt,degenerate,missing_prediction,wall_time_s,error\n";
    for (auto& team : teams) {
        double runtime_sum = 0.0;
        for (const auto& c : team.cases) {
            runtime_sum += c.wall_time_s;
            const bool null_output = c.missing_prediction || !c.error.empty() ||
                                     (c.metrics && c.metrics->degenerate == DegenerateFlag::EmptyPrediction);
            team.nr = team.nr || null_output;
        }
        team.mean_runtime_s = runtime_sum / static_cast<double>(team.cases.size());

        ordered_json tj;
        tj["team"] = team.team_id;
        tj["nr"] = team.nr;
        tj["mean_runtime_s"] = team.mean_runtime_s;
        tj["cases"] = ordered_json::array();
        for (const auto& c : team.cases) {
            tj["cases"].push_back(metric_json(c));
            std::string err = c.error;
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            if (c.metrics)
                csv += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", team.team_id, c.case_id, num(c.metrics->dsc),
                                   num(c.metrics->hd_mm), num(c.metrics->volume_ml_pred), num(c.metrics->volume_ml_gt),
                                   degenerate_flag_name(c.metrics->degenerate), c.missing_prediction ? 1 : 0,
                                   num(c.wall_time_s), err);
            else
                csv += fmt::format("{},{},,,,,,{},{},{}\n", team.team_id, c.case_id, c.missing_prediction ? 1 : 0,
                                   num(c.wall_time_s), err);
        }
        report["teams"].push_back(tj);
    }
    write_text(config.output_dir / "evaluation.json", report.dump(2) + "\n");
    write_text(config.output_dir / "evaluation.csv", csv);
    return finish(std::move(errors), failed, n_items);
}

CommandResult cmd_sensitivity(const EvaluationConfig& config) {
    const auto teams = read_evaluation(config.output_dir / "evaluation.json");
    if (teams.empty()) throw EmptyField("evaluation report lists no teams");
    const auto manifest = read_design_manifest(config.design_manifest());
    if (manifest.empty() || manifest.size() % (kFactors + 2) != 0)
        throw IncompleteDesign(fmt::format("design manifest has {} rows, not a multiple of {}", manifest.size(), kFactors + 2));
    const std::size_t n_base = manifest.size() / (kFactors + 2);

    std::set<std::string> bases;
    for (const auto& t : teams)
        for (const auto& c : t.cases)
            if (const auto parsed = parse_augmented_case_id(c.case_id)) bases.insert(parsed->first);
    const std::vector<std::string> base_list(bases.begin(), bases.end());

    std::vector<TeamSensitivity> results(teams.size());
    const auto errs = run_work_queue(teams.size(), config.worker_count(), [&](std::size_t t) {
        results[t] = team_sensitivity(teams[t], base_list, n_base, kFactors);
    });

    std::vector<std::string> errors;
    std::size_t failed = 0;
    ordered_json report;
    report["schema_version"] = kSchemaVersion;
    report["n_base"] = n_base;
    report["m_factors"] = kFactors;
    report["seed"] = config.seed;
    report["factors"] = ordered_json::array();
    for (const auto* f : kFactorNames) report["factors"].push_back(f);
    report["base_cases"] = base_list;
    report["teams"] = ordered_json::array();
    for (std::size_t t = 0; t < teams.size(); ++t) {
        ordered_json tj;
        tj["team"] = teams[t].team_id;
        if (!errs[t].empty()) {
            ++failed;
            errors.push_back(fmt::format("{}: {}", teams[t].team_id, errs[t]));
            tj["error"] = errs[t];
            tj["outputs"] = {{"DSC", nullptr}, {"HD", nullptr}};
            tj["p_var"] = nullptr;
            tj["p_inter"] = nullptr;
        } else {
            tj["error"] = nullptr;
            tj["outputs"] = {{"DSC", indices_json(*results[t].dsc)}, {"HD", indices_json(*results[t].hd)}};
            tj["p_var"] = results[t].p_var;
            tj["p_inter"] = results[t].p_inter;
        }
        report["teams"].push_back(tj);
    }
    fs::create_directories(config.output_dir);
    write_text(config.output_dir / "sensitivity.json", report.dump(2) + "\n");
    return finish(std::move(errors), failed, teams.size());
}

CommandResult cmd_leaderboard(const EvaluationConfig& config) {
    const auto evals = read_evaluation(config.output_dir / "evaluation.json");
    const auto sens = read_sensitivity(config.output_dir / "sensitivity.json");
    if (evals.empty()) throw EmptyField("no teams to rank");
    std::map<std::string, const TeamSensitivity*> sens_by_team;
    for (const auto& s : sens) sens_by_team[s.team_id] = &s;

    std::vector<std::string> errors;
    std::vector<TeamRecord> records;
    for (const auto& e : evals) {
        TeamRecord r;
        r.team_id = e.team_id;
        r.mean_runtime_s = e.mean_runtime_s;
        r.nr_flag = e.nr;
        for (const auto& c : e.cases)
            if (c.metrics) {
                r.dsc_values.push_back(c.metrics->dsc);
                r.hd_values.push_back(c.metrics->hd_mm);
            }
        const auto it = sens_by_team.find(e.team_id);
        if (it == sens_by_team.end() || !it->second->error.empty()) {
            r.nr_flag = true;
            errors.push_back(fmt::format("{}: no usable sensitivity analysis, team is non-ranked", e.team_id));
        } else {
            r.p_var = it->second->p_var;
            r.p_inter = it->second->p_inter;
        }
        records.push_back(std::move(r));
    }
    const auto board = build_leaderboard(records);
    std::map<std::string, const TeamRecord*> rec_by_team;
    for (const auto& r : records) rec_by_team[r.team_id] = &r;

    std::string csv = "team,p_dsc,r_dsc,p_hd,r_hd,p_var,r_var,p_inter,r_inter,p_fin,r_fin\n";
    ordered_json report;
    report["schema_version"] = kSchemaVersion;
    report["teams"] = ordered_json::array();
    for (const auto& s : board.rows) {
        const auto& rec = *rec_by_team.at(s.team_id);
        csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.team_id, opt_csv(s.p_dsc), opt_csv(s.r_dsc),
                           opt_csv(s.p_hd), opt_csv(s.r_hd), opt_csv(s.p_var), opt_csv(s.r_var), opt_csv(s.p_inter),
                           opt_csv(s.r_inter), opt_csv(s.p_fin), s.position);
        ordered_json tj;
        tj["team"] = s.team_id;
        tj["nr"] = s.nr;
        tj["mean_runtime_s"] = s.mean_runtime_s;
        tj["p_dsc"] = opt_json(s.p_dsc);
        tj["r_dsc"] = opt_json(s.r_dsc);
        tj["p_hd"] = opt_json(s.p_hd);
        tj["r_hd"] = opt_json(s.r_hd);
        tj["p_var"] = opt_json(s.p_var);
        tj["r_var"] = opt_json(s.r_var);
        tj["p_inter"] = opt_json(s.p_inter);
        tj["r_inter"] = opt_json(s.r_inter);
        tj["p_fin"] = opt_json(s.p_fin);
        tj["r_fin"] = s.position;
        if (!rec.dsc_values.empty()) {
            const auto ds = robust_stats(rec.dsc_values);
            const auto hs = robust_stats(rec.hd_values);
            tj["dsc_stats"] = {{"median", ds.median}, {"variance", ds.variance}, {"skewness", ds.skewness}};
            tj["hd_stats"] = {{"median", hs.median}, {"variance", hs.variance}, {"skewness", hs.skewness}};
        }
        tj["dsc_values"] = rec.dsc_values;
        tj["hd_values"] = rec.hd_values;
        report["teams"].push_back(tj);
    }
    fs::create_directories(config.output_dir);
    write_text(config.output_dir / "leaderboard.csv", csv);
    write_text(config.output_dir / "leaderboard.json", report.dump(2) + "\n");

    std::vector<detail::NamedSeries> dsc_series, hd_series;
    for (const auto& r : records) {
        dsc_series.push_back({r.team_id, r.dsc_values});
        hd_series.push_back({r.team_id, r.hd_values});
    }
    write_text(config.output_dir / "dsc_histogram.svg", detail::histogram_svg("DSC per team", "DSC", dsc_series));
    write_text(config.output_dir / "hd_histogram.svg", detail::histogram_svg("Hausdorff distance per team", "HD (mm)", hd_series));
    std::vector<detail::IndexGroup> groups;
    for (const auto& s : sens)
        for (const auto* o : {&s.dsc, &s.hd})
            if (*o) groups.push_back({fmt::format("{} / {}", s.team_id, (*o)->indices.output_name), (*o)->indices.s1, (*o)->indices.st});
    write_text(config.output_dir / "sobol_indices.svg",
               detail::sobol_bars_svg("Sobol' indices", {std::begin(kFactorNames), std::end(kFactorNames)}, groups));

    CommandResult r;
    r.errors = std::move(errors);
    r.exit_code = r.errors.empty() ? kExitSuccess : kExitPartial;
    return r;
}

CommandResult cmd_meshqc(const EvaluationConfig& config) {
    const auto team_ids = list_subdirs(config.submissions_dir);
    if (team_ids.empty()) throw EmptyField(fmt::format("no team directories in '{}'", config.submissions_dir.string()));

    struct Run {
        std::size_t team;
        std::string name;
        std::optional<MeshQualityReport> report;
    };
    std::vector<Run> runs;
    std::vector<std::string> errors;
    std::vector<bool> team_failed(team_ids.size(), false);
    for (std::size_t t = 0; t < team_ids.size(); ++t) {
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(config.submissions_dir / team_ids[t]))
            if (entry.is_regular_file() && entry.path().extension() == ".node") names.push_back(entry.path().stem().string());
        std::sort(names.begin(), names.end());
        if (names.empty()) {
            team_failed[t] = true;
            errors.push_back(fmt::format("{}: no .node/.ele meshes", team_ids[t]));
        }
        for (auto& n : names) runs.push_back({t, std::move(n), std::nullopt});
    }

    const auto errs = run_work_queue(runs.size(), config.worker_count(), [&](std::size_t i) {
        const auto dir = config.submissions_dir / team_ids[runs[i].team];
        runs[i].report = tet_quality_report(read_tetmesh(dir / (runs[i].name + ".node"), dir / (runs[i].name + ".ele")));
    });
    for (std::size_t i = 0; i < runs.size(); ++i)
        if (!errs[i].empty()) {
            team_failed[runs[i].team] = true;
            errors.push_back(fmt::format("{}/{}: {}", team_ids[runs[i].team], runs[i].name, errs[i]));
        }

    std::vector<MeshTeamRecord> records(team_ids.size());
    std::vector<ordered_json> run_json(team_ids.size(), ordered_json::array());
    for (std::size_t t = 0; t < team_ids.size(); ++t) {
        records[t].team_id = team_ids[t];
        std::vector<double> pooled;
        double invalid = 0.0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            if (runs[i].team != t) continue;
            ordered_json rj{{"run", runs[i].name}};
            if (runs[i].report) {
                const auto& rep = *runs[i].report;
                pooled.insert(pooled.end(), rep.scaled_jacobians.begin(), rep.scaled_jacobians.end());
                invalid += static_cast<double>(rep.invalid_count);
                ++count;
                rj["median"] = rep.stats.median;
                rj["variance"] = rep.stats.variance;
                rj["skewness"] = rep.stats.skewness;
                rj["invalid_count"] = rep.invalid_count;
                rj["element_count"] = rep.element_count();
            } else {
                rj["error"] = errs[i];
            }
            run_json[t].push_back(rj);
        }
        records[t].nr_flag = team_failed[t] || pooled.empty();
        if (!pooled.empty()) {
            records[t].stats = robust_stats(pooled);
            records[t].mean_invalid = invalid / static_cast<double>(count);
        }
    }

    const auto standings = jacobian_ranking(records);
    std::map<std::string, std::size_t> index_of;
    for (std::size_t t = 0; t < team_ids.size(); ++t) index_of[team_ids[t]] = t;

    ordered_json report;
    report["schema_version"] = kSchemaVersion;
    report["teams"] = ordered_json::array();
    std::string csv = "team,m_j,var_j,skew_j,n_invalid,r_m,r_var,r_skew,r_n,p_j,r_j\n";
    for (const auto& s : standings) {
        const auto t = index_of.at(s.team_id);
        const auto& rec = records[t];
        ordered_json tj;
        tj["team"] = s.team_id;
        tj["nr"] = s.nr;
        tj["median"] = rec.nr_flag ? ordered_json(nullptr) : ordered_json(rec.stats.median);
        tj["variance"] = rec.nr_flag ? ordered_json(nullptr) : ordered_json(rec.stats.variance);
        tj["skewness"] = rec.nr_flag ? ordered_json(nullptr) : ordered_json(rec.stats.skewness);
        tj["mean_invalid"] = rec.nr_flag ? ordered_json(nullptr) : ordered_json(rec.mean_invalid);
        tj["r_median"] = opt_json(s.r_median);
        tj["r_variance"] = opt_json(s.r_variance);
        tj["r_skewness"] = opt_json(s.r_skewness);
        tj["r_invalid"] = opt_json(s.r_invalid);
        tj["p_j"] = opt_json(s.p_j);
        tj["r_j"] = s.position;
        tj["runs"] = run_json[t];
        report["teams"].push_back(tj);
        if (rec.nr_flag)
            csv += fmt::format("{},NR,NR,NR,NR,NR,NR,NR,NR,NR,{}\n", s.team_id, s.position);
        else
            csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.team_id, num(rec.stats.median),
                               num(rec.stats.variance), num(rec.stats.skewness), num(rec.mean_invalid),
                               opt_csv(s.r_median), opt_csv(s.r_variance), opt_csv(s.r_skewness), opt_csv(s.r_invalid),
                               opt_csv(s.p_j), s.position);
    }
    fs::create_directories(config.output_dir);
    write_text(config.output_dir / "meshqc.json", report.dump(2) + "\n");
    write_text(config.output_dir / "meshqc.csv", csv);

    std::size_t failed = 0;
    for (const bool f : team_failed) failed += f;
    return finish(std::move(errors), failed, team_ids.size());
}

}  // namespace sega
