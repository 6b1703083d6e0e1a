#include "sega/errors.hpp"
#include "sega/harness.hpp"
#include "sega/mesh.hpp"
#include "sega/nrrd.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <fstream>

using namespace sega;
namespace fs = std::filesystem;

namespace {

void write_base_case(const fs::path& dir, const std::string& name, double radius) {
    Geometry g;
    g.dims = {10, 10, 4};
    g.spacing = {1.0, 1.0, 2.0};
    VoxelGrid img(g, ScalarType::Int16);
    LabelMask mask(g);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t j = 0; j < 10; ++j)
            for (std::size_t i = 0; i < 10; ++i) {
                const bool in = (i - 4.5) * (i - 4.5) + (j - 4.5) * (j - 4.5) <= radius * radius;
                mask.at(i, j, k) = in;
                img.at(i, j, k) = in ? 300.0f : -100.0f;
            }
    write_nrrd(img, dir / (name + ".nrrd"));
    write_nrrd(mask, dir / (name + ".seg.nrrd"));
}

nlohmann::json load(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

const nlohmann::json& case_entry(const nlohmann::json& team, const std::string& id) {
    for (const auto& c : team["cases"])
        if (c["case"] == id) return c;
    throw std::runtime_error("no case " + id);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

struct Fixture {
    fs::path root, gt, aug, subs, reports;
    EvaluationConfig cfg;

    explicit Fixture(const std::string& name, std::size_t n_base = 2) {
        root = oracle::scratch_dir(name);
        gt = root / "gt";
        aug = root / "aug";
        subs = root / "subs";
        reports = root / "reports";
        fs::create_directories(gt);
        write_base_case(gt, "case0", 3.2);
        cfg.ground_truth_dir = gt;
        cfg.output_dir = aug;
        cfg.n_base = n_base;
        cfg.seed = 5;
        cfg.threads = 2;
    }

    EvaluationConfig eval_config() const {
        auto c = cfg;
        c.ground_truth_dir = aug;
        c.submissions_dir = subs;
        c.output_dir = reports;
        return c;
    }

    /// A team whose predictions are the reference masks (optionally dropping some).
    void copy_team(const std::string& team, const std::vector<std::string>& skip = {}) {
        fs::create_directories(subs / team);
        for (const auto& e : fs::directory_iterator(aug)) {
            const auto name = e.path().filename().string();
            if (name.size() < 9 || name.substr(name.size() - 9) != ".seg.nrrd") continue;
            if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
            fs::copy_file(e.path(), subs / team / name);
        }
    }

    /// A team that erodes every mask by dropping its surface layer in x.
    void shifted_team(const std::string& team) {
        fs::create_directories(subs / team);
        for (const auto& e : fs::directory_iterator(aug)) {
            const auto name = e.path().filename().string();
            if (name.size() < 9 || name.substr(name.size() - 9) != ".seg.nrrd") continue;
            auto m = read_nrrd_mask(e.path());
            auto out = m;
            for (std::size_t k = 0; k < m.geometry.dims[2]; ++k)
                for (std::size_t j = 0; j < m.geometry.dims[1]; ++j)
                    for (std::size_t i = 0; i + 1 < m.geometry.dims[0]; ++i) out.at(i + 1, j, k) = m.at(i, j, k);
            write_nrrd(out, subs / team / name);
        }
    }
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config parsing") {
    const auto dir = oracle::scratch_dir("config");
    std::ofstream(dir / "run.cfg") << "# evaluation run\nground_truth_dir = gt\nsubmissions_dir=/abs/subs\n"
                                      "output_dir = out  # trailing\nn_base = 10\nseed = 77\nthreads = auto\n";
    const auto c = load_config(dir / "run.cfg");
    CHECK(c.ground_truth_dir == dir / "gt");
    CHECK(c.submissions_dir == fs::path("/abs/subs"));
    CHECK(c.output_dir == dir / "out");
    CHECK(c.n_base == 10);
    CHECK(c.seed == 77);
    CHECK(c.threads == 0);
    CHECK(c.design_manifest() == dir / "gt" / "design.csv");

    std::ofstream(dir / "bad.cfg") << "colour = blue\n";
    CHECK_THROWS_AS(load_config(dir / "bad.cfg"), DomainError);
    std::ofstream(dir / "bad2.cfg") << "n_base = many\n";
    CHECK_THROWS_AS(load_config(dir / "bad2.cfg"), DomainError);
}

TEST_CASE("work queue runs each index once and isolates failures") {
    std::vector<std::atomic<int>> hits(200);
    const auto errs = run_work_queue(200, 8, [&](std::size_t i) {
        ++hits[i];
        if (i % 50 == 7) throw std::runtime_error("boom " + std::to_string(i));
    });
    for (auto& h : hits) CHECK(h.load() == 1);
    CHECK(errs[7] == "boom 7");
    CHECK(errs[57] == "boom 57");
    CHECK(errs[8].empty());
}

TEST_CASE("augmented case ids") {
    CHECK(parse_augmented_case_id("case_12_r149") == std::make_pair(std::string("case_12"), std::size_t{149}));
    CHECK_FALSE(parse_augmented_case_id("case_12").has_value());
    CHECK_FALSE(parse_augmented_case_id("case_rx").has_value());
}

TEST_CASE("augment writes the full design") {
    Fixture f("augment");
    const auto r = cmd_augment(f.cfg);
    CHECK(r.exit_code == kExitSuccess);
    const auto rows = read_design_manifest(f.aug / "design.csv");
    CHECK(rows.size() == 12);
    for (std::size_t row = 0; row < 12; ++row) {
        CHECK(fs::exists(f.aug / ("case0_r" + std::to_string(row) + ".nrrd")));
        CHECK(fs::exists(f.aug / ("case0_r" + std::to_string(row) + ".seg.nrrd")));
    }
    CHECK(slurp(f.aug / "design.csv").rfind("row,u1,u2,u3,u4,alpha,d,beta,sigma,noise_seed\n", 0) == 0);

    const auto first = slurp(f.aug / "design.csv");
    const auto first_img = slurp(f.aug / "case0_r3.nrrd");
    CHECK(cmd_augment(f.cfg).exit_code == kExitSuccess);
    CHECK(slurp(f.aug / "design.csv") == first);
    CHECK(slurp(f.aug / "case0_r3.nrrd") == first_img);

    const auto img = read_nrrd(f.aug / "case0_r0.nrrd");
    for (const float v : img.values) CHECK((v >= 0.0f && v <= 1.0f));
}

TEST_CASE("augment with defaults yields 150 pairs per case") {
    Fixture f("augment_default", 25);
    CHECK(cmd_augment(f.cfg).exit_code == kExitSuccess);
    CHECK(read_design_manifest(f.aug / "design.csv").size() == 150);
    CHECK(fs::exists(f.aug / "case0_r149.seg.nrrd"));
    CHECK_FALSE(fs::exists(f.aug / "case0_r150.seg.nrrd"));
}

TEST_CASE("augment reports unreadable cases") {
    Fixture f("augment_bad");
    std::ofstream(f.gt / "broken.nrrd") << "garbage";
    std::ofstream(f.gt / "broken.seg.nrrd") << "garbage";
    const auto r = cmd_augment(f.cfg);
    CHECK(r.exit_code == kExitPartial);
    CHECK(r.errors.size() == 1);
    const auto report = load(f.aug / "augment.json");
    CHECK(report["cases"][0]["case"] == "broken");
    CHECK_FALSE(report["cases"][0]["error"].is_null());

    fs::remove(f.gt / "case0.nrrd");
    CHECK(cmd_augment(f.cfg).exit_code == kExitFatal);
}

TEST_CASE("evaluate, sensitivity and leaderboard") {
    Fixture f("pipeline");
    REQUIRE(cmd_augment(f.cfg).exit_code == kExitSuccess);
    f.copy_team("perfect");
    f.shifted_team("shifted");
    f.copy_team("lazy", {"case0_r4.seg.nrrd"});
    const auto cfg = f.eval_config();

    const auto ev = cmd_evaluate(cfg);
    CHECK(ev.exit_code == kExitSuccess);
    const auto report = load(f.reports / "evaluation.json");
    CHECK(report["schema_version"] == kSchemaVersion);
    REQUIRE(report["teams"].size() == 3);
    CHECK(report["teams"][0]["team"] == "lazy");
    CHECK(report["teams"][0]["nr"] == true);
    CHECK(report["teams"][1]["team"] == "perfect");
    CHECK(report["teams"][1]["nr"] == false);
    for (const auto& c : report["teams"][1]["cases"]) {
        CHECK(c["dsc"] == 1.0);
        CHECK(c["hd_mm"] == 0.0);
    }
    const auto& lazy_case = case_entry(report["teams"][0], "case0_r4");
    CHECK(lazy_case["missing_prediction"] == true);
    CHECK(lazy_case["degenerate"] == "EmptyPrediction");
    CHECK(lazy_case["dsc"] == 0.0);

    const auto se = cmd_sensitivity(cfg);
    CHECK(se.exit_code == kExitSuccess);
    const auto sens = load(f.reports / "sensitivity.json");
    CHECK(sens["n_base"] == 2);
    CHECK(sens["teams"][1]["outputs"]["DSC"]["degenerate"] == true);  // perfect team has constant DSC

    const auto lb = cmd_leaderboard(cfg);
    CHECK(lb.exit_code == kExitSuccess);
    const auto board = load(f.reports / "leaderboard.json");
    CHECK(board["teams"].size() == 3);
    CHECK(board["teams"][2]["team"] == "lazy");
    CHECK(board["teams"][2]["nr"] == true);
    for (const char* file : {"leaderboard.csv", "dsc_histogram.svg", "hd_histogram.svg", "sobol_indices.svg"})
        CHECK(fs::exists(f.reports / file));
    const auto csv = slurp(f.reports / "leaderboard.csv");
    CHECK(csv.rfind("team,p_dsc,r_dsc,p_hd,r_hd,p_var,r_var,p_inter,r_inter,p_fin,r_fin\n", 0) == 0);
    CHECK(csv.find("lazy,NR,NR,NR,NR,NR,NR,NR,NR,NR,3") != std::string::npos);
}

TEST_CASE("geometry mismatch is a per-case error") {
    Fixture f("mismatch");
    REQUIRE(cmd_augment(f.cfg).exit_code == kExitSuccess);
    f.copy_team("team");
    Geometry g;
    g.dims = {3, 3, 3};
    LabelMask wrong(g);
    wrong.values[0] = 1;
    write_nrrd(wrong, f.subs / "team" / "case0_r2.seg.nrrd");
    const auto r = cmd_evaluate(f.eval_config());
    CHECK(r.exit_code == kExitPartial);
    REQUIRE(r.errors.size() == 1);
    const auto report = load(f.reports / "evaluation.json");
    CHECK(report["teams"][0]["nr"] == true);
    CHECK_FALSE(case_entry(report["teams"][0], "case0_r2")["error"].is_null());
    CHECK(case_entry(report["teams"][0], "case0_r3")["dsc"] == 1.0);
}

TEST_CASE("sensitivity with a missing design row") {
    Fixture f("incomplete");
    REQUIRE(cmd_augment(f.cfg).exit_code == kExitSuccess);
    f.copy_team("team");
    fs::remove(f.aug / "case0_r7.seg.nrrd");  // reference gone, so the row is never evaluated
    const auto cfg = f.eval_config();
    REQUIRE(cmd_evaluate(cfg).exit_code == kExitSuccess);
    auto design_cfg = cfg;
    design_cfg.design_path = f.aug / "design.csv";
    const auto r = cmd_sensitivity(design_cfg);
    CHECK(r.exit_code == kExitFatal);
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("case0_r7") != std::string::npos);

    TeamEvaluation t;
    t.team_id = "x";
    CHECK_THROWS_AS(team_sensitivity(t, {"case0"}, 2, 4), IncompleteDesign);
}

TEST_CASE("team sensitivity on an additive response") {
    const std::size_t n = 256;
    const auto design = build_saltelli_design(n, 4, 3);
    TeamEvaluation team;
    team.team_id = "additive";
    for (std::size_t r = 0; r < design.rows.size(); ++r) {
        const auto& u = design.rows[r].unit_point;
        CaseResult c;
        c.case_id = "c_r" + std::to_string(r);
        MetricResult m;
        m.dsc = u[0] + u[1] + u[2] + u[3];
        m.hd_mm = 2.0 * m.dsc;
        c.metrics = m;
        team.cases.push_back(c);
    }
    const auto s = team_sensitivity(team, {"c"}, n, 4);
    CHECK(std::abs(s.p_inter) < 0.05);
    CHECK(s.p_var > 0.9);
    CHECK(s.dsc->indices.s1 == s.hd->indices.s1);
}

TEST_CASE("leaderboard with no teams") {
    const auto dir = oracle::scratch_dir("empty_board");
    std::ofstream(dir / "evaluation.json") << R"({"schema_version":1,"teams":[]})";
    std::ofstream(dir / "sensitivity.json") << R"({"schema_version":1,"n_base":2,"teams":[]})";
    EvaluationConfig c;
    c.output_dir = dir;
    CHECK_THROWS_AS(cmd_leaderboard(c), EmptyField);
}

TEST_CASE("mesh quality ranking") {
    const auto root = oracle::scratch_dir("meshqc");
    TetMesh good;
    good.nodes = {{1, 1, 1}, {-1, 1, -1}, {1, -1, -1}, {-1, -1, 1}, {3, 3, 3}};
    good.tets = {{0, 1, 2, 3}, {0, 1, 2, 3}};
    TetMesh bad = good;
    bad.tets.push_back({1, 0, 2, 3});
    fs::create_directories(root / "subs" / "good");
    fs::create_directories(root / "subs" / "bad");
    fs::create_directories(root / "subs" / "broken");
    write_tetmesh(good, root / "subs" / "good" / "run1.node", root / "subs" / "good" / "run1.ele");
    write_tetmesh(bad, root / "subs" / "bad" / "run1.node", root / "subs" / "bad" / "run1.ele", 1);
    std::ofstream(root / "subs" / "broken" / "run1.node") << "nonsense\n";
    std::ofstream(root / "subs" / "broken" / "run1.ele") << "nonsense\n";

    EvaluationConfig c;
    c.submissions_dir = root / "subs";
    c.output_dir = root / "out";
    const auto r = cmd_meshqc(c);
    CHECK(r.exit_code == kExitPartial);
    const auto report = load(root / "out" / "meshqc.json");
    REQUIRE(report["teams"].size() == 3);
    CHECK(report["teams"][0]["team"] == "good");
    CHECK(report["teams"][0]["r_invalid"] == 1.0);
    CHECK(report["teams"][1]["team"] == "bad");
    CHECK(report["teams"][1]["mean_invalid"] == 1.0);
    CHECK(report["teams"][2]["team"] == "broken");
    CHECK(report["teams"][2]["nr"] == true);
    const auto& run = report["teams"][0]["runs"][0];
    for (const char* key : {"median", "variance", "skewness", "invalid_count", "element_count"}) CHECK(run.contains(key));

    const auto empty = oracle::scratch_dir("meshqc_empty");
    c.submissions_dir = empty;
    CHECK_THROWS_AS(cmd_meshqc(c), EmptyField);
}

}
