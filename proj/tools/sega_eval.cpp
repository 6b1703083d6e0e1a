#include "sega/errors.hpp"
#include "sega/harness.hpp"
#include "sega/mesh.hpp"
#include "sega/nrrd.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdio>
#include <optional>

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_base;
    std::optional<unsigned> threads;
    std::string out, gt, submissions, design;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config, "key = value configuration file");
    cmd->add_option("--seed", o.seed, "design seed");
    cmd->add_option("--n-base", o.n_base, "Saltelli base sample size N");
    cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--gt", o.gt, "ground truth directory");
    cmd->add_option("--submissions", o.submissions, "submissions directory");
    cmd->add_option("--design", o.design, "design manifest (design.csv)");
}

sega::EvaluationConfig resolve(const Overrides& o) {
    sega::EvaluationConfig c;
    if (!o.config.empty()) c = sega::load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.n_base) c.n_base = *o.n_base;
    if (o.threads) c.threads = *o.threads;
    if (!o.out.empty()) c.output_dir = o.out;
    if (!o.gt.empty()) c.ground_truth_dir = o.gt;
    if (!o.submissions.empty()) c.submissions_dir = o.submissions;
    if (!o.design.empty()) c.design_path = o.design;
    if (c.output_dir.empty()) c.output_dir = ".";
    return c;
}

int report(const sega::CommandResult& r) {
    for (const auto& e : r.errors) fmt::print(stderr, "error: {}\n", e);
    return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Segmentation challenge evaluation: augmentation, metrics, sensitivity and ranking"};
    app.require_subcommand(1);

    Overrides o;
    auto* augment = app.add_subcommand("augment", "write the Saltelli-augmented copies of every base case");
    auto* evaluate = app.add_subcommand("evaluate", "score every team's masks against the references");
    auto* sensitivity = app.add_subcommand("sensitivity", "Sobol' indices and robustness scores per team");
    auto* leaderboard = app.add_subcommand("leaderboard", "aggregate ranks into the final leaderboard");
    auto* meshqc = app.add_subcommand("meshqc", "scaled Jacobian quality ranking of tetrahedral meshes");
    for (auto* cmd : {augment, evaluate, sensitivity, leaderboard, meshqc}) add_common(cmd, o);

    auto* surface = app.add_subcommand("surface", "mask -> smoothed surface mesh (binary STL)");
    std::string mask_path, stl_path;
    sega::SmoothOptions smooth;
    bool audit = false;
    surface->add_option("mask", mask_path, "input mask (.nrrd)")->required();
    surface->add_option("stl", stl_path, "output STL")->required();
    surface->add_option("--iterations", smooth.iterations, "smoothing iterations");
    surface->add_option("--lambda", smooth.lambda, "smoothing step");
    surface->add_option("--pass-band", smooth.pass_band, "smoothing pass band");
    surface->add_flag("--audit", audit, "also scan for self-intersections");

    CLI11_PARSE(app, argc, argv);

    try {
        if (surface->parsed()) {
            const auto mesh = sega::smooth(sega::marching_cubes(sega::read_nrrd_mask(mask_path)), smooth);
            sega::write_stl(mesh, stl_path);
            const auto w = sega::watertight_check(mesh, audit);
            fmt::print("triangles={} volume_mm3={} watertight={} components={} self_intersections={}\n",
                       mesh.triangles.size(), sega::enclosed_volume(mesh), w.is_watertight, w.component_count,
                       audit ? fmt::format("{}", w.self_intersections) : std::string("unchecked"));
            return w.is_watertight ? sega::kExitSuccess : sega::kExitPartial;
        }
        const auto config = resolve(o);
        if (augment->parsed()) return report(sega::cmd_augment(config));
        if (evaluate->parsed()) return report(sega::cmd_evaluate(config));
        if (sensitivity->parsed()) return report(sega::cmd_sensitivity(config));
        if (leaderboard->parsed()) return report(sega::cmd_leaderboard(config));
        if (meshqc->parsed()) return report(sega::cmd_meshqc(config));
    } catch (const std::exception& e) {
        fmt::print(stderr, "fatal: {}\n", e.what());
        return sega::kExitFatal;
    }
    return sega::kExitFatal;
}
