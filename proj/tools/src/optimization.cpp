#include "optimization.hpp"
#include "commands.hpp"
#include "wsmn/texture.hpp"

#include <iostream>
#include <memory>

namespace wsmn::cli {

void OptimizerOptions::add(CLI::App& app) {
    app.add_option("--population", population, "NSGA-II population size (even)")->capture_default_str();
    app.add_option("--generations", generations, "NSGA-II generations")->capture_default_str();
    app.add_option("--seed", seed, "Optimizer seed")->capture_default_str();
}

OptimizerConfig OptimizerOptions::config() const {
    OptimizerConfig cfg;
    cfg.population = population;
    cfg.generations = generations;
    cfg.validate();
    return cfg;
}

OptimizationRun optimize_thresholds(const Image& cover, const cv::Mat1b& logo, const KeySet& keys, const OptimizerOptions& opt,
                                    std::uint64_t texture_seed, const EmbedParams& params) {
    const OptimizerConfig cfg = opt.config();
    MarkSet marks = prepare_marks(logo, keys, cover.width(), cover.height(), params.block);
    TextureMap texture = analyze_texture(to_u8(luma_plane(cover)), params.block, texture_seed);
    WatermarkObjective objective(cover, marks, texture, params);
    OptimizationRun run;
    run.result = nsga2([&](const std::vector<double>& x) { return objective(x); }, cfg, opt.seed);
    run.chosen = select_operating_point(run.result.front, cfg.robustness_cap);
    run.evaluations = objective.evaluations();
    return run;
}

Json individual_json(const Individual& ind) {
    Json f = Json::array();
    for (double v : ind.f) f.push_back(number(v));
    return Json{{"x", ind.x}, {"f", f}, {"rank", ind.rank}, {"crowding", number(ind.crowding)}};
}

Json operating_point_json(const OperatingPoint& op) {
    return Json{{"delta_prime", op.thresholds.delta_prime},
                {"delta_dprime", op.thresholds.delta_dprime},
                {"feasible", op.feasible},
                {"objectives", individual_json(op.chosen)["f"]}};
}

std::string trace_jsonl(const Nsga2Result& res) {
    std::string out;
    for (const auto& g : res.trace) {
        Json line{{"generation", g.generation}, {"front", Json::array()}};
        for (const auto& m : g.front) line["front"].push_back(individual_json(m));
        out += line.dump() + "\n";
    }
    return out;
}

namespace {

struct OptimizeOptions {
    std::string input, out_dir, logo = "builtin";
    std::uint64_t texture_seed = 1;
    KeyOptions keys;
    OptimizerOptions optimizer;
};

int run_optimize(const OptimizeOptions& o) {
    Stopwatch clock;
    const Image cover = load_image(o.input);
    partition(cover, 8);
    const KeySet keys = o.keys.parse();
    const cv::Mat1b logo = *resolve_logo(o.logo, cover.height(), cover.width(), Mode::Dual);
    OptimizationRun run = optimize_thresholds(cover, logo, keys, o.optimizer, o.texture_seed);
    const fs::path dir(o.out_dir);
    write_text(trace_jsonl(run.result), dir / "trace.jsonl");
    Json pareto = Json::array();
    for (const auto& m : run.result.front) pareto.push_back(individual_json(m));
    Json report;
    report["tool"] = tool_info("optimize");
    report["inputs"]["cover"] = file_info(o.input);
    if (o.logo != "builtin") report["inputs"]["logo"] = file_info(o.logo);
    report["config"] = {{"population", o.optimizer.population},
                        {"generations", o.optimizer.generations},
                        {"seed", o.optimizer.seed},
                        {"texture_seed", o.texture_seed},
                        {"robustness_cap", OptimizerConfig{}.robustness_cap},
                        {"keys_fingerprint", keys.fingerprint()}};
    report["chosen"] = operating_point_json(run.chosen);
    report["pareto_set"] = pareto;
    report["evaluations"] = run.evaluations;
    report["archive_size"] = run.result.archive.size();
    report["archive_nondominated"] = archive_nondominated(run.result.front, run.result.archive);
    report["trace"] = "trace.jsonl";
    write_json(report, dir / "thresholds.json");
    write_json(Json{{"total_s", clock.seconds()}}, dir / "timings.json");
    if (!run.chosen.feasible) std::cerr << "warning: no Pareto member meets the robustness cap; using the most robust one\n";
    std::cout << "delta_prime " << run.chosen.thresholds.delta_prime << " delta_dprime " << run.chosen.thresholds.delta_dprime
              << (run.chosen.feasible ? "" : " (infeasible)") << "\n";
    return 0;
}

} // namespace

Command add_optimize(CLI::App& app) {
    auto o = std::make_shared<OptimizeOptions>();
    CLI::App* sub = app.add_subcommand("optimize", "Tune the thresholds with NSGA-II");
    sub->add_option("-i,--input", o->input, "Cover image")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out-dir", o->out_dir, "Output directory")->required();
    sub->add_option("--logo", o->logo, "Logo used for the dual embedding, or 'builtin'")->capture_default_str();
    sub->add_option("--texture-seed", o->texture_seed, "Seed of the texture clustering")->capture_default_str();
    o->keys.add(*sub);
    o->optimizer.add(*sub);
    return {sub, [o] { return run_optimize(*o); }};
}

} // namespace wsmn::cli
