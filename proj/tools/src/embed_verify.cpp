#include "commands.hpp"
#include "common.hpp"
#include "optimization.hpp"
#include "wsmn/metrics.hpp"
#include "wsmn/pipeline.hpp"

#include <opencv2/imgproc.hpp>

#include <iostream>
#include <memory>

namespace wsmn::cli {

namespace {

struct EmbedOptions {
    std::string input, out_dir, name = "watermarked", mode = "dual", logo, thresholds = "fixed";
    std::uint64_t texture_seed = 1;
    int block = 8;
    KeyOptions keys;
    ThresholdOptions fixed;
    OptimizerOptions optimizer;
};

int run_embed(const EmbedOptions& o) {
    Stopwatch clock;
    const Mode mode = parse_mode(o.mode);
    const KeySet keys = o.keys.parse();
    const Image cover = load_image(o.input);
    EmbedParams params;
    params.block = o.block;
    partition(cover, params.block);
    const auto logo = resolve_logo(o.logo, cover.height(), cover.width(), mode);

    Json report;
    report["tool"] = tool_info("embed");
    report["inputs"]["cover"] = file_info(o.input);
    report["inputs"]["cover"]["pixel_hash"] = pixel_hash(cover);
    if (logo) report["inputs"]["logo"] = o.logo == "builtin" ? Json("builtin") : file_info(o.logo);

    ThresholdPair t;
    if (o.thresholds == "fixed") {
        t = o.fixed.pair();
    } else if (o.thresholds == "optimize") {
        cv::Mat1b tuning_logo = logo ? *logo : default_logo(cover.height() / (2 * params.block), cover.width() / (2 * params.block));
        auto run = optimize_thresholds(cover, tuning_logo, keys, o.optimizer, o.texture_seed, params);
        t = run.chosen.thresholds;
        report["optimization"] = operating_point_json(run.chosen);
        report["optimization"]["evaluations"] = run.evaluations;
        write_text(trace_jsonl(run.result), fs::path(o.out_dir) / (o.name + "_trace.jsonl"));
        if (!run.chosen.feasible) std::cerr << "warning: no Pareto member meets the robustness cap; using the most robust one\n";
    } else {
        throw InputError("--thresholds must be 'fixed' or 'optimize'");
    }

    EmbedOutput out = embed_image(cover, logo, keys, t, mode, o.texture_seed, params);
    const fs::path image_path = fs::path(o.out_dir) / (o.name + ".png");
    const fs::path meta_path = fs::path(o.out_dir) / (o.name + ".meta");
    save_image(out.image, image_path);
    write_sidecar(out.meta, meta_path);

    report["config"] = {{"mode", to_string(mode)},
                        {"block", params.block},
                        {"threshold_source", o.thresholds},
                        {"texture_seed", o.texture_seed},
                        {"keys_fingerprint", keys.fingerprint()}};
    if (o.thresholds == "optimize")
        report["config"]["optimizer"] = {{"population", o.optimizer.population},
                                         {"generations", o.optimizer.generations},
                                         {"seed", o.optimizer.seed}};
    report["thresholds"] = {{"delta_prime", t.delta_prime}, {"delta_dprime", t.delta_dprime}};
    report["quality"] = {{"psnr", number(out.psnr)}, {"ssim", out.ssim}};
    report["texture"] = {{"clusters", out.texture.k}, {"cluster_entropy", out.texture.cluster_entropy}};
    if (has_copyright(mode)) report["copyright"] = {{"logo_rows", out.marks.logo.rows}, {"logo_cols", out.marks.logo.cols}};
    if (has_auth(mode)) report["authentication"] = {{"mark_rows", out.marks.wa.rows}, {"mark_cols", out.marks.wa.cols}};
    report["outputs"] = {{"image", image_path.string()}, {"metadata", meta_path.string()}, {"pixel_hash", out.meta.image_hash}};
    report["timings"] = {{"total_s", clock.seconds()}};
    write_json(report, fs::path(o.out_dir) / (o.name + "_report.json"));
    std::cout << image_path.string() << ": PSNR " << out.psnr << " dB, SSIM " << out.ssim << "\n";
    return 0;
}

struct VerifyOptions {
    std::string input, meta, out_dir, logo, truth;
    std::uint64_t seed = 7;
    KeyOptions keys;
};

cv::Mat1b load_truth(const std::string& path) {
    Image img = load_image(path);
    cv::Mat gray;
    if (img.channels() == 3)
        cv::cvtColor(img.pixels, gray, cv::COLOR_RGB2GRAY);
    else
        gray = img.pixels;
    cv::Mat1b mask = gray >= 128;
    return mask / 255;
}

int run_verify(const VerifyOptions& o) {
    Stopwatch clock;
    const KeySet keys = o.keys.parse();
    const Image received = load_image(o.input);
    const fs::path meta_path = o.meta.empty() ? fs::path(o.input).replace_extension(".meta") : fs::path(o.meta);
    const Sidecar meta = read_sidecar(meta_path);
    TrainOptions train;
    train.seed = o.seed;
    VerifyOutput v = verify_image(received, meta, keys, train);
    const fs::path dir(o.out_dir);

    Json report;
    report["tool"] = tool_info("verify");
    report["inputs"]["received"] = file_info(o.input);
    report["inputs"]["metadata"] = file_info(meta_path);
    report["inputs"]["received"]["matches_embedded_pixels"] = pixel_hash(received) == meta.image_hash;
    report["config"] = {{"mode", to_string(meta.mode)},
                        {"block", meta.block_side},
                        {"mlp_seed", o.seed},
                        {"keys_fingerprint", keys.fingerprint()}};
    report["thresholds"] = {{"delta_prime", meta.thresholds.delta_prime}, {"delta_dprime", meta.thresholds.delta_dprime}};

    if (v.copyright) {
        save_binary(v.copyright->logo, dir / "logo.pbm");
        Json c{{"logo", (dir / "logo.pbm").string()}};
        if (!o.logo.empty()) {
            auto ref = resolve_logo(o.logo, received.height(), received.width(), meta.mode);
            if (ref->size() != v.copyright->logo.size()) throw InputError("reference logo has the wrong size");
            c["vs_reference"] = bits_summary(v.copyright->logo, *ref);
            Json copies = Json::array();
            for (const auto& copy : v.copyright->copies) copies.push_back(bits_summary(copy, *ref));
            c["copies_vs_reference"] = copies;
        }
        report["copyright"] = c;
    }
    if (!v.auth_mark.empty()) {
        const BlockGrid grid = partition(received, meta.block_side);
        cv::Mat1b blocks = v.tamper.cleaned;
        cv::Mat1b up;
        cv::resize(blocks * 255, up, received.pixels.size(), 0, 0, cv::INTER_NEAREST);
        save_image(Image{up}, dir / "tamper.png");
        save_binary(blocks, dir / "tamper_blocks.pbm");
        Json a = bits_summary(v.auth_extracted, v.auth_mark);
        a["model"] = {{"best_fold", v.model.best_fold}, {"test_accuracy", v.model.test_accuracy}, {"epochs", v.model.epochs}};
        a["tampered_blocks_raw"] = cv::countNonZero(v.tamper.raw);
        a["tampered_blocks"] = cv::countNonZero(blocks);
        a["tamper_map"] = (dir / "tamper.png").string();
        if (!o.truth.empty()) {
            cv::Mat1b truth = load_truth(o.truth);
            if (truth.size() != received.pixels.size()) throw InputError("truth mask must match the image size");
            auto s = localization_scores(blocks, block_truth(truth, grid.side));
            a["localization"] = {{"tpr", s.tpr}, {"fpr", s.fpr}, {"ac", s.ac}};
            report["inputs"]["truth"] = file_info(o.truth);
        }
        report["authentication"] = a;
    }
    report["timings"] = {{"total_s", clock.seconds()}};
    write_json(report, dir / "report.json");
    if (report.contains("authentication"))
        std::cout << "tampered blocks: " << report["authentication"]["tampered_blocks"].get<int>() << "\n";
    if (report.contains("copyright")) std::cout << "logo written to " << (dir / "logo.pbm").string() << "\n";
    return 0;
}

} // namespace

Command add_embed(CLI::App& app) {
    auto o = std::make_shared<EmbedOptions>();
    CLI::App* sub = app.add_subcommand("embed", "Embed copyright and/or authentication marks");
    sub->add_option("-i,--input", o->input, "Cover image (PNG or PNM)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out-dir", o->out_dir, "Output directory")->required();
    sub->add_option("--name", o->name, "Output file stem")->capture_default_str();
    sub->add_option("--mode", o->mode, "copyright | auth | dual")->capture_default_str();
    sub->add_option("--logo", o->logo, "Binary logo of (width/16) x (height/16), or 'builtin'");
    sub->add_option("--thresholds", o->thresholds, "fixed | optimize")->capture_default_str();
    sub->add_option("--texture-seed", o->texture_seed, "Seed of the texture clustering")->capture_default_str();
    sub->add_option("--block", o->block, "Block side")->capture_default_str();
    o->keys.add(*sub);
    o->fixed.add(*sub);
    o->optimizer.add(*sub);
    return {sub, [o] { return run_embed(*o); }};
}

Command add_verify(CLI::App& app) {
    auto o = std::make_shared<VerifyOptions>();
    CLI::App* sub = app.add_subcommand("verify", "Extract the logo and localise tampering (blind)");
    sub->add_option("-i,--input", o->input, "Received image")->required()->check(CLI::ExistingFile);
    sub->add_option("--meta", o->meta, "Sidecar metadata (default: input with .meta extension)");
    sub->add_option("-o,--out-dir", o->out_dir, "Output directory")->required();
    sub->add_option("--logo", o->logo, "Reference logo for BER/NC, or 'builtin'");
    sub->add_option("--truth", o->truth, "Pixel mask of the tampered area (white = tampered)");
    sub->add_option("--seed", o->seed, "Seed of the extractor training")->capture_default_str();
    o->keys.add(*sub);
    return {sub, [o] { return run_verify(*o); }};
}

} // namespace wsmn::cli
