#include "commands.hpp"
#include "common.hpp"
#include "wsmn/attacks.hpp"
#include "wsmn/metrics.hpp"
#include "wsmn/pipeline.hpp"

#include <opencv2/core.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <thread>

namespace wsmn::cli {

namespace {

struct BenchOptions {
    std::string corpus, out_dir, attacks, mode = "dual";
    int limit = 0;
    int jobs = 0;
    int splice_side = 100;
    std::uint64_t attack_seed = 1, texture_seed = 1, train_seed = 7;
    bool save_attacked = false;
    KeyOptions keys;
    ThresholdOptions fixed;
};

struct CurveRow {
    std::string image, kind, label, spec;
    double psnr = 0;
    double logo_ber = NAN, logo_nc = NAN, auth_ber = NAN, auth_nc = NAN;
};

struct ImageResult {
    Json entry;
    std::vector<CurveRow> rows;
    double seconds = 0;
};

struct Context {
    const BenchOptions& opt;
    Mode mode;
    KeySet keys;
    ThresholdPair thresholds;
    std::vector<AttackSpec> attacks;
    std::vector<fs::path> images;
    std::map<std::string, std::string> labels;
};

bool is_image(const fs::path& p) {
    static const char* exts[] = {".png", ".ppm", ".pgm", ".pnm"};
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return std::find(std::begin(exts), std::end(exts), e) != std::end(exts);
}

std::vector<fs::path> list_corpus(const fs::path& dir, int limit) {
    if (!fs::is_directory(dir)) throw InputError("corpus directory not found: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_image(e.path())) out.push_back(e.path());
    std::sort(out.begin(), out.end());
    if (limit > 0 && static_cast<int>(out.size()) > limit) out.resize(limit);
    if (out.empty()) throw InputError("corpus is empty: " + dir.string());
    return out;
}

// provenance.json maps image names to "real" or "synthetic"; unlisted images are "unlabelled".
std::map<std::string, std::string> corpus_labels(const fs::path& dir) {
    std::map<std::string, std::string> out;
    std::ifstream in(dir / "provenance.json");
    if (!in) return out;
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("images")) throw InputError("malformed provenance.json in " + dir.string());
    for (auto& [name, kind] : j["images"].items()) out[name] = kind.get<std::string>();
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

Json localization_json(const LocalizationScores& s) { return Json{{"tpr", s.tpr}, {"fpr", s.fpr}, {"ac", s.ac}}; }

ImageResult run_image(const Context& ctx, std::size_t index) {
    Stopwatch clock;
    const BenchOptions& o = ctx.opt;
    const fs::path& path = ctx.images[index];
    const std::string name = path.filename().string();
    const Image cover = load_image(path);
    const auto logo = resolve_logo("builtin", cover.height(), cover.width(), ctx.mode);
    EmbedOutput eo = embed_image(cover, logo, ctx.keys, ctx.thresholds, ctx.mode, o.texture_seed);
    const fs::path dir(o.out_dir);
    save_image(eo.image, dir / "images" / (path.stem().string() + ".png"));

    TrainOptions train;
    train.seed = o.train_seed;
    VerifyOutput clean = verify_image(eo.image, eo.meta, ctx.keys, train);
    auto label = ctx.labels.find(name);

    ImageResult res;
    Json& e = res.entry;
    e["name"] = name;
    e["sha256"] = sha256_file(path);
    e["corpus_label"] = label == ctx.labels.end() ? "unlabelled" : label->second;
    e["size"] = {{"rows", cover.height()}, {"cols", cover.width()}, {"channels", cover.channels()}};
    e["pixel_hash"] = eo.meta.image_hash;
    e["texture_clusters"] = eo.texture.k;
    e["quality"] = {{"psnr", number(eo.psnr)}, {"ssim", eo.ssim}};
    if (clean.copyright) e["clean"]["copyright"] = bits_summary(clean.copyright->logo, *logo);
    if (has_auth(ctx.mode)) {
        e["clean"]["authentication"] = bits_summary(clean.auth_extracted, clean.auth_mark);
        e["clean"]["authentication"]["tampered_blocks"] = cv::countNonZero(clean.tamper.cleaned);

        // donor is the next corpus image, or the cover turned upside down for a one-image corpus
        Image donor;
        if (ctx.images.size() > 1) {
            donor = load_image(ctx.images[(index + 1) % ctx.images.size()]);
        } else {
            cv::flip(cover.pixels, donor.pixels, -1);
        }
        const cv::Rect region = centred_square(cover.height(), cover.width(), o.splice_side);
        SpliceResult sp = splice(eo.image, donor, region);
        const cv::Mat1b truth = block_truth(sp.mask, eo.meta.block_side);
        VerifyOutput vs = verify_image(sp.image, eo.meta, ctx.keys, train);
        VerifyOutput vj = verify_image(apply_attack(sp.image, parse_attack("jpeg quality=70")), eo.meta, ctx.keys, train);
        e["splice"] = {{"donor", ctx.images.size() > 1 ? ctx.images[(index + 1) % ctx.images.size()].filename().string()
                                                       : name + " (flipped)"},
                       {"region", {region.x, region.y, region.width, region.height}},
                       {"raw", localization_json(localization_scores(vs.tamper.raw, truth))},
                       {"cleaned", localization_json(localization_scores(vs.tamper.cleaned, truth))},
                       {"jpeg70_cleaned", localization_json(localization_scores(vj.tamper.cleaned, truth))}};
    }

    auto sys = embedding_system(eo.image.height(), eo.image.width());
    const auto labels = has_auth(ctx.mode) ? mark_labels(clean.auth_mark) : std::vector<int>{};
    for (const auto& spec : ctx.attacks) {
        const Image att = apply_attack(eo.image, spec);
        if (o.save_attacked) save_image(att, dir / "images" / "attacked" / (path.stem().string() + "__" + spec.label() + ".png"));
        CurveRow row{name, to_string(spec.kind), spec.label(), spec.to_line()};
        row.psnr = psnr(eo.image.pixels, att.pixels);
        const cv::Mat1d y = luma_plane(att);
        if (has_copyright(ctx.mode)) {
            cv::Mat1b got = extract_copyright(*sys, y, ctx.keys, ctx.thresholds.delta_prime).logo;
            row.logo_ber = ber(got, *logo);
            row.logo_nc = nc(got, *logo);
        }
        if (has_auth(ctx.mode)) {
            // the clean model is fine-tuned on the attacked features
            const cv::Mat1d feats = auth_features(*sys, y);
            TrainResult tuned = fine_tune(clean.model.model, feats, labels, 100, train);
            cv::Mat1b got = extract_auth(tuned.model, feats, clean.auth_mark.rows, clean.auth_mark.cols);
            row.auth_ber = ber(got, clean.auth_mark);
            row.auth_nc = nc(got, clean.auth_mark);
        }
        res.rows.push_back(std::move(row));
    }
    res.seconds = clock.seconds();
    return res;
}

struct Mean {
    double sum = 0;
    int n = 0;
    void add(double v) {
        if (std::isnan(v)) return;
        sum += v;
        ++n;
    }
    double value() const { return n ? sum / n : NAN; }
};

Json summarise(const std::vector<const ImageResult*>& group, Mode mode) {
    Mean p, s, lb, ab, st, sf, jt, jf;
    for (const auto* r : group) {
        const Json& e = r->entry;
        p.add(e["quality"]["psnr"].is_null() ? INFINITY : e["quality"]["psnr"].get<double>());
        s.add(e["quality"]["ssim"].get<double>());
        if (has_copyright(mode)) lb.add(e["clean"]["copyright"]["ber"].get<double>());
        if (has_auth(mode)) {
            ab.add(e["clean"]["authentication"]["ber"].get<double>());
            st.add(e["splice"]["cleaned"]["tpr"].get<double>());
            sf.add(e["splice"]["cleaned"]["fpr"].get<double>());
            jt.add(e["splice"]["jpeg70_cleaned"]["tpr"].get<double>());
            jf.add(e["splice"]["jpeg70_cleaned"]["fpr"].get<double>());
        }
    }
    Json m{{"images", group.size()}, {"psnr", number(p.value())}, {"ssim", number(s.value())}};
    if (has_copyright(mode)) m["logo_ber"] = lb.value();
    if (has_auth(mode)) {
        m["auth_ber"] = ab.value();
        m["splice"] = {{"tpr", st.value()}, {"fpr", sf.value()}};
        m["splice_jpeg70"] = {{"tpr", jt.value()}, {"fpr", jf.value()}};
    }
    return m;
}

std::string curves_csv(const std::vector<ImageResult>& results) {
    std::string out = "image,kind,label,spec,psnr,logo_ber,logo_nc,auth_ber,auth_nc\n";
    for (const auto& r : results)
        for (const auto& c : r.rows)
            out += c.image + "," + c.kind + "," + c.label + "," + c.spec + "," + fmt(c.psnr) + "," + fmt(c.logo_ber) + "," +
                   fmt(c.logo_nc) + "," + fmt(c.auth_ber) + "," + fmt(c.auth_nc) + "\n";
    return out;
}

std::string curves_mean_csv(const std::vector<ImageResult>& results, const std::vector<AttackSpec>& attacks) {
    std::string out = "kind,label,spec,images,psnr,logo_ber,logo_nc,auth_ber,auth_nc\n";
    for (std::size_t a = 0; a < attacks.size(); ++a) {
        Mean p, lb, ln, ab, an;
        for (const auto& r : results) {
            const CurveRow& c = r.rows[a];
            p.add(c.psnr), lb.add(c.logo_ber), ln.add(c.logo_nc), ab.add(c.auth_ber), an.add(c.auth_nc);
        }
        out += to_string(attacks[a].kind) + "," + attacks[a].label() + "," + attacks[a].to_line() + "," +
               std::to_string(results.size()) + "," + fmt(p.value()) + "," + fmt(lb.value()) + "," + fmt(ln.value()) + "," +
               fmt(ab.value()) + "," + fmt(an.value()) + "\n";
    }
    return out;
}

int run_bench(const BenchOptions& o) {
    Stopwatch clock;
    Context ctx{o, parse_mode(o.mode), o.keys.parse(), o.fixed.pair(), {}, list_corpus(o.corpus, o.limit), corpus_labels(o.corpus)};
    if (o.splice_side < 1) throw InputError("--splice-side must be positive");
    if (o.attacks.empty()) {
        ctx.attacks = robustness_grid(o.attack_seed);
    } else {
        std::ifstream in(o.attacks);
        if (!in) throw InputError("cannot open attack file " + o.attacks);
        AttackBatch batch = parse_attack_batch(in);
        if (!batch.errors.empty()) {
            for (const auto& e : batch.errors) std::cerr << "rejected " << e << "\n";
            throw InputError("attack file has invalid entries");
        }
        ctx.attacks = batch.specs;
    }

    const std::size_t n = ctx.images.size();
    std::vector<ImageResult> results(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    const int jobs = o.jobs > 0 ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                results[i] = run_image(ctx, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<int>(jobs, static_cast<int>(n)); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    const fs::path dir(o.out_dir);
    Json report;
    report["tool"] = tool_info("bench");
    report["config"] = {{"mode", to_string(ctx.mode)},
                        {"thresholds", {{"delta_prime", ctx.thresholds.delta_prime}, {"delta_dprime", ctx.thresholds.delta_dprime}}},
                        {"keys_fingerprint", ctx.keys.fingerprint()},
                        {"texture_seed", o.texture_seed},
                        {"mlp_seed", o.train_seed},
                        {"attack_seed", o.attack_seed},
                        {"attacks", o.attacks.empty() ? Json("robustness_grid") : Json(fs::path(o.attacks).filename().string())},
                        {"attack_count", ctx.attacks.size()},
                        {"splice_side", o.splice_side},
                        {"limit", o.limit}};
    report["corpus"] = {{"dir", fs::path(o.corpus).filename().string()}, {"images", n}};
    Json images = Json::array();
    std::map<std::string, std::vector<const ImageResult*>> groups;
    std::vector<const ImageResult*> all;
    for (const auto& r : results) {
        images.push_back(r.entry);
        all.push_back(&r);
        groups[r.entry["corpus_label"].get<std::string>()].push_back(&r);
    }
    report["images"] = images;
    report["mean"] = summarise(all, ctx.mode);
    for (const auto& [label, group] : groups) report["mean_by_label"][label] = summarise(group, ctx.mode);
    report["outputs"] = {{"curves", "curves.csv"}, {"curves_mean", "curves_mean.csv"}, {"images", "images/"}, {"timings", "timings.json"}};
    write_json(report, dir / "report.json");
    write_text(curves_csv(results), dir / "curves.csv");
    write_text(curves_mean_csv(results, ctx.attacks), dir / "curves_mean.csv");

    Json timings{{"jobs", jobs}, {"total_s", clock.seconds()}, {"per_image_s", Json::object()}};
    for (const auto& r : results) timings["per_image_s"][r.entry["name"].get<std::string>()] = r.seconds;
    write_json(timings, dir / "timings.json");

    const Json& m = report["mean"];
    std::cout << n << " images, mean PSNR " << m["psnr"] << " dB, mean SSIM " << m["ssim"] << "\n";
    return 0;
}

} // namespace

Command add_bench(CLI::App& app) {
    auto o = std::make_shared<BenchOptions>();
    CLI::App* sub = app.add_subcommand("bench", "Embed, attack and verify every image of a corpus");
    sub->add_option("--corpus", o->corpus, "Directory of cover images")->required();
    sub->add_option("-o,--out-dir", o->out_dir, "Output directory")->required();
    sub->add_option("--mode", o->mode, "copyright | auth | dual")->capture_default_str();
    sub->add_option("--limit", o->limit, "Use only the first N images (0 = all)")->capture_default_str();
    sub->add_option("--attacks", o->attacks, "Attack batch file (default: the built-in robustness grid)");
    sub->add_option("--attack-seed", o->attack_seed, "Seed of the noisy attacks in the built-in grid")->capture_default_str();
    sub->add_option("--texture-seed", o->texture_seed, "Seed of the texture clustering")->capture_default_str();
    sub->add_option("--mlp-seed", o->train_seed, "Seed of the extractor training")->capture_default_str();
    sub->add_option("--splice-side", o->splice_side, "Side of the centred splice square")->capture_default_str();
    sub->add_option("-j,--jobs", o->jobs, "Worker threads (0 = all cores)")->capture_default_str();
    sub->add_flag("--save-attacked", o->save_attacked, "Also write every attacked image");
    o->keys.add(*sub);
    o->fixed.add(*sub);
    return {sub, [o] { return run_bench(*o); }};
}

} // namespace wsmn::cli
