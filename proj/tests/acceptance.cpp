// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero if any fails.
// Usage: wsmn_acceptance [corpus-dir] [wsmn-cli]; set WSMN_ACCEPTANCE_ONLY=1,8 to run a subset.

#include "wsmn/attacks.hpp"
#include "wsmn/embed.hpp"
#include "wsmn/extract.hpp"
#include "wsmn/metrics.hpp"
#include "wsmn/optimize.hpp"
#include "wsmn/pipeline.hpp"
#include "wsmn/random.hpp"
#include "wsmn/transforms.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace wsmn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Corpus {
    std::vector<fs::path> paths;
    std::vector<Image> images;
};

Corpus load_corpus(const fs::path& dir) {
    Corpus c;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".png") c.paths.push_back(e.path());
    std::sort(c.paths.begin(), c.paths.end());
    for (const auto& p : c.paths) c.images.push_back(load_image(p));
    return c;
}

const ThresholdPair kThresholds{40, 1};
const KeySet kKeys{};

cv::Mat1b logo_for(const Image& img) { return default_logo(img.height() / 16, img.width() / 16); }

struct ModeStats {
    double psnr = 0, ssim = 0;
};

// Shared between criteria 1, 4 and 6: the dual embedding of every corpus image.
struct DualRun {
    std::vector<EmbedOutput> outputs;
    std::vector<VerifyOutput> clean;
    std::vector<double> seconds;
};

DualRun run_dual(const Corpus& c) {
    DualRun r;
    for (const auto& img : c.images) {
        auto t0 = std::chrono::steady_clock::now();
        r.outputs.push_back(embed_image(img, logo_for(img), kKeys, kThresholds, Mode::Dual));
        r.clean.push_back(verify_image(r.outputs.back().image, r.outputs.back().meta, kKeys));
        r.seconds.push_back(seconds_since(t0));
    }
    return r;
}

Outcome round_trip(const Corpus& c, const DualRun& d) {
    double worst_logo = 0, worst_auth = 0, slowest = 0;
    std::string worst_name;
    for (std::size_t i = 0; i < c.images.size(); ++i) {
        double lb = ber(d.clean[i].copyright->logo, logo_for(c.images[i]));
        double ab = ber(d.clean[i].auth_extracted, d.clean[i].auth_mark);
        if (ab > worst_auth) worst_name = c.paths[i].filename().string();
        worst_logo = std::max(worst_logo, lb);
        worst_auth = std::max(worst_auth, ab);
        slowest = std::max(slowest, d.seconds[i]);
    }
    return {worst_logo == 0 && worst_auth <= 0.01 && slowest <= 60,
            fmt("%zu images, max logo BER %.4f, max auth BER %.4f%s%s, slowest embed+verify %.1f s", c.images.size(), worst_logo,
                worst_auth, worst_name.empty() ? "" : " on ", worst_name.c_str(), slowest)};
}

Outcome transform_identities() {
    const int n = 64;
    ShearletSystem dst(n, n);
    double dst_err = 0, lwt_err = 0, dct_rel = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        Rng rng(seed);
        cv::Mat1d x(n, n);
        for (auto& v : x) v = uniform(rng, 0, 255);
        dst_err = std::max(dst_err, cv::norm(dst.inverse(dst.forward(x)), x, cv::NORM_INF));
        lwt_err = std::max(lwt_err, cv::norm(lwt_inverse(lwt_forward(x)), x, cv::NORM_INF));
        for (int side : {4, 8}) {
            const double ex = cv::norm(x, cv::NORM_L2SQR);
            dct_rel = std::max(dct_rel, std::abs(cv::norm(dct_block(x, side), cv::NORM_L2SQR) - ex) / ex);
        }
    }
    const double frame = dst.frame_error();
    return {dst_err <= 1e-6 && lwt_err <= 1e-6 && frame <= 1e-9 && dct_rel <= 1e-9,
            fmt("1000 inputs: DST round trip %.2e, LWT round trip %.2e, frame %.2e, block-DCT relative energy error %.2e", dst_err,
                lwt_err, frame, dct_rel)};
}

Outcome quantizer_exhaustive() {
    long long checked = 0, wrong = 0;
    for (int dp = 30; dp <= 50; ++dp)
        for (int k = -50000; k <= 50000; ++k) {
            const double coeff = k / 100.0;
            for (int bit = 0; bit < 2; ++bit) {
                ++checked;
                wrong += dequantize_bit(quantize_target(coeff, bit, dp), dp) != bit;
            }
        }
    return {wrong == 0, fmt("%lld cases, %lld decode errors", checked, wrong)};
}

ModeStats mode_means(const Corpus& c, Mode mode) {
    ModeStats s;
    for (const auto& img : c.images) {
        auto out = embed_image(img, logo_for(img), kKeys, kThresholds, mode);
        s.psnr += out.psnr;
        s.ssim += out.ssim;
    }
    s.psnr /= c.images.size();
    s.ssim /= c.images.size();
    return s;
}

Outcome imperceptibility(const Corpus& c, const DualRun& d) {
    ModeStats dual;
    for (const auto& o : d.outputs) {
        dual.psnr += o.psnr;
        dual.ssim += o.ssim;
    }
    dual.psnr /= d.outputs.size();
    dual.ssim /= d.outputs.size();
    const ModeStats auth = mode_means(c, Mode::Auth), copy = mode_means(c, Mode::Copyright);
    const bool ok = dual.psnr >= 36 && dual.ssim >= 0.90 && std::abs(auth.psnr - 42.02) <= 2 && std::abs(auth.ssim - 0.97) <= 0.03 &&
                    std::abs(copy.psnr - 40.66) <= 2 && std::abs(copy.ssim - 0.98) <= 0.03;
    return {ok, fmt("dual %.2f dB / %.4f, auth %.2f dB / %.4f, copyright %.2f dB / %.4f", dual.psnr, dual.ssim, auth.psnr, auth.ssim,
                    copy.psnr, copy.ssim)};
}

Outcome robustness(const fs::path& dir) {
    const char* names[] = {"astronaut.png", "grass.png", "coffee.png"};
    const std::vector<AttackSpec> hybrid{parse_attack("jpeg quality=70"), parse_attack("salt_pepper density=0.01 seed=1")};
    const std::vector<AttackSpec> tonal{parse_attack("darken step=50"), parse_attack("sharpen radius=1 amount=4")};
    bool ok = true;
    std::string detail;
    for (const char* name : names) {
        Image img = load_image(dir / name);
        auto eo = embed_image(img, logo_for(img), kKeys, kThresholds, Mode::Dual);
        auto v1 = verify_image(apply_attacks(eo.image, hybrid), eo.meta, kKeys);
        auto v2 = verify_image(apply_attacks(eo.image, tonal), eo.meta, kKeys);
        const double cnc = nc(v1.copyright->logo, logo_for(img)), anc = nc(v2.auth_extracted, v2.auth_mark);
        ok = ok && cnc >= 0.80 && anc >= 0.75;
        detail += fmt("%s%s logo NC %.3f, auth NC %.3f", detail.empty() ? "" : "; ", name, cnc, anc);
    }
    return {ok, detail + " (JPEG70+S&P0.01 for the logo, darken50+sharpen4 for the auth mark)"};
}

Outcome localization(const Corpus& c, const DualRun& d) {
    double tpr = 0, fpr = 0, jtpr = 0, jfpr = 0, worst = 1;
    const std::size_t n = c.images.size();
    for (std::size_t i = 0; i < n; ++i) {
        const EmbedOutput& eo = d.outputs[i];
        const cv::Rect region = centred_square(eo.image.height(), eo.image.width(), 100);
        SpliceResult sp = splice(eo.image, c.images[(i + 1) % n], region);
        const cv::Mat1b truth = block_truth(sp.mask, eo.meta.block_side);
        auto s = localization_scores(verify_image(sp.image, eo.meta, kKeys).tamper.cleaned, truth);
        auto j = localization_scores(verify_image(apply_attack(sp.image, parse_attack("jpeg quality=70")), eo.meta, kKeys).tamper.cleaned, truth);
        tpr += s.tpr, fpr += s.fpr, jtpr += j.tpr, jfpr += j.fpr;
        worst = std::min(worst, s.tpr);
    }
    tpr /= n, fpr /= n, jtpr /= n, jfpr /= n;
    return {tpr >= 0.95 && fpr <= 0.05 && jtpr >= 0.70,
            fmt("100x100 centre splice over %zu images: TPR %.3f (lowest %.3f), FPR %.3f; after JPEG70: TPR %.3f, FPR %.3f", n, tpr,
                worst, fpr, jtpr, jfpr)};
}

double schaffer_hausdorff(const std::vector<Individual>& front) {
    std::vector<std::array<double, 2>> curve;
    for (int i = 0; i <= 20000; ++i) {
        const double t = 2.0 * i / 20000;
        curve.push_back({t * t, (t - 2) * (t - 2)});
    }
    double h = 0;
    for (const auto& m : front) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : curve) best = std::min(best, std::hypot(m.f[0] - p[0], m.f[1] - p[1]));
        h = std::max(h, best);
    }
    for (const auto& p : curve) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& m : front) best = std::min(best, std::hypot(m.f[0] - p[0], m.f[1] - p[1]));
        h = std::max(h, best);
    }
    return h;
}

Outcome nsga2_correctness(const fs::path& dir) {
    OptimizerConfig sch;
    sch.lower = {0};
    sch.upper = {2};
    auto res = nsga2([](const std::vector<double>& x) { return std::vector<double>{x[0] * x[0], (x[0] - 2) * (x[0] - 2)}; }, sch, 1);
    const double h = schaffer_hausdorff(res.front);

    // full 50 x 100 tuning run on a 64x64 reduction of a corpus image
    Image small = load_image(dir / "camera.png");
    cv::resize(small.pixels, small.pixels, cv::Size(64, 64), 0, 0, cv::INTER_AREA);
    const EmbedParams params;
    MarkSet marks = prepare_marks(logo_for(small), kKeys, small.width(), small.height(), params.block);
    TextureMap texture = analyze_texture(to_u8(luma_plane(small)), params.block, 1);
    WatermarkObjective objective(small, marks, texture, params);
    OptimizerConfig cfg;
    auto t0 = std::chrono::steady_clock::now();
    auto run = nsga2([&](const std::vector<double>& x) { return objective(x); }, cfg, 1);
    const double secs = seconds_since(t0);
    const bool invariant = archive_nondominated(run.front, run.archive);
    bool every_generation = true;
    for (const auto& g : run.trace) every_generation = every_generation && !g.front.empty();
    OperatingPoint op = select_operating_point(run.front, cfg.robustness_cap);
    const double robust = (op.chosen.f[0] + op.chosen.f[1]) / 2;
    const bool cap_ok = !op.feasible || robust <= cfg.robustness_cap;
    return {h <= 0.05 && invariant && every_generation && cap_ok && run.trace.size() == 100u,
            fmt("Schaffer Hausdorff %.4f; tuning run %zu evaluations (%zu distinct) in %.0f s, archive non-dominated: %s, "
                "chosen (%.2f, %.2f) mean robustness error %.3f, %s",
                h, run.archive.size(), objective.evaluations(), secs, invariant ? "yes" : "no", op.thresholds.delta_prime,
                op.thresholds.delta_dprime, robust, op.feasible ? "feasible" : "infeasible (no member meets the 0.1 cap)")};
}

Outcome four_copy(const fs::path& dir) {
    // synthetic vote: one copy scrambled and down-weighted, three intact
    Rng rng(11);
    int failures = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        const int r = 4 + static_cast<int>(uniform_index(rng, 12)), cc = 4 + static_cast<int>(uniform_index(rng, 12));
        cv::Mat1b logo(r, cc);
        for (auto& b : logo) b = uniform01(rng) < 0.5;
        cv::Mat1b tiled = tile_four(logo);
        cv::Mat1d w(tiled.size());
        const int bad = static_cast<int>(uniform_index(rng, 4));
        for (int i = 0; i < tiled.rows; ++i)
            for (int j = 0; j < tiled.cols; ++j) {
                const int copy = (i >= r ? 2 : 0) + (j >= cc ? 1 : 0);
                if (copy == bad) {
                    tiled(i, j) = uniform01(rng) < 0.5;
                    w(i, j) = uniform(rng, 0, 0.3);
                } else {
                    w(i, j) = uniform(rng, 0.3, 1);
                }
            }
        failures += ber(vote_copies(tiled, w), logo) != 0;
    }

    // image version: noise over one quadrant of a watermarked corpus image. The transform is periodic,
    // so the noise can also flip a few blocks of other copies along the opposite image border; the
    // property is checked on the logo bits whose three other copies still decode as before.
    Image img = load_image(dir / "astronaut.png");
    auto eo = embed_image(img, logo_for(img), kKeys, kThresholds, Mode::Copyright);
    auto sys = embedding_system(img.height(), img.width());
    const CopyrightResult ref = extract_copyright(*sys, luma_plane(eo.image), kKeys, kThresholds.delta_prime);
    const int lr = ref.voted.rows, lc = ref.voted.cols;
    int intact_bits = 0, intact_wrong = 0, leaked = 0;
    double worst = 0;
    for (int q = 0; q < 4; ++q) {
        Image hit{eo.image.pixels.clone()};
        const int h = img.height() / 2, w = img.width() / 2;
        cv::Mat roi = hit.pixels(cv::Rect((q % 2) * w, (q / 2) * h, w, h));
        cv::randu(roi, cv::Scalar::all(0), cv::Scalar::all(256));
        CopyrightResult cr = extract_copyright(*sys, luma_plane(hit), kKeys, kThresholds.delta_prime);
        worst = std::max(worst, ber(cr.logo, logo_for(img)));
        for (int i = 0; i < lr; ++i)
            for (int j = 0; j < lc; ++j) {
                bool intact = true;
                for (int k = 0; k < 4; ++k) {
                    if (k == q) continue;
                    const int bi = i + (k / 2) * lr, bj = j + (k % 2) * lc;
                    if (cr.tiled(bi, bj) != ref.tiled(bi, bj)) intact = false, ++leaked;
                }
                if (!intact) continue;
                ++intact_bits;
                intact_wrong += cr.voted(i, j) != ref.voted(i, j);
            }
    }
    const double clean_ber = ber(ref.logo, logo_for(img));
    return {failures == 0 && clean_ber == 0 && intact_wrong == 0,
            fmt("synthetic vote: %d/%d failures; astronaut, each quadrant in turn replaced by noise: %d/%d logo bits with three "
                "intact copies wrong, %d blocks of other copies flipped by wrap-around, worst overall logo BER %.4f",
                failures, trials, intact_wrong, intact_bits, leaked, worst)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome bench_determinism(const fs::path& corpus, const std::string& cli) {
    const fs::path root = fs::temp_directory_path() / "wsmn_acceptance_bench";
    fs::remove_all(root);
    fs::create_directories(root);
    // one strength per attack kind keeps the two full-corpus runs affordable
    std::ofstream(root / "attacks.txt") << "salt_pepper density=0.05 seed=3\nspeckle variance=0.02 seed=3\n"
                                           "gaussian_noise variance=0.002 seed=3\njpeg quality=50\nlighten step=30\n"
                                           "darken step=30\nsharpen radius=1 amount=2\ngaussian_filter sigma=0.8\naverage\n"
                                           "median\nresize scale=0.5\nhisteq\nlsb bits=2 seed=3\nwiener\ncrop fraction=0.25\n";
    auto t0 = std::chrono::steady_clock::now();
    for (const char* run : {"a", "b"}) {
        const std::string cmd = cli + " bench --corpus " + corpus.string() + " --attacks " + (root / "attacks.txt").string() +
                                " -o " + (root / run).string() + " > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return {false, fmt("bench run %s failed (status %d)", run, status)};
    }
    int files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file() || e.path().filename() == "timings.json") continue;
        ++files;
        differing += slurp(e.path()) != slurp(root / "b" / fs::relative(e.path(), root / "a"));
    }
    return {files > 0 && differing == 0,
            fmt("two full-corpus bench runs (15 attacks each, %.0f s total): %d files compared, %d differ", seconds_since(t0), files,
                differing)};
}

} // namespace

int main(int argc, char** argv) {
    const fs::path corpus = argc > 1 ? fs::path(argv[1]) : fs::path(WSMN_CORPUS_DIR);
    const std::string cli = argc > 2 ? argv[2] : WSMN_CLI_PATH;
    const Corpus c = load_corpus(corpus);
    if (c.images.empty()) {
        std::printf("no corpus images in %s\n", corpus.string().c_str());
        return 2;
    }
    std::map<int, std::function<Outcome()>> steps;
    DualRun dual;
    bool have_dual = false;
    auto need_dual = [&]() -> const DualRun& {
        if (!have_dual) dual = run_dual(c), have_dual = true;
        return dual;
    };
    steps[1] = [&] { return round_trip(c, need_dual()); };
    steps[2] = transform_identities;
    steps[3] = quantizer_exhaustive;
    steps[4] = [&] { return imperceptibility(c, need_dual()); };
    steps[5] = [&] { return robustness(corpus); };
    steps[6] = [&] { return localization(c, need_dual()); };
    steps[7] = [&] { return nsga2_correctness(corpus); };
    steps[8] = [&] { return four_copy(corpus); };
    steps[9] = [&] { return bench_determinism(corpus, cli); };

    // WSMN_ACCEPTANCE_ONLY=6,8 runs a subset.
    if (const char* only = std::getenv("WSMN_ACCEPTANCE_ONLY"); only && *only) {
        std::map<int, std::function<Outcome()>> keep;
        for (const char* p = only; *p;) {
            char* end = nullptr;
            const long id = std::strtol(p, &end, 10);
            if (end == p) break;
            if (steps.count(id)) keep[id] = steps[id];
            p = *end ? end + 1 : end;
        }
        steps = keep;
    }
    int failed = 0;
    for (auto& [id, step] : steps) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = step();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("criterion %d %s  %s  [%.0f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(steps.size()) - failed, steps.size());
    return failed ? 1 : 0;
}
