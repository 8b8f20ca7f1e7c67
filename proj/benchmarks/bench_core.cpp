#include "wsmn/attacks.hpp"
#include "wsmn/embed.hpp"
#include "wsmn/extract.hpp"
#include "wsmn/optimize.hpp"
#include "wsmn/random.hpp"
#include "wsmn/texture.hpp"
#include "wsmn/transforms.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace wsmn;

namespace {

cv::Mat1d noise_plane(int side, std::uint64_t seed) {
    Rng rng(seed);
    cv::Mat1d m(side, side);
    for (auto& v : m) v = uniform(rng, 0, 255);
    return m;
}

// Gradient plus grain so the texture stage sees several clusters.
Image test_image(int side) {
    Rng rng(3);
    Image img{cv::Mat(side, side, CV_8UC3)};
    for (int r = 0; r < side; ++r)
        for (int c = 0; c < side; ++c) {
            double v = 128 + 60 * std::sin(6.0 * c / side) * std::cos(4.0 * r / side) + (c > side / 2 ? uniform(rng, -20, 20) : 0);
            uchar u = cv::saturate_cast<uchar>(v);
            img.pixels.at<cv::Vec3b>(r, c) = {u, cv::saturate_cast<uchar>(v * 0.9 + 10), cv::saturate_cast<uchar>(255 - v)};
        }
    return img;
}

void BM_ShearletForward(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    ShearletSystem sys(side, side);
    cv::Mat1d x = noise_plane(side, 1);
    for (auto _ : state) benchmark::DoNotOptimize(sys.forward(x));
}
BENCHMARK(BM_ShearletForward)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_ShearletRoundTrip(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    ShearletSystem sys(side, side);
    cv::Mat1d x = noise_plane(side, 2);
    for (auto _ : state) benchmark::DoNotOptimize(sys.inverse(sys.forward(x)));
}
BENCHMARK(BM_ShearletRoundTrip)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_LiftingWavelet(benchmark::State& state) {
    cv::Mat1d x = noise_plane(512, 3);
    for (auto _ : state) benchmark::DoNotOptimize(lwt_inverse(lwt_forward(x)));
}
BENCHMARK(BM_LiftingWavelet)->Unit(benchmark::kMillisecond);

void BM_BlockDct(benchmark::State& state) {
    cv::Mat1d x = noise_plane(256, 4);
    for (auto _ : state) benchmark::DoNotOptimize(dct_block(x, 4));
}
BENCHMARK(BM_BlockDct)->Unit(benchmark::kMillisecond);

void BM_TextureAnalysis(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    cv::Mat1b y = to_u8(luma_plane(test_image(side)));
    for (auto _ : state) benchmark::DoNotOptimize(analyze_texture(y, 8, 1));
}
BENCHMARK(BM_TextureAnalysis)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_EmbedDual(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    Image img = test_image(side);
    MarkSet marks = prepare_marks(default_logo(side / 16, side / 16), KeySet{}, side, side, 8);
    TextureMap tex = analyze_texture(to_u8(luma_plane(img)), 8, 1);
    embedding_system(side, side); // build outside the timed loop
    for (auto _ : state) benchmark::DoNotOptimize(embed_all(img, marks, tex, {40, 1}, Mode::Dual));
}
BENCHMARK(BM_EmbedDual)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_TrainExtractor(benchmark::State& state) {
    const int side = 256;
    Image img = test_image(side);
    MarkSet marks = prepare_marks(default_logo(side / 16, side / 16), KeySet{}, side, side, 8);
    TextureMap tex = analyze_texture(to_u8(luma_plane(img)), 8, 1);
    EmbedResult er = embed_all(img, marks, tex, {40, 1}, Mode::Auth);
    auto sys = embedding_system(side, side);
    cv::Mat1d feats = auth_features(*sys, luma_plane(er.image));
    auto labels = mark_labels(marks.wa);
    for (auto _ : state) benchmark::DoNotOptimize(train_extractor(feats, labels));
}
BENCHMARK(BM_TrainExtractor)->Unit(benchmark::kMillisecond);

void BM_JpegAttack(benchmark::State& state) {
    Image img = test_image(512);
    AttackSpec spec = parse_attack("jpeg quality=70");
    for (auto _ : state) benchmark::DoNotOptimize(apply_attack(img, spec));
}
BENCHMARK(BM_JpegAttack)->Unit(benchmark::kMillisecond);

void BM_Nsga2Schaffer(benchmark::State& state) {
    OptimizerConfig cfg;
    cfg.lower = {0};
    cfg.upper = {2};
    auto f = [](const std::vector<double>& x) { return std::vector<double>{x[0] * x[0], (x[0] - 2) * (x[0] - 2)}; };
    for (auto _ : state) benchmark::DoNotOptimize(nsga2(f, cfg, 1));
}
BENCHMARK(BM_Nsga2Schaffer)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
