#include "wsmn/marks.hpp"
#include "wsmn/image.hpp"
#include "wsmn/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace wsmn {

std::uint64_t KeySet::parse_key(const std::string& text) {
    if (text.empty()) throw InputError("empty key");
    std::size_t used = 0;
    std::uint64_t v;
    try {
        v = std::stoull(text, &used, 0);
    } catch (const std::exception&) {
        throw InputError("invalid key: " + text);
    }
    if (used != text.size()) throw InputError("invalid key: " + text);
    return v;
}

std::string KeySet::fingerprint() const {
    std::uint64_t k[3] = {key1, key2, key3};
    return sha256_hex(k, sizeof k).substr(0, 16);
}

cv::Mat1b gen_binary_sequence(std::uint64_t seed, int rows, int cols) {
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("sequence shape must be positive");
    Rng rng(seed);
    const int n = rows * cols;
    std::vector<double> v(n);
    for (double& x : v) x = standard_normal(rng);
    std::vector<double> sorted = v;
    std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
    double median = sorted[n / 2];
    if (n % 2 == 0) median = 0.5 * (median + *std::max_element(sorted.begin(), sorted.begin() + n / 2));
    cv::Mat1b out(rows, cols);
    for (int i = 0; i < n; ++i) out(i / cols, i % cols) = v[i] > median ? 1 : 0;
    return out;
}

cv::Mat1b xor_mask(const cv::Mat1b& mark, const cv::Mat1b& chi) {
    if (mark.size() != chi.size()) throw std::invalid_argument("xor_mask shape mismatch");
    cv::Mat1b out(mark.size());
    for (int r = 0; r < mark.rows; ++r)
        for (int c = 0; c < mark.cols; ++c) out(r, c) = (mark(r, c) != 0) ^ (chi(r, c) != 0);
    return out;
}

std::vector<int> ccs_permutation(std::uint64_t key, int length) {
    // splitmix64 spreads nearby keys; the seed in (0.1, 0.9) keeps away from the map's fixed points
    std::uint64_t z = key + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    double x = 0.1 + 0.8 * (static_cast<double>(z >> 11) * 0x1.0p-53);
    for (int i = 0; i < 1000; ++i) x = 3.99 * x * (1 - x);
    std::vector<double> seq(length);
    for (double& s : seq) {
        x = 3.99 * x * (1 - x);
        s = x;
    }
    std::vector<int> p(length);
    std::iota(p.begin(), p.end(), 0);
    std::stable_sort(p.begin(), p.end(), [&](int a, int b) { return seq[a] < seq[b]; });
    return p;
}

cv::Mat1b ccs_shuffle(const cv::Mat1b& mark, std::uint64_t key) {
    auto p = ccs_permutation(key, static_cast<int>(mark.total()));
    cv::Mat1b src = mark.isContinuous() ? mark : mark.clone();
    cv::Mat1b out(mark.size());
    for (std::size_t i = 0; i < p.size(); ++i) out.data[i] = src.data[p[i]];
    return out;
}

cv::Mat1b ccs_unshuffle(const cv::Mat1b& shuffled, std::uint64_t key) {
    auto p = ccs_permutation(key, static_cast<int>(shuffled.total()));
    cv::Mat1b src = shuffled.isContinuous() ? shuffled : shuffled.clone();
    cv::Mat1b out(shuffled.size());
    for (std::size_t i = 0; i < p.size(); ++i) out.data[p[i]] = src.data[i];
    return out;
}

cv::Mat1b tile_four(const cv::Mat1b& small) {
    cv::Mat1b out(small.rows * 2, small.cols * 2);
    for (int r = 0; r < out.rows; ++r)
        for (int c = 0; c < out.cols; ++c) out(r, c) = small(r % small.rows, c % small.cols);
    return out;
}

std::array<cv::Point, 4> tile_positions(int i, int j, int rows, int cols) {
    return {cv::Point(j, i), cv::Point(j + cols, i), cv::Point(j, i + rows), cv::Point(j + cols, i + rows)};
}

cv::Mat1b auth_mark(const KeySet& keys, int M, int N, int m) {
    BlockGrid g = partition(N, M, m);
    return gen_binary_sequence(keys.key3, g.rows, g.cols);
}

MarkSet prepare_marks(const cv::Mat1b& logo, const KeySet& keys, int M, int N, int m) {
    BlockGrid g = partition(N, M, m);
    if (g.rows % 2 || g.cols % 2) throw InputError("block grid must have even dimensions for four-copy tiling");
    if (logo.rows != g.rows / 2 || logo.cols != g.cols / 2)
        throw InputError("logo must be " + std::to_string(g.cols / 2) + "x" + std::to_string(g.rows / 2) + ", got " +
                         std::to_string(logo.cols) + "x" + std::to_string(logo.rows));
    MarkSet ms;
    ms.logo = logo.clone();
    for (auto& v : ms.logo) v = v ? 1 : 0;
    ms.chi = gen_binary_sequence(keys.key1, logo.rows, logo.cols);
    ms.encrypted = xor_mask(ms.logo, ms.chi);
    ms.shuffled = ccs_shuffle(ms.encrypted, keys.key2);
    ms.wc = tile_four(ms.shuffled);
    ms.wa = gen_binary_sequence(keys.key3, g.rows, g.cols);
    return ms;
}

cv::Mat1b default_logo(int rows, int cols) {
    cv::Mat1b out(rows, cols);
    const double cy = (rows - 1) / 2.0, cx = (cols - 1) / 2.0;
    const double outer = 0.45 * std::min(rows, cols), inner = 0.28 * std::min(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double d = std::hypot(r - cy, c - cx);
            bool ring = d <= outer && d >= inner;
            bool cross = (std::abs(r - cy) < 0.08 * rows || std::abs(c - cx) < 0.08 * cols) && d < inner;
            out(r, c) = ring || cross ? 1 : 0;
        }
    return out;
}

} // namespace wsmn
