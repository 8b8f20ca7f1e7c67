#include "wsmn/attacks.hpp"
#include "wsmn/random.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <sstream>

namespace wsmn {

namespace {

struct ParamRule {
    const char* key;
    double fallback, lo, hi;
    bool integer;
};

struct KindInfo {
    AttackKind kind;
    const char* name;
    bool stochastic;
    std::vector<ParamRule> params;
};

const std::vector<KindInfo>& kinds() {
    static const std::vector<KindInfo> table = {
        {AttackKind::SaltPepper, "salt_pepper", true, {{"density", 0.01, 0.01, 0.10, false}}},
        {AttackKind::Speckle, "speckle", true, {{"variance", 0.01, 0.01, 0.10, false}}},
        {AttackKind::GaussianNoise, "gaussian_noise", true, {{"variance", 0.001, 0.001, 0.010, false}}},
        {AttackKind::Jpeg, "jpeg", false, {{"quality", 70, 10, 100, true}}},
        {AttackKind::Lighten, "lighten", false, {{"step", 50, 10, 100, false}}},
        {AttackKind::Darken, "darken", false, {{"step", 50, 10, 100, false}}},
        {AttackKind::Sharpen, "sharpen", false, {{"radius", 1, 0.5, 3, false}, {"amount", 4, 0.2, 4, false}}},
        {AttackKind::GaussianFilter, "gaussian_filter", false, {{"sigma", 0.5, 0.1, 1.0, false}}},
        {AttackKind::Average, "average", false, {}},
        {AttackKind::Median, "median", false, {}},
        {AttackKind::Resize, "resize", false, {{"scale", 0.5, 0.25, 4, false}}},
        {AttackKind::HistEq, "histeq", false, {}},
        {AttackKind::Lsb, "lsb", true, {{"bits", 2, 1, 4, true}}},
        {AttackKind::Wiener, "wiener", false, {{"size", 4, 2, 7, true}}},
        {AttackKind::Crop, "crop", false, {{"fraction", 0.25, 0.01, 0.9, false}}},
    };
    return table;
}

const KindInfo& info(AttackKind k) {
    for (const auto& i : kinds())
        if (i.kind == k) return i;
    throw std::logic_error("unknown attack kind");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

cv::Mat clamp_u8(const cv::Mat& m) {
    cv::Mat out;
    m.convertTo(out, CV_8U); // saturating, rounds to nearest
    return out;
}

cv::Mat as_double(const cv::Mat& m) {
    cv::Mat d;
    m.convertTo(d, CV_64F);
    return d;
}

cv::Mat salt_pepper(const cv::Mat& src, double density, Rng& rng) {
    cv::Mat out = src.clone();
    const int ch = src.channels();
    for (int r = 0; r < src.rows; ++r) {
        auto* p = out.ptr<std::uint8_t>(r);
        for (int c = 0; c < src.cols; ++c) {
            double u = uniform01(rng);
            if (u >= density) continue;
            std::uint8_t v = u < density / 2 ? 0 : 255;
            for (int k = 0; k < ch; ++k) p[c * ch + k] = v;
        }
    }
    return out;
}

cv::Mat speckle(const cv::Mat& src, double variance, Rng& rng) {
    cv::Mat d = as_double(src) / 255.0;
    const double a = std::sqrt(3 * variance);
    double* p = d.ptr<double>();
    for (std::size_t i = 0; i < d.total() * d.channels(); ++i) p[i] += p[i] * uniform(rng, -a, a);
    return clamp_u8(d * 255.0);
}

cv::Mat gaussian_noise(const cv::Mat& src, double variance, Rng& rng) {
    cv::Mat d = as_double(src) / 255.0;
    const double s = std::sqrt(variance);
    double* p = d.ptr<double>();
    for (std::size_t i = 0; i < d.total() * d.channels(); ++i) p[i] += s * standard_normal(rng);
    return clamp_u8(d * 255.0);
}

cv::Mat jpeg(const cv::Mat& src, int quality) {
    cv::Mat bgr;
    if (src.channels() == 3)
        cv::cvtColor(src, bgr, cv::COLOR_RGB2BGR);
    else
        bgr = src;
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".jpg", bgr, buf, {cv::IMWRITE_JPEG_QUALITY, quality})) throw std::runtime_error("JPEG encode failed");
    cv::Mat dec = cv::imdecode(buf, src.channels() == 3 ? cv::IMREAD_COLOR : cv::IMREAD_GRAYSCALE);
    if (dec.empty()) throw std::runtime_error("JPEG decode failed");
    if (src.channels() == 3) cv::cvtColor(dec, dec, cv::COLOR_BGR2RGB);
    return dec;
}

cv::Mat sharpen(const cv::Mat& src, double radius, double amount) {
    const int k = 2 * static_cast<int>(std::ceil(2 * radius)) + 1;
    cv::Mat d = as_double(src), blur;
    cv::GaussianBlur(d, blur, {k, k}, radius, radius, cv::BORDER_REPLICATE);
    return clamp_u8(d + amount * (d - blur));
}

cv::Mat gaussian_filter(const cv::Mat& src, double sigma) {
    const int k = sigma <= 1 ? 3 : 2 * static_cast<int>(std::ceil(2 * sigma)) + 1;
    cv::Mat d = as_double(src), out;
    cv::GaussianBlur(d, out, {k, k}, sigma, sigma, cv::BORDER_REPLICATE);
    return clamp_u8(out);
}

cv::Mat resize_down_up(const cv::Mat& src, double scale) {
    cv::Size small(std::max(1, static_cast<int>(std::lround(src.cols * scale))),
                   std::max(1, static_cast<int>(std::lround(src.rows * scale))));
    cv::Mat mid, out;
    cv::resize(src, mid, small, 0, 0, cv::INTER_LINEAR);
    cv::resize(mid, out, src.size(), 0, 0, cv::INTER_LINEAR);
    return out;
}

cv::Mat1b equalize_plane(const cv::Mat1b& p) {
    long hist[256] = {0};
    for (auto v : p) ++hist[v];
    long cdf[256], run = 0;
    for (int i = 0; i < 256; ++i) cdf[i] = run += hist[i];
    long first = 0;
    for (int i = 0; i < 256; ++i)
        if (hist[i]) {
            first = cdf[i];
            break;
        }
    const long n = static_cast<long>(p.total());
    if (n == first) return p.clone(); // single grey level
    std::uint8_t lut[256];
    for (int i = 0; i < 256; ++i) {
        double v = std::round(255.0 * (cdf[i] - first) / static_cast<double>(n - first));
        lut[i] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
    cv::Mat1b out(p.size());
    for (int r = 0; r < p.rows; ++r)
        for (int c = 0; c < p.cols; ++c) out(r, c) = lut[p(r, c)];
    return out;
}

template <class F> cv::Mat per_channel(const cv::Mat& src, F f) {
    std::vector<cv::Mat> planes;
    cv::split(src, planes);
    for (auto& p : planes) p = f(p);
    cv::Mat out;
    cv::merge(planes, out);
    return out;
}

cv::Mat lsb(const cv::Mat& src, int bits, Rng& rng) {
    cv::Mat out = src.clone();
    const std::uint8_t mask = static_cast<std::uint8_t>((1 << bits) - 1);
    std::uint8_t* p = out.ptr<std::uint8_t>();
    for (std::size_t i = 0; i < out.total() * out.channels(); ++i)
        p[i] = static_cast<std::uint8_t>((p[i] & ~mask) | (rng() & mask));
    return out;
}

// Adaptive Wiener: local mean/variance over a size x size window, noise
// power estimated as the mean local variance.
cv::Mat1b wiener_plane(const cv::Mat1b& p, int size) {
    cv::Mat1d x = as_double(p), mean, sq;
    const cv::Point anchor((size - 1) / 2, (size - 1) / 2);
    cv::blur(x, mean, {size, size}, anchor, cv::BORDER_REFLECT);
    cv::blur(x.mul(x), sq, {size, size}, anchor, cv::BORDER_REFLECT);
    cv::Mat1d var = sq - mean.mul(mean);
    const double noise = cv::mean(var)[0];
    cv::Mat1d out(x.size());
    for (int r = 0; r < x.rows; ++r)
        for (int c = 0; c < x.cols; ++c) {
            double v = var(r, c), g = std::max(v, noise) > 0 ? std::max(v - noise, 0.0) / std::max(v, noise) : 0;
            out(r, c) = mean(r, c) + g * (x(r, c) - mean(r, c));
        }
    return clamp_u8(out);
}

cv::Mat crop(const cv::Mat& src, double fraction) {
    cv::Mat out = src.clone();
    const double s = std::sqrt(fraction);
    int w = static_cast<int>(std::lround(src.cols * s)), h = static_cast<int>(std::lround(src.rows * s));
    out(cv::Rect((src.cols - w) / 2, (src.rows - h) / 2, w, h)).setTo(cv::Scalar::all(0));
    return out;
}

} // namespace

std::string to_string(AttackKind k) { return info(k).name; }

AttackKind parse_attack_kind(const std::string& name) {
    for (const auto& i : kinds())
        if (name == i.name) return i.kind;
    throw InputError("unknown attack: " + name);
}

bool is_stochastic(AttackKind k) { return info(k).stochastic; }

double AttackSpec::param(const std::string& key) const {
    auto it = params.find(key);
    if (it != params.end()) return it->second;
    for (const auto& r : info(kind).params)
        if (key == r.key) return r.fallback;
    throw InputError(to_string(kind) + " has no parameter " + key);
}

void AttackSpec::validate() const {
    const auto& ki = info(kind);
    for (const auto& [key, value] : params) {
        auto it = std::find_if(ki.params.begin(), ki.params.end(), [&](const ParamRule& r) { return key == r.key; });
        if (it == ki.params.end()) throw InputError(std::string(ki.name) + " has no parameter " + key);
        if (!(value >= it->lo && value <= it->hi))
            throw InputError(std::string(ki.name) + " " + key + "=" + fmt(value) + " outside [" + fmt(it->lo) + ", " + fmt(it->hi) + "]");
        if (it->integer && value != std::floor(value)) throw InputError(std::string(ki.name) + " " + key + " must be an integer");
    }
}

std::string AttackSpec::label() const {
    std::string s = to_string(kind);
    for (const auto& r : info(kind).params) s += std::string("_") + r.key + fmt(param(r.key));
    if (is_stochastic(kind)) s += "_seed" + std::to_string(seed);
    return s;
}

std::string AttackSpec::to_line() const {
    std::string s = to_string(kind);
    for (const auto& r : info(kind).params) s += std::string(" ") + r.key + "=" + fmt(param(r.key));
    if (is_stochastic(kind)) s += " seed=" + std::to_string(seed);
    return s;
}

AttackSpec parse_attack(const std::string& line) {
    std::istringstream in(line);
    std::string word;
    if (!(in >> word)) throw InputError("empty attack spec");
    AttackSpec spec;
    spec.kind = parse_attack_kind(word);
    while (in >> word) {
        auto eq = word.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == word.size()) throw InputError("expected key=value, got " + word);
        std::string key = word.substr(0, eq), val = word.substr(eq + 1);
        try {
            std::size_t used = 0;
            if (key == "seed") {
                spec.seed = std::stoull(val, &used, 0);
            } else {
                spec.params[key] = std::stod(val, &used);
            }
            if (used != val.size()) throw InputError("");
        } catch (const std::exception&) {
            throw InputError("invalid value for " + key + ": " + val);
        }
    }
    spec.validate();
    return spec;
}

AttackBatch parse_attack_batch(std::istream& in) {
    AttackBatch batch;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            batch.specs.push_back(parse_attack(line));
        } catch (const InputError& e) {
            batch.errors.push_back("line " + std::to_string(n) + ": " + e.what());
        }
    }
    return batch;
}

Image apply_attack(const Image& img, const AttackSpec& spec) {
    spec.validate();
    if (img.empty()) throw InputError("empty image");
    const cv::Mat& src = img.pixels;
    Rng rng(spec.seed);
    Image out;
    switch (spec.kind) {
    case AttackKind::SaltPepper: out.pixels = salt_pepper(src, spec.param("density"), rng); break;
    case AttackKind::Speckle: out.pixels = speckle(src, spec.param("variance"), rng); break;
    case AttackKind::GaussianNoise: out.pixels = gaussian_noise(src, spec.param("variance"), rng); break;
    case AttackKind::Jpeg: out.pixels = jpeg(src, static_cast<int>(spec.param("quality"))); break;
    case AttackKind::Lighten: out.pixels = clamp_u8(as_double(src) + cv::Scalar::all(spec.param("step"))); break;
    case AttackKind::Darken: out.pixels = clamp_u8(as_double(src) - cv::Scalar::all(spec.param("step"))); break;
    case AttackKind::Sharpen: out.pixels = sharpen(src, spec.param("radius"), spec.param("amount")); break;
    case AttackKind::GaussianFilter: out.pixels = gaussian_filter(src, spec.param("sigma")); break;
    case AttackKind::Average: cv::blur(src, out.pixels, {3, 3}, {-1, -1}, cv::BORDER_REPLICATE); break;
    case AttackKind::Median: cv::medianBlur(src, out.pixels, 3); break;
    case AttackKind::Resize: out.pixels = resize_down_up(src, spec.param("scale")); break;
    case AttackKind::HistEq: out.pixels = per_channel(src, [](const cv::Mat1b& p) { return cv::Mat(equalize_plane(p)); }); break;
    case AttackKind::Lsb: out.pixels = lsb(src, static_cast<int>(spec.param("bits")), rng); break;
    case AttackKind::Wiener: {
        const int size = static_cast<int>(spec.param("size"));
        out.pixels = per_channel(src, [size](const cv::Mat1b& p) { return cv::Mat(wiener_plane(p, size)); });
        break;
    }
    case AttackKind::Crop: out.pixels = crop(src, spec.param("fraction")); break;
    }
    return out;
}

Image apply_attacks(const Image& img, const std::vector<AttackSpec>& chain) {
    Image cur = img;
    for (const auto& s : chain) cur = apply_attack(cur, s);
    return cur;
}

std::vector<AttackSpec> optimization_attack_set() {
    return {
        {AttackKind::Sharpen, {{"radius", 1}, {"amount", 4}}, 0},
        {AttackKind::Wiener, {{"size", 4}}, 0},
        {AttackKind::Resize, {{"scale", 0.5}}, 0},
        {AttackKind::Darken, {{"step", 50}}, 0},
        {AttackKind::HistEq, {}, 0},
    };
}

std::vector<AttackSpec> robustness_grid(std::uint64_t seed) {
    std::vector<AttackSpec> g;
    for (int i = 1; i <= 10; ++i) {
        g.push_back({AttackKind::SaltPepper, {{"density", i / 100.0}}, seed});
        g.push_back({AttackKind::Speckle, {{"variance", i / 100.0}}, seed});
        g.push_back({AttackKind::GaussianNoise, {{"variance", i / 1000.0}}, seed});
        g.push_back({AttackKind::Jpeg, {{"quality", i * 10.0}}, 0});
        g.push_back({AttackKind::Lighten, {{"step", i * 10.0}}, 0});
        g.push_back({AttackKind::Darken, {{"step", i * 10.0}}, 0});
        g.push_back({AttackKind::Sharpen, {{"radius", 1}, {"amount", i / 5.0}}, 0});
        g.push_back({AttackKind::GaussianFilter, {{"sigma", i / 10.0}}, 0});
    }
    g.push_back({AttackKind::Average, {}, 0});
    g.push_back({AttackKind::Median, {}, 0});
    g.push_back({AttackKind::Resize, {{"scale", 0.5}}, 0});
    g.push_back({AttackKind::Resize, {{"scale", 2}}, 0});
    g.push_back({AttackKind::HistEq, {}, 0});
    for (int b = 1; b <= 4; ++b) g.push_back({AttackKind::Lsb, {{"bits", double(b)}}, seed});
    std::stable_sort(g.begin(), g.end(), [](const AttackSpec& a, const AttackSpec& b) { return a.kind < b.kind; });
    return g;
}

} // namespace wsmn
