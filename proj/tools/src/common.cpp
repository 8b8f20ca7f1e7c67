#include "common.hpp"
#include "wsmn/metrics.hpp"
#include "wsmn/random.hpp"

#include <cmath>
#include <fstream>

namespace wsmn::cli {

#ifndef WSMN_VERSION
#define WSMN_VERSION "0.0.0"
#endif
const char* const kVersion = WSMN_VERSION;

void KeyOptions::add(CLI::App& app) {
    app.add_option("--key1", key1, "Logo encryption key (decimal or 0x hex)")->capture_default_str();
    app.add_option("--key2", key2, "Logo shuffle key")->capture_default_str();
    app.add_option("--key3", key3, "Authentication mark key")->capture_default_str();
}

KeySet KeyOptions::parse() const {
    return {KeySet::parse_key(key1), KeySet::parse_key(key2), KeySet::parse_key(key3)};
}

void ThresholdOptions::add(CLI::App& app) {
    app.add_option("--delta-prime", delta_prime, "Quantisation step, 30..50")->capture_default_str();
    app.add_option("--delta-dprime", delta_dprime, "Correlation step, 0..2")->capture_default_str();
}

ThresholdPair ThresholdOptions::pair() const {
    ThresholdPair t{delta_prime, delta_dprime};
    t.validate();
    return t;
}

std::optional<cv::Mat1b> resolve_logo(const std::string& spec, int image_rows, int image_cols, Mode mode) {
    if (!has_copyright(mode)) return std::nullopt;
    if (spec.empty()) throw InputError("mode " + to_string(mode) + " needs --logo (an image path or 'builtin')");
    if (spec == "builtin") return default_logo(image_rows / 16, image_cols / 16);
    return load_binary(spec);
}

Json tool_info(const std::string& command) { return Json{{"name", "wsmn"}, {"version", kVersion}, {"command", command}}; }

Json file_info(const fs::path& path) { return Json{{"path", path.string()}, {"sha256", sha256_file(path)}}; }

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json bits_summary(const cv::Mat1b& extracted, const cv::Mat1b& reference) {
    return Json{{"ber", ber(extracted, reference)}, {"nc", nc(extracted, reference)}};
}

void write_json(const Json& j, const fs::path& path) { write_text(j.dump(2) + "\n", path); }

void write_text(const std::string& text, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::uint64_t name_seed(const std::string& name) {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : name) h = (h ^ c) * 1099511628211ULL;
    return h;
}

Image synthetic_image(std::uint64_t seed, int rows, int cols) {
    Rng rng(seed);
    cv::Mat1d base(rows, cols);
    const double fx = uniform(rng, 1, 5), fy = uniform(rng, 1, 5), phase = uniform(rng, 0, 2 * M_PI);
    const double gx = uniform(rng, 0.05, 0.2), gy = uniform(rng, 0.05, 0.2), angle = uniform(rng, 0, M_PI);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double u = static_cast<double>(c) / cols, v = static_cast<double>(r) / rows;
            double smooth = 110 + 60 * std::sin(2 * M_PI * fx * u + phase) * std::cos(2 * M_PI * fy * v);
            double grating = 25 * std::sin(2 * M_PI * (gx * c * std::cos(angle) + gy * r * std::sin(angle)));
            base(r, c) = smooth + (u + v > 1 ? grating : 0);
        }
    // a few flat-shaded rectangles give sharp edges
    for (int k = 0; k < 6; ++k) {
        int w = static_cast<int>(uniform(rng, 0.1, 0.35) * cols), h = static_cast<int>(uniform(rng, 0.1, 0.35) * rows);
        int x = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(cols - w)));
        int y = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(rows - h)));
        base(cv::Rect(x, y, w, h)) += uniform(rng, -60, 60);
    }
    // grain whose strength varies across the frame
    const double amp = uniform(rng, 8, 30);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) base(r, c) += amp * (static_cast<double>(r) / rows) * standard_normal(rng);
    const double tint[3] = {uniform(rng, 0.8, 1.1), 1.0, uniform(rng, 0.7, 1.1)};
    Image img{cv::Mat(rows, cols, CV_8UC3)};
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            auto& px = img.pixels.at<cv::Vec3b>(r, c);
            for (int ch = 0; ch < 3; ++ch) px[ch] = cv::saturate_cast<uchar>(base(r, c) * tint[ch]);
        }
    return img;
}

} // namespace wsmn::cli
