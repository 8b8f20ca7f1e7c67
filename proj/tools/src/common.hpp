#pragma once

#include "wsmn/embed.hpp"
#include "wsmn/image.hpp"
#include "wsmn/marks.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

namespace wsmn::cli {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

extern const char* const kVersion;

struct KeyOptions {
    std::string key1 = "0x5eed0001", key2 = "0x5eed0002", key3 = "0x5eed0003";
    void add(CLI::App& app);
    KeySet parse() const;
};

struct ThresholdOptions {
    double delta_prime = 40, delta_dprime = 1;
    void add(CLI::App& app);
    ThresholdPair pair() const;
};

// Logo argument: an image path, or "builtin" for the generated ring logo.
std::optional<cv::Mat1b> resolve_logo(const std::string& spec, int image_rows, int image_cols, Mode mode);

Json tool_info(const std::string& command);
Json file_info(const fs::path& path);
// NaN and infinity become null.
Json number(double v);
Json bits_summary(const cv::Mat1b& extracted, const cv::Mat1b& reference);

void write_json(const Json& j, const fs::path& path);
void write_text(const std::string& text, const fs::path& path);

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Seeded synthetic stand-in for a corpus image: gradients, gratings, edges and grain.
Image synthetic_image(std::uint64_t seed, int rows, int cols);
std::uint64_t name_seed(const std::string& name);

} // namespace wsmn::cli
