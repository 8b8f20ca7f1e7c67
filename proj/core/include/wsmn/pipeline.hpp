#pragma once

#include "wsmn/embed.hpp"
#include "wsmn/extract.hpp"
#include "wsmn/image.hpp"
#include "wsmn/marks.hpp"
#include "wsmn/texture.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace wsmn {

// Raised when the sidecar needed for blind extraction is absent or incomplete (CLI exit code 3).
class MissingMetadata : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Sidecar {
    ThresholdPair thresholds;
    Mode mode = Mode::Dual;
    int block_side = 8;
    std::string image_hash;       // pixel hash of the watermarked image
    std::string keys_fingerprint; // guards against verifying with the wrong keys
};

void write_sidecar(const Sidecar& s, const std::filesystem::path& path);
Sidecar read_sidecar(const std::filesystem::path& path);

struct EmbedOutput {
    Image image;
    Sidecar meta;
    MarkSet marks;
    TextureMap texture;
    double psnr = 0, ssim = 0;
};

// Copyright modes need a logo of (width/16) x (height/16).
EmbedOutput embed_image(const Image& cover, const std::optional<cv::Mat1b>& logo, const KeySet& keys, const ThresholdPair& t,
                        Mode mode, std::uint64_t texture_seed = 1, const EmbedParams& params = {});

struct VerifyOutput {
    std::optional<CopyrightResult> copyright;
    cv::Mat1b auth_mark;      // regenerated reference w_a
    cv::Mat1b auth_extracted; // MLP output
    TamperReport tamper;
    TrainResult model;
};

VerifyOutput verify_image(const Image& received, const Sidecar& meta, const KeySet& keys, const TrainOptions& train = {},
                          const EmbedParams& params = {});

// Block-level truth for a pixel mask: a block is tampered when at least half its pixels are.
cv::Mat1b block_truth(const cv::Mat1b& pixel_mask, int side);

struct SpliceResult {
    Image image;
    cv::Mat1b mask; // 1 where pixels came from the donor
};

// Copies `region` of the donor into the target. The donor is resized to the
// target size and converted to its channel count first.
SpliceResult splice(const Image& target, const Image& donor, const cv::Rect& region);
cv::Rect centred_square(int rows, int cols, int side);

} // namespace wsmn
