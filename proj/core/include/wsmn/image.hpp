#pragma once

#include <opencv2/core.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace wsmn {

// Raised for unreadable, unsupported or malformed inputs (CLI exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// 8-bit raster. Colour images are stored in RGB channel order.
struct Image {
    cv::Mat pixels; // CV_8UC1 or CV_8UC3

    int width() const { return pixels.cols; }
    int height() const { return pixels.rows; }
    int channels() const { return pixels.channels(); }
    bool empty() const { return pixels.empty(); }
};

struct ColorPlanes {
    cv::Mat1i y, co, cg;
};

struct BlockGrid {
    int side = 8;
    int rows = 0;
    int cols = 0;
    int count() const { return rows * cols; }
    cv::Rect block(int i, int j) const { return {j * side, i * side, side, side}; }
};

Image load_image(const std::filesystem::path& path);
// Format follows the extension: .pgm/.ppm/.pbm/.pnm or .png.
void save_image(const Image& img, const std::filesystem::path& path);

// Binary masks are written as PBM (P4) with 1 = black.
cv::Mat1b load_binary(const std::filesystem::path& path);
void save_binary(const cv::Mat1b& bits, const std::filesystem::path& path);

// Integer-reversible YCoCg-R lifting.
ColorPlanes to_ycocg(const Image& img);
Image from_ycocg(const ColorPlanes& planes);

// Luminance working plane in [0,255] (gray value or YCoCg-R Y).
cv::Mat1d luma_plane(const Image& img);
// Rebuilds an image from a modified luminance plane, keeping chroma of `like`.
Image with_luma(const Image& like, const cv::Mat1d& luma);

// Round half away from zero and clamp to [0,255].
cv::Mat1b to_u8(const cv::Mat1d& plane);

BlockGrid partition(int rows, int cols, int side);
inline BlockGrid partition(const Image& img, int side) { return partition(img.height(), img.width(), side); }

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_file(const std::filesystem::path& path);
std::string pixel_hash(const Image& img);

} // namespace wsmn
