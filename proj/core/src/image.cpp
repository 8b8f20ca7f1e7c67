#include "wsmn/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <vector>

namespace wsmn {
namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct PnmHeader {
    char kind = 0;
    int width = 0, height = 0, maxval = 1;
    std::size_t offset = 0;
};

PnmHeader parse_pnm_header(const std::vector<unsigned char>& buf) {
    PnmHeader h;
    if (buf.size() < 3 || buf[0] != 'P') throw InputError("corrupt input");
    h.kind = static_cast<char>(buf[1]);
    std::size_t pos = 2;
    auto next_int = [&]() {
        while (pos < buf.size()) {
            if (buf[pos] == '#') {
                while (pos < buf.size() && buf[pos] != '\n') ++pos;
            } else if (std::isspace(buf[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        if (pos >= buf.size() || !std::isdigit(buf[pos])) throw InputError("corrupt input");
        long v = 0;
        while (pos < buf.size() && std::isdigit(buf[pos])) {
            v = v * 10 + (buf[pos] - '0');
            if (v > (1 << 24)) throw InputError("corrupt input");
            ++pos;
        }
        return static_cast<int>(v);
    };
    h.width = next_int();
    h.height = next_int();
    if (h.kind != '4') h.maxval = next_int();
    if (pos >= buf.size() || !std::isspace(buf[pos])) throw InputError("corrupt input");
    h.offset = pos + 1;
    if (h.width <= 0 || h.height <= 0) throw InputError("zero-dimension image");
    return h;
}

Image decode_pnm(const std::vector<unsigned char>& buf) {
    PnmHeader h = parse_pnm_header(buf);
    if (h.kind != '4' && h.kind != '5' && h.kind != '6') throw InputError("unsupported format: P" + std::string(1, h.kind));
    if (h.kind != '4' && h.maxval != 255) throw InputError("unsupported format: only 8-bit samples");
    Image img;
    if (h.kind == '4') {
        std::size_t stride = (static_cast<std::size_t>(h.width) + 7) / 8;
        if (buf.size() < h.offset + stride * h.height) throw InputError("corrupt input");
        img.pixels = cv::Mat(h.height, h.width, CV_8UC1);
        for (int r = 0; r < h.height; ++r)
            for (int c = 0; c < h.width; ++c) {
                unsigned char byte = buf[h.offset + r * stride + c / 8];
                bool black = (byte >> (7 - c % 8)) & 1;
                img.pixels.at<unsigned char>(r, c) = black ? 0 : 255;
            }
        return img;
    }
    int ch = h.kind == '5' ? 1 : 3;
    std::size_t need = static_cast<std::size_t>(h.width) * h.height * ch;
    if (buf.size() < h.offset + need) throw InputError("corrupt input");
    img.pixels = cv::Mat(h.height, h.width, ch == 1 ? CV_8UC1 : CV_8UC3);
    std::copy_n(buf.begin() + static_cast<std::ptrdiff_t>(h.offset), need, img.pixels.data);
    return img;
}

bool is_pnm_ext(const fs::path& p) {
    auto e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), ::tolower);
    return e == ".pgm" || e == ".ppm" || e == ".pnm" || e == ".pbm";
}

} // namespace

Image load_image(const fs::path& path) {
    auto buf = read_bytes(path);
    if (buf.empty()) throw InputError("corrupt input");
    if (buf[0] == 'P') return decode_pnm(buf);
    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
    if (buf.size() < 8 || !std::equal(png_sig, png_sig + 8, buf.begin())) throw InputError("unsupported format");
    cv::Mat m = cv::imdecode(buf, cv::IMREAD_UNCHANGED);
    if (m.empty()) throw InputError("corrupt input");
    if (m.depth() != CV_8U) throw InputError("unsupported format: only 8-bit samples");
    Image img;
    switch (m.channels()) {
    case 1: img.pixels = m; break;
    case 3: cv::cvtColor(m, img.pixels, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(m, img.pixels, cv::COLOR_BGRA2RGB); break;
    default: throw InputError("unsupported channel count");
    }
    if (img.pixels.rows == 0 || img.pixels.cols == 0) throw InputError("zero-dimension image");
    return img;
}

void save_image(const Image& img, const fs::path& path) {
    if (img.empty()) throw std::invalid_argument("empty image");
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    if (is_pnm_ext(path)) {
        std::ofstream out(path, std::ios::binary);
        int ch = img.channels();
        out << (ch == 1 ? "P5" : "P6") << "\n" << img.width() << " " << img.height() << "\n255\n";
        cv::Mat c = img.pixels.isContinuous() ? img.pixels : img.pixels.clone();
        out.write(reinterpret_cast<const char*>(c.data), static_cast<std::streamsize>(c.total() * ch));
        if (!out) throw std::runtime_error("write failed: " + path.string());
        return;
    }
    cv::Mat m;
    if (img.channels() == 3)
        cv::cvtColor(img.pixels, m, cv::COLOR_RGB2BGR);
    else
        m = img.pixels;
    if (!cv::imwrite(path.string(), m, {cv::IMWRITE_PNG_COMPRESSION, 6}))
        throw std::runtime_error("write failed: " + path.string());
}

cv::Mat1b load_binary(const fs::path& path) {
    Image img = load_image(path);
    cv::Mat gray;
    if (img.channels() == 3)
        cv::cvtColor(img.pixels, gray, cv::COLOR_RGB2GRAY);
    else
        gray = img.pixels;
    cv::Mat1b bits(gray.size());
    for (int r = 0; r < gray.rows; ++r)
        for (int c = 0; c < gray.cols; ++c) bits(r, c) = gray.at<unsigned char>(r, c) < 128 ? 1 : 0;
    return bits;
}

void save_binary(const cv::Mat1b& bits, const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto ext = path.extension().string();
    if (ext == ".pbm") {
        std::ofstream out(path, std::ios::binary);
        out << "P4\n" << bits.cols << " " << bits.rows << "\n";
        int stride = (bits.cols + 7) / 8;
        std::vector<unsigned char> row(stride);
        for (int r = 0; r < bits.rows; ++r) {
            std::fill(row.begin(), row.end(), 0);
            for (int c = 0; c < bits.cols; ++c)
                if (bits(r, c)) row[c / 8] |= static_cast<unsigned char>(0x80 >> (c % 8));
            out.write(reinterpret_cast<const char*>(row.data()), stride);
        }
        return;
    }
    Image img;
    img.pixels = cv::Mat(bits.size(), CV_8UC1);
    for (int r = 0; r < bits.rows; ++r)
        for (int c = 0; c < bits.cols; ++c) img.pixels.at<unsigned char>(r, c) = bits(r, c) ? 0 : 255;
    save_image(img, path);
}

ColorPlanes to_ycocg(const Image& img) {
    if (img.channels() != 3) throw InputError("YCoCg conversion needs a 3-channel image");
    ColorPlanes p{cv::Mat1i(img.pixels.size()), cv::Mat1i(img.pixels.size()), cv::Mat1i(img.pixels.size())};
    for (int r = 0; r < img.height(); ++r)
        for (int c = 0; c < img.width(); ++c) {
            auto px = img.pixels.at<cv::Vec3b>(r, c);
            int R = px[0], G = px[1], B = px[2];
            int co = R - B;
            int t = B + (co >> 1);
            int cg = G - t;
            p.y(r, c) = t + (cg >> 1);
            p.co(r, c) = co;
            p.cg(r, c) = cg;
        }
    return p;
}

Image from_ycocg(const ColorPlanes& p) {
    Image img;
    img.pixels = cv::Mat(p.y.size(), CV_8UC3);
    for (int r = 0; r < p.y.rows; ++r)
        for (int c = 0; c < p.y.cols; ++c) {
            int t = p.y(r, c) - (p.cg(r, c) >> 1);
            int G = p.cg(r, c) + t;
            int B = t - (p.co(r, c) >> 1);
            int R = B + p.co(r, c);
            img.pixels.at<cv::Vec3b>(r, c) = {cv::saturate_cast<unsigned char>(R), cv::saturate_cast<unsigned char>(G),
                                              cv::saturate_cast<unsigned char>(B)};
        }
    return img;
}

cv::Mat1d luma_plane(const Image& img) {
    cv::Mat1d out;
    if (img.channels() == 1) {
        img.pixels.convertTo(out, CV_64F);
    } else {
        to_ycocg(img).y.convertTo(out, CV_64F);
    }
    return out;
}

cv::Mat1b to_u8(const cv::Mat1d& plane) {
    cv::Mat1b out(plane.size());
    for (int r = 0; r < plane.rows; ++r)
        for (int c = 0; c < plane.cols; ++c) {
            double v = std::clamp(plane(r, c), 0.0, 255.0);
            out(r, c) = static_cast<unsigned char>(std::floor(v + 0.5));
        }
    return out;
}

Image with_luma(const Image& like, const cv::Mat1d& luma) {
    cv::Mat1b y8 = to_u8(luma);
    if (like.channels() == 1) return Image{y8};
    ColorPlanes p = to_ycocg(like);
    y8.convertTo(p.y, CV_32S);
    return from_ycocg(p);
}

BlockGrid partition(int rows, int cols, int side) {
    if (side <= 0 || rows <= 0 || cols <= 0) throw InputError("invalid block partition");
    if (rows % side != 0 || cols % side != 0)
        throw InputError("image size " + std::to_string(cols) + "x" + std::to_string(rows) + " not divisible by block side " +
                         std::to_string(side));
    return {side, rows / side, cols / side};
}

std::string sha256_hex(const void* data, std::size_t size) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data, size, md, &len, EVP_sha256(), nullptr);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

std::string sha256_file(const fs::path& path) {
    auto buf = read_bytes(path);
    return sha256_hex(buf.data(), buf.size());
}

std::string pixel_hash(const Image& img) {
    cv::Mat c = img.pixels.isContinuous() ? img.pixels : img.pixels.clone();
    return sha256_hex(c.data, c.total() * c.elemSize());
}

} // namespace wsmn
