#include "wsmn/pipeline.hpp"
#include "wsmn/metrics.hpp"

#include <opencv2/imgproc.hpp>

#include <fstream>
#include <map>
#include <sstream>

namespace wsmn {

void write_sidecar(const Sidecar& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    std::ostringstream dp, ddp;
    dp.precision(17), ddp.precision(17);
    dp << s.thresholds.delta_prime;
    ddp << s.thresholds.delta_dprime;
    out << "delta_prime=" << dp.str() << "\n"
        << "delta_dprime=" << ddp.str() << "\n"
        << "mode=" << to_string(s.mode) << "\n"
        << "block_side=" << s.block_side << "\n"
        << "image_hash=" << s.image_hash << "\n"
        << "keys_fingerprint=" << s.keys_fingerprint << "\n";
}

Sidecar read_sidecar(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingMetadata("missing metadata file " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw MissingMetadata("malformed metadata line: " + line);
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto need = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty()) throw MissingMetadata(std::string("metadata lacks ") + key);
        return it->second;
    };
    Sidecar s;
    try {
        s.mode = parse_mode(need("mode"));
        s.thresholds.delta_prime = std::stod(need("delta_prime"));
        s.thresholds.delta_dprime = std::stod(need("delta_dprime"));
        s.block_side = std::stoi(need("block_side"));
    } catch (const std::invalid_argument&) {
        throw MissingMetadata("unparsable metadata in " + path.string());
    } catch (const InputError& e) {
        throw MissingMetadata(e.what());
    }
    if (kv.count("image_hash")) s.image_hash = kv["image_hash"];
    if (kv.count("keys_fingerprint")) s.keys_fingerprint = kv["keys_fingerprint"];
    return s;
}

EmbedOutput embed_image(const Image& cover, const std::optional<cv::Mat1b>& logo, const KeySet& keys, const ThresholdPair& t,
                        Mode mode, std::uint64_t texture_seed, const EmbedParams& params) {
    t.validate();
    if (cover.empty()) throw InputError("empty cover image");
    const BlockGrid grid = partition(cover, params.block);
    EmbedOutput out;
    if (has_copyright(mode)) {
        if (!logo) throw InputError("copyright embedding needs a logo");
        out.marks = prepare_marks(*logo, keys, cover.width(), cover.height(), params.block);
    } else {
        out.marks.wa = auth_mark(keys, cover.width(), cover.height(), params.block);
    }
    cv::Mat1d luma = luma_plane(cover);
    out.texture = analyze_texture(to_u8(luma), params.block, texture_seed);
    EmbedResult er = embed_all(cover, out.marks, out.texture, t, mode, params);
    out.image = er.image;
    out.meta.thresholds = t;
    out.meta.mode = mode;
    out.meta.block_side = grid.side;
    out.meta.image_hash = pixel_hash(out.image);
    out.meta.keys_fingerprint = keys.fingerprint();
    out.psnr = psnr(cover.pixels, out.image.pixels);
    out.ssim = ssim(to_u8(luma), to_u8(luma_plane(out.image)));
    return out;
}

VerifyOutput verify_image(const Image& received, const Sidecar& meta, const KeySet& keys, const TrainOptions& train,
                          const EmbedParams& params) {
    if (received.empty()) throw InputError("empty received image");
    if (!meta.keys_fingerprint.empty() && meta.keys_fingerprint != keys.fingerprint())
        throw InputError("keys do not match the metadata fingerprint");
    EmbedParams p = params;
    p.block = meta.block_side;
    auto sys = embedding_system(received.height(), received.width(), p);
    cv::Mat1d luma = luma_plane(received);
    VerifyOutput out;
    if (has_copyright(meta.mode)) out.copyright = extract_copyright(*sys, luma, keys, meta.thresholds.delta_prime);
    if (has_auth(meta.mode)) {
        out.auth_mark = auth_mark(keys, received.width(), received.height(), p.block);
        cv::Mat1d feats = auth_features(*sys, luma);
        out.model = train_extractor(feats, mark_labels(out.auth_mark), train);
        out.auth_extracted = extract_auth(out.model.model, feats, out.auth_mark.rows, out.auth_mark.cols);
        out.tamper = tamper_map(out.auth_extracted, out.auth_mark);
    }
    return out;
}

cv::Mat1b block_truth(const cv::Mat1b& pixel_mask, int side) {
    BlockGrid g = partition(pixel_mask.rows, pixel_mask.cols, side);
    cv::Mat1b out(g.rows, g.cols);
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) out(i, j) = 2 * cv::countNonZero(pixel_mask(g.block(i, j))) >= side * side ? 1 : 0;
    return out;
}

SpliceResult splice(const Image& target, const Image& donor, const cv::Rect& region) {
    if (target.empty() || donor.empty()) throw InputError("splice needs two non-empty images");
    const cv::Rect bounds(0, 0, target.width(), target.height());
    if (region.empty() || (region & bounds) != region) throw InputError("splice region lies outside the image");
    cv::Mat src = donor.pixels;
    if (src.channels() != target.channels())
        cv::cvtColor(src, src, src.channels() == 1 ? cv::COLOR_GRAY2RGB : cv::COLOR_RGB2GRAY);
    if (src.size() != target.pixels.size()) cv::resize(src, src, target.pixels.size(), 0, 0, cv::INTER_AREA);
    SpliceResult out{Image{target.pixels.clone()}, cv::Mat1b::zeros(target.height(), target.width())};
    src(region).copyTo(out.image.pixels(region));
    out.mask(region).setTo(1);
    return out;
}

cv::Rect centred_square(int rows, int cols, int side) {
    if (side < 1 || side > rows || side > cols) throw InputError("splice square does not fit the image");
    return {(cols - side) / 2, (rows - side) / 2, side, side};
}

} // namespace wsmn
