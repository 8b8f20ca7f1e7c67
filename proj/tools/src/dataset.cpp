#include "commands.hpp"
#include "common.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <regex>
#include <sstream>

namespace wsmn::cli {

namespace {

// The standard names used when no manifest is given.
const char* const kDefaultNames[] = {"astronaut.png", "brick.png", "camera.png",  "cell.png",  "chelsea.png",
                                     "coffee.png",    "coins.png", "grass.png",   "gravel.png", "hubble_deep_field.png",
                                     "ihc.png",       "moon.png",  "motorcycle_left.png", "retina.png", "rocket.png"};

struct ManifestEntry {
    std::string name, sha256, source;
};

std::vector<ManifestEntry> read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open manifest " + path.string());
    std::vector<ManifestEntry> out;
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ss(line);
        ManifestEntry e;
        if (!(ss >> e.name)) continue;
        std::string extra;
        if (!(ss >> e.sha256 >> e.source) || (ss >> extra)) throw InputError("manifest line " + std::to_string(n) + ": expected 'name sha256 source'");
        if (!std::regex_match(e.sha256, std::regex("[0-9a-f]{64}")))
            throw InputError("manifest line " + std::to_string(n) + ": sha256 must be 64 lowercase hex digits");
        if (e.name.find('/') != std::string::npos || e.name == "." || e.name == "..")
            throw InputError("manifest line " + std::to_string(n) + ": name must be a plain file name");
        out.push_back(e);
    }
    if (out.empty()) throw InputError("manifest lists no images");
    return out;
}

fs::path default_out_dir() {
    if (const char* cache = std::getenv("WSMN_CACHE_DIR"); cache && *cache) return fs::path(cache) / "corpus";
    if (const char* home = std::getenv("HOME"); home && *home) return fs::path(home) / ".cache" / "wsmn" / "corpus";
    throw InputError("set WSMN_CACHE_DIR or pass --out");
}

std::string read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string hash_bytes(const std::string& bytes) { return sha256_hex(bytes.data(), bytes.size()); }

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0; }

std::string download(const std::string& base, const std::string& source) {
    static const std::regex url(R"((https?://[^/]+)(/.*)?)");
    std::smatch m;
    if (!std::regex_match(base, m, url)) throw InputError("malformed source URL " + base);
    std::string path = m[2].str();
    if (path.empty() || path.back() != '/') path += '/';
    httplib::Client client(m[1].str());
    client.set_follow_location(true);
    client.set_connection_timeout(30);
    client.set_read_timeout(120);
    auto res = client.Get(path + source);
    if (!res) throw InputError("download of " + source + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw InputError("download of " + source + " failed: HTTP " + std::to_string(res->status));
    return res->body;
}

Json load_provenance(const fs::path& dir) {
    std::ifstream in(dir / "provenance.json");
    if (!in) return Json{{"images", Json::object()}};
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("images")) return Json{{"images", Json::object()}};
    return j;
}

struct FetchOptions {
    std::string manifest, source, out;
    bool offline = false;
    int size = 512;
    std::uint64_t seed = 1;
};

int run_offline(const FetchOptions& o, const fs::path& out) {
    std::vector<std::string> names;
    if (o.manifest.empty())
        names.assign(std::begin(kDefaultNames), std::end(kDefaultNames));
    else
        for (const auto& e : read_manifest(o.manifest)) names.push_back(e.name);
    if (o.size < 16 || o.size % 16) throw InputError("--size must be a positive multiple of 16");
    Json prov = load_provenance(out);
    int written = 0;
    for (const auto& name : names) {
        const fs::path target = out / fs::path(name).replace_extension(".png");
        const Image img = synthetic_image(name_seed(name) ^ o.seed, o.size, o.size);
        cv::Mat bgr;
        cv::cvtColor(img.pixels, bgr, cv::COLOR_RGB2BGR);
        std::vector<uchar> png;
        cv::imencode(".png", bgr, png);
        const std::string bytes(png.begin(), png.end());
        if (!fs::exists(target) || read_bytes(target) != bytes) {
            write_text(bytes, target);
            ++written;
        }
        prov["images"][target.filename().string()] = "synthetic";
    }
    prov["synthetic"] = {{"seed", o.seed}, {"size", o.size}};
    write_json(prov, out / "provenance.json");
    std::cout << names.size() << " synthetic images in " << out.string() << " (" << written << " written)\n";
    return 0;
}

int run_fetch(const FetchOptions& o) {
    const fs::path out = o.out.empty() ? default_out_dir() : fs::path(o.out);
    fs::create_directories(out);
    if (o.offline) return run_offline(o, out);
    if (o.manifest.empty()) throw InputError("--manifest is required unless --offline is given");
    if (o.source.empty()) throw InputError("--source (a directory or http(s) base URL) is required unless --offline is given");
    const auto entries = read_manifest(o.manifest);
    Json prov = load_provenance(out);
    int fetched = 0, cached = 0, failed = 0;
    for (const auto& e : entries) {
        const fs::path target = out / e.name;
        if (fs::exists(target) && sha256_file(target) == e.sha256) {
            ++cached;
            prov["images"][e.name] = "real";
            continue;
        }
        std::string bytes;
        try {
            bytes = is_url(o.source) ? download(o.source, e.source) : read_bytes(fs::path(o.source) / e.source);
        } catch (const InputError& err) {
            std::cerr << e.name << ": " << err.what() << "\n";
            ++failed;
            continue;
        }
        const std::string got = hash_bytes(bytes);
        if (got != e.sha256) {
            const fs::path q = out / "quarantine" / e.name;
            write_text(bytes, q);
            if (fs::exists(target)) fs::remove(target);
            prov["images"].erase(e.name);
            std::cerr << e.name << ": checksum mismatch (expected " << e.sha256 << ", got " << got << "), moved to "
                      << q.string() << "\n";
            ++failed;
            continue;
        }
        write_text(bytes, target);
        prov["images"][e.name] = "real";
        ++fetched;
    }
    write_json(prov, out / "provenance.json");
    std::cout << fetched << " fetched, " << cached << " already present, " << failed << " failed\n";
    return failed ? 2 : 0;
}

} // namespace

Command add_fetch_dataset(CLI::App& app) {
    auto o = std::make_shared<FetchOptions>();
    CLI::App* sub = app.add_subcommand("fetch-dataset", "Download and checksum the test corpus, or generate a synthetic one");
    sub->add_option("--manifest", o->manifest, "Manifest with 'name sha256 source' lines");
    sub->add_option("--source", o->source, "Directory or http(s) base URL the manifest sources are relative to");
    sub->add_option("--out", o->out, "Corpus directory (default: $WSMN_CACHE_DIR/corpus or ~/.cache/wsmn/corpus)");
    sub->add_flag("--offline", o->offline, "Generate seeded synthetic images with the manifest names instead");
    sub->add_option("--size", o->size, "Side of the synthetic images")->capture_default_str();
    sub->add_option("--seed", o->seed, "Seed of the synthetic images")->capture_default_str();
    return {sub, [o] { return run_fetch(*o); }};
}

} // namespace wsmn::cli
