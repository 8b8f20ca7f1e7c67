#include "test_util.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>

#include <sys/wait.h>

using namespace wsmn;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

int run(const std::string& args, const fs::path& log = {}) {
    std::string cmd = std::string(WSMN_CLI_PATH) + " " + args;
    cmd += log.empty() ? " > /dev/null 2>&1" : " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Json read_json(const fs::path& p) { return Json::parse(slurp(p)); }

fs::path write_cover(const fs::path& dir, int side = 128, std::uint64_t seed = 3) {
    fs::path p = dir / "cover.png";
    save_image(test::textured_image(side, side, seed), p);
    return p;
}

} // namespace

TEST(Cli, ParseErrorsExitWithTwo) {
    EXPECT_EQ(run(""), 2);
    EXPECT_EQ(run("embed"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("--help"), 0);
}

TEST(Cli, EmbedVerifyRoundTrip) {
    auto dir = test::temp_dir("cli_roundtrip");
    fs::path cover = write_cover(dir);
    ASSERT_EQ(run("embed -i " + cover.string() + " -o " + (dir / "out").string() + " --logo builtin"), 0);
    Json er = read_json(dir / "out" / "watermarked_report.json");
    EXPECT_TRUE(er.contains("copyright"));
    EXPECT_TRUE(er.contains("authentication"));
    EXPECT_GT(er["quality"]["psnr"].get<double>(), 30);

    // white truth mask over a corner; the image is unmodified so nothing is flagged
    cv::Mat1b truth = cv::Mat1b::zeros(128, 128);
    truth(cv::Rect(0, 0, 32, 32)).setTo(255);
    save_image(Image{truth}, dir / "truth.png");
    ASSERT_EQ(run("verify -i " + (dir / "out" / "watermarked.png").string() + " -o " + (dir / "ver").string() +
                  " --logo builtin --truth " + (dir / "truth.png").string()),
              0);
    Json vr = read_json(dir / "ver" / "report.json");
    EXPECT_EQ(vr["copyright"]["vs_reference"]["ber"].get<double>(), 0.0);
    EXPECT_EQ(vr["authentication"]["tampered_blocks"].get<int>(), 0);
    for (const char* k : {"tpr", "fpr", "ac"}) EXPECT_TRUE(vr["authentication"]["localization"].contains(k)) << k;
    EXPECT_TRUE(fs::exists(dir / "ver" / "tamper.png"));
    EXPECT_TRUE(fs::exists(dir / "ver" / "logo.pbm"));
}

TEST(Cli, AuthModeReportHasNoCopyrightFields) {
    auto dir = test::temp_dir("cli_auth");
    fs::path cover = write_cover(dir);
    ASSERT_EQ(run("embed --mode auth -i " + cover.string() + " -o " + dir.string()), 0);
    Json er = read_json(dir / "watermarked_report.json");
    EXPECT_FALSE(er.contains("copyright"));
    EXPECT_FALSE(er["inputs"].contains("logo"));
    EXPECT_TRUE(er.contains("authentication"));
}

TEST(Cli, InputErrorsExitWithTwo) {
    auto dir = test::temp_dir("cli_inputs");
    fs::path cover = write_cover(dir);
    EXPECT_EQ(run("embed --mode copyright -i " + cover.string() + " -o " + dir.string()), 2);
    EXPECT_EQ(run("embed --logo builtin --delta-prime 60 -i " + cover.string() + " -o " + dir.string()), 2);
    EXPECT_EQ(run("embed --logo builtin --key1 zz -i " + cover.string() + " -o " + dir.string()), 2);
    save_image(test::textured_image(100, 100, 1), dir / "odd.png");
    EXPECT_EQ(run("embed --logo builtin -i " + (dir / "odd.png").string() + " -o " + dir.string()), 2);
    std::ofstream(dir / "broken.png") << "not a png";
    EXPECT_EQ(run("embed --logo builtin -i " + (dir / "broken.png").string() + " -o " + dir.string()), 2);
}

TEST(Cli, VerifyWithoutMetadataExitsWithThree) {
    auto dir = test::temp_dir("cli_nometa");
    fs::path cover = write_cover(dir);
    EXPECT_EQ(run("verify -i " + cover.string() + " -o " + dir.string()), 3);
    std::ofstream(dir / "cover.meta") << "mode=dual\n";
    EXPECT_EQ(run("verify -i " + cover.string() + " -o " + dir.string()), 3);
}

TEST(Cli, VerifyWithWrongKeysExitsWithTwo) {
    auto dir = test::temp_dir("cli_keys");
    fs::path cover = write_cover(dir);
    ASSERT_EQ(run("embed --mode auth -i " + cover.string() + " -o " + dir.string()), 0);
    EXPECT_EQ(run("verify --key3 0x1234 -i " + (dir / "watermarked.png").string() + " -o " + dir.string()), 2);
}

TEST(Cli, AttackBatchWritesOneFilePerValidSpec) {
    auto dir = test::temp_dir("cli_attack");
    fs::path cover = write_cover(dir, 64);
    std::ofstream(dir / "batch.txt") << "# fourteen kinds\n"
                                        "salt_pepper density=0.01 seed=1\nspeckle variance=0.01 seed=1\n"
                                        "gaussian_noise variance=0.001 seed=1\njpeg quality=70\nlighten step=10\n"
                                        "darken step=50\nsharpen radius=1 amount=4\ngaussian_filter sigma=0.5\naverage\n"
                                        "median\nresize scale=0.5\nhisteq\nlsb bits=1 seed=1\nwiener\n";
    ASSERT_EQ(run("attack -i " + cover.string() + " -o " + (dir / "a").string() + " --batch " + (dir / "batch.txt").string()), 0);
    int pngs = 0;
    for (const auto& e : fs::directory_iterator(dir / "a")) pngs += e.path().extension() == ".png";
    EXPECT_EQ(pngs, 14);

    ASSERT_EQ(run("attack -i " + cover.string() + " -o " + (dir / "b").string() + " --batch " + (dir / "batch.txt").string()), 0);
    for (const auto& e : fs::directory_iterator(dir / "a"))
        if (e.path().extension() == ".png") {
            EXPECT_EQ(slurp(e.path()), slurp(dir / "b" / e.path().filename())) << e.path();
        }
    EXPECT_TRUE(fs::exists(dir / "a" / "cover__jpeg_quality70.png"));
}

TEST(Cli, AttackRejectsOutOfRangeSpecAndKeepsTheRest) {
    auto dir = test::temp_dir("cli_attack_bad");
    fs::path cover = write_cover(dir, 64);
    fs::path log = dir / "log.txt";
    EXPECT_EQ(run("attack -i " + cover.string() + " -o " + dir.string() + " --spec 'salt_pepper density=0.5' --spec median", log), 2);
    EXPECT_NE(slurp(log).find("outside [0.01, 0.1]"), std::string::npos) << slurp(log);
    EXPECT_TRUE(fs::exists(dir / "cover__median.png"));
    Json rep = read_json(dir / "cover__attacks.json");
    EXPECT_EQ(rep["outputs"].size(), 1u);
    EXPECT_EQ(rep["rejected"].size(), 1u);
}

TEST(Cli, OptimizeWritesBoundedThresholdsAndTrace) {
    auto dir = test::temp_dir("cli_optimize");
    fs::path cover = write_cover(dir, 64);
    const std::string args = "optimize --population 4 --generations 3 --seed 5 -i " + cover.string() + " -o ";
    ASSERT_EQ(run(args + (dir / "a").string()), 0);
    Json t = read_json(dir / "a" / "thresholds.json");
    const double dp = t["chosen"]["delta_prime"], dd = t["chosen"]["delta_dprime"];
    EXPECT_GE(dp, 30);
    EXPECT_LE(dp, 50);
    EXPECT_GE(dd, 0);
    EXPECT_LE(dd, 2);
    EXPECT_TRUE(t["archive_nondominated"].get<bool>());
    std::istringstream trace(slurp(dir / "a" / "trace.jsonl"));
    int lines = 0;
    for (std::string line; std::getline(trace, line); ++lines) EXPECT_EQ(Json::parse(line)["generation"].get<int>(), lines + 1);
    EXPECT_EQ(lines, 3);
    ASSERT_EQ(run(args + (dir / "b").string()), 0);
    EXPECT_EQ(slurp(dir / "a" / "thresholds.json"), slurp(dir / "b" / "thresholds.json"));
}

TEST(Cli, FetchOfflineIsIdempotent) {
    auto dir = test::temp_dir("cli_fetch_offline");
    ASSERT_EQ(run("fetch-dataset --offline --out " + dir.string()), 0);
    int n = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".png") continue;
        ++n;
        Image img = load_image(e.path());
        EXPECT_EQ(img.width(), 512);
        EXPECT_EQ(img.height(), 512);
    }
    EXPECT_EQ(n, 15);
    Json prov = read_json(dir / "provenance.json");
    EXPECT_EQ(prov["images"]["camera.png"], "synthetic");
    auto stamp = fs::last_write_time(dir / "camera.png");
    fs::path log = dir / "log.txt";
    ASSERT_EQ(run("fetch-dataset --offline --out " + dir.string(), log), 0);
    EXPECT_NE(slurp(log).find("(0 written)"), std::string::npos);
    EXPECT_EQ(fs::last_write_time(dir / "camera.png"), stamp);
}

TEST(Cli, FetchVerifiesChecksumsAndQuarantinesMismatches) {
    auto dir = test::temp_dir("cli_fetch");
    fs::create_directories(dir / "src");
    save_image(test::textured_image(32, 32, 1), dir / "src" / "a.png");
    save_image(test::textured_image(32, 32, 2), dir / "src" / "b.png");
    const std::string ha = sha256_file(dir / "src" / "a.png"), hb = sha256_file(dir / "src" / "b.png");
    std::ofstream(dir / "good.txt") << "# name sha256 source\na.png " << ha << " a.png\nb.png " << hb << " b.png\n";
    const std::string base = " --source " + (dir / "src").string() + " --out " + (dir / "out").string();
    fs::path log = dir / "log.txt";
    ASSERT_EQ(run("fetch-dataset --manifest " + (dir / "good.txt").string() + base, log), 0);
    EXPECT_NE(slurp(log).find("2 fetched"), std::string::npos);
    ASSERT_EQ(run("fetch-dataset --manifest " + (dir / "good.txt").string() + base, log), 0);
    EXPECT_NE(slurp(log).find("0 fetched, 2 already present"), std::string::npos);
    EXPECT_EQ(read_json(dir / "out" / "provenance.json")["images"]["a.png"], "real");

    // b's listed checksum is wrong: it is quarantined, a is untouched
    std::ofstream(dir / "bad.txt") << "a.png " << ha << " a.png\nb.png " << ha << " b.png\n";
    fs::remove(dir / "out" / "b.png");
    EXPECT_EQ(run("fetch-dataset --manifest " + (dir / "bad.txt").string() + base), 2);
    EXPECT_TRUE(fs::exists(dir / "out" / "quarantine" / "b.png"));
    EXPECT_FALSE(fs::exists(dir / "out" / "b.png"));
    EXPECT_TRUE(fs::exists(dir / "out" / "a.png"));

    std::ofstream(dir / "junk.txt") << "a.png nothex a.png\n";
    EXPECT_EQ(run("fetch-dataset --manifest " + (dir / "junk.txt").string() + base), 2);
}

TEST(Cli, BenchOnSingleImageCorpusIsValidAndDeterministic) {
    auto dir = test::temp_dir("cli_bench");
    fs::create_directories(dir / "corpus");
    save_image(test::textured_image(128, 128, 9), dir / "corpus" / "only.png");
    std::ofstream(dir / "attacks.txt") << "jpeg quality=70\nsalt_pepper density=0.01 seed=2\n";
    const std::string args = "bench --corpus " + (dir / "corpus").string() + " --attacks " + (dir / "attacks.txt").string() +
                             " --splice-side 32 -j 1 -o ";
    ASSERT_EQ(run(args + (dir / "a").string()), 0);
    ASSERT_EQ(run(args + (dir / "b").string()), 0);
    Json rep = read_json(dir / "a" / "report.json");
    EXPECT_EQ(rep["images"].size(), 1u);
    EXPECT_EQ(rep["images"][0]["clean"]["copyright"]["ber"].get<double>(), 0.0);
    EXPECT_EQ(rep["mean"]["images"].get<int>(), 1);
    EXPECT_TRUE(rep["mean_by_label"].contains("unlabelled"));
    for (const char* f : {"report.json", "curves.csv", "curves_mean.csv", "images/only.png"})
        EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
    std::istringstream csv(slurp(dir / "a" / "curves.csv"));
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST(Cli, BenchRejectsEmptyCorpus) {
    auto dir = test::temp_dir("cli_bench_empty");
    EXPECT_EQ(run("bench --corpus " + dir.string() + " -o " + (dir / "out").string()), 2);
}
