#include "test_util.hpp"
#include "wsmn/image.hpp"

#include <gtest/gtest.h>
#include <opencv2/imgcodecs.hpp>

#include <fstream>

using namespace wsmn;

TEST(Image, YCoCgRoundTripIsExact) {
    Image img{cv::Mat(64, 64, CV_8UC3)};
    Rng rng(3);
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < 64; ++c)
            img.pixels.at<cv::Vec3b>(r, c) = {static_cast<uchar>(rng()), static_cast<uchar>(rng()), static_cast<uchar>(rng())};
    Image back = from_ycocg(to_ycocg(img));
    EXPECT_EQ(cv::norm(img.pixels, back.pixels, cv::NORM_INF), 0);
}

TEST(Image, YCoCgExtremesStayInRange) {
    for (int R : {0, 255})
        for (int G : {0, 255})
            for (int B : {0, 255}) {
                Image img{cv::Mat(1, 1, CV_8UC3, cv::Scalar(R, G, B))};
                auto p = to_ycocg(img);
                EXPECT_GE(p.y(0, 0), 0);
                EXPECT_LE(p.y(0, 0), 255);
                EXPECT_EQ(from_ycocg(p).pixels.at<cv::Vec3b>(0, 0), cv::Vec3b(R, G, B));
            }
}

TEST(Image, GrayLumaIsPixelValue) {
    Image g{cv::Mat(2, 2, CV_8UC1, cv::Scalar(77))};
    EXPECT_DOUBLE_EQ(luma_plane(g)(1, 1), 77);
}

TEST(Image, WithLumaKeepsChroma) {
    Image img = test::textured_image(16, 16, 1);
    cv::Mat1d y = luma_plane(img);
    Image same = with_luma(img, y);
    EXPECT_EQ(cv::norm(img.pixels, same.pixels, cv::NORM_INF), 0);
}

TEST(Image, ToU8RoundsHalfAwayAndClamps) {
    cv::Mat1d p = (cv::Mat1d(1, 4) << 2.5, -3, 300, 254.49);
    cv::Mat1b u = to_u8(p);
    EXPECT_EQ(u(0, 0), 3);
    EXPECT_EQ(u(0, 1), 0);
    EXPECT_EQ(u(0, 2), 255);
    EXPECT_EQ(u(0, 3), 254);
}

TEST(Image, PartitionRejectsIndivisibleSizes) {
    EXPECT_NO_THROW(partition(512, 512, 8));
    EXPECT_THROW(partition(510, 512, 8), InputError);
    auto g = partition(64, 32, 8);
    EXPECT_EQ(g.rows, 8);
    EXPECT_EQ(g.cols, 4);
    EXPECT_EQ(g.block(1, 2), cv::Rect(16, 8, 8, 8));
}

TEST(Image, Sha256KnownVector) {
    EXPECT_EQ(sha256_hex("abc", 3), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Image, PngAndPnmRoundTrip) {
    auto dir = test::temp_dir("image_io");
    Image img = test::textured_image(24, 40, 2);
    for (const char* name : {"a.png", "a.ppm"}) {
        save_image(img, dir / name);
        Image back = load_image(dir / name);
        EXPECT_EQ(back.channels(), 3);
        EXPECT_EQ(cv::norm(img.pixels, back.pixels, cv::NORM_INF), 0) << name;
        EXPECT_EQ(pixel_hash(back), pixel_hash(img));
    }
    cv::Mat1b bits(5, 11, uchar(0));
    bits(1, 3) = bits(4, 10) = 1;
    save_binary(bits, dir / "m.pbm");
    EXPECT_EQ(cv::norm(bits, load_binary(dir / "m.pbm"), cv::NORM_INF), 0);
}

TEST(Image, CorruptInputsAreInputErrors) {
    auto dir = test::temp_dir("image_bad");
    {
        std::ofstream(dir / "empty.png");
        std::ofstream(dir / "trunc.ppm", std::ios::binary) << "P6\n10 10\n255\nabc";
        std::ofstream(dir / "junk.png", std::ios::binary) << "not an image at all";
        std::ofstream(dir / "zero.pgm", std::ios::binary) << "P5\n0 10\n255\n";
    }
    for (const char* name : {"empty.png", "trunc.ppm", "junk.png", "zero.pgm", "missing.png"})
        EXPECT_THROW(load_image(dir / name), InputError) << name;
}

TEST(Image, SixteenBitPngRejected) {
    auto dir = test::temp_dir("image_16");
    cv::Mat m(4, 4, CV_16UC1, cv::Scalar(1000));
    ASSERT_TRUE(cv::imwrite((dir / "deep.png").string(), m));
    EXPECT_THROW(load_image(dir / "deep.png"), InputError);
}
