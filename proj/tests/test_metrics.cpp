#include "test_util.hpp"
#include "wsmn/metrics.hpp"

#include <gtest/gtest.h>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <limits>

using namespace wsmn;

TEST(Metrics, PsnrKnownValues) {
    cv::Mat a(16, 16, CV_8UC1, cv::Scalar(100)), b(16, 16, CV_8UC1, cv::Scalar(101));
    EXPECT_NEAR(psnr(a, b), 10 * std::log10(255.0 * 255.0), 1e-9);
    EXPECT_NEAR(psnr(a, b), 48.1308, 1e-4);
    cv::Mat black(8, 8, CV_8UC1, cv::Scalar(0)), white(8, 8, CV_8UC1, cv::Scalar(255));
    EXPECT_NEAR(psnr(black, white), 0, 1e-12);
    EXPECT_EQ(psnr(a, a), std::numeric_limits<double>::infinity());
    EXPECT_DOUBLE_EQ(mse(a, b), 1);
}

TEST(Metrics, SsimBounds) {
    Image img = test::textured_image(64, 64, 1, false);
    EXPECT_NEAR(ssim(img.pixels, img.pixels), 1, 1e-12);
    cv::Mat inv = 255 - img.pixels;
    EXPECT_LT(ssim(img.pixels, inv), 0);
    cv::Mat noisy = img.pixels.clone();
    cv::randn(noisy, 0, 10);
    noisy += img.pixels;
    double s = ssim(img.pixels, noisy);
    EXPECT_GT(s, 0);
    EXPECT_LT(s, 1);
}

TEST(Metrics, SsimMatchesDirectWindowedSum) {
    cv::Mat1d a = test::random_plane(24, 24, 3), b = a + test::random_plane(24, 24, 4, -20, 20);
    cv::Mat a8, b8;
    a.convertTo(a8, CV_8U);
    b.convertTo(b8, CV_8U);
    cv::Mat1d x, y;
    a8.convertTo(x, CV_64F);
    b8.convertTo(y, CV_64F);
    cv::Mat1d g = cv::getGaussianKernel(11, 1.5, CV_64F);
    cv::Mat1d w = g * g.t();
    const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
    double sum = 0;
    int n = 0;
    for (int r = 5; r < 24 - 5; ++r)
        for (int c = 5; c < 24 - 5; ++c) {
            double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = -5; i <= 5; ++i)
                for (int j = -5; j <= 5; ++j) {
                    double k = w(i + 5, j + 5), u = x(r + i, c + j), v = y(r + i, c + j);
                    mx += k * u, my += k * v, sxx += k * u * u, syy += k * v * v, sxy += k * u * v;
                }
            sxx -= mx * mx, syy -= my * my, sxy -= mx * my;
            sum += ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2));
            ++n;
        }
    EXPECT_NEAR(ssim(a8, b8), sum / n, 1e-9);
}

TEST(Metrics, BerAndNc) {
    cv::Mat1b a(10, 10, uchar(0));
    a(cv::Rect(0, 0, 5, 10)).setTo(1);
    EXPECT_DOUBLE_EQ(ber(a, a), 0);
    EXPECT_DOUBLE_EQ(nc(a, a), 1);
    cv::Mat1b inv = 1 - a;
    EXPECT_DOUBLE_EQ(ber(a, inv), 1);
    EXPECT_DOUBLE_EQ(nc(a, inv), 0);
    cv::Mat1b flip = a.clone();
    for (int i = 0; i < 10; ++i) flip(i, i) ^= 1;
    EXPECT_DOUBLE_EQ(ber(a, flip), 0.1);
    cv::Mat1b zero = cv::Mat1b::zeros(10, 10);
    EXPECT_DOUBLE_EQ(nc(zero, zero), 1);
    EXPECT_DOUBLE_EQ(nc(zero, a), 0);
    // 50 ones, 45 still set: 45 / sqrt(50 * 50)
    cv::Mat1b partial = a.clone();
    partial(cv::Rect(0, 0, 5, 1)).setTo(0);
    partial(cv::Rect(5, 0, 5, 1)).setTo(1);
    EXPECT_NEAR(nc(a, partial), 45.0 / 50.0, 1e-12);
}

TEST(Metrics, Localization) {
    cv::Mat1b truth = cv::Mat1b::zeros(10, 10), pred = cv::Mat1b::zeros(10, 10);
    truth(cv::Rect(0, 0, 4, 5)).setTo(1); // 20 positives
    pred(cv::Rect(0, 0, 4, 4)).setTo(1);  // 16 hits
    pred(9, 9) = 1;                       // 1 false alarm
    auto s = localization_scores(pred, truth);
    EXPECT_DOUBLE_EQ(s.tpr, 16.0 / 20);
    EXPECT_DOUBLE_EQ(s.fpr, 1.0 / 80);
    EXPECT_DOUBLE_EQ(s.ac, (16.0 + 79) / 100);
    auto perfect = localization_scores(truth, truth);
    EXPECT_DOUBLE_EQ(perfect.tpr, 1);
    EXPECT_DOUBLE_EQ(perfect.fpr, 0);
}
