#pragma once

#include <opencv2/core.hpp>

namespace wsmn {

// Mean squared error over all samples and channels.
double mse(const cv::Mat& a, const cv::Mat& b);
// 8-bit peak; identical inputs give +infinity.
double psnr(const cv::Mat& a, const cv::Mat& b);
// Single-scale SSIM on grayscale planes: 11x11 Gaussian window (sigma 1.5),
// valid region only.
double ssim(const cv::Mat& a, const cv::Mat& b);

double ber(const cv::Mat1b& a, const cv::Mat1b& b);
// Plain normalised correlation of binary marks; two all-zero marks give 1.
double nc(const cv::Mat1b& a, const cv::Mat1b& b);

struct LocalizationScores {
    double tpr = 0, fpr = 0, ac = 0;
};
LocalizationScores localization_scores(const cv::Mat1b& predicted, const cv::Mat1b& truth);

} // namespace wsmn
