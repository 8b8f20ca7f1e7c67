#include "wsmn/metrics.hpp"
#include "wsmn/image.hpp"

#include <opencv2/imgproc.hpp>

#include <cmath>
#include <limits>

namespace wsmn {

namespace {

void same_shape(const cv::Mat& a, const cv::Mat& b) {
    if (a.size() != b.size() || a.channels() != b.channels()) throw InputError("metric inputs differ in shape");
}

} // namespace

double mse(const cv::Mat& a, const cv::Mat& b) {
    same_shape(a, b);
    if (a.empty()) throw InputError("empty metric input");
    cv::Mat da, db;
    a.convertTo(da, CV_64F);
    b.convertTo(db, CV_64F);
    cv::Mat d = da - db;
    return d.dot(d) / static_cast<double>(a.total() * a.channels());
}

double psnr(const cv::Mat& a, const cv::Mat& b) {
    double m = mse(a, b);
    if (m == 0) return std::numeric_limits<double>::infinity();
    return 10 * std::log10(255.0 * 255.0 / m);
}

double ssim(const cv::Mat& a, const cv::Mat& b) {
    same_shape(a, b);
    if (a.channels() != 1) throw InputError("ssim expects grayscale planes");
    if (a.rows < 11 || a.cols < 11) throw InputError("ssim needs at least 11x11 pixels");
    cv::Mat1d x, y;
    a.convertTo(x, CV_64F);
    b.convertTo(y, CV_64F);
    const double c1 = std::pow(0.01 * 255, 2), c2 = std::pow(0.03 * 255, 2);
    cv::Mat1d g = cv::getGaussianKernel(11, 1.5, CV_64F);
    auto blur = [&](const cv::Mat1d& m) {
        cv::Mat1d full;
        cv::sepFilter2D(m, full, CV_64F, g, g, cv::Point(-1, -1), 0, cv::BORDER_REFLECT);
        return cv::Mat1d(full(cv::Rect(5, 5, m.cols - 10, m.rows - 10)));
    };
    cv::Mat1d mx = blur(x), my = blur(y);
    cv::Mat1d sxx = blur(x.mul(x)) - mx.mul(mx);
    cv::Mat1d syy = blur(y.mul(y)) - my.mul(my);
    cv::Mat1d sxy = blur(x.mul(y)) - mx.mul(my);
    cv::Mat1d num = (2 * mx.mul(my) + c1).mul(2 * sxy + c2);
    cv::Mat1d den = (mx.mul(mx) + my.mul(my) + c1).mul(sxx + syy + c2);
    cv::Mat1d map;
    cv::divide(num, den, map);
    return cv::mean(map)[0];
}

double ber(const cv::Mat1b& a, const cv::Mat1b& b) {
    same_shape(a, b);
    if (a.empty()) throw InputError("empty mark");
    std::size_t diff = 0;
    for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < a.cols; ++c) diff += (a(r, c) != 0) != (b(r, c) != 0);
    return static_cast<double>(diff) / a.total();
}

double nc(const cv::Mat1b& a, const cv::Mat1b& b) {
    same_shape(a, b);
    double ab = 0, aa = 0, bb = 0;
    for (int r = 0; r < a.rows; ++r)
        for (int c = 0; c < a.cols; ++c) {
            double x = a(r, c) != 0, y = b(r, c) != 0;
            ab += x * y, aa += x * x, bb += y * y;
        }
    if (aa == 0 && bb == 0) return 1;
    if (aa == 0 || bb == 0) return 0;
    return ab / std::sqrt(aa * bb);
}

LocalizationScores localization_scores(const cv::Mat1b& predicted, const cv::Mat1b& truth) {
    same_shape(predicted, truth);
    if (predicted.empty()) throw InputError("empty localisation map");
    double tp = 0, fp = 0, tn = 0, fn = 0;
    for (int r = 0; r < truth.rows; ++r)
        for (int c = 0; c < truth.cols; ++c) {
            bool p = predicted(r, c) != 0, t = truth(r, c) != 0;
            (p ? (t ? tp : fp) : (t ? fn : tn)) += 1;
        }
    LocalizationScores s;
    s.tpr = tp + fn > 0 ? tp / (tp + fn) : 1.0;
    s.fpr = fp + tn > 0 ? fp / (fp + tn) : 0.0;
    s.ac = (tp + tn) / truth.total();
    return s;
}

} // namespace wsmn
