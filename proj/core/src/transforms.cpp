#include "wsmn/transforms.hpp"
#include "wsmn/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace wsmn {

namespace {

double fftfreq(int k, int n) { return (k < (n + 1) / 2 ? k : k - n) / static_cast<double>(n); }

cv::Mat spectrum(const cv::Mat1d& plane) {
    cv::Mat f;
    cv::dft(plane, f, cv::DFT_COMPLEX_OUTPUT);
    return f;
}

cv::Mat1d filtered(const cv::Mat& spec, const cv::Mat1d& window, double scale) {
    cv::Mat prod(spec.size(), CV_64FC2);
    for (int r = 0; r < spec.rows; ++r) {
        const auto* s = spec.ptr<cv::Vec2d>(r);
        const double* w = window[r];
        auto* p = prod.ptr<cv::Vec2d>(r);
        for (int c = 0; c < spec.cols; ++c) p[c] = s[c] * (w[c] * scale);
    }
    cv::Mat1d out;
    cv::dft(prod, out, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_REAL_OUTPUT);
    return out;
}

} // namespace

double meyer_nu(double x) {
    x = std::clamp(x, 0.0, 1.0);
    return x * x * x * x * (35 - 84 * x + 70 * x * x - 20 * x * x * x);
}

ShearletSystem::ShearletSystem(int rows, int cols, ShearletOptions opt) : rows_(rows), cols_(cols), opt_(opt) {
    if (rows < 16 || cols < 16 || rows % 2 || cols % 2) throw InputError("shearlet transform needs even dimensions >= 16");
    if (!(opt.lowpass_inner > 0 && opt.lowpass_inner < opt.lowpass_outer && opt.lowpass_outer <= 0.5))
        throw std::invalid_argument("invalid lowpass cutoffs");
    for (double g : opt.gains)
        if (!(g > 0)) throw std::invalid_argument("band gains must be positive");
    for (auto& w : windows_) w = cv::Mat1d(rows, cols);

    const double a = opt.lowpass_inner, b = opt.lowpass_outer;
    const double half_pi = M_PI / 2;
    for (int r = 0; r < rows; ++r) {
        double wy = fftfreq(r, rows);
        for (int c = 0; c < cols; ++c) {
            double wx = fftfreq(c, cols);
            double ax = std::abs(wx), ay = std::abs(wy);
            double rad = std::max(ax, ay);
            double lp = std::cos(half_pi * meyer_nu((rad - a) / (b - a)));
            double hp = std::sqrt(std::max(0.0, 1 - lp * lp));
            // cone split around the diagonal, transition width pi/8
            double ang = std::atan2(ay, ax);
            double t = (ang - (M_PI / 4 - M_PI / 16)) / (M_PI / 8);
            double vert = std::sin(half_pi * meyer_nu(t));
            double horiz = std::cos(half_pi * meyer_nu(t));
            double sh = wx != 0 ? wy / wx : 0;
            double sv = wy != 0 ? wx / wy : 0;
            windows_[0](r, c) = lp;
            auto wedges = [&](double s, double cone, int base) {
                double u = std::abs(s);
                double centre = std::cos(half_pi * meyer_nu(u));
                double side = std::sin(half_pi * meyer_nu(u));
                windows_[base + 0](r, c) = hp * cone * (s < 0 ? side : 0);
                windows_[base + 1](r, c) = hp * cone * centre;
                windows_[base + 2](r, c) = hp * cone * (s > 0 ? side : 0);
            };
            wedges(sh, horiz, 1);
            wedges(sv, vert, 4);
        }
    }
    // On the Nyquist row and column the discrete negation -w wraps onto the
    // same line with the opposite shear, so the side wedges swap. Symmetrising
    // W(w)^2 and W(-w)^2 keeps the partition of unity and makes every band real.
    for (auto& w : windows_) {
        cv::Mat1d sym(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) {
                double u = w(r, c), v = w((rows - r) % rows, (cols - c) % cols);
                sym(r, c) = std::sqrt((u * u + v * v) / 2);
            }
        w = sym;
    }
}

double ShearletSystem::frame_error() const {
    double worst = 0;
    for (int r = 0; r < rows_; ++r)
        for (int c = 0; c < cols_; ++c) {
            double s = 0;
            for (const auto& w : windows_) s += w(r, c) * w(r, c);
            worst = std::max(worst, std::abs(s - 1));
        }
    return worst;
}

ShearletPyramid ShearletSystem::forward(const cv::Mat1d& plane) const {
    if (plane.rows != rows_ || plane.cols != cols_) throw InputError("plane size does not match shearlet system");
    cv::Mat spec = spectrum(plane);
    ShearletPyramid pyr;
    pyr.approx = filtered(spec, windows_[0], opt_.gains[0]);
    for (int d = 0; d < kDirections; ++d) pyr.details[d] = filtered(spec, windows_[d + 1], opt_.gains[d + 1]);
    return pyr;
}

cv::Mat1d ShearletSystem::inverse(const ShearletPyramid& pyr) const {
    auto check = [&](const cv::Mat1d& m) {
        if (m.rows != rows_ || m.cols != cols_) throw InputError("pyramid band size mismatch");
    };
    check(pyr.approx);
    for (const auto& d : pyr.details) check(d);
    cv::Mat acc = cv::Mat::zeros(rows_, cols_, CV_64FC2);
    for (int b = 0; b < kBands; ++b) {
        const cv::Mat1d& band = b == 0 ? pyr.approx : pyr.details[b - 1];
        cv::Mat spec = spectrum(band);
        double inv_gain = 1.0 / opt_.gains[b];
        for (int r = 0; r < rows_; ++r) {
            const auto* s = spec.ptr<cv::Vec2d>(r);
            const double* w = windows_[b][r];
            auto* a = acc.ptr<cv::Vec2d>(r);
            for (int c = 0; c < cols_; ++c) a[c] += s[c] * (w[c] * inv_gain);
        }
    }
    cv::Mat1d out;
    cv::dft(acc, out, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_REAL_OUTPUT);
    return out;
}

WaveletQuad lwt_forward(const cv::Mat1d& plane) {
    if (plane.rows % 2 || plane.cols % 2) throw InputError("lifting wavelet needs even dimensions");
    const int h = plane.rows / 2, w = plane.cols / 2;
    cv::Mat1d lo(plane.rows, w), hi(plane.rows, w);
    for (int r = 0; r < plane.rows; ++r)
        for (int c = 0; c < w; ++c) {
            double even = plane(r, 2 * c), odd = plane(r, 2 * c + 1);
            double d = odd - even;
            hi(r, c) = d;
            lo(r, c) = even + d / 2;
        }
    WaveletQuad q{cv::Mat1d(h, w), cv::Mat1d(h, w), cv::Mat1d(h, w), cv::Mat1d(h, w)};
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double d = lo(2 * r + 1, c) - lo(2 * r, c);
            q.lh(r, c) = d;
            q.ll(r, c) = lo(2 * r, c) + d / 2;
            double dh = hi(2 * r + 1, c) - hi(2 * r, c);
            q.hh(r, c) = dh;
            q.hl(r, c) = hi(2 * r, c) + dh / 2;
        }
    return q;
}

cv::Mat1d lwt_inverse(const WaveletQuad& q) {
    const int h = q.ll.rows, w = q.ll.cols;
    for (const cv::Mat1d* m : {&q.lh, &q.hl, &q.hh})
        if (m->rows != h || m->cols != w) throw InputError("wavelet quad size mismatch");
    cv::Mat1d lo(2 * h, w), hi(2 * h, w);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            double even = q.ll(r, c) - q.lh(r, c) / 2;
            lo(2 * r, c) = even;
            lo(2 * r + 1, c) = even + q.lh(r, c);
            double heven = q.hl(r, c) - q.hh(r, c) / 2;
            hi(2 * r, c) = heven;
            hi(2 * r + 1, c) = heven + q.hh(r, c);
        }
    cv::Mat1d out(2 * h, 2 * w);
    for (int r = 0; r < 2 * h; ++r)
        for (int c = 0; c < w; ++c) {
            double even = lo(r, c) - hi(r, c) / 2;
            out(r, 2 * c) = even;
            out(r, 2 * c + 1) = even + hi(r, c);
        }
    return out;
}

cv::Mat1d dct_matrix(int side) {
    cv::Mat1d m(side, side);
    for (int k = 0; k < side; ++k) {
        double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / side);
        for (int n = 0; n < side; ++n) m(k, n) = scale * std::cos(M_PI * (2 * n + 1) * k / (2.0 * side));
    }
    return m;
}

namespace {

cv::Mat1d blockwise(const cv::Mat1d& plane, int side, bool inverse) {
    if (side <= 0 || plane.rows % side || plane.cols % side) throw InputError("block DCT side does not divide the plane");
    cv::Mat1d C = dct_matrix(side);
    if (inverse) C = C.t();
    // forward: out = C * blk * C^T, inverse: out = C^T * blk * C
    std::vector<double> tmp(side * side);
    cv::Mat1d out(plane.size());
    for (int r = 0; r < plane.rows; r += side)
        for (int c = 0; c < plane.cols; c += side) {
            for (int i = 0; i < side; ++i)
                for (int j = 0; j < side; ++j) {
                    double s = 0;
                    for (int k = 0; k < side; ++k) s += C(i, k) * plane(r + k, c + j);
                    tmp[i * side + j] = s;
                }
            for (int i = 0; i < side; ++i)
                for (int j = 0; j < side; ++j) {
                    double s = 0;
                    for (int k = 0; k < side; ++k) s += tmp[i * side + k] * C(j, k);
                    out(r + i, c + j) = s;
                }
        }
    return out;
}

} // namespace

cv::Mat1d dct_block(const cv::Mat1d& plane, int side) { return blockwise(plane, side, false); }
cv::Mat1d idct_block(const cv::Mat1d& coeffs, int side) { return blockwise(coeffs, side, true); }

std::pair<int, int> zigzag_index(int side, int k) {
    if (side <= 0 || k < 0 || k >= side * side) throw std::out_of_range("zigzag index out of range");
    int idx = 0;
    for (int d = 0; d < 2 * side - 1; ++d) {
        int lo = std::max(0, d - side + 1), hi = std::min(d, side - 1);
        int count = hi - lo + 1;
        if (k < idx + count) {
            int off = k - idx;
            // odd diagonals run down-left (row increasing), even ones up-right
            int row = (d % 2) ? lo + off : hi - off;
            return {row, d - row};
        }
        idx += count;
    }
    throw std::logic_error("unreachable");
}

} // namespace wsmn
