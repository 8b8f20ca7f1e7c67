#pragma once

#include <opencv2/core.hpp>

#include <array>
#include <utility>

namespace wsmn {

constexpr int kDirections = 6;
constexpr int kBands = kDirections + 1; // band 0 is the lowpass

struct ShearletPyramid {
    cv::Mat1d approx;
    std::array<cv::Mat1d, kDirections> details;
};

struct ShearletOptions {
    // Lowpass transition on the max-norm frequency, cycles/pixel.
    double lowpass_inner = 0.30;
    double lowpass_outer = 0.45;
    // Per-band analysis gains; synthesis divides by the same gain.
    std::array<double, kBands> gains{1, 1, 1, 1, 1, 1, 1};
};

// One-scale cone-adapted shearlet system with Meyer-type frequency windows:
// a lowpass plus three shear wedges (slopes -1, 0, 1) in each of the two cones.
// Details 0..2 belong to the horizontal cone, 3..5 to the vertical cone.
class ShearletSystem {
public:
    ShearletSystem(int rows, int cols, ShearletOptions opt = {});

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    const ShearletOptions& options() const { return opt_; }
    const cv::Mat1d& window(int band) const { return windows_[band]; }
    double gain(int band) const { return opt_.gains[band]; }

    ShearletPyramid forward(const cv::Mat1d& plane) const;
    cv::Mat1d inverse(const ShearletPyramid& pyr) const;

    // max over frequencies of |sum_b window_b^2 - 1|
    double frame_error() const;

private:
    int rows_, cols_;
    ShearletOptions opt_;
    std::array<cv::Mat1d, kBands> windows_;
};

// Meyer auxiliary polynomial, clamped to [0,1].
double meyer_nu(double x);

inline ShearletPyramid dst_forward(const ShearletSystem& sys, const cv::Mat1d& plane) { return sys.forward(plane); }
inline cv::Mat1d dst_inverse(const ShearletSystem& sys, const ShearletPyramid& pyr) { return sys.inverse(pyr); }

struct WaveletQuad {
    cv::Mat1d ll, lh, hl, hh;
};

// One-level Haar lifting: detail = odd - even, approx = even + detail/2,
// applied along rows then columns.
WaveletQuad lwt_forward(const cv::Mat1d& plane);
cv::Mat1d lwt_inverse(const WaveletQuad& q);

// Orthonormal DCT-II basis, row k holds basis vector k.
cv::Mat1d dct_matrix(int side);
cv::Mat1d dct_block(const cv::Mat1d& plane, int side);
cv::Mat1d idct_block(const cv::Mat1d& coeffs, int side);

// JPEG zigzag scan position (row, col) of index k in a side x side block.
std::pair<int, int> zigzag_index(int side, int k);

} // namespace wsmn
