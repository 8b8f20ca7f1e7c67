#pragma once

#include "wsmn/image.hpp"

#include <opencv2/core.hpp>

#include <cstdint>
#include <vector>

namespace wsmn {

struct GaborBank {
    std::vector<double> orientations; // radians
    double frequency = 0.25;          // cycles/pixel
    double sigma_x = 2, sigma_y = 2;
    std::vector<cv::Mat1d> real, imag; // unit L2 norm complex kernels

    static GaborBank standard();
};

// One row per block (row-major block order): mean LBP, entropy, STD, Gabor magnitude.
struct BlockFeatures {
    cv::Mat1d raw;        // before normalisation
    cv::Mat1d normalized; // per-column min-max to [0,1]
};

struct Clustering {
    std::vector<int> labels; // 1..k
    cv::Mat1d centroids;     // k x dims
    int iterations = 0;
};

struct TextureMap {
    BlockGrid grid;
    std::vector<int> labels;
    int k = 0;
    std::vector<double> cluster_entropy; // mean entropy per cluster (index q-1)
    cv::Mat1d entropy;                   // per block, bits
    cv::Mat1d xi;                        // per block, [0.6, 1]
};

// 256-bin Shannon entropy in bits.
double block_entropy(const cv::Mat1b& block);
// Rotation-invariant uniform LBP code (0..9) per pixel, radius 1, replicated border.
cv::Mat1b lbp_riu2(const cv::Mat1b& img);

BlockFeatures block_features(const cv::Mat1b& img, const BlockGrid& grid, const GaborBank& bank = GaborBank::standard());

Clustering kmeans(const cv::Mat1d& points, int k, std::uint64_t seed, int max_iter = 300, double tol = 1e-6);
double calinski_harabasz(const cv::Mat1d& points, const std::vector<int>& labels, int k);
int select_k(const cv::Mat1d& points, int tau, std::uint64_t seed);

double xi_from_entropy(double mean_entropy);
TextureMap texture_coefficients(const cv::Mat1b& img, const BlockGrid& grid, const std::vector<int>& labels, int k);
// Full texture stage: features, k selection, clustering, xi map.
TextureMap analyze_texture(const cv::Mat1b& img, int side, std::uint64_t seed, int tau = 8);

} // namespace wsmn
