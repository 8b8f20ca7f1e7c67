#pragma once

#include "wsmn/embed.hpp"
#include "wsmn/image.hpp"
#include "wsmn/marks.hpp"

#include <opencv2/core.hpp>

#include <array>
#include <cstdint>
#include <vector>

namespace wsmn {

constexpr int kFeatureDim = 8;

// Six slot DC carriers plus spatial mean and STD per block, z-scored over the image.
cv::Mat1d auth_features(const EmbeddingSystem& sys, const cv::Mat1d& luma);

// 8 -> 64 (tanh) -> 32 (ReLU) -> 2 (softmax).
class Mlp {
public:
    static constexpr int kIn = kFeatureDim, kH1 = 64, kH2 = 32, kOut = 2;

    Mlp() = default;
    explicit Mlp(std::uint64_t seed);

    std::array<double, kOut> predict(const double* x) const;
    int classify(const double* x) const; // ties go to class 0

    // One SGD step on a minibatch; returns the batch MSE before the update.
    double train_batch(const cv::Mat1d& x, const std::vector<int>& labels, const int* idx, int count, double lr);
    double mse(const cv::Mat1d& x, const std::vector<int>& labels, const std::vector<int>& idx) const;
    double error_rate(const cv::Mat1d& x, const std::vector<int>& labels, const std::vector<int>& idx) const;

    bool operator==(const Mlp& o) const;

    std::vector<double> w1, b1, w2, b2, w3, b3;
};

struct TrainOptions {
    int max_epochs = 1000;
    double learning_rate = 0.1;
    int batch = 32;
    int patience = 20;
    double min_improvement = 1e-3;
    int folds = 5;
    double validation = 0.15;
    std::uint64_t seed = 7;
};

struct TrainResult {
    Mlp model;
    int best_fold = 0;
    double test_accuracy = 0;
    int epochs = 0;
};

// Trains one model per fold (seeded) and keeps the one with the lowest test error.
TrainResult train_extractor(const cv::Mat1d& features, const std::vector<int>& labels, const TrainOptions& opt = {});
// Continues training a model on a single train/validation split.
TrainResult fine_tune(const Mlp& start, const cv::Mat1d& features, const std::vector<int>& labels, int max_epochs = 100,
                      const TrainOptions& opt = {});

std::vector<int> mark_labels(const cv::Mat1b& mark);
cv::Mat1b extract_auth(const Mlp& model, const cv::Mat1d& features, int rows, int cols);

struct TamperReport {
    cv::Mat1b raw;     // w~_a xor w_a
    cv::Mat1b cleaned; // after the area filter and closing
};
TamperReport tamper_map(const cv::Mat1b& extracted, const cv::Mat1b& reference);

struct CopyrightResult {
    cv::Mat1b tiled;                 // dequantised bits per block (shuffled, four copies)
    cv::Mat1d weights;               // per-block vote weight, 1 - H/8
    cv::Mat1b voted;                 // shuffled logo after the weighted vote
    cv::Mat1b logo;                  // decrypted logo
    std::array<cv::Mat1b, 4> copies; // each copy decoded on its own
};

// Weighted majority over the four tiled copies; ties resolve to 1.
cv::Mat1b vote_copies(const cv::Mat1b& tiled, const cv::Mat1d& weights);
cv::Mat1d entropy_weights(const cv::Mat1b& luma, const BlockGrid& grid);
CopyrightResult extract_copyright(const EmbeddingSystem& sys, const cv::Mat1d& luma, const KeySet& keys, double delta_prime);

} // namespace wsmn
