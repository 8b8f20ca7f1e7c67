#pragma once

#include <opencv2/core.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace wsmn {

struct KeySet {
    std::uint64_t key1 = 0x5eed0001, key2 = 0x5eed0002, key3 = 0x5eed0003;

    // Accepts decimal or 0x-prefixed hex.
    static std::uint64_t parse_key(const std::string& text);
    std::string fingerprint() const;
};

struct MarkSet {
    cv::Mat1b logo;      // copyright logo, (M/2m) x (N/2n)
    cv::Mat1b chi;       // keystream bits, same shape as logo
    cv::Mat1b encrypted; // logo xor chi
    cv::Mat1b shuffled;  // chaotic permutation of encrypted
    cv::Mat1b wc;        // 2x2 tiling, (M/m) x (N/n)
    cv::Mat1b wa;        // authentication sequence, (M/m) x (N/n)
};

// Keyed pseudorandom bits: Gaussian stream thresholded at its median.
cv::Mat1b gen_binary_sequence(std::uint64_t seed, int rows, int cols);

cv::Mat1b xor_mask(const cv::Mat1b& mark, const cv::Mat1b& chi);

// Permutation p = argsort ascending of a logistic-map sequence seeded by the key.
std::vector<int> ccs_permutation(std::uint64_t key, int length);
cv::Mat1b ccs_shuffle(const cv::Mat1b& mark, std::uint64_t key);
cv::Mat1b ccs_unshuffle(const cv::Mat1b& shuffled, std::uint64_t key);

cv::Mat1b tile_four(const cv::Mat1b& small);
// The four carrier positions (row, col) of logo bit (i, j).
std::array<cv::Point, 4> tile_positions(int i, int j, int rows, int cols);

MarkSet prepare_marks(const cv::Mat1b& logo, const KeySet& keys, int M, int N, int m);
// Authentication mark only (no logo needed).
cv::Mat1b auth_mark(const KeySet& keys, int M, int N, int m);

// A deterministic binary test logo: ring with a cross, 1 = ink.
cv::Mat1b default_logo(int rows, int cols);

} // namespace wsmn
