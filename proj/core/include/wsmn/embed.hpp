#pragma once

#include "wsmn/image.hpp"
#include "wsmn/marks.hpp"
#include "wsmn/texture.hpp"
#include "wsmn/transforms.hpp"

#include <opencv2/core.hpp>

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace wsmn {

enum class Mode { Copyright, Auth, Dual };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);
inline bool has_copyright(Mode m) { return m != Mode::Auth; }
inline bool has_auth(Mode m) { return m != Mode::Copyright; }

struct ThresholdPair {
    double delta_prime = 40;  // quantisation step, [30, 50]
    double delta_dprime = 1;  // correlation step, [0, 2]
    void validate() const;
};

struct EmbedParams {
    int block = 8;
    double lowpass_inner = 0.30;
    double lowpass_outer = 0.45;
    double detail_scale = 3;   // common scale of the normalised detail units
    double epsilon = 1.0;      // guard on |mu - sigma|
    double regularization = 0.2;
    double refine_margin = 0.5; // blocks below this mean auth margin are re-targeted
    int passes = 3;
    int max_passes = 8;           // extra passes repair clipped copyright carriers
    double copyright_guard = 1.0; // required distance from the QIM decision edge
};

// Channel 0 is the approximate-band AC carrier, channels 1..6 the DC carriers
// of the six detail directions.
constexpr int kChannels = 7;
using ChannelPlanes = std::array<cv::Mat1d, kChannels>;

// Per image size: the gain-normalised shearlet system plus the carrier Gram
// operator used for consistent reconstruction.
class EmbeddingSystem {
public:
    EmbeddingSystem(int rows, int cols, const EmbedParams& params = {});

    const ShearletSystem& shearlet() const { return *shearlet_; }
    const BlockGrid& grid() const { return grid_; }
    const EmbedParams& params() const { return params_; }

    // Coefficient edits that, pushed through the inverse chain, move the
    // re-analysed carriers by `delta` (least squares, Tikhonov damped).
    ChannelPlanes compensate(const ChannelPlanes& delta, const std::array<bool, kChannels>& active) const;

    // Carrier response of a plane computed directly from the frequency domain.
    ChannelPlanes carriers(const cv::Mat1d& plane) const;

private:
    EmbedParams params_;
    BlockGrid grid_;
    std::unique_ptr<ShearletSystem> shearlet_;
    std::vector<std::complex<double>> gram_; // per block frequency, kChannels^2
    std::array<double, kChannels> diag_mean_{};
    std::array<cv::Mat, 2> pattern_spec_;    // AC and DC carrier patterns
};

std::shared_ptr<const EmbeddingSystem> embedding_system(int rows, int cols, const EmbedParams& params = {});

// Gains that give every detail DC carrier the same functional energy as the
// approximate AC carrier, times `scale`.
std::array<double, kBands> carrier_gains(int rows, int cols, const ShearletOptions& base, double scale);

struct CarrierState {
    BlockGrid grid;
    ShearletPyramid pyramid;                     // bands after reordering (details hold slots)
    std::vector<std::array<std::uint8_t, kDirections>> kappa; // per block: direction held by slot s
    cv::Mat1d block_std;                         // ordered STDs, grid.count() x 6
    WaveletQuad approx_quad;
    std::array<WaveletQuad, kDirections> slot_quads;
    cv::Mat1d phi_a;                             // 4x4 block DCT of the approximate LL
    std::array<cv::Mat1d, kDirections> phi_d;    // 4x4 block DCT of each slot LL
    std::array<double, kDirections> mu{}, sigma{};

    // carrier grids, one value per spatial block
    cv::Mat1d ac_carriers() const;
    cv::Mat1d dc_carriers(int slot) const;
    void set_ac_carriers(const cv::Mat1d& v);
    void set_dc_carriers(int slot, const cv::Mat1d& v);
    // direction-indexed view: channel 0 = AC, channel 1+d = DC of direction d
    ChannelPlanes channel_carriers() const;
};

CarrierState preprocess(const EmbeddingSystem& sys, const cv::Mat1d& plane);
// Inverse DCT, inverse LWT, inverse reordering, inverse DST.
cv::Mat1d postprocess(const EmbeddingSystem& sys, const CarrierState& st);

double round_half_away(double v);
double quantize_target(double coeff, int bit, double delta_prime);
int dequantize_bit(double coeff, double delta_prime);
double compensate_toward(double coeff, double target, double xi);
cv::Mat1d embed_copyright(const cv::Mat1d& phi, const cv::Mat1b& wc, const cv::Mat1d& xi, double delta_prime);

struct AuthTerms {
    double rho, eta, theta, threshold, value;
};
AuthTerms auth_rule(double phi, double mu, double sigma, int bit, double xi, double delta_dprime, double epsilon);
cv::Mat1d embed_auth(const cv::Mat1d& phi, double mu, double sigma, const cv::Mat1b& wa, const cv::Mat1d& xi,
                     double delta_dprime, double epsilon);

struct EmbedResult {
    Image image;
    cv::Mat1d cover_luma, marked_luma;
    int refined_blocks = 0;
};

EmbedResult embed_all(const Image& img, const MarkSet& marks, const TextureMap& texture, const ThresholdPair& t, Mode mode,
                      const EmbedParams& params = {});

} // namespace wsmn
