#include "wsmn/extract.hpp"
#include "wsmn/random.hpp"
#include "wsmn/texture.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wsmn {

cv::Mat1d auth_features(const EmbeddingSystem& sys, const cv::Mat1d& luma) {
    CarrierState st = preprocess(sys, luma);
    const BlockGrid& g = st.grid;
    cv::Mat1d f(g.count(), kFeatureDim);
    for (int s = 0; s < kDirections; ++s) {
        cv::Mat1d dc = st.dc_carriers(s);
        for (int i = 0; i < g.rows; ++i)
            for (int j = 0; j < g.cols; ++j) f(i * g.cols + j, s) = dc(i, j);
    }
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) {
            cv::Scalar m, sd;
            cv::meanStdDev(luma(g.block(i, j)), m, sd);
            f(i * g.cols + j, 6) = m[0];
            f(i * g.cols + j, 7) = sd[0];
        }
    for (int c = 0; c < kFeatureDim; ++c) {
        cv::Scalar m, sd;
        cv::meanStdDev(f.col(c), m, sd);
        double scale = sd[0] > 1e-12 ? 1.0 / sd[0] : 1.0;
        for (int r = 0; r < f.rows; ++r) f(r, c) = (f(r, c) - m[0]) * scale;
    }
    if (!cv::checkRange(f)) throw InputError("non-finite block features");
    return f;
}

// ---- MLP ----

namespace {

void init_layer(std::vector<double>& w, std::vector<double>& b, int out, int in, double limit, Rng& rng) {
    w.resize(static_cast<std::size_t>(out) * in);
    for (double& v : w) v = uniform(rng, -limit, limit);
    b.assign(out, 0.0);
}

struct Activations {
    double h1[Mlp::kH1], a1[Mlp::kH1], h2[Mlp::kH2], a2[Mlp::kH2], p[Mlp::kOut];
};

void forward(const Mlp& m, const double* x, Activations& a) {
    for (int j = 0; j < Mlp::kH1; ++j) {
        double s = m.b1[j];
        const double* w = &m.w1[j * Mlp::kIn];
        for (int k = 0; k < Mlp::kIn; ++k) s += w[k] * x[k];
        a.h1[j] = s;
        a.a1[j] = std::tanh(s);
    }
    for (int j = 0; j < Mlp::kH2; ++j) {
        double s = m.b2[j];
        const double* w = &m.w2[j * Mlp::kH1];
        for (int k = 0; k < Mlp::kH1; ++k) s += w[k] * a.a1[k];
        a.h2[j] = s;
        a.a2[j] = s > 0 ? s : 0;
    }
    double z[Mlp::kOut], zmax = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < Mlp::kOut; ++j) {
        double s = m.b3[j];
        const double* w = &m.w3[j * Mlp::kH2];
        for (int k = 0; k < Mlp::kH2; ++k) s += w[k] * a.a2[k];
        z[j] = s;
        zmax = std::max(zmax, s);
    }
    double sum = 0;
    for (int j = 0; j < Mlp::kOut; ++j) sum += a.p[j] = std::exp(z[j] - zmax);
    for (double& p : a.p) p /= sum;
}

} // namespace

Mlp::Mlp(std::uint64_t seed) {
    Rng rng(seed);
    init_layer(w1, b1, kH1, kIn, std::sqrt(6.0 / (kIn + kH1)), rng); // Glorot for tanh
    init_layer(w2, b2, kH2, kH1, std::sqrt(6.0 / kH1), rng);         // He for ReLU
    init_layer(w3, b3, kOut, kH2, std::sqrt(6.0 / (kH2 + kOut)), rng);
}

std::array<double, Mlp::kOut> Mlp::predict(const double* x) const {
    Activations a;
    forward(*this, x, a);
    return {a.p[0], a.p[1]};
}

int Mlp::classify(const double* x) const {
    auto p = predict(x);
    return p[1] > p[0] ? 1 : 0;
}

double Mlp::train_batch(const cv::Mat1d& x, const std::vector<int>& labels, const int* idx, int count, double lr) {
    std::vector<double> gw1(w1.size()), gb1(b1.size()), gw2(w2.size()), gb2(b2.size()), gw3(w3.size()), gb3(b3.size());
    double loss = 0;
    Activations a;
    for (int n = 0; n < count; ++n) {
        const double* xi = x[idx[n]];
        forward(*this, xi, a);
        const int y = labels[idx[n]];
        // loss = mean over outputs of (p - onehot)^2
        double g[kOut], dot = 0;
        for (int j = 0; j < kOut; ++j) {
            double diff = a.p[j] - (j == y ? 1.0 : 0.0);
            loss += diff * diff / kOut;
            g[j] = 2 * diff / kOut;
            dot += g[j] * a.p[j];
        }
        double dz3[kOut];
        for (int j = 0; j < kOut; ++j) dz3[j] = a.p[j] * (g[j] - dot);
        double d2[kH2] = {0};
        for (int j = 0; j < kOut; ++j) {
            gb3[j] += dz3[j];
            for (int k = 0; k < kH2; ++k) {
                gw3[j * kH2 + k] += dz3[j] * a.a2[k];
                d2[k] += dz3[j] * w3[j * kH2 + k];
            }
        }
        double d1[kH1] = {0};
        for (int j = 0; j < kH2; ++j) {
            if (a.h2[j] <= 0) continue;
            gb2[j] += d2[j];
            for (int k = 0; k < kH1; ++k) {
                gw2[j * kH1 + k] += d2[j] * a.a1[k];
                d1[k] += d2[j] * w2[j * kH1 + k];
            }
        }
        for (int j = 0; j < kH1; ++j) {
            double dz = d1[j] * (1 - a.a1[j] * a.a1[j]);
            gb1[j] += dz;
            for (int k = 0; k < kIn; ++k) gw1[j * kIn + k] += dz * xi[k];
        }
    }
    const double step = lr / count;
    auto apply = [step](std::vector<double>& w, const std::vector<double>& gw) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= step * gw[i];
    };
    apply(w1, gw1), apply(b1, gb1), apply(w2, gw2), apply(b2, gb2), apply(w3, gw3), apply(b3, gb3);
    return loss / count;
}

double Mlp::mse(const cv::Mat1d& x, const std::vector<int>& labels, const std::vector<int>& idx) const {
    if (idx.empty()) return 0;
    double loss = 0;
    Activations a;
    for (int i : idx) {
        forward(*this, x[i], a);
        for (int j = 0; j < kOut; ++j) {
            double diff = a.p[j] - (j == labels[i] ? 1.0 : 0.0);
            loss += diff * diff / kOut;
        }
    }
    return loss / idx.size();
}

double Mlp::error_rate(const cv::Mat1d& x, const std::vector<int>& labels, const std::vector<int>& idx) const {
    if (idx.empty()) return 0;
    int wrong = 0;
    for (int i : idx) wrong += classify(x[i]) != labels[i];
    return static_cast<double>(wrong) / idx.size();
}

bool Mlp::operator==(const Mlp& o) const {
    return w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2 && w3 == o.w3 && b3 == o.b3;
}

namespace {

void check_training_input(const cv::Mat1d& features, const std::vector<int>& labels) {
    if (features.cols != kFeatureDim) throw InputError("feature dimension must be 8");
    if (features.rows != static_cast<int>(labels.size())) throw InputError("feature and label counts differ");
    if (features.rows < 2) throw InputError("need at least two samples");
    if (!cv::checkRange(features)) throw InputError("non-finite block features");
}

// Minibatch SGD with early stopping on validation MSE; restores the best weights.
int fit(Mlp& m, const cv::Mat1d& x, const std::vector<int>& labels, std::vector<int> train, const std::vector<int>& val,
        int max_epochs, const TrainOptions& opt, Rng& rng) {
    Mlp best = m;
    double best_val = val.empty() ? 0 : m.mse(x, labels, val);
    int wait = 0, epoch = 0;
    while (epoch < max_epochs) {
        ++epoch;
        shuffle(train.begin(), train.end(), rng);
        for (std::size_t s = 0; s < train.size(); s += opt.batch) {
            int count = static_cast<int>(std::min<std::size_t>(opt.batch, train.size() - s));
            m.train_batch(x, labels, &train[s], count, opt.learning_rate);
        }
        if (val.empty()) continue;
        double v = m.mse(x, labels, val);
        if (v < best_val - opt.min_improvement) {
            best_val = v;
            best = m;
            wait = 0;
        } else if (++wait >= opt.patience) {
            break;
        }
    }
    if (!val.empty()) m = best;
    return epoch;
}

} // namespace

TrainResult train_extractor(const cv::Mat1d& features, const std::vector<int>& labels, const TrainOptions& opt) {
    check_training_input(features, labels);
    if (opt.folds < 2) throw std::invalid_argument("need at least two folds");
    const int n = features.rows;
    Rng rng(opt.seed);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order.begin(), order.end(), rng);

    TrainResult best;
    double best_err = std::numeric_limits<double>::infinity();
    for (int f = 0; f < opt.folds; ++f) {
        const int lo = static_cast<int>(static_cast<long long>(n) * f / opt.folds);
        const int hi = static_cast<int>(static_cast<long long>(n) * (f + 1) / opt.folds);
        std::vector<int> test(order.begin() + lo, order.begin() + hi), rest;
        rest.insert(rest.end(), order.begin(), order.begin() + lo);
        rest.insert(rest.end(), order.begin() + hi, order.end());
        const int nval = static_cast<int>(std::round(rest.size() * opt.validation));
        std::vector<int> val(rest.end() - nval, rest.end());
        rest.resize(rest.size() - nval);

        Mlp m(rng());
        int epochs = fit(m, features, labels, rest, val, opt.max_epochs, opt, rng);
        double err = m.error_rate(features, labels, test);
        if (err < best_err) {
            best_err = err;
            best.model = m;
            best.best_fold = f;
            best.test_accuracy = 1 - err;
            best.epochs = epochs;
        }
    }
    return best;
}

TrainResult fine_tune(const Mlp& start, const cv::Mat1d& features, const std::vector<int>& labels, int max_epochs,
                      const TrainOptions& opt) {
    check_training_input(features, labels);
    const int n = features.rows;
    Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order.begin(), order.end(), rng);
    const int nval = static_cast<int>(std::round(n * opt.validation));
    std::vector<int> val(order.end() - nval, order.end());
    order.resize(n - nval);
    TrainResult r;
    r.model = start;
    r.epochs = fit(r.model, features, labels, order, val, max_epochs, opt, rng);
    r.test_accuracy = 1 - r.model.error_rate(features, labels, val);
    return r;
}

std::vector<int> mark_labels(const cv::Mat1b& mark) {
    std::vector<int> out;
    out.reserve(mark.total());
    for (int r = 0; r < mark.rows; ++r)
        for (int c = 0; c < mark.cols; ++c) out.push_back(mark(r, c) ? 1 : 0);
    return out;
}

cv::Mat1b extract_auth(const Mlp& model, const cv::Mat1d& features, int rows, int cols) {
    if (features.cols != kFeatureDim) throw InputError("feature dimension does not match the model");
    if (features.rows != rows * cols) throw InputError("feature count does not match the block grid");
    cv::Mat1b out(rows, cols);
    for (int i = 0; i < features.rows; ++i) out(i / cols, i % cols) = static_cast<std::uint8_t>(model.classify(features[i]));
    return out;
}

TamperReport tamper_map(const cv::Mat1b& extracted, const cv::Mat1b& reference) {
    if (extracted.size() != reference.size()) throw InputError("tamper map shape mismatch");
    TamperReport rep;
    rep.raw = xor_mask(extracted, reference);
    cv::Mat1i labels, stats;
    cv::Mat centroids;
    int n = cv::connectedComponentsWithStats(rep.raw, labels, stats, centroids, 8, CV_32S);
    cv::Mat1b kept = cv::Mat1b::zeros(rep.raw.size());
    for (int r = 0; r < labels.rows; ++r)
        for (int c = 0; c < labels.cols; ++c) {
            int l = labels(r, c);
            if (l > 0 && l < n && stats(l, cv::CC_STAT_AREA) >= 3) kept(r, c) = 1;
        }
    cv::morphologyEx(kept, rep.cleaned, cv::MORPH_CLOSE, cv::getStructuringElement(cv::MORPH_RECT, {5, 5}));
    return rep;
}

cv::Mat1b vote_copies(const cv::Mat1b& tiled, const cv::Mat1d& weights) {
    if (tiled.size() != weights.size()) throw InputError("vote weight shape mismatch");
    if (tiled.rows % 2 || tiled.cols % 2) throw InputError("tiled mark must have even dimensions");
    const int h = tiled.rows / 2, w = tiled.cols / 2;
    cv::Mat1b out(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            double ones = 0, zeros = 0;
            for (const cv::Point& p : tile_positions(i, j, h, w)) (tiled(p) ? ones : zeros) += weights(p);
            out(i, j) = ones >= zeros ? 1 : 0;
        }
    return out;
}

cv::Mat1d entropy_weights(const cv::Mat1b& luma, const BlockGrid& grid) {
    cv::Mat1d w(grid.rows, grid.cols);
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) w(i, j) = 1 - block_entropy(luma(grid.block(i, j))) / 8;
    return w;
}

CopyrightResult extract_copyright(const EmbeddingSystem& sys, const cv::Mat1d& luma, const KeySet& keys, double delta_prime) {
    if (!(delta_prime > 0)) throw InputError("missing or invalid delta_prime");
    CarrierState st = preprocess(sys, luma);
    const BlockGrid& g = st.grid;
    if (g.rows % 2 || g.cols % 2) throw InputError("block grid must have even dimensions for four-copy tiling");
    CopyrightResult res;
    cv::Mat1d ac = st.ac_carriers();
    res.tiled = cv::Mat1b(g.rows, g.cols);
    for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) res.tiled(i, j) = static_cast<std::uint8_t>(dequantize_bit(ac(i, j), delta_prime));
    res.weights = entropy_weights(to_u8(luma), g);
    res.voted = vote_copies(res.tiled, res.weights);
    cv::Mat1b chi = gen_binary_sequence(keys.key1, res.voted.rows, res.voted.cols);
    res.logo = xor_mask(ccs_unshuffle(res.voted, keys.key2), chi);
    const int h = g.rows / 2, w = g.cols / 2;
    for (int k = 0; k < 4; ++k) {
        cv::Mat1b copy = res.tiled(cv::Rect((k % 2) * w, (k / 2) * h, w, h)).clone();
        res.copies[k] = xor_mask(ccs_unshuffle(copy, keys.key2), chi);
    }
    return res;
}

} // namespace wsmn
