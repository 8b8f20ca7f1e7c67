#include "wsmn/texture.hpp"
#include "wsmn/random.hpp"

#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace wsmn {

GaborBank GaborBank::standard() {
    GaborBank bank;
    bank.orientations = {0, M_PI / 4, M_PI / 2, 3 * M_PI / 4};
    const int half = static_cast<int>(std::ceil(3 * std::max(bank.sigma_x, bank.sigma_y)));
    for (double theta : bank.orientations) {
        cv::Mat1d re(2 * half + 1, 2 * half + 1), im(2 * half + 1, 2 * half + 1);
        double norm = 0;
        for (int y = -half; y <= half; ++y)
            for (int x = -half; x <= half; ++x) {
                double xr = x * std::cos(theta) + y * std::sin(theta);
                double yr = -x * std::sin(theta) + y * std::cos(theta);
                double env = std::exp(-0.5 * (xr * xr / (bank.sigma_x * bank.sigma_x) + yr * yr / (bank.sigma_y * bank.sigma_y)));
                double ph = 2 * M_PI * bank.frequency * xr;
                re(y + half, x + half) = env * std::cos(ph);
                im(y + half, x + half) = env * std::sin(ph);
                norm += env * env;
            }
        norm = std::sqrt(norm);
        bank.real.push_back(re / norm);
        bank.imag.push_back(im / norm);
    }
    return bank;
}

double block_entropy(const cv::Mat1b& block) {
    int hist[256] = {0};
    for (int r = 0; r < block.rows; ++r)
        for (int c = 0; c < block.cols; ++c) ++hist[block(r, c)];
    const double n = static_cast<double>(block.total());
    double h = 0;
    for (int v : hist)
        if (v) {
            double p = v / n;
            h -= p * std::log2(p);
        }
    return h;
}

cv::Mat1b lbp_riu2(const cv::Mat1b& img) {
    static const int dr[8] = {-1, -1, -1, 0, 1, 1, 1, 0};
    static const int dc[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
    cv::Mat1b out(img.size());
    for (int r = 0; r < img.rows; ++r)
        for (int c = 0; c < img.cols; ++c) {
            int centre = img(r, c);
            int bits[8];
            for (int k = 0; k < 8; ++k) {
                int rr = std::clamp(r + dr[k], 0, img.rows - 1), cc = std::clamp(c + dc[k], 0, img.cols - 1);
                bits[k] = img(rr, cc) >= centre;
            }
            int transitions = 0, ones = 0;
            for (int k = 0; k < 8; ++k) {
                transitions += bits[k] != bits[(k + 1) % 8];
                ones += bits[k];
            }
            out(r, c) = static_cast<unsigned char>(transitions <= 2 ? ones : 9);
        }
    return out;
}

BlockFeatures block_features(const cv::Mat1b& img, const BlockGrid& grid, const GaborBank& bank) {
    if (img.rows != grid.rows * grid.side || img.cols != grid.cols * grid.side) throw InputError("grid does not match image");
    cv::Mat1b lbp = lbp_riu2(img);
    cv::Mat1d f;
    img.convertTo(f, CV_64F);
    cv::Mat1d gabor = cv::Mat1d::zeros(img.size());
    for (std::size_t o = 0; o < bank.real.size(); ++o) {
        cv::Mat1d re, im;
        cv::filter2D(f, re, CV_64F, bank.real[o], cv::Point(-1, -1), 0, cv::BORDER_REFLECT);
        cv::filter2D(f, im, CV_64F, bank.imag[o], cv::Point(-1, -1), 0, cv::BORDER_REFLECT);
        cv::Mat1d mag;
        cv::magnitude(re, im, mag);
        gabor += mag;
    }
    gabor /= static_cast<double>(bank.real.size());

    BlockFeatures out;
    out.raw = cv::Mat1d(grid.count(), 4);
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) {
            cv::Rect roi = grid.block(i, j);
            int row = i * grid.cols + j;
            cv::Scalar mean, sd;
            cv::meanStdDev(f(roi), mean, sd);
            out.raw(row, 0) = cv::mean(lbp(roi))[0];
            out.raw(row, 1) = block_entropy(img(roi));
            out.raw(row, 2) = sd[0];
            out.raw(row, 3) = cv::mean(gabor(roi))[0];
        }
    out.normalized = cv::Mat1d(out.raw.size());
    for (int c = 0; c < 4; ++c) {
        double lo, hi;
        cv::minMaxLoc(out.raw.col(c), &lo, &hi);
        // spreads at rounding level (e.g. Gabor response of a flat image) count as constant
        const bool flat = hi - lo <= 1e-9 * std::max(1.0, std::abs(hi));
        for (int r = 0; r < out.raw.rows; ++r) out.normalized(r, c) = flat ? 0.0 : (out.raw(r, c) - lo) / (hi - lo);
    }
    return out;
}

namespace {

double sqdist(const double* a, const double* b, int d) {
    double s = 0;
    for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

int distinct_rows(const cv::Mat1d& pts) {
    std::set<std::vector<double>> rows;
    for (int r = 0; r < pts.rows; ++r) rows.insert(std::vector<double>(pts[r], pts[r] + pts.cols));
    return static_cast<int>(rows.size());
}

} // namespace

Clustering kmeans(const cv::Mat1d& pts, int k, std::uint64_t seed, int max_iter, double tol) {
    const int n = pts.rows, d = pts.cols;
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (k > distinct_rows(pts)) throw std::invalid_argument("k exceeds the number of distinct points");
    Rng rng(seed);
    Clustering cl;
    cl.centroids = cv::Mat1d(k, d);
    // k-means++ seeding
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    int first = static_cast<int>(uniform_index(rng, n));
    pts.row(first).copyTo(cl.centroids.row(0));
    for (int q = 1; q < k; ++q) {
        double total = 0;
        for (int i = 0; i < n; ++i) {
            best[i] = std::min(best[i], sqdist(pts[i], cl.centroids[q - 1], d));
            total += best[i];
        }
        double target = uniform01(rng) * total, run = 0;
        int pick = -1;
        for (int i = 0; i < n; ++i) {
            if (best[i] <= 0) continue;
            run += best[i];
            pick = i;
            if (run >= target) break;
        }
        pts.row(pick).copyTo(cl.centroids.row(q));
    }
    cl.labels.assign(n, 1);
    for (cl.iterations = 1; cl.iterations <= max_iter; ++cl.iterations) {
        for (int i = 0; i < n; ++i) {
            int arg = 0;
            double bd = sqdist(pts[i], cl.centroids[0], d);
            for (int q = 1; q < k; ++q) {
                double v = sqdist(pts[i], cl.centroids[q], d);
                if (v < bd) bd = v, arg = q;
            }
            cl.labels[i] = arg + 1;
        }
        cv::Mat1d sums = cv::Mat1d::zeros(k, d);
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            int q = cl.labels[i] - 1;
            ++counts[q];
            for (int j = 0; j < d; ++j) sums(q, j) += pts(i, j);
        }
        double shift = 0;
        for (int q = 0; q < k; ++q) {
            if (!counts[q]) continue; // empty cluster keeps its centroid
            double s = 0;
            for (int j = 0; j < d; ++j) {
                double v = sums(q, j) / counts[q];
                s += (v - cl.centroids(q, j)) * (v - cl.centroids(q, j));
                cl.centroids(q, j) = v;
            }
            shift = std::max(shift, std::sqrt(s));
        }
        if (shift < tol) break;
    }
    cl.iterations = std::min(cl.iterations, max_iter);
    return cl;
}

double calinski_harabasz(const cv::Mat1d& pts, const std::vector<int>& labels, int k) {
    const int n = pts.rows, d = pts.cols;
    if (k < 2 || n <= k) throw std::invalid_argument("Calinski-Harabasz needs 2 <= k < n");
    std::vector<double> mean(d, 0);
    cv::Mat1d cent = cv::Mat1d::zeros(k, d);
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
        int q = labels[i] - 1;
        ++counts[q];
        for (int j = 0; j < d; ++j) {
            mean[j] += pts(i, j) / n;
            cent(q, j) += pts(i, j);
        }
    }
    for (int q = 0; q < k; ++q)
        for (int j = 0; j < d; ++j) cent(q, j) = counts[q] ? cent(q, j) / counts[q] : 0;
    double between = 0, within = 0;
    for (int q = 0; q < k; ++q) between += counts[q] * sqdist(cent[q], mean.data(), d);
    for (int i = 0; i < n; ++i) within += sqdist(pts[i], cent[labels[i] - 1], d);
    if (within <= 0) return between > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    return (between / (k - 1)) / (within / (n - k));
}

int select_k(const cv::Mat1d& pts, int tau, std::uint64_t seed) {
    if (tau < 2) throw std::invalid_argument("tau must be >= 2");
    if (pts.rows <= tau) throw std::invalid_argument("need more points than tau");
    const int distinct = distinct_rows(pts);
    int best_k = 2;
    double best = -1;
    for (int k = 2; k <= std::min(tau, distinct); ++k) {
        Clustering cl = kmeans(pts, k, seed);
        double ch = calinski_harabasz(pts, cl.labels, k);
        if (ch > best) best = ch, best_k = k;
    }
    return best_k;
}

double xi_from_entropy(double mean_entropy) { return 0.6 + 0.05 * std::clamp(mean_entropy, 0.0, 8.0); }

TextureMap texture_coefficients(const cv::Mat1b& img, const BlockGrid& grid, const std::vector<int>& labels, int k) {
    if (static_cast<int>(labels.size()) != grid.count()) throw std::invalid_argument("labels must cover every block");
    TextureMap tm;
    tm.grid = grid;
    tm.labels = labels;
    tm.k = k;
    tm.entropy = cv::Mat1d(grid.rows, grid.cols);
    tm.xi = cv::Mat1d(grid.rows, grid.cols);
    std::vector<double> sum(k, 0);
    std::vector<int> count(k, 0);
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) {
            double h = block_entropy(img(grid.block(i, j)));
            tm.entropy(i, j) = h;
            int q = labels[i * grid.cols + j] - 1;
            if (q < 0 || q >= k) throw std::invalid_argument("label out of range");
            sum[q] += h;
            ++count[q];
        }
    tm.cluster_entropy.resize(k);
    for (int q = 0; q < k; ++q) {
        if (!count[q]) throw std::logic_error("empty cluster");
        tm.cluster_entropy[q] = sum[q] / count[q];
    }
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) tm.xi(i, j) = xi_from_entropy(tm.cluster_entropy[labels[i * grid.cols + j] - 1]);
    return tm;
}

TextureMap analyze_texture(const cv::Mat1b& img, int side, std::uint64_t seed, int tau) {
    BlockGrid grid = partition(img.rows, img.cols, side);
    BlockFeatures feats = block_features(img, grid);
    if (distinct_rows(feats.normalized) < 2 || grid.count() <= tau)
        return texture_coefficients(img, grid, std::vector<int>(grid.count(), 1), 1);
    int k = select_k(feats.normalized, tau, seed);
    Clustering cl = kmeans(feats.normalized, k, seed);
    // kmeans may leave a cluster empty; compact the label set
    std::vector<int> remap(k + 1, 0);
    int used = 0;
    for (int l : cl.labels)
        if (!remap[l]) remap[l] = ++used;
    for (int& l : cl.labels) l = remap[l];
    return texture_coefficients(img, grid, cl.labels, used);
}

} // namespace wsmn
