#include "wsmn/embed.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace wsmn {

using cplx = std::complex<double>;

std::string to_string(Mode m) {
    switch (m) {
    case Mode::Copyright: return "copyright";
    case Mode::Auth: return "auth";
    case Mode::Dual: return "dual";
    }
    return "dual";
}

Mode parse_mode(const std::string& s) {
    if (s == "copyright") return Mode::Copyright;
    if (s == "auth") return Mode::Auth;
    if (s == "dual") return Mode::Dual;
    throw InputError("unknown mode: " + s);
}

void ThresholdPair::validate() const {
    if (!(delta_prime >= 30 && delta_prime <= 50)) throw InputError("delta_prime must lie in [30, 50]");
    if (!(delta_dprime >= 0 && delta_dprime <= 2)) throw InputError("delta_dprime must lie in [0, 2]");
}

namespace {

// Carrier pattern on the 8x8 spatial block: DCT basis k of the LL block,
// replicated over each 2x2 Haar cell, divided by 4 (LL is the 2x2 mean).
cv::Mat1d carrier_pattern(int block, std::pair<int, int> k) {
    const int h = block / 2;
    cv::Mat1d C = dct_matrix(h);
    cv::Mat1d p(block, block);
    for (int r = 0; r < block; ++r)
        for (int c = 0; c < block; ++c) p(r, c) = C(k.first, r / 2) * C(k.second, c / 2) / 4;
    return p;
}

cv::Mat pattern_spectrum(int rows, int cols, const cv::Mat1d& pattern) {
    cv::Mat1d canvas = cv::Mat1d::zeros(rows, cols);
    pattern.copyTo(canvas(cv::Rect(0, 0, pattern.cols, pattern.rows)));
    cv::Mat f;
    cv::dft(canvas, f, cv::DFT_COMPLEX_OUTPUT);
    return f;
}

cplx at(const cv::Mat& spec, int r, int c) {
    auto v = spec.at<cv::Vec2d>(r, c);
    return {v[0], v[1]};
}

double functional_energy(const cv::Mat& spec, const cv::Mat1d& window) {
    double s = 0;
    for (int r = 0; r < spec.rows; ++r)
        for (int c = 0; c < spec.cols; ++c) s += std::norm(at(spec, r, c)) * window(r, c) * window(r, c);
    return s / (static_cast<double>(spec.rows) * spec.cols);
}

std::pair<int, int> ac_position(int block) { return zigzag_index(block / 2, 2); }

// Hermitian positive definite solve (Cholesky), in place on b.
void hpd_solve(std::vector<cplx>& A, std::vector<cplx>& b, int n) {
    for (int j = 0; j < n; ++j) {
        double d = A[j * n + j].real();
        for (int k = 0; k < j; ++k) d -= std::norm(A[j * n + k]);
        d = std::sqrt(std::max(d, 1e-300));
        A[j * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            cplx s = A[i * n + j];
            for (int k = 0; k < j; ++k) s -= A[i * n + k] * std::conj(A[j * n + k]);
            A[i * n + j] = s / d;
        }
    }
    for (int i = 0; i < n; ++i) {
        cplx s = b[i];
        for (int k = 0; k < i; ++k) s -= A[i * n + k] * b[k];
        b[i] = s / A[i * n + i].real();
    }
    for (int i = n - 1; i >= 0; --i) {
        cplx s = b[i];
        for (int k = i + 1; k < n; ++k) s -= std::conj(A[k * n + i]) * b[k];
        b[i] = s / A[i * n + i].real();
    }
}

} // namespace

std::array<double, kBands> carrier_gains(int rows, int cols, const ShearletOptions& base, double scale) {
    ShearletOptions unit = base;
    unit.gains.fill(1.0);
    ShearletSystem sys(rows, cols, unit);
    const int block = 8;
    cv::Mat ac = pattern_spectrum(rows, cols, carrier_pattern(block, ac_position(block)));
    cv::Mat dc = pattern_spectrum(rows, cols, carrier_pattern(block, {0, 0}));
    std::array<double, kBands> g{};
    g[0] = 1.0;
    const double ref = functional_energy(ac, sys.window(0));
    for (int b = 1; b < kBands; ++b) g[b] = scale * std::sqrt(ref / functional_energy(dc, sys.window(b)));
    return g;
}

EmbeddingSystem::EmbeddingSystem(int rows, int cols, const EmbedParams& params) : params_(params) {
    if (params.block != 8) throw InputError("block side must be 8");
    grid_ = partition(rows, cols, params.block);
    ShearletOptions opt;
    opt.lowpass_inner = params.lowpass_inner;
    opt.lowpass_outer = params.lowpass_outer;
    opt.gains = carrier_gains(rows, cols, opt, params.detail_scale);
    shearlet_ = std::make_unique<ShearletSystem>(rows, cols, opt);

    pattern_spec_[0] = pattern_spectrum(rows, cols, carrier_pattern(params.block, ac_position(params.block)));
    pattern_spec_[1] = pattern_spectrum(rows, cols, carrier_pattern(params.block, {0, 0}));

    // G(nu)[c', c] = g_c g_c' / B^2 * sum over aliases of conj(P_c') W_c' W_c P_c
    const int nr = grid_.rows, nc = grid_.cols, B = params.block;
    gram_.assign(static_cast<std::size_t>(nr) * nc * kChannels * kChannels, cplx{});
    std::array<cplx, kChannels> v;
    for (int vr = 0; vr < nr; ++vr)
        for (int vc = 0; vc < nc; ++vc) {
            cplx* G = &gram_[(static_cast<std::size_t>(vr) * nc + vc) * kChannels * kChannels];
            for (int kr = 0; kr < B; ++kr)
                for (int kc = 0; kc < B; ++kc) {
                    int r = vr + kr * nr, c = vc + kc * nc;
                    for (int ch = 0; ch < kChannels; ++ch)
                        v[ch] = at(pattern_spec_[ch == 0 ? 0 : 1], r, c) * (shearlet_->window(ch)(r, c) * shearlet_->gain(ch));
                    for (int a = 0; a < kChannels; ++a)
                        for (int b = 0; b < kChannels; ++b) G[a * kChannels + b] += std::conj(v[a]) * v[b];
                }
            for (int i = 0; i < kChannels * kChannels; ++i) G[i] /= static_cast<double>(B * B);
        }
    for (int ch = 0; ch < kChannels; ++ch) {
        double s = 0;
        for (int i = 0; i < nr * nc; ++i) s += gram_[static_cast<std::size_t>(i) * kChannels * kChannels + ch * kChannels + ch].real();
        diag_mean_[ch] = s / (nr * nc);
    }
}

ChannelPlanes EmbeddingSystem::compensate(const ChannelPlanes& delta, const std::array<bool, kChannels>& active) const {
    const int nr = grid_.rows, nc = grid_.cols;
    std::vector<int> idx;
    for (int c = 0; c < kChannels; ++c)
        if (active[c]) idx.push_back(c);
    const int n = static_cast<int>(idx.size());
    ChannelPlanes out;
    for (auto& p : out) p = cv::Mat1d::zeros(nr, nc);
    if (!n) return out;

    std::vector<cv::Mat> spec(n);
    for (int i = 0; i < n; ++i) cv::dft(delta[idx[i]], spec[i], cv::DFT_COMPLEX_OUTPUT);
    std::vector<cplx> A(n * n), b(n);
    const double lam = params_.regularization;
    for (int vr = 0; vr < nr; ++vr)
        for (int vc = 0; vc < nc; ++vc) {
            const cplx* G = &gram_[(static_cast<std::size_t>(vr) * nc + vc) * kChannels * kChannels];
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) A[i * n + j] = G[idx[i] * kChannels + idx[j]];
                A[i * n + i] += lam * diag_mean_[idx[i]];
                b[i] = at(spec[i], vr, vc);
            }
            hpd_solve(A, b, n);
            for (int i = 0; i < n; ++i) spec[i].at<cv::Vec2d>(vr, vc) = {b[i].real(), b[i].imag()};
        }
    for (int i = 0; i < n; ++i) {
        cv::Mat z;
        cv::dft(spec[i], z, cv::DFT_INVERSE | cv::DFT_SCALE | cv::DFT_COMPLEX_OUTPUT);
        const double g = shearlet_->gain(idx[i]);
        // the inverse chain scales a coefficient edit e by 4/g relative to the adjoint
        cv::Mat1d& o = out[idx[i]];
        for (int r = 0; r < nr; ++r)
            for (int c = 0; c < nc; ++c) o(r, c) = z.at<cv::Vec2d>(r, c)[0] * g * g / 4;
    }
    return out;
}

ChannelPlanes EmbeddingSystem::carriers(const cv::Mat1d& plane) const {
    ShearletPyramid pyr = shearlet_->forward(plane);
    cv::Mat1d pac = carrier_pattern(params_.block, ac_position(params_.block));
    cv::Mat1d pdc = carrier_pattern(params_.block, {0, 0});
    ChannelPlanes out;
    for (int ch = 0; ch < kChannels; ++ch) {
        const cv::Mat1d& band = ch == 0 ? pyr.approx : pyr.details[ch - 1];
        const cv::Mat1d& p = ch == 0 ? pac : pdc;
        out[ch] = cv::Mat1d(grid_.rows, grid_.cols);
        for (int i = 0; i < grid_.rows; ++i)
            for (int j = 0; j < grid_.cols; ++j) out[ch](i, j) = band(grid_.block(i, j)).dot(p);
    }
    return out;
}

std::shared_ptr<const EmbeddingSystem> embedding_system(int rows, int cols, const EmbedParams& p) {
    using Key = std::tuple<int, int, int, double, double, double, double>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const EmbeddingSystem>> cache;
    Key key{rows, cols, p.block, p.lowpass_inner, p.lowpass_outer, p.detail_scale, p.regularization};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto sys = std::make_shared<const EmbeddingSystem>(rows, cols, p);
    cache.emplace(key, sys);
    return sys;
}

// ---- carrier state ----

cv::Mat1d CarrierState::ac_carriers() const {
    const int h = grid.side / 2;
    auto [kr, kc] = zigzag_index(h, 2);
    cv::Mat1d v(grid.rows, grid.cols);
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) v(i, j) = phi_a(i * h + kr, j * h + kc);
    return v;
}

cv::Mat1d CarrierState::dc_carriers(int slot) const {
    const int h = grid.side / 2;
    cv::Mat1d v(grid.rows, grid.cols);
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) v(i, j) = phi_d[slot](i * h, j * h);
    return v;
}

void CarrierState::set_ac_carriers(const cv::Mat1d& v) {
    const int h = grid.side / 2;
    auto [kr, kc] = zigzag_index(h, 2);
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) phi_a(i * h + kr, j * h + kc) = v(i, j);
}

void CarrierState::set_dc_carriers(int slot, const cv::Mat1d& v) {
    const int h = grid.side / 2;
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) phi_d[slot](i * h, j * h) = v(i, j);
}

ChannelPlanes CarrierState::channel_carriers() const {
    ChannelPlanes out;
    out[0] = ac_carriers();
    for (int d = 0; d < kDirections; ++d) out[1 + d] = cv::Mat1d(grid.rows, grid.cols);
    for (int s = 0; s < kDirections; ++s) {
        cv::Mat1d v = dc_carriers(s);
        for (int i = 0; i < grid.rows; ++i)
            for (int j = 0; j < grid.cols; ++j) out[1 + kappa[i * grid.cols + j][s]](i, j) = v(i, j);
    }
    return out;
}

namespace {

void swap_blocks(ShearletPyramid& pyr, const BlockGrid& grid, const std::vector<std::array<std::uint8_t, kDirections>>& kappa,
                 bool to_slots) {
    std::array<cv::Mat1d, kDirections> out;
    for (auto& o : out) o = cv::Mat1d(pyr.details[0].size());
    for (int i = 0; i < grid.rows; ++i)
        for (int j = 0; j < grid.cols; ++j) {
            cv::Rect roi = grid.block(i, j);
            const auto& k = kappa[i * grid.cols + j];
            for (int s = 0; s < kDirections; ++s) {
                if (to_slots)
                    pyr.details[k[s]](roi).copyTo(out[s](roi));
                else
                    pyr.details[s](roi).copyTo(out[k[s]](roi));
            }
        }
    pyr.details = out;
}

} // namespace

CarrierState preprocess(const EmbeddingSystem& sys, const cv::Mat1d& plane) {
    CarrierState st;
    st.grid = sys.grid();
    if (plane.rows != st.grid.rows * st.grid.side || plane.cols != st.grid.cols * st.grid.side)
        throw InputError("plane size does not match the embedding system");
    st.pyramid = sys.shearlet().forward(plane);
    const int nb = st.grid.count();
    st.kappa.resize(nb);
    st.block_std = cv::Mat1d(nb, kDirections);
    for (int i = 0; i < st.grid.rows; ++i)
        for (int j = 0; j < st.grid.cols; ++j) {
            cv::Rect roi = st.grid.block(i, j);
            std::array<double, kDirections> sd;
            for (int d = 0; d < kDirections; ++d) {
                cv::Scalar m, s;
                cv::meanStdDev(st.pyramid.details[d](roi), m, s);
                sd[d] = s[0];
            }
            auto& k = st.kappa[i * st.grid.cols + j];
            std::iota(k.begin(), k.end(), 0);
            std::stable_sort(k.begin(), k.end(), [&](int a, int b) { return sd[a] > sd[b]; });
            for (int s = 0; s < kDirections; ++s) st.block_std(i * st.grid.cols + j, s) = sd[k[s]];
        }
    swap_blocks(st.pyramid, st.grid, st.kappa, true);
    const int h = st.grid.side / 2;
    st.approx_quad = lwt_forward(st.pyramid.approx);
    st.phi_a = dct_block(st.approx_quad.ll, h);
    for (int s = 0; s < kDirections; ++s) {
        st.slot_quads[s] = lwt_forward(st.pyramid.details[s]);
        st.phi_d[s] = dct_block(st.slot_quads[s].ll, h);
        cv::Scalar m, sd;
        cv::meanStdDev(st.dc_carriers(s), m, sd);
        st.mu[s] = m[0];
        st.sigma[s] = sd[0];
    }
    return st;
}

cv::Mat1d postprocess(const EmbeddingSystem& sys, const CarrierState& st) {
    const int h = st.grid.side / 2;
    if (static_cast<int>(st.kappa.size()) != st.grid.count()) throw std::invalid_argument("inconsistent shear ordering record");
    for (const auto& k : st.kappa) {
        std::array<bool, kDirections> seen{};
        for (auto d : k) {
            if (d >= kDirections || seen[d]) throw std::invalid_argument("inconsistent shear ordering record");
            seen[d] = true;
        }
    }
    ShearletPyramid pyr;
    WaveletQuad q = st.approx_quad;
    q.ll = idct_block(st.phi_a, h);
    pyr.approx = lwt_inverse(q);
    for (int s = 0; s < kDirections; ++s) {
        WaveletQuad qs = st.slot_quads[s];
        qs.ll = idct_block(st.phi_d[s], h);
        pyr.details[s] = lwt_inverse(qs);
    }
    swap_blocks(pyr, st.grid, st.kappa, false);
    return sys.shearlet().inverse(pyr);
}

// ---- embedding rules ----

double round_half_away(double v) { return std::round(v); }

double quantize_target(double coeff, int bit, double dp) {
    if (!(dp > 0)) throw std::invalid_argument("quantisation step must be positive");
    if (bit) return dp * round_half_away(coeff / dp - 0.5) + dp / 2;
    return dp * round_half_away(coeff / dp);
}

int dequantize_bit(double coeff, double dp) {
    if (!(dp > 0)) throw std::invalid_argument("quantisation step must be positive");
    long long k = static_cast<long long>(round_half_away(2 * coeff / dp));
    return static_cast<int>(((k % 2) + 2) % 2);
}

double compensate_toward(double coeff, double target, double xi) { return coeff + xi * (target - coeff); }

cv::Mat1d embed_copyright(const cv::Mat1d& phi, const cv::Mat1b& wc, const cv::Mat1d& xi, double dp) {
    if (phi.size() != wc.size() || phi.size() != xi.size()) throw InputError("copyright mark shape mismatch");
    cv::Mat1d out(phi.size());
    for (int i = 0; i < phi.rows; ++i)
        for (int j = 0; j < phi.cols; ++j)
            out(i, j) = compensate_toward(phi(i, j), quantize_target(phi(i, j), wc(i, j), dp), xi(i, j));
    return out;
}

AuthTerms auth_rule(double phi, double mu, double sigma, int bit, double xi, double ddp, double eps) {
    AuthTerms t{};
    const double den = std::max(std::abs(mu - sigma), eps);
    const double sg = bit ? 1.0 : -1.0;
    t.rho = std::exp(1.0 / den);
    t.threshold = sigma * t.rho;
    t.eta = std::abs(mu + sg * t.threshold - phi);
    t.theta = std::exp2(ddp) * std::exp(xi) / den;
    if (bit && phi < mu + t.threshold)
        t.value = phi + (t.eta + t.theta);
    else if (!bit && phi > mu - t.threshold)
        t.value = phi - (t.eta + t.theta);
    else
        t.value = phi;
    return t;
}

cv::Mat1d embed_auth(const cv::Mat1d& phi, double mu, double sigma, const cv::Mat1b& wa, const cv::Mat1d& xi, double ddp,
                     double eps) {
    if (phi.size() != wa.size() || phi.size() != xi.size()) throw InputError("authentication mark shape mismatch");
    cv::Mat1d out(phi.size());
    for (int i = 0; i < phi.rows; ++i)
        for (int j = 0; j < phi.cols; ++j) out(i, j) = auth_rule(phi(i, j), mu, sigma, wa(i, j), xi(i, j), ddp, eps).value;
    return out;
}

EmbedResult embed_all(const Image& img, const MarkSet& marks, const TextureMap& texture, const ThresholdPair& t, Mode mode,
                      const EmbedParams& params) {
    t.validate();
    EmbedResult res;
    res.cover_luma = luma_plane(img);
    auto sys = embedding_system(img.height(), img.width(), params);
    const BlockGrid& grid = sys->grid();
    if (texture.xi.rows != grid.rows || texture.xi.cols != grid.cols) throw InputError("texture map does not match the image");
    const bool cr = has_copyright(mode), au = has_auth(mode);
    if (cr && (marks.wc.rows != grid.rows || marks.wc.cols != grid.cols)) throw InputError("copyright mark does not match the image");
    if (au && (marks.wa.rows != grid.rows || marks.wa.cols != grid.cols)) throw InputError("authentication mark does not match the image");

    CarrierState st = preprocess(*sys, res.cover_luma);
    ChannelPlanes cur = st.channel_carriers();
    ChannelPlanes target;
    for (int c = 0; c < kChannels; ++c) target[c] = cur[c].clone();
    std::array<bool, kChannels> active{};
    // per direction: the slot statistics it was judged against
    std::array<cv::Mat1d, kDirections> dir_mu, dir_thr;
    if (cr) {
        target[0] = embed_copyright(cur[0], marks.wc, texture.xi, t.delta_prime);
        active[0] = true;
    }
    if (au) {
        for (int d = 0; d < kDirections; ++d) {
            dir_mu[d] = cv::Mat1d(grid.rows, grid.cols);
            dir_thr[d] = cv::Mat1d(grid.rows, grid.cols);
            active[1 + d] = true;
        }
        for (int s = 0; s < kDirections; ++s) {
            cv::Mat1d v = embed_auth(st.dc_carriers(s), st.mu[s], st.sigma[s], marks.wa, texture.xi, t.delta_dprime, params.epsilon);
            const double thr = auth_rule(0, st.mu[s], st.sigma[s], 1, 0.6, t.delta_dprime, params.epsilon).threshold;
            for (int i = 0; i < grid.rows; ++i)
                for (int j = 0; j < grid.cols; ++j) {
                    int d = st.kappa[i * grid.cols + j][s];
                    target[1 + d](i, j) = v(i, j);
                    dir_mu[d](i, j) = st.mu[s];
                    dir_thr[d](i, j) = thr > 0 ? thr : 1.0;
                }
        }
    }

    cv::Mat1d plane = res.cover_luma.clone();
    for (int pass = 0; pass < std::max(params.passes, params.max_passes); ++pass) {
        if (pass > 0) {
            st = preprocess(*sys, plane);
            cur = st.channel_carriers();
        }
        ChannelPlanes delta;
        double biggest = 0;
        for (int c = 0; c < kChannels; ++c) {
            delta[c] = active[c] ? cv::Mat1d(target[c] - cur[c]) : cv::Mat1d::zeros(grid.rows, grid.cols);
        }
        if (pass >= params.passes) {
            // extra passes only repair copyright carriers that clipping left
            // outside (or too close to the edge of) their decision cell
            if (!cr) break;
            int bad = 0;
            for (int i = 0; i < grid.rows; ++i)
                for (int j = 0; j < grid.cols; ++j) {
                    double near = quantize_target(cur[0](i, j), marks.wc(i, j), t.delta_prime);
                    if (std::abs(cur[0](i, j) - near) > t.delta_prime / 4 - params.copyright_guard)
                        ++bad;
                    else
                        delta[0](i, j) = 0;
                }
            if (!bad) break;
        }
        if (pass > 0 && au) {
            for (int i = 0; i < grid.rows; ++i)
                for (int j = 0; j < grid.cols; ++j) {
                    const double sg = marks.wa(i, j) ? 1.0 : -1.0;
                    double margin = 0;
                    for (int d = 0; d < kDirections; ++d) margin += (cur[1 + d](i, j) - dir_mu[d](i, j)) * sg / dir_thr[d](i, j);
                    margin /= kDirections;
                    if (margin >= params.refine_margin) {
                        for (int d = 0; d < kDirections; ++d) delta[1 + d](i, j) = 0;
                    } else if (pass == 1) {
                        ++res.refined_blocks;
                    }
                }
        }
        for (int c = 0; c < kChannels; ++c)
            if (active[c]) biggest = std::max(biggest, cv::norm(delta[c], cv::NORM_INF));
        if (biggest < 1e-9) break;
        ChannelPlanes edit = sys->compensate(delta, active);
        if (active[0]) st.set_ac_carriers(st.ac_carriers() + edit[0]);
        if (au)
            for (int s = 0; s < kDirections; ++s) {
                cv::Mat1d v = st.dc_carriers(s);
                for (int i = 0; i < grid.rows; ++i)
                    for (int j = 0; j < grid.cols; ++j) v(i, j) += edit[1 + st.kappa[i * grid.cols + j][s]](i, j);
                st.set_dc_carriers(s, v);
            }
        plane = postprocess(*sys, st);
        cv::min(cv::max(plane, 0.0), 255.0, plane);
    }
    res.marked_luma = cv::Mat1d(to_u8(plane));
    res.image = with_luma(img, plane);
    return res;
}

} // namespace wsmn
