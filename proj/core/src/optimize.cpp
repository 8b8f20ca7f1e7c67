#include "wsmn/optimize.hpp"
#include "wsmn/metrics.hpp"
#include "wsmn/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wsmn {

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("objective dimension mismatch");
    bool strict = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strict = true;
    }
    return strict;
}

std::vector<std::vector<int>> fast_nondominated_sort(const std::vector<Individual>& pop) {
    const int n = static_cast<int>(pop.size());
    std::vector<std::vector<int>> dominated(n);
    std::vector<int> count(n, 0);
    std::vector<std::vector<int>> fronts(1);
    for (int p = 0; p < n; ++p) {
        for (int q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(pop[p], pop[q]))
                dominated[p].push_back(q);
            else if (dominates(pop[q], pop[p]))
                ++count[p];
        }
        if (count[p] == 0) fronts[0].push_back(p);
    }
    for (std::size_t i = 0; !fronts[i].empty(); ++i) {
        std::vector<int> next;
        for (int p : fronts[i])
            for (int q : dominated[p])
                if (--count[q] == 0) next.push_back(q);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();
    return fronts;
}

std::vector<double> crowding_distance(const std::vector<Individual>& pop, const std::vector<int>& front) {
    const int n = static_cast<int>(front.size());
    std::vector<double> d(n, 0.0);
    if (n == 0) return d;
    const double inf = std::numeric_limits<double>::infinity();
    if (n <= 2) return std::vector<double>(n, inf);
    const std::size_t m = pop[front[0]].f.size();
    std::vector<int> order(n);
    for (std::size_t k = 0; k < m; ++k) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return pop[front[a]].f[k] < pop[front[b]].f[k]; });
        const double lo = pop[front[order.front()]].f[k], hi = pop[front[order.back()]].f[k];
        d[order.front()] = d[order.back()] = inf;
        if (hi - lo <= 0) continue;
        for (int i = 1; i + 1 < n; ++i)
            d[order[i]] += (pop[front[order[i + 1]]].f[k] - pop[front[order[i - 1]]].f[k]) / (hi - lo);
    }
    return d;
}

void OptimizerConfig::validate() const {
    if (population < 2 || population % 2) throw InputError("population must be an even number >= 2");
    if (generations < 1) throw InputError("generations must be >= 1");
    if (!(crossover_rate >= 0 && crossover_rate <= 1) || !(mutation_rate >= 0 && mutation_rate <= 1))
        throw InputError("operator rates must lie in [0, 1]");
    if (tournament < 1) throw InputError("tournament size must be >= 1");
    if (lower.size() != upper.size() || lower.empty()) throw InputError("bounds must have equal, nonzero length");
    for (std::size_t i = 0; i < lower.size(); ++i)
        if (!(lower[i] <= upper[i])) throw InputError("lower bound exceeds upper bound");
}

namespace {

void assign_ranks(std::vector<Individual>& pop, const std::vector<std::vector<int>>& fronts) {
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        auto d = crowding_distance(pop, fronts[r]);
        for (std::size_t i = 0; i < fronts[r].size(); ++i) {
            pop[fronts[r][i]].rank = static_cast<int>(r);
            pop[fronts[r][i]].crowding = d[i];
        }
    }
}

bool crowded_better(const Individual& a, const Individual& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    return a.crowding > b.crowding;
}

const Individual& tournament(const std::vector<Individual>& pop, int size, Rng& rng) {
    const Individual* best = &pop[uniform_index(rng, pop.size())];
    for (int i = 1; i < size; ++i) {
        const Individual& c = pop[uniform_index(rng, pop.size())];
        if (crowded_better(c, *best)) best = &c;
    }
    return *best;
}

std::vector<Individual> first_front(const std::vector<Individual>& pop) {
    std::vector<Individual> out;
    for (const auto& i : pop)
        if (i.rank == 0) out.push_back(i);
    return out;
}

} // namespace

Nsga2Result nsga2(const Objective& objective, const OptimizerConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    const std::size_t dim = cfg.lower.size();
    Nsga2Result res;
    auto evaluate = [&](Individual& ind) {
        ind.f = objective(ind.x);
        res.archive.push_back(ind);
    };

    std::vector<Individual> pop(cfg.population);
    for (auto& ind : pop) {
        ind.x.resize(dim);
        for (std::size_t k = 0; k < dim; ++k) ind.x[k] = uniform(rng, cfg.lower[k], cfg.upper[k]);
        evaluate(ind);
    }
    assign_ranks(pop, fast_nondominated_sort(pop));

    for (int gen = 1; gen <= cfg.generations; ++gen) {
        std::vector<Individual> offspring;
        while (static_cast<int>(offspring.size()) < cfg.population) {
            Individual a = tournament(pop, cfg.tournament, rng), b = tournament(pop, cfg.tournament, rng);
            Individual c1, c2;
            c1.x = a.x, c2.x = b.x;
            if (uniform01(rng) < cfg.crossover_rate) {
                const double lam = uniform01(rng);
                for (std::size_t k = 0; k < dim; ++k) {
                    c1.x[k] = lam * a.x[k] + (1 - lam) * b.x[k];
                    c2.x[k] = (1 - lam) * a.x[k] + lam * b.x[k];
                }
            }
            for (Individual* c : {&c1, &c2})
                for (std::size_t k = 0; k < dim; ++k) {
                    if (uniform01(rng) < cfg.mutation_rate) c->x[k] = uniform(rng, cfg.lower[k], cfg.upper[k]);
                    c->x[k] = std::clamp(c->x[k], cfg.lower[k], cfg.upper[k]);
                }
            offspring.push_back(std::move(c1));
            if (static_cast<int>(offspring.size()) < cfg.population) offspring.push_back(std::move(c2));
        }
        for (auto& c : offspring) evaluate(c);

        std::vector<Individual> merged = pop;
        merged.insert(merged.end(), offspring.begin(), offspring.end());
        auto fronts = fast_nondominated_sort(merged);
        assign_ranks(merged, fronts);
        std::vector<Individual> next;
        for (const auto& front : fronts) {
            if (next.size() + front.size() <= static_cast<std::size_t>(cfg.population)) {
                for (int i : front) next.push_back(merged[i]);
                continue;
            }
            std::vector<int> order = front;
            std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return merged[x].crowding > merged[y].crowding; });
            for (int i : order) {
                if (static_cast<int>(next.size()) == cfg.population) break;
                next.push_back(merged[i]);
            }
            break;
        }
        // ranks and crowding are recomputed on the survivors for the next tournament
        pop = std::move(next);
        assign_ranks(pop, fast_nondominated_sort(pop));
        res.trace.push_back({gen, first_front(pop)});
    }
    res.population = pop;
    // Truncating an overfull first front can drop non-dominated points that
    // later offspring would be dominated by, so the run reports the archive's front.
    res.front = pareto_set(res.archive);
    return res;
}

std::vector<Individual> pareto_set(const std::vector<Individual>& pool) {
    std::vector<Individual> out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        bool keep = true;
        for (std::size_t j = 0; j < pool.size() && keep; ++j)
            if (dominates(pool[j], pool[i]) || (j < i && pool[j].f == pool[i].f)) keep = false;
        if (keep) out.push_back(pool[i]);
    }
    std::vector<int> all(out.size());
    std::iota(all.begin(), all.end(), 0);
    auto d = crowding_distance(out, all);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].rank = 0;
        out[i].crowding = d[i];
    }
    return out;
}

bool archive_nondominated(const std::vector<Individual>& front, const std::vector<Individual>& archive) {
    for (const auto& m : front)
        for (const auto& a : archive)
            if (dominates(a, m)) return false;
    return true;
}

OperatingPoint select_operating_point(const std::vector<Individual>& front, double cap) {
    if (front.empty()) throw std::invalid_argument("empty front");
    auto robust = [](const Individual& i) {
        if (i.f.size() < 2) throw std::invalid_argument("need at least two robustness objectives");
        return (i.f[0] + i.f[1]) / 2;
    };
    OperatingPoint op;
    const Individual* best = nullptr;
    for (const auto& i : front)
        if (robust(i) <= cap && (!best || robust(i) > robust(*best))) best = &i;
    if (!best) {
        op.feasible = false;
        for (const auto& i : front)
            if (!best || robust(i) < robust(*best)) best = &i;
    }
    op.chosen = *best;
    auto q = quantize_decision(best->x);
    op.thresholds.delta_prime = q.at(0);
    op.thresholds.delta_dprime = q.at(1);
    return op;
}

std::vector<double> quantize_decision(const std::vector<double>& x, int decimals) {
    const double s = std::pow(10.0, decimals);
    std::vector<double> q(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) q[i] = std::round(x[i] * s) / s;
    return q;
}

WatermarkObjective::WatermarkObjective(Image cover, MarkSet marks, TextureMap texture, EmbedParams params, TrainOptions train)
    : cover_(std::move(cover)), marks_(std::move(marks)), texture_(std::move(texture)), params_(params), train_(train),
      attacks_(optimization_attack_set()) {}

std::vector<double> WatermarkObjective::operator()(const std::vector<double>& x) {
    if (x.size() != 2) throw std::invalid_argument("decision vector must be (delta_prime, delta_dprime)");
    auto q = quantize_decision(x);
    const std::pair<long, long> key{std::lround(q[0] * 100), std::lround(q[1] * 100)};
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    ThresholdPair t{q[0], q[1]};
    auto sys = embedding_system(cover_.height(), cover_.width(), params_);
    EmbedResult er = embed_all(cover_, marks_, texture_, t, Mode::Dual, params_);
    const auto labels = mark_labels(marks_.wa);
    TrainResult pre = train_extractor(auth_features(*sys, luma_plane(er.image)), labels, train_);
    double f1 = 0, f2 = 0;
    for (const auto& a : attacks_) {
        Image att = apply_attack(er.image, a);
        cv::Mat1d y = luma_plane(att);
        f1 += ber(extract_copyright(*sys, y, KeySet{}, t.delta_prime).tiled, marks_.wc);
        cv::Mat1d feats = auth_features(*sys, y);
        TrainResult tuned = fine_tune(pre.model, feats, labels, 100, train_);
        f2 += ber(extract_auth(tuned.model, feats, marks_.wa.rows, marks_.wa.cols), marks_.wa);
    }
    std::vector<double> f{f1 / attacks_.size(), f2 / attacks_.size(), mse(cover_.pixels, er.image.pixels)};
    std::lock_guard<std::mutex> lock(mu_);
    cache_.emplace(key, f);
    return f;
}

} // namespace wsmn
