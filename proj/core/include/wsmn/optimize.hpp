#pragma once

#include "wsmn/attacks.hpp"
#include "wsmn/embed.hpp"
#include "wsmn/extract.hpp"
#include "wsmn/image.hpp"
#include "wsmn/marks.hpp"
#include "wsmn/texture.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace wsmn {

struct Individual {
    std::vector<double> x; // decision vector
    std::vector<double> f; // objectives, minimised
    int rank = 0;          // 0 = first front
    double crowding = 0;
};

bool dominates(const std::vector<double>& a, const std::vector<double>& b);
inline bool dominates(const Individual& a, const Individual& b) { return dominates(a.f, b.f); }

// Fronts as index lists into `pop`, best first.
std::vector<std::vector<int>> fast_nondominated_sort(const std::vector<Individual>& pop);
// Distances for the members of `front` (same order).
std::vector<double> crowding_distance(const std::vector<Individual>& pop, const std::vector<int>& front);

struct OptimizerConfig {
    int population = 50;
    int generations = 100;
    double crossover_rate = 0.7;
    double mutation_rate = 0.2;
    int tournament = 5;
    double robustness_cap = 0.1;
    std::vector<double> lower{30, 0}, upper{50, 2};
    void validate() const;
};

using Objective = std::function<std::vector<double>(const std::vector<double>&)>;

struct GenerationRecord {
    int generation = 0;
    std::vector<Individual> front;
};

struct Nsga2Result {
    std::vector<Individual> front;      // non-dominated members of the archive
    std::vector<Individual> population; // final population
    std::vector<Individual> archive;    // every evaluated individual, in evaluation order
    std::vector<GenerationRecord> trace;
};

Nsga2Result nsga2(const Objective& objective, const OptimizerConfig& cfg, std::uint64_t seed);

// Non-dominated subset of `pool`; repeated objective vectors are kept once
// (first occurrence). Members get rank 0 and their crowding distance.
std::vector<Individual> pareto_set(const std::vector<Individual>& pool);

// True when no member of `front` is dominated by any member of `archive`.
bool archive_nondominated(const std::vector<Individual>& front, const std::vector<Individual>& archive);

struct OperatingPoint {
    ThresholdPair thresholds;
    Individual chosen;
    bool feasible = true; // false: no member met the robustness cap
};

// Among members with (f1+f2)/2 <= cap, the one with the largest mean robustness
// error; otherwise the minimum, flagged infeasible.
OperatingPoint select_operating_point(const std::vector<Individual>& front, double cap);

std::vector<double> quantize_decision(const std::vector<double>& x, int decimals = 2);

// f1: mean copyright BER (tiled mark), f2: mean auth BER, f3: image MSE, over
// the optimisation attack set. Evaluations are cached on the quantised pair.
class WatermarkObjective {
public:
    WatermarkObjective(Image cover, MarkSet marks, TextureMap texture, EmbedParams params = {}, TrainOptions train = {});

    std::vector<double> operator()(const std::vector<double>& x);
    std::size_t evaluations() const { return cache_.size(); }

private:
    Image cover_;
    MarkSet marks_;
    TextureMap texture_;
    EmbedParams params_;
    TrainOptions train_;
    std::vector<AttackSpec> attacks_;
    std::mutex mu_;
    std::map<std::pair<long, long>, std::vector<double>> cache_;
};

} // namespace wsmn
