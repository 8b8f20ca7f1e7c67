#pragma once

#include "common.hpp"
#include "wsmn/optimize.hpp"

namespace wsmn::cli {

struct OptimizerOptions {
    int population = 50;
    int generations = 100;
    std::uint64_t seed = 1;
    void add(CLI::App& app);
    OptimizerConfig config() const;
};

struct OptimizationRun {
    Nsga2Result result;
    OperatingPoint chosen;
    std::size_t evaluations = 0;
};

// Tunes (delta', delta'') on a dual embedding of `cover`.
OptimizationRun optimize_thresholds(const Image& cover, const cv::Mat1b& logo, const KeySet& keys, const OptimizerOptions& opt,
                                    std::uint64_t texture_seed, const EmbedParams& params = {});

Json individual_json(const Individual& ind);
Json operating_point_json(const OperatingPoint& op);
// One JSON object per line, one line per generation.
std::string trace_jsonl(const Nsga2Result& res);

} // namespace wsmn::cli
