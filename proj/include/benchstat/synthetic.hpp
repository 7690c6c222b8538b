#pragma once

// Deterministic synthetic trial generators and a Monte-Carlo calibration
// harness for family-wise error rate and pipeline power.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchstat/core.hpp"
#include "benchstat/rng.hpp"
#include "benchstat/runner.hpp"
#include "benchstat/stats.hpp"

namespace benchstat {

struct SyntheticModelProfile {
    struct Entry {
        double base_metric = 0.0;
        double noise_sd = 0.0;
        std::map<std::string, double> task_offsets;  // optional per-task shift
    };
    std::map<std::string, Entry> models;

    double base(const std::string& task, const std::string& model) const {
        const auto it = models.find(model);
        if (it == models.end()) {
            throw std::invalid_argument("unknown model in profile: " + model);
        }
        double b = it->second.base_metric;
        const auto off = it->second.task_offsets.find(task);
        if (off != it->second.task_offsets.end()) b += off->second;
        return b;
    }
};

// final_metric = base(task, model) + noise_sd * z from the trial-noise
// stream; seed-aware tasks add a data-resampling perturbation drawn from the
// data stream. Fully deterministic given the stream bundle.
inline TrialOutcome synthetic_trial(const SyntheticModelProfile& profile,
                                    const TrialRequest& request,
                                    StreamBundle& streams) {
    const auto it = profile.models.find(request.model.name);
    if (it == profile.models.end()) {
        throw std::invalid_argument("unknown model in profile: " +
                                    request.model.name);
    }
    double metric = profile.base(request.task.name, request.model.name);
    if (it->second.noise_sd > 0.0) {
        metric += it->second.noise_sd * streams.trial_noise.normal();
    }
    if (request.task.seed_aware_data) {
        metric += it->second.noise_sd * streams.data.normal();
    }
    TrialOutcome outcome;
    outcome.final_metric = metric;
    return outcome;
}

inline Executor make_synthetic_executor(SyntheticModelProfile profile) {
    return [profile = std::move(profile)](const TrialRequest& request,
                                          StreamBundle& streams) {
        return synthetic_trial(profile, request, streams);
    };
}

// Null tensor: all models share an identical base per task; only noise
// differs. Deterministic in `seed`.
inline MetricTensor generate_null_tensor(int k, int N, int S, double noise_sd,
                                         std::int64_t seed) {
    if (k < 1 || N < 1 || S < 1) {
        throw std::invalid_argument("generate_null_tensor: k, N, S must be >= 1");
    }
    std::vector<TaskSpec> tasks;
    for (int n = 0; n < N; ++n) {
        TaskSpec t;
        t.name = "task" + std::to_string(n);
        t.category = "synthetic";
        t.task_type = "custom";
        t.metric_name = "metric";
        t.direction = MetricDirection::HigherIsBetter;
        tasks.push_back(std::move(t));
    }
    std::vector<std::string> models;
    for (int m = 0; m < k; ++m) models.push_back("model" + std::to_string(m));
    std::vector<std::int64_t> seeds;
    for (int s = 0; s < S; ++s) seeds.push_back(s);

    MetricTensor tensor(tasks, models, seeds);
    std::uint64_t state = static_cast<std::uint64_t>(seed) ^
                          fnv1a64("null-tensor");
    Rng rng(splitmix64(state));
    for (const auto& t : tensor.tasks()) {
        const double base = rng.uniform();  // shared by every model on the task
        for (const auto& m : tensor.models()) {
            for (const auto s : tensor.seeds()) {
                tensor.add_cell(t.name, m, s, base + noise_sd * rng.normal());
            }
        }
    }
    return tensor;
}

struct FwerEstimate {
    int runs = 0;
    double alpha = 0.05;
    PairwiseMethod method = PairwiseMethod::T;
    double fwer = 0.0;
    double ci_halfwidth = 0.0;  // normal-approximation binomial CI at 95%
};

// Fraction of simulated null benchmarks in which any Holm-adjusted per-task
// pairwise p falls below alpha. Deterministic in `seed`; each simulated
// benchmark uses its own derived seed, so runs are order-independent.
inline FwerEstimate estimate_fwer(int runs, int k, int N, int S,
                                  double noise_sd, double alpha,
                                  PairwiseMethod method, std::int64_t seed) {
    if (runs < 1) throw std::invalid_argument("estimate_fwer: runs must be >= 1");
    ReportConfig config;
    config.alpha = alpha;
    int rejections = 0;
    for (int run = 0; run < runs; ++run) {
        // splitmix stream at offset `run`: per-run seeds are independent
        std::uint64_t state = static_cast<std::uint64_t>(seed) +
                              static_cast<std::uint64_t>(run) * 0x9e3779b97f4a7c15ull;
        const std::int64_t run_seed = static_cast<std::int64_t>(splitmix64(state));
        const MetricTensor tensor =
            generate_null_tensor(k, N, S, noise_sd, run_seed);
        bool any = false;
        for (const auto& t : tensor.tasks()) {
            for (const auto& pr : pairwise_task(tensor, t.name, config)) {
                const double p = method == PairwiseMethod::Wilcoxon
                                     ? pr.p_w_holm
                                     : pr.p_t_holm;
                if (p < alpha) {
                    any = true;
                    break;
                }
            }
            if (any) break;
        }
        if (any) ++rejections;
    }
    FwerEstimate est;
    est.runs = runs;
    est.alpha = alpha;
    est.method = method;
    est.fwer = double(rejections) / double(runs);
    est.ci_halfwidth =
        1.96 * std::sqrt(est.fwer * (1.0 - est.fwer) / double(runs));
    return est;
}

inline nlohmann::json to_json(const FwerEstimate& e) {
    return nlohmann::json{{"runs", e.runs},
                          {"alpha", e.alpha},
                          {"method", to_string(e.method)},
                          {"fwer", e.fwer},
                          {"ci", e.ci_halfwidth}};
}

}  // namespace benchstat
