#pragma once

// Pure numerical kernels for per-cell estimation and per-task pairwise
// testing: Student-t confidence intervals, seed-paired t and Wilcoxon
// signed-rank tests, Holm step-down adjustment, percentile bootstrap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "benchstat/core.hpp"
#include "benchstat/rng.hpp"
#include "benchstat/special.hpp"

namespace benchstat {

struct CellSummary {
    std::string task;
    std::string model;
    double mean = 0.0;
    double halfwidth = 0.0;
    int n_seeds = 0;
    CiMethod ci_method = CiMethod::T;
    double alpha = 0.05;
};

struct PairwiseResult {
    std::string task;
    std::string model_a;
    std::string model_b;
    double delta_mu = 0.0;  // positive = a better in raw metric units
    double t_stat = 0.0;
    double p_t_raw = 1.0;
    double p_t_holm = 1.0;
    double w_stat = 0.0;
    double p_w_raw = 1.0;
    double p_w_holm = 1.0;
    std::optional<double> dz;  // Cohen's d_z; empty when sigma_d == 0, dbar != 0
    bool degenerate = false;   // all differences zero or zero variance
};

struct BootstrapSpec {
    int B = 10000;
    std::int64_t seed = 0;
};

struct CellEstimate {
    double mean = 0.0;
    double variance = 0.0;  // unbiased, 1/(S-1)
    double halfwidth = 0.0;
};

inline CellEstimate cell_estimate(std::span<const double> samples, double alpha) {
    const std::size_t n = samples.size();
    if (n < 2) {
        throw std::invalid_argument("cell_estimate: need at least 2 samples");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw std::invalid_argument("cell_estimate: alpha outside (0, 1)");
    }
    const double mean =
        std::accumulate(samples.begin(), samples.end(), 0.0) / double(n);
    double ss = 0.0;
    for (const double x : samples) ss += (x - mean) * (x - mean);
    const double variance = ss / double(n - 1);
    const double tq = t_quantile(static_cast<int>(n) - 1, 1.0 - alpha / 2.0);
    const double halfwidth = tq * std::sqrt(variance) / std::sqrt(double(n));
    return {mean, variance, halfwidth};
}

struct PairedTResult {
    double t_stat = 0.0;
    double p = 1.0;
    std::optional<double> dz;
    bool degenerate = false;
};

// Seed-paired t test on d_s = x_s - y_s, referred two-sided to t_{S-1}.
// Degenerate convention: sigma_d == 0 with dbar == 0 gives p = 1, dz = 0;
// sigma_d == 0 with dbar != 0 gives p = 0 and undefined dz.
inline PairedTResult paired_t(std::span<const double> xs,
                              std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("paired_t: length mismatch");
    }
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("paired_t: need at least 2 pairs");

    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = xs[i] - ys[i];
    const double dbar = std::accumulate(d.begin(), d.end(), 0.0) / double(n);
    double ss = 0.0;
    for (const double v : d) ss += (v - dbar) * (v - dbar);
    const double sd = std::sqrt(ss / double(n - 1));

    PairedTResult r;
    if (sd == 0.0) {
        r.degenerate = true;
        if (dbar == 0.0) {
            r.t_stat = 0.0;
            r.p = 1.0;
            r.dz = 0.0;
        } else {
            r.t_stat = dbar > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
            r.dz = std::nullopt;
        }
        return r;
    }
    r.t_stat = dbar / (sd / std::sqrt(double(n)));
    r.p = t_sf_two_sided(r.t_stat, static_cast<int>(n) - 1);
    r.dz = dbar / sd;
    return r;
}

struct WilcoxonResult {
    double w_stat = 0.0;  // sum of positive ranks minus sum of negative ranks
    double p = 1.0;
    int n_effective = 0;
};

namespace detail {

// Average ranks of |d| ascending (ties share the mean of their positions).
inline std::vector<double> average_ranks_abs(const std::vector<double>& d) {
    const std::size_t n = d.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(d[a]) < std::fabs(d[b]);
    });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n &&
               std::fabs(d[idx[j + 1]]) == std::fabs(d[idx[i]])) {
            ++j;
        }
        const double avg = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace detail

// Signed-rank test; zero differences dropped before ranking. Exact two-sided
// p by enumerating all 2^n sign assignments over the observed rank multiset
// for n <= 20; normal approximation with continuity correction above.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> xs,
                                           std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw std::invalid_argument("wilcoxon_signed_rank: length mismatch");
    }
    std::vector<double> d;
    d.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = xs[i] - ys[i];
        if (v != 0.0) d.push_back(v);
    }
    WilcoxonResult r;
    r.n_effective = static_cast<int>(d.size());
    if (d.empty()) {
        r.w_stat = 0.0;
        r.p = 1.0;
        return r;
    }
    const std::vector<double> ranks = detail::average_ranks_abs(d);
    const std::size_t n = d.size();
    double w = 0.0;
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w += d[i] > 0.0 ? ranks[i] : -ranks[i];
        rank_sum += ranks[i];
    }
    r.w_stat = w;

    if (n <= 20) {
        // exact null over the observed rank multiset
        const double target = std::fabs(w) - 1e-9;
        const std::uint64_t total = std::uint64_t{1} << n;
        std::uint64_t count = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double wp = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                wp += (mask >> i) & 1u ? ranks[i] : -ranks[i];
            }
            if (std::fabs(wp) >= target) ++count;
        }
        r.p = double(count) / double(total);
        return r;
    }

    // normal approximation on the positive-rank-sum form, tie-corrected
    // variance, continuity correction +-0.5
    const double w_plus = (w + rank_sum) / 2.0;
    const double mu = rank_sum / 2.0;
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += ranks[i] * ranks[i];
    var /= 4.0;
    if (var == 0.0) {
        r.p = 1.0;
        return r;
    }
    const double diff = w_plus - mu;
    const double cc = diff > 0.0 ? -0.5 : (diff < 0.0 ? 0.5 : 0.0);
    const double z = (diff + cc) / std::sqrt(var);
    r.p = std::min(1.0, 2.0 * normal_cdf(-std::fabs(z)));
    return r;
}

// Holm step-down adjustment, order-aligned with the input. Equal raw
// p-values receive equal adjusted values.
inline std::vector<double> holm_adjust(const std::vector<double>& p_raw) {
    const std::size_t m = p_raw.size();
    for (const double p : p_raw) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("holm_adjust: p outside [0, 1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return p_raw[a] < p_raw[b];
                     });
    std::vector<double> adjusted(m, 0.0);
    double running_max = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const double scaled = double(m - r) * p_raw[order[r]];
        running_max = std::max(running_max, scaled);
        adjusted[order[r]] = std::min(1.0, running_max);
    }
    return adjusted;
}

// Half-width of a symmetric envelope with the same total width as the
// percentile interval of B resample means. The sample is sorted before
// index resampling, so the result is invariant under input permutation and
// fully determined by (samples, alpha, B, seed).
inline double bootstrap_halfwidth(std::span<const double> samples, double alpha,
                                  const BootstrapSpec& spec) {
    if (samples.empty()) {
        throw std::invalid_argument("bootstrap_halfwidth: empty sample");
    }
    if (spec.B < 1) {
        throw std::invalid_argument("bootstrap_halfwidth: B must be >= 1");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    Rng rng(static_cast<std::uint64_t>(spec.seed));
    std::vector<double> means;
    means.reserve(static_cast<std::size_t>(spec.B));
    for (int b = 0; b < spec.B; ++b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += sorted[rng.uniform_index(n)];
        means.push_back(sum / double(n));
    }
    std::sort(means.begin(), means.end());

    const auto quantile = [&](double q) {
        const double h = (double(means.size()) - 1.0) * q;
        const std::size_t lo = static_cast<std::size_t>(h);
        const std::size_t hi = std::min(lo + 1, means.size() - 1);
        const double frac = h - double(lo);
        return means[lo] + frac * (means[hi] - means[lo]);
    };
    return 0.5 * (quantile(1.0 - alpha / 2.0) - quantile(alpha / 2.0));
}

// All C(k, 2) pairwise comparisons on one task, seed-aligned, with Holm
// applied separately per test method over the task's own family.
inline std::vector<PairwiseResult> pairwise_task(const MetricTensor& tensor,
                                                 const std::string& task,
                                                 const ReportConfig& config) {
    const std::vector<std::string> models = tensor.models_on(task);
    if (models.size() < 2) {
        throw std::invalid_argument("pairwise_task: fewer than 2 models on " + task);
    }
    std::vector<PairwiseResult> results;
    std::vector<double> p_t, p_w;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const std::vector<double> xs = tensor.values(task, models[i]);
        for (std::size_t j = i + 1; j < models.size(); ++j) {
            const std::vector<double> ys = tensor.values(task, models[j]);
            PairwiseResult pr;
            pr.task = task;
            pr.model_a = models[i];
            pr.model_b = models[j];
            const double mean_a =
                std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
            const double mean_b =
                std::accumulate(ys.begin(), ys.end(), 0.0) / double(ys.size());
            pr.delta_mu = mean_a - mean_b;

            const PairedTResult t = paired_t(xs, ys);
            pr.t_stat = t.t_stat;
            pr.p_t_raw = t.p;
            pr.dz = t.dz;
            pr.degenerate = t.degenerate;

            const WilcoxonResult w = wilcoxon_signed_rank(xs, ys);
            pr.w_stat = w.w_stat;
            pr.p_w_raw = w.p;

            p_t.push_back(pr.p_t_raw);
            p_w.push_back(pr.p_w_raw);
            results.push_back(std::move(pr));
        }
    }
    const std::vector<double> adj_t = holm_adjust(p_t);
    const std::vector<double> adj_w = holm_adjust(p_w);
    for (std::size_t i = 0; i < results.size(); ++i) {
        results[i].p_t_holm = adj_t[i];
        results[i].p_w_holm = adj_w[i];
    }
    (void)config;
    return results;
}

}  // namespace benchstat
