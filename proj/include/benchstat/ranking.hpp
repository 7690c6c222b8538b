#pragma once

// Across-task rank aggregation: direction-aware per-task ranks, Friedman
// omnibus, Nemenyi critical difference, clique detection.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "benchstat/core.hpp"
#include "benchstat/special.hpp"
#include "benchstat/stats.hpp"

namespace benchstat {

struct RankTable {
    std::vector<std::string> tasks;   // N rows
    std::vector<std::string> models;  // k columns
    std::vector<std::vector<double>> ranks;  // each row sums to k(k+1)/2
};

struct CdResult {
    std::vector<std::string> models;  // registry order, universal subset
    std::vector<double> mean_ranks;   // aligned with models
    double chi2_friedman = 0.0;
    double p_friedman = 1.0;
    int k = 0;
    int N = 0;
    double alpha = 0.05;
    double cd = 0.0;
    // cliques as lists of indices into `models`, contiguous in mean-rank order
    std::vector<std::vector<int>> cliques;
};

// Rank 1 = best under the metric direction; ties get average ranks. Output
// aligned with the input order.
inline std::vector<double> rank_task(std::span<const double> values,
                                     MetricDirection direction) {
    if (values.empty()) throw std::invalid_argument("rank_task: empty input");
    for (const double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("rank_task: non-finite input");
        }
    }
    const std::size_t k = values.size();
    // score so that larger score = better
    std::vector<double> score(values.begin(), values.end());
    if (direction == MetricDirection::LowerIsBetter) {
        for (double& s : score) s = -s;
    }
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return score[a] > score[b];
    });
    std::vector<double> ranks(k, 0.0);
    std::size_t i = 0;
    while (i < k) {
        std::size_t j = i;
        while (j + 1 < k && score[idx[j + 1]] == score[idx[i]]) ++j;
        const double avg = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t m = i; m <= j; ++m) ranks[idx[m]] = avg;
        i = j + 1;
    }
    return ranks;
}

// Friedman omnibus: chi2_F = (12N / k(k+1)) [sum r_bar_i^2 - k(k+1)^2/4],
// referred to chi-squared with k-1 degrees of freedom.
inline std::pair<double, double> friedman(const RankTable& table) {
    const int N = static_cast<int>(table.ranks.size());
    const int k = static_cast<int>(table.models.size());
    if (N < 2 || k < 2) {
        throw std::invalid_argument("friedman: need N >= 2 and k >= 2");
    }
    std::vector<double> mean_ranks(k, 0.0);
    for (const auto& row : table.ranks) {
        if (static_cast<int>(row.size()) != k) {
            throw std::invalid_argument("friedman: ragged rank table");
        }
        for (int i = 0; i < k; ++i) mean_ranks[i] += row[i];
    }
    for (double& r : mean_ranks) r /= double(N);
    double sum_sq = 0.0;
    for (const double r : mean_ranks) sum_sq += r * r;
    const double kk = double(k);
    double chi2 = (12.0 * N / (kk * (kk + 1.0))) *
                  (sum_sq - kk * (kk + 1.0) * (kk + 1.0) / 4.0);
    if (chi2 < 0.0) chi2 = 0.0;  // guard against rounding on fully tied tables
    const double p = chi2_sf(chi2, k - 1);
    return {chi2, p};
}

namespace detail {

// Studentized-range quantiles divided by sqrt(2), the convention used by
// the Demsar post-hoc. k = 2..20 at alpha in {0.05, 0.10}.
inline constexpr double kNemenyiQ05[] = {
    1.9599639845, 2.3437005864, 2.5690317725, 2.7277743709, 2.8497054196,
    2.9483200175, 3.0308784496, 3.1017303413, 3.1636835771, 3.2186536073,
    3.2680039245, 3.3127385934, 3.3536177519, 3.3912302838, 3.4260413794,
    3.4584247073, 3.4886847994, 3.5170730087, 3.5437991315};
inline constexpr double kNemenyiQ10[] = {
    1.6448536270, 2.0522927305, 2.2913414969, 2.4595157643, 2.5885206019,
    2.6927321010, 2.7798836082, 2.8546064312, 2.9198888401, 2.9777682513,
    3.0296941832, 3.0767334683, 3.1196933331, 3.1591988189, 3.1957434330,
    3.2297234009, 3.2614614896, 3.2912239866, 3.3192330595};

}  // namespace detail

// Nemenyi critical difference CD = q_alpha * sqrt(k(k+1) / (6N)). Critical
// values are embedded for k = 2..20 at alpha in {0.05, 0.10}; other alphas
// are rejected rather than interpolated.
inline double nemenyi_cd(int k, int N, double alpha) {
    if (k < 2 || k > 20) {
        throw std::invalid_argument("nemenyi_cd: k outside tabulated range 2..20");
    }
    if (N < 1) throw std::invalid_argument("nemenyi_cd: N must be >= 1");
    const double* table = nullptr;
    if (std::fabs(alpha - 0.05) < 1e-12) {
        table = detail::kNemenyiQ05;
    } else if (std::fabs(alpha - 0.10) < 1e-12) {
        table = detail::kNemenyiQ10;
    } else {
        throw std::invalid_argument("nemenyi_cd: alpha not tabulated (use 0.05 or 0.10)");
    }
    const double q = table[k - 2];
    return q * std::sqrt(double(k) * (k + 1) / (6.0 * N));
}

// Maximal contiguous runs (in mean-rank order) of size >= 2 whose mean-rank
// span is <= cd. Returned as index lists into the input, sorted by rank.
inline std::vector<std::vector<int>> find_cliques(
    std::span<const double> mean_ranks, double cd) {
    if (cd < 0.0) throw std::invalid_argument("find_cliques: cd must be >= 0");
    const std::size_t k = mean_ranks.size();
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return mean_ranks[a] < mean_ranks[b]; });

    std::vector<std::pair<std::size_t, std::size_t>> runs;  // [lo, hi] in order
    for (std::size_t lo = 0; lo < k; ++lo) {
        std::size_t hi = lo;
        while (hi + 1 < k &&
               mean_ranks[order[hi + 1]] - mean_ranks[order[lo]] <= cd) {
            ++hi;
        }
        if (hi > lo) {
            // keep only maximal runs not contained in a previous one
            if (runs.empty() || hi > runs.back().second) {
                runs.emplace_back(lo, hi);
            }
        }
    }
    std::vector<std::vector<int>> cliques;
    for (const auto& [lo, hi] : runs) {
        std::vector<int> members;
        for (std::size_t i = lo; i <= hi; ++i) members.push_back(order[i]);
        cliques.push_back(std::move(members));
    }
    return cliques;
}

// Full across-task analysis: restrict to models present on every task, rank
// per-task seed means under each task's direction, then Friedman, Nemenyi CD
// and cliques. The CD is computed regardless of the Friedman verdict.
inline CdResult cd_analysis(const MetricTensor& tensor, double alpha) {
    if (tensor.tasks().size() < 2) {
        throw std::invalid_argument("cd_analysis: need at least 2 tasks");
    }
    // model subset present on all tasks, registry order
    std::vector<std::string> universal;
    for (const auto& m : tensor.models()) {
        bool everywhere = true;
        for (const auto& t : tensor.tasks()) {
            if (!tensor.has_pair(t.name, m)) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) universal.push_back(m);
    }
    if (universal.size() < 2) {
        throw std::invalid_argument(
            "cd_analysis: fewer than 2 models present on every task");
    }

    RankTable table;
    table.models = universal;
    for (const auto& t : tensor.tasks()) {
        std::vector<double> means;
        means.reserve(universal.size());
        for (const auto& m : universal) {
            const std::vector<double> v = tensor.values(t.name, m);
            means.push_back(std::accumulate(v.begin(), v.end(), 0.0) /
                            double(v.size()));
        }
        table.tasks.push_back(t.name);
        table.ranks.push_back(rank_task(means, t.direction));
    }

    CdResult r;
    r.models = universal;
    r.k = static_cast<int>(universal.size());
    r.N = static_cast<int>(table.ranks.size());
    r.alpha = alpha;
    r.mean_ranks.assign(universal.size(), 0.0);
    for (const auto& row : table.ranks) {
        for (std::size_t i = 0; i < row.size(); ++i) r.mean_ranks[i] += row[i];
    }
    for (double& m : r.mean_ranks) m /= double(r.N);
    const auto [chi2, p] = friedman(table);
    r.chi2_friedman = chi2;
    r.p_friedman = p;
    r.cd = nemenyi_cd(r.k, r.N, alpha);
    r.cliques = find_cliques(r.mean_ranks, r.cd);
    return r;
}

}  // namespace benchstat
