// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] = path to the CLI binary, argv[2] = fixtures directory.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "benchstat/ranking.hpp"
#include "benchstat/render.hpp"
#include "benchstat/report.hpp"
#include "benchstat/rng.hpp"
#include "benchstat/runner.hpp"
#include "benchstat/special.hpp"
#include "benchstat/stats.hpp"
#include "benchstat/synthetic.hpp"

#include "fixtures.hpp"
#include "oracle_t_quantile.hpp"

using namespace benchstat;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report_line(int criterion, bool ok, const std::string& what) {
    std::printf("%s  criterion %2d  %s\n", ok ? "PASS" : "FAIL", criterion,
                what.c_str());
    if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Independent Wilcoxon reference for criterion 5.
double wilcoxon_reference(std::vector<double> d) {
    std::erase(d, 0.0);
    const std::size_t n = d.size();
    if (n == 0) return 1.0;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(d[a]) < std::fabs(d[b]);
    });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::fabs(d[idx[j + 1]]) == std::fabs(d[idx[i]])) ++j;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[idx[k]] = (double(i + 1) + double(j + 1)) / 2.0;
        }
        i = j + 1;
    }
    double w = 0.0;
    for (std::size_t q = 0; q < n; ++q) w += d[q] > 0.0 ? ranks[q] : -ranks[q];
    const double aw = std::fabs(w);
    std::uint64_t count = 0;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        double wp = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            wp += (mask >> q) & 1u ? ranks[q] : -ranks[q];
        }
        if (std::fabs(wp) >= aw) ++count;
    }
    return double(count) / double(total);
}

// Direct step-down evaluation for criterion 5.
std::vector<double> holm_reference(const std::vector<double>& p) {
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> out(m);
    for (std::size_t r = 0; r < m; ++r) {
        double best = 0.0;
        for (std::size_t j = 0; j <= r; ++j) {
            best = std::max(best, double(m - j) * p[order[j]]);
        }
        out[order[r]] = std::min(1.0, best);
    }
    return out;
}

std::vector<double> extract_attr(const std::string& svg,
                                 const std::string& attr) {
    std::vector<double> out;
    std::size_t pos = 0;
    const std::string needle = attr + "=\"";
    while ((pos = svg.find(needle, pos)) != std::string::npos) {
        pos += needle.size();
        out.push_back(std::stod(svg.substr(pos)));
    }
    return out;
}

void criterion_1() {
    const auto start = Clock::now();
    double cd = 0.0;
    for (int i = 0; i < 1000; ++i) cd = nemenyi_cd(4, 10, 0.05);
    const double per_call_ms = seconds_since(start);  // 1000 calls -> ms/call
    const bool ok = std::fabs(cd - 1.4834) <= 0.001 && per_call_ms < 1.0;
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "critical difference CD(k=4, N=10, 0.05) = %.6f, %.4f ms/call",
                  cd, per_call_ms);
    report_line(1, ok, buf);
}

void criterion_2() {
    RankTable table;
    table.models = {"A", "B", "C", "D"};
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 4; ++i) rows.push_back({1, 2, 3, 4});
    rows.push_back({2, 4, 1, 3});
    for (int i = 0; i < 2; ++i) rows.push_back({3, 4, 1, 2});
    for (int i = 0; i < 3; ++i) rows.push_back({4, 3, 2, 1});
    table.ranks = rows;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table.tasks.push_back("t" + std::to_string(i));
    }
    const auto [chi2, p] = friedman(table);
    const bool ok = std::fabs(chi2 - 2.04) <= 0.005 && std::fabs(p - 0.564) <= 0.005;
    char buf[96];
    std::snprintf(buf, sizeof buf, "Friedman chi2 = %.6f, p = %.6f", chi2, p);
    report_line(2, ok, buf);
}

void criterion_3() {
    std::vector<double> xs10(10), zeros10(10, 0.0);
    for (int i = 0; i < 10; ++i) xs10[i] = double(i + 1);
    const double p10 = wilcoxon_signed_rank(xs10, zeros10).p;

    const std::vector<double> xs5 = {1, 2, 3, 4, 5};
    const std::vector<double> zeros5(5, 0.0);
    const double p5 = wilcoxon_signed_rank(xs5, zeros5).p;

    const double h10 = holm_adjust({p10, 0.2, 0.3, 0.4, 0.5, 0.6})[0];
    const double h5 = holm_adjust({p5, 0.2, 0.3, 0.4, 0.5, 0.6})[0];

    const bool ok = p10 == 0.001953125 && h10 == 0.01171875 && h5 == 0.375;
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "Wilcoxon floor p(S=10) = %.9f, Holm(m=6) = %.8f, S=5 -> %.3f",
                  p10, h10, h5);
    report_line(3, ok, buf);
}

void criterion_4() {
    const BenchmarkReport report =
        build_report(fixtures::benchmark_tensor(), ReportConfig{});
    const TaskMarks marks = mark_cells(report, "TSP-random");
    // model order: GCN, GAT, SAGE, GT, GIN
    const bool ok = marks.marks[2] == CellMark::Winner &&
                    marks.marks[0] == CellMark::Tie &&
                    marks.marks[3] == CellMark::Tie &&
                    marks.marks[1] == CellMark::Plain &&
                    marks.marks[4] == CellMark::Incompatible;
    report_line(4, ok,
                "cell marking: winner = SAGE, ties = {GCN, GT}, plain = {GAT}");
}

void criterion_5() {
    Rng rng(0xACCE5501ull);
    bool wilcoxon_ok = true;
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng.uniform_index(9);
        std::vector<double> d(n);
        for (auto& v : d) {
            v = trial % 2 == 0
                    ? double(static_cast<int>(rng.uniform_index(7)) - 3)
                    : rng.uniform() * 2.0 - 1.0;
        }
        const std::vector<double> zeros(n, 0.0);
        const double got = wilcoxon_signed_rank(d, zeros).p;
        if (std::fabs(got - wilcoxon_reference(d)) >= 1e-12) {
            wilcoxon_ok = false;
            break;
        }
    }
    bool holm_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t m = 1 + rng.uniform_index(6);
        std::vector<double> raw(m);
        for (auto& p : raw) p = rng.uniform();
        if (trial % 4 == 0 && m >= 2) raw[1] = raw[0];
        const std::vector<double> got = holm_adjust(raw);
        const std::vector<double> want = holm_reference(raw);
        for (std::size_t i = 0; i < m; ++i) {
            if (std::fabs(got[i] - want[i]) > 1e-15) holm_ok = false;
        }
        if (!holm_ok) break;
    }
    report_line(5, wilcoxon_ok && holm_ok,
                "Wilcoxon = 2^n enumeration (500 vectors); Holm = direct "
                "step-down (1000 vectors)");
}

void criterion_6() {
    double worst = 0.0;
    for (const auto& [df, row] : oracle::kTQuantile) {
        for (std::size_t i = 0; i < oracle::kTQuantileP.size(); ++i) {
            worst = std::max(
                worst, std::fabs(t_quantile(df, oracle::kTQuantileP[i]) - row[i]));
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "t-quantile max |error| vs oracle = %.3g (31 df x 4 p)", worst);
    report_line(6, worst < 1e-8, buf);
}

void criterion_7(const std::string& cli, const std::string& fixtures_dir) {
    const std::string config = fixtures_dir + "/run_demo.json";
    const auto start = Clock::now();
    bool ran = true;
    const std::vector<std::string> outs = {"acc_cache_a.json", "acc_cache_b.json",
                                           "acc_cache_c.json"};
    for (int i = 0; i < 3; ++i) {
        std::string cmd = cli + " run --config " + config + " --out " + outs[i];
        if (i == 2) cmd += " --parallelism 4";
        cmd += " > /dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) ran = false;
    }
    const double elapsed = seconds_since(start);
    const std::string a = read_file(outs[0]);
    const bool ok = ran && !a.empty() && a == read_file(outs[1]) &&
                    a == read_file(outs[2]) && elapsed < 10.0;
    for (const auto& f : outs) std::remove(f.c_str());
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "serial x2 + parallel run caches byte-identical (%.2f s)",
                  elapsed);
    report_line(7, ok, buf);
}

void criterion_8() {
    const auto start = Clock::now();
    const FwerEstimate t_est = estimate_fwer(2000, 4, 1, 10, 0.01, 0.05,
                                             PairwiseMethod::T, 0);
    const FwerEstimate w_est = estimate_fwer(2000, 4, 1, 5, 0.01, 0.05,
                                             PairwiseMethod::Wilcoxon, 0);
    const double elapsed = seconds_since(start);
    const bool ok = t_est.fwer <= 0.0646 && w_est.fwer == 0.0 && elapsed < 60.0;
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "FWER(t+Holm) = %.4f <= 0.0646, FWER(Wilcoxon, S=5) = %.4f "
                  "(%.1f s)",
                  t_est.fwer, w_est.fwer, elapsed);
    report_line(8, ok, buf);
}

void criterion_9() {
    Rng rng(0xC0FEull);
    const int samples = 5000;
    const int bootstrap_samples = 1000;
    int covered = 0;
    double ratio_sum = 0.0;
    for (int s = 0; s < samples; ++s) {
        std::vector<double> v(10);
        for (auto& x : v) x = rng.normal();  // true mean 0
        const CellEstimate est = cell_estimate(v, 0.05);
        if (std::fabs(est.mean) <= est.halfwidth) ++covered;
        if (s < bootstrap_samples) {
            ratio_sum += bootstrap_halfwidth(v, 0.05, {10000, s}) / est.halfwidth;
        }
    }
    const double coverage = double(covered) / samples;
    const double mean_ratio = ratio_sum / bootstrap_samples;
    const bool ok = coverage >= 0.93 && coverage <= 0.97 &&
                    std::fabs(mean_ratio - 1.0) <= 0.25;
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "t-CI coverage = %.4f in [0.93, 0.97]; bootstrap/t halfwidth "
                  "= %.3f",
                  coverage, mean_ratio);
    report_line(9, ok, buf);
}

void criterion_10() {
    CdResult cd;
    cd.models = {"A", "B", "C", "D"};
    cd.mean_ranks = {2.10, 2.40, 2.60, 2.90};
    cd.k = 4;
    cd.N = 10;
    cd.alpha = 0.05;
    cd.cd = nemenyi_cd(4, 10, 0.05);
    cd.cliques = find_cliques(cd.mean_ranks, cd.cd);
    const std::string svg = render_cd_svg(cd);

    std::size_t clique_bars = 0;
    std::size_t pos = 0;
    while ((pos = svg.find("class=\"clique\"", pos)) != std::string::npos) {
        ++clique_bars;
        pos += 1;
    }
    const std::vector<double> cx = extract_attr(svg, "cx");
    bool ranks_recovered = cx.size() == 4;
    double worst = 0.0;
    for (std::size_t i = 0; i < cx.size() && ranks_recovered; ++i) {
        const double rank = 1.0 + (cx[i] - 50.0) / 120.0;
        worst = std::max(worst, std::fabs(rank - cd.mean_ranks[i]));
    }
    ranks_recovered = ranks_recovered && worst < 1e-6;

    // the single bar must span all four markers
    bool spans_all = clique_bars == 1;
    if (spans_all) {
        const std::size_t bar_pos = svg.find("class=\"clique\"");
        const std::string bar = svg.substr(bar_pos, svg.find('\n', bar_pos) - bar_pos);
        const std::vector<double> x1 = extract_attr(bar, "x1");
        const std::vector<double> x2 = extract_attr(bar, "x2");
        const double lo = *std::min_element(cx.begin(), cx.end());
        const double hi = *std::max_element(cx.begin(), cx.end());
        spans_all = !x1.empty() && !x2.empty() && x1[0] <= lo && x2[0] >= hi;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "CD diagram: %zu clique bar(s), marker inversion error = %.2g",
                  clique_bars, worst);
    report_line(10, clique_bars == 1 && spans_all && ranks_recovered, buf);
}

void criterion_11() {
    // run through the orchestrator with a counting executor, cache, reload,
    // and re-export without any executor in scope
    Registry registry;
    const MetricTensor fixture = fixtures::benchmark_tensor();
    for (const auto& t : fixture.tasks()) registry.register_task(t.category, t);
    for (const auto& name : fixture.models()) {
        ModelSpec m;
        m.name = name;
        m.compatible_task_types = name == "GIN"
                                      ? std::set<std::string>{"graph_cls"}
                                      : std::set<std::string>{"node_cls",
                                                              "graph_cls",
                                                              "link_pred"};
        registry.register_model(m);
    }
    int executor_calls = 0;
    const Executor executor = [&fixture, &executor_calls](
                                  const TrialRequest& req, StreamBundle&) {
        ++executor_calls;
        return TrialOutcome{fixture.values(req.task.name, req.model.name)
                                [static_cast<std::size_t>(req.seed)],
                            {},
                            0.0};
    };

    RunConfig config;
    config.explicit_tasks = fixture.tasks();
    config.seeds = {0, 1, 2};
    const std::string cache_path = "acc_cache_roundtrip.json";
    config.cache_path = cache_path;

    const BenchmarkReport before = run_benchmark(config, registry, executor);
    const int calls_after_run = executor_calls;

    const std::string latex_summary = to_latex(before, LatexTable::Summary);
    const std::string latex_pairwise = to_latex(before, LatexTable::Pairwise);
    const std::string svg = render_cd_svg(*before.cd);

    const BenchmarkReport after = cache_load(cache_path);
    const bool exports_match =
        to_latex(after, LatexTable::Summary) == latex_summary &&
        to_latex(after, LatexTable::Pairwise) == latex_pairwise &&
        render_cd_svg(*after.cd) == svg;
    const bool no_recompute = executor_calls == calls_after_run;
    std::remove(cache_path.c_str());

    char buf[128];
    std::snprintf(buf, sizeof buf,
                  "cache save/load/export byte-identical; executor calls on "
                  "reload path = %d",
                  executor_calls - calls_after_run);
    report_line(11, exports_match && no_recompute, buf);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: acceptance <cli-binary> <fixtures-dir>\n";
        return 2;
    }
    const std::string cli = argv[1];
    const std::string fixtures_dir = argv[2];

    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7(cli, fixtures_dir);
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all 11 criteria passed\n");
    return 0;
}
