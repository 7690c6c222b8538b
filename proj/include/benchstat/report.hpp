#pragma once

// Report assembly and export: per-cell summaries, per-task pairwise
// families, the across-task CD analysis, winner/tie cell marking, LaTeX
// export, and the versioned JSON report cache.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "benchstat/core.hpp"
#include "benchstat/ranking.hpp"
#include "benchstat/rng.hpp"
#include "benchstat/stats.hpp"
#include "benchstat/version.hpp"

namespace benchstat {

enum class CellMark { Winner, Tie, Plain, Incompatible };

inline std::string to_string(CellMark m) {
    switch (m) {
        case CellMark::Winner: return "winner";
        case CellMark::Tie: return "tie";
        case CellMark::Plain: return "plain";
        default: return "incompatible";
    }
}

struct BenchmarkReport {
    MetricTensor tensor;
    ReportConfig config;
    std::vector<CellSummary> cells;  // present pairs, canonical order
    // one family per task, aligned with tensor.tasks(); empty when < 2 models
    std::vector<std::vector<PairwiseResult>> pairwise;
    std::optional<CdResult> cd;  // absent when < 2 universal models or < 2 tasks
    std::string provenance;      // run-config hash
    std::string engine_version = kEngineVersion;
};

// Deterministic report construction; pure function of (tensor, config).
inline BenchmarkReport build_report(const MetricTensor& tensor,
                                    const ReportConfig& config) {
    config.check();
    const std::vector<std::string> violations = tensor.validate();
    if (!violations.empty()) {
        std::string msg = "invalid tensor:";
        for (const auto& v : violations) msg += " [" + v + "]";
        throw std::invalid_argument(msg);
    }

    BenchmarkReport report;
    report.tensor = tensor;
    report.config = config;

    for (const auto& t : tensor.tasks()) {
        for (const auto& m : tensor.models()) {
            if (!tensor.has_pair(t.name, m)) continue;
            const std::vector<double> v = tensor.values(t.name, m);
            CellSummary cell;
            cell.task = t.name;
            cell.model = m;
            cell.n_seeds = static_cast<int>(v.size());
            cell.ci_method = config.ci_method;
            cell.alpha = config.alpha;
            if (config.ci_method == CiMethod::T) {
                const CellEstimate est = cell_estimate(v, config.alpha);
                cell.mean = est.mean;
                cell.halfwidth = est.halfwidth;
            } else {
                cell.mean = std::accumulate(v.begin(), v.end(), 0.0) /
                            double(v.size());
                cell.halfwidth = bootstrap_halfwidth(
                    v, config.alpha, {config.bootstrap_B, config.bootstrap_seed});
            }
            report.cells.push_back(std::move(cell));
        }
    }

    for (const auto& t : tensor.tasks()) {
        if (tensor.models_on(t.name).size() >= 2) {
            report.pairwise.push_back(pairwise_task(tensor, t.name, config));
        } else {
            report.pairwise.emplace_back();
        }
    }

    if (tensor.tasks().size() >= 2) {
        try {
            report.cd = cd_analysis(tensor, config.alpha);
        } catch (const std::invalid_argument&) {
            report.cd = std::nullopt;  // fewer than 2 universal models
        }
    }

    report.provenance = [&] {
        char buf[32];
        const std::uint64_t h = fnv1a64(to_json(config).dump()) ^
                                fnv1a64(to_json(tensor).dump());
        std::snprintf(buf, sizeof buf, "%016llx",
                      static_cast<unsigned long long>(h));
        return std::string(buf);
    }();
    return report;
}

inline const CellSummary* find_cell(const BenchmarkReport& report,
                                    const std::string& task,
                                    const std::string& model) {
    for (const auto& c : report.cells) {
        if (c.task == task && c.model == model) return &c;
    }
    return nullptr;
}

struct TaskMarks {
    std::vector<CellMark> marks;  // aligned with tensor.models()
    bool winner_tied_on_mean = false;  // exact mean tie broken by registry order
};

// Winner = best mean under the task's direction; tie mark iff the closed
// CI [mean-h, mean+h] intersects the winner's interval.
inline TaskMarks mark_cells(const BenchmarkReport& report,
                            const std::string& task_name) {
    const TaskSpec& task = report.tensor.task(task_name);
    const auto& models = report.tensor.models();

    TaskMarks out;
    out.marks.assign(models.size(), CellMark::Incompatible);

    int winner = -1;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const CellSummary* cell = find_cell(report, task_name, models[i]);
        if (!cell) continue;
        if (winner < 0) {
            winner = static_cast<int>(i);
            continue;
        }
        const CellSummary* best = find_cell(report, task_name, models[winner]);
        const bool better =
            task.direction == MetricDirection::HigherIsBetter
                ? cell->mean > best->mean
                : cell->mean < best->mean;
        if (better) winner = static_cast<int>(i);
        if (cell->mean == best->mean) out.winner_tied_on_mean = true;
    }
    if (winner < 0) return out;  // no models on this task

    const CellSummary* best = find_cell(report, task_name, models[winner]);
    for (std::size_t i = 0; i < models.size(); ++i) {
        const CellSummary* cell = find_cell(report, task_name, models[i]);
        if (!cell) continue;
        if (static_cast<int>(i) == winner) {
            out.marks[i] = CellMark::Winner;
        } else {
            const bool overlap =
                cell->mean - cell->halfwidth <= best->mean + best->halfwidth &&
                best->mean - best->halfwidth <= cell->mean + cell->halfwidth;
            out.marks[i] = overlap ? CellMark::Tie : CellMark::Plain;
        }
    }
    return out;
}

// Metric cells at 3 decimals; p-values in scientific notation below 1e-3.
inline std::string format_metric(double mean, double halfwidth) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f\u00b1%.3f", mean, halfwidth);
    return buf;
}

inline std::string format_p(double p) {
    char buf[32];
    if (p != 0.0 && p < 1e-3) {
        std::snprintf(buf, sizeof buf, "%.2e", p);
    } else {
        std::snprintf(buf, sizeof buf, "%.4g", p);
    }
    return buf;
}

struct SummaryRow {
    std::string task;
    std::string model;
    double mean = 0.0;
    double halfwidth = 0.0;
    CellMark mark = CellMark::Incompatible;
    MetricDirection direction = MetricDirection::HigherIsBetter;
    std::string rendered;  // "0.811±0.001" or "n/a"
};

inline std::vector<SummaryRow> summary_table(const BenchmarkReport& report) {
    std::vector<SummaryRow> rows;
    for (const auto& t : report.tensor.tasks()) {
        const TaskMarks marks = mark_cells(report, t.name);
        const auto& models = report.tensor.models();
        for (std::size_t i = 0; i < models.size(); ++i) {
            SummaryRow row;
            row.task = t.name;
            row.model = models[i];
            row.mark = marks.marks[i];
            row.direction = t.direction;
            if (row.mark == CellMark::Incompatible) {
                row.rendered = "n/a";
            } else {
                const CellSummary* cell = find_cell(report, t.name, models[i]);
                row.mean = cell->mean;
                row.halfwidth = cell->halfwidth;
                row.rendered = format_metric(row.mean, row.halfwidth);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

struct PairwiseRow {
    std::string task;
    std::string model_a;
    std::string model_b;
    double delta_mu = 0.0;
    double p_t_holm = 1.0;
    double p_w_holm = 1.0;
    bool sig_t = false;
    bool sig_w = false;
    bool agree = true;  // significance verdicts match at config.alpha
};

inline std::vector<PairwiseRow> pairwise_table(const BenchmarkReport& report,
                                               PairwiseMethod method) {
    (void)method;  // all columns carried; the caller picks what to show
    std::vector<PairwiseRow> rows;
    for (const auto& family : report.pairwise) {
        for (const auto& pr : family) {
            PairwiseRow row;
            row.task = pr.task;
            row.model_a = pr.model_a;
            row.model_b = pr.model_b;
            row.delta_mu = pr.delta_mu;
            row.p_t_holm = pr.p_t_holm;
            row.p_w_holm = pr.p_w_holm;
            row.sig_t = pr.p_t_holm < report.config.alpha;
            row.sig_w = pr.p_w_holm < report.config.alpha;
            row.agree = row.sig_t == row.sig_w;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// LaTeX export

struct LatexOptions {
    // cell-color macro names; empty = no colors, plain bold winner
    std::string winner_color;
    std::string tie_color;
};

enum class LatexTable { Summary, Pairwise };

namespace detail {

inline std::string latex_cell(double mean, double halfwidth) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "$%.3f_{\\pm %.3f}$", mean, halfwidth);
    return buf;
}

}  // namespace detail

inline std::string to_latex(const BenchmarkReport& report, LatexTable which,
                            const LatexOptions& options = {}) {
    std::ostringstream out;
    if (which == LatexTable::Summary) {
        const auto& models = report.tensor.models();
        out << "\\toprule\n";
        out << "Task & Metric";
        for (const auto& m : models) out << " & " << m;
        out << " \\\\\n\\midrule\n";
        for (const auto& t : report.tensor.tasks()) {
            const TaskMarks marks = mark_cells(report, t.name);
            out << t.name << " & " << t.metric_name
                << (t.direction == MetricDirection::HigherIsBetter
                        ? "\\,$\\uparrow$"
                        : "\\,$\\downarrow$");
            for (std::size_t i = 0; i < models.size(); ++i) {
                out << " & ";
                if (marks.marks[i] == CellMark::Incompatible) {
                    out << "{n/a}";
                    continue;
                }
                const CellSummary* cell = find_cell(report, t.name, models[i]);
                const std::string body =
                    detail::latex_cell(cell->mean, cell->halfwidth);
                switch (marks.marks[i]) {
                    case CellMark::Winner:
                        if (!options.winner_color.empty()) {
                            out << "\\cellcolor{" << options.winner_color << "}";
                        }
                        out << "\\textbf{" << body << "}";
                        break;
                    case CellMark::Tie:
                        if (!options.tie_color.empty()) {
                            out << "\\cellcolor{" << options.tie_color << "}";
                        }
                        out << body;
                        break;
                    default:
                        out << body;
                }
            }
            out << " \\\\\n";
        }
        out << "\\bottomrule\n";
        return out.str();
    }

    // pairwise: one block per task with C(k, 2) rows
    out << "\\toprule\n";
    out << "Task & Comparison & $\\Delta\\mu$ & $p_{\\text{Holm}}^{\\,t}$ & "
           "$p_{\\text{Holm}}^{\\,W}$ & Agree \\\\\n\\midrule\n";
    bool first_block = true;
    for (const auto& family : report.pairwise) {
        if (family.empty()) continue;
        if (!first_block) out << "\\midrule\n";
        first_block = false;
        for (const auto& pr : family) {
            const bool sig_t = pr.p_t_holm < report.config.alpha;
            const bool sig_w = pr.p_w_holm < report.config.alpha;
            char delta[32];
            std::snprintf(delta, sizeof delta, "%+.3f", pr.delta_mu);
            const auto p_cell = [&](double p, bool sig) {
                std::string body = format_p(p);
                if (sig) body = "\\textbf{" + body + "}";
                if (sig && !options.winner_color.empty()) {
                    body = "\\cellcolor{" + options.winner_color + "}" + body;
                } else if (!sig && !options.tie_color.empty()) {
                    body = "\\cellcolor{" + options.tie_color + "}" + body;
                }
                return body;
            };
            out << pr.task << " & " << pr.model_a << " \\textsc{vs.} "
                << pr.model_b << " & $" << delta << "$ & " << p_cell(pr.p_t_holm, sig_t)
                << " & " << p_cell(pr.p_w_holm, sig_w) << " & "
                << (sig_t == sig_w ? "\\checkmark" : "$\\times$") << " \\\\\n";
        }
    }
    out << "\\bottomrule\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Report JSON (cache payload) and the versioned, checksummed cache file

inline nlohmann::json to_json(const CellSummary& c) {
    return nlohmann::json{{"task", c.task},         {"model", c.model},
                          {"mean", c.mean},         {"halfwidth", c.halfwidth},
                          {"n_seeds", c.n_seeds},   {"ci_method", to_string(c.ci_method)},
                          {"alpha", c.alpha}};
}

inline CellSummary cell_summary_from_json(const nlohmann::json& j) {
    CellSummary c;
    c.task = j.at("task").get<std::string>();
    c.model = j.at("model").get<std::string>();
    c.mean = j.at("mean").get<double>();
    c.halfwidth = j.at("halfwidth").get<double>();
    c.n_seeds = j.at("n_seeds").get<int>();
    c.ci_method = ci_method_from_string(j.at("ci_method").get<std::string>());
    c.alpha = j.at("alpha").get<double>();
    return c;
}

inline nlohmann::json to_json(const PairwiseResult& p) {
    // infinite t (degenerate constant shift) is not representable in JSON
    const nlohmann::json t_stat =
        std::isfinite(p.t_stat)
            ? nlohmann::json(p.t_stat)
            : nlohmann::json(p.t_stat > 0.0 ? "inf" : "-inf");
    nlohmann::json j{{"task", p.task},
                     {"model_a", p.model_a},
                     {"model_b", p.model_b},
                     {"delta_mu", p.delta_mu},
                     {"t_stat", t_stat},
                     {"p_t_raw", p.p_t_raw},
                     {"p_t_holm", p.p_t_holm},
                     {"w_stat", p.w_stat},
                     {"p_w_raw", p.p_w_raw},
                     {"p_w_holm", p.p_w_holm},
                     {"degenerate", p.degenerate}};
    j["dz"] = p.dz ? nlohmann::json(*p.dz) : nlohmann::json();
    return j;
}

inline PairwiseResult pairwise_from_json(const nlohmann::json& j) {
    PairwiseResult p;
    p.task = j.at("task").get<std::string>();
    p.model_a = j.at("model_a").get<std::string>();
    p.model_b = j.at("model_b").get<std::string>();
    p.delta_mu = j.at("delta_mu").get<double>();
    if (j.at("t_stat").is_string()) {
        p.t_stat = j.at("t_stat").get<std::string>() == "inf"
                       ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
    } else {
        p.t_stat = j.at("t_stat").get<double>();
    }
    p.p_t_raw = j.at("p_t_raw").get<double>();
    p.p_t_holm = j.at("p_t_holm").get<double>();
    p.w_stat = j.at("w_stat").get<double>();
    p.p_w_raw = j.at("p_w_raw").get<double>();
    p.p_w_holm = j.at("p_w_holm").get<double>();
    p.degenerate = j.at("degenerate").get<bool>();
    if (!j.at("dz").is_null()) p.dz = j.at("dz").get<double>();
    return p;
}

inline nlohmann::json to_json(const CdResult& cd) {
    return nlohmann::json{{"models", cd.models},
                          {"mean_ranks", cd.mean_ranks},
                          {"chi2_friedman", cd.chi2_friedman},
                          {"p_friedman", cd.p_friedman},
                          {"k", cd.k},
                          {"N", cd.N},
                          {"alpha", cd.alpha},
                          {"cd", cd.cd},
                          {"cliques", cd.cliques}};
}

inline CdResult cd_from_json(const nlohmann::json& j) {
    CdResult cd;
    cd.models = j.at("models").get<std::vector<std::string>>();
    cd.mean_ranks = j.at("mean_ranks").get<std::vector<double>>();
    cd.chi2_friedman = j.at("chi2_friedman").get<double>();
    cd.p_friedman = j.at("p_friedman").get<double>();
    cd.k = j.at("k").get<int>();
    cd.N = j.at("N").get<int>();
    cd.alpha = j.at("alpha").get<double>();
    cd.cd = j.at("cd").get<double>();
    cd.cliques = j.at("cliques").get<std::vector<std::vector<int>>>();
    return cd;
}

inline nlohmann::json to_json(const BenchmarkReport& r) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : r.cells) cells.push_back(to_json(c));
    nlohmann::json pairwise = nlohmann::json::array();
    for (const auto& family : r.pairwise) {
        nlohmann::json f = nlohmann::json::array();
        for (const auto& p : family) f.push_back(to_json(p));
        pairwise.push_back(std::move(f));
    }
    return nlohmann::json{
        {"engine_version", r.engine_version},
        {"provenance", r.provenance},
        {"config", to_json(r.config)},
        {"tensor", to_json(r.tensor)},
        {"cells", std::move(cells)},
        {"pairwise", std::move(pairwise)},
        {"cd", r.cd ? to_json(*r.cd) : nlohmann::json()}};
}

inline BenchmarkReport report_from_json(const nlohmann::json& j) {
    BenchmarkReport r;
    r.engine_version = j.at("engine_version").get<std::string>();
    r.provenance = j.at("provenance").get<std::string>();
    r.config = report_config_from_json(j.at("config"));
    r.tensor = tensor_from_json(j.at("tensor"));
    for (const auto& cj : j.at("cells")) {
        r.cells.push_back(cell_summary_from_json(cj));
    }
    for (const auto& fj : j.at("pairwise")) {
        std::vector<PairwiseResult> family;
        for (const auto& pj : fj) family.push_back(pairwise_from_json(pj));
        r.pairwise.push_back(std::move(family));
    }
    if (!j.at("cd").is_null()) r.cd = cd_from_json(j.at("cd"));
    return r;
}

inline std::string serialize_cache(const BenchmarkReport& report) {
    const std::string payload = to_json(report).dump();
    char checksum[32];
    std::snprintf(checksum, sizeof checksum, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(payload)));
    nlohmann::json file{{"schema_version", kCacheSchemaVersion},
                        {"checksum", std::string(checksum)},
                        {"report", nlohmann::json::parse(payload)}};
    return file.dump(2) + "\n";
}

inline void cache_save(const BenchmarkReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write cache file: " + path);
    out << serialize_cache(report);
}

inline BenchmarkReport cache_load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read cache file: " + path);
    nlohmann::json file;
    try {
        in >> file;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("corrupt cache file " + path + ": " + e.what());
    }
    const int version = file.at("schema_version").get<int>();
    if (version != kCacheSchemaVersion) {
        throw std::runtime_error("cache schema version mismatch: file has " +
                                 std::to_string(version) + ", engine expects " +
                                 std::to_string(kCacheSchemaVersion));
    }
    const std::string payload = file.at("report").dump();
    char checksum[32];
    std::snprintf(checksum, sizeof checksum, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(payload)));
    if (file.at("checksum").get<std::string>() != checksum) {
        throw std::runtime_error("cache checksum mismatch: " + path);
    }
    return report_from_json(file.at("report"));
}

}  // namespace benchstat
