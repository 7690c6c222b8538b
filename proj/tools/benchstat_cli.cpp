// benchstat: run multi-seed benchmarks, regenerate reports from caches,
// export tables and diagrams, and run Monte-Carlo calibration.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error,
// 3 trial failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "benchstat/core.hpp"
#include "benchstat/render.hpp"
#include "benchstat/report.hpp"
#include "benchstat/runner.hpp"
#include "benchstat/synthetic.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTrial = 3;

std::string default_cache_path() {
    const char* dir = std::getenv("BENCH_CACHE_DIR");
    return std::string(dir ? dir : ".") + "/report.json";
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    nlohmann::json j;
    in >> j;
    return j;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

benchstat::SyntheticModelProfile profile_from_json(const nlohmann::json& j) {
    benchstat::SyntheticModelProfile profile;
    for (const auto& [name, pj] : j.items()) {
        benchstat::SyntheticModelProfile::Entry entry;
        entry.base_metric = pj.at("base_metric").get<double>();
        entry.noise_sd = pj.value("noise_sd", 0.0);
        if (pj.contains("task_offsets")) {
            entry.task_offsets =
                pj.at("task_offsets").get<std::map<std::string, double>>();
        }
        profile.models[name] = std::move(entry);
    }
    return profile;
}

struct RunArgs {
    std::string config_path;
    std::string out_path;
    std::vector<std::int64_t> seed_list;
    int parallelism = 0;  // 0 = take from config
};

int cmd_run(const RunArgs& args) {
    const nlohmann::json cfg = load_json_file(args.config_path);

    benchstat::Registry registry;
    for (const auto& tj : cfg.at("tasks")) {
        const benchstat::TaskSpec t = benchstat::task_from_json(tj);
        registry.register_task(t.category.empty() ? "default" : t.category, t);
    }
    for (const auto& mj : cfg.at("models")) {
        registry.register_model(benchstat::model_from_json(mj));
    }

    benchstat::RunConfig run;
    if (cfg.contains("category")) {
        run.category = cfg.at("category").get<std::string>();
    } else {
        for (const auto& tj : cfg.at("tasks")) {
            run.explicit_tasks.push_back(benchstat::task_from_json(tj));
        }
    }
    if (cfg.contains("task_type")) {
        run.task_type_filter = cfg.at("task_type").get<std::string>();
    }
    if (cfg.contains("seeds")) {
        run.seeds = cfg.at("seeds").get<std::vector<std::int64_t>>();
    }
    if (!args.seed_list.empty()) run.seeds = args.seed_list;
    if (cfg.contains("epoch_overrides")) {
        run.epoch_overrides =
            cfg.at("epoch_overrides").get<std::map<std::string, int>>();
    }
    if (cfg.contains("report")) {
        run.report = benchstat::report_config_from_json(cfg.at("report"));
    }
    run.parallelism = cfg.value("parallelism", 1);
    if (args.parallelism > 0) run.parallelism = args.parallelism;
    run.cache_path = args.out_path;

    const nlohmann::json& ex = cfg.at("executor");
    benchstat::Executor executor;
    const std::string type = ex.at("type").get<std::string>();
    if (type == "synthetic") {
        executor =
            benchstat::make_synthetic_executor(profile_from_json(ex.at("profiles")));
    } else if (type == "external") {
        executor = benchstat::make_external_executor(
            ex.at("command").get<std::string>(),
            ex.value("timeout_seconds", 3600.0));
    } else {
        throw std::runtime_error("unknown executor type: " + type);
    }

    benchstat::run_benchmark(run, registry, executor);
    return kExitOk;
}

void print_summary(const benchstat::BenchmarkReport& report, bool as_json) {
    const auto rows = benchstat::summary_table(report);
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) {
            j.push_back({{"task", r.task},
                         {"model", r.model},
                         {"mean", r.mean},
                         {"halfwidth", r.halfwidth},
                         {"mark", benchstat::to_string(r.mark)},
                         {"direction", benchstat::to_string(r.direction)},
                         {"rendered", r.rendered}});
        }
        std::cout << j.dump(2) << "\n";
        return;
    }
    std::string current_task;
    for (const auto& r : rows) {
        if (r.task != current_task) {
            current_task = r.task;
            std::cout << r.task << ":\n";
        }
        std::cout << "  " << r.model << "  " << r.rendered;
        if (r.mark == benchstat::CellMark::Winner) std::cout << "  [winner]";
        if (r.mark == benchstat::CellMark::Tie) std::cout << "  [tie]";
        std::cout << "\n";
    }
}

void print_pairwise(const benchstat::BenchmarkReport& report,
                    benchstat::PairwiseMethod method, bool as_json) {
    const auto rows = benchstat::pairwise_table(report, method);
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json row{{"task", r.task},
                               {"model_a", r.model_a},
                               {"model_b", r.model_b},
                               {"delta_mu", r.delta_mu}};
            if (method != benchstat::PairwiseMethod::Wilcoxon) {
                row["p_t_holm"] = r.p_t_holm;
                row["significant_t"] = r.sig_t;
            }
            if (method != benchstat::PairwiseMethod::T) {
                row["p_w_holm"] = r.p_w_holm;
                row["significant_w"] = r.sig_w;
            }
            if (method == benchstat::PairwiseMethod::Both) row["agree"] = r.agree;
            j.push_back(std::move(row));
        }
        std::cout << j.dump(2) << "\n";
        return;
    }
    for (const auto& r : rows) {
        char dmu[32];
        std::snprintf(dmu, sizeof dmu, "%+.3f", r.delta_mu);
        std::cout << r.task << "  " << r.model_a << " vs. " << r.model_b << "  "
                  << "dmu=" << dmu;
        if (method != benchstat::PairwiseMethod::Wilcoxon) {
            std::cout << "  p_t=" << benchstat::format_p(r.p_t_holm)
                      << (r.sig_t ? "*" : "");
        }
        if (method != benchstat::PairwiseMethod::T) {
            std::cout << "  p_w=" << benchstat::format_p(r.p_w_holm)
                      << (r.sig_w ? "*" : "");
        }
        if (method == benchstat::PairwiseMethod::Both) {
            std::cout << "  agree=" << (r.agree ? "yes" : "no");
        }
        std::cout << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"benchstat: statistical benchmark reports"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "execute a benchmark and cache the report");
    run->add_option("--config", run_args.config_path, "run config JSON")->required();
    run->add_option("--out", run_args.out_path, "output cache path");
    run->add_option("--seed-list", run_args.seed_list,
                    "explicit seeds (default 0..9)");
    run->add_option("--parallelism", run_args.parallelism,
                    "worker threads (overrides config)");

    std::string in_path;
    bool as_json = false;
    auto* report_cmd = app.add_subcommand("report", "print the summary table");
    report_cmd->add_option("--in", in_path, "report cache path");
    report_cmd->add_flag("--json", as_json, "machine-readable output");

    std::string method_str = "both";
    auto* pairwise_cmd =
        app.add_subcommand("pairwise", "print the pairwise test table");
    pairwise_cmd->add_option("--in", in_path, "report cache path");
    pairwise_cmd->add_option("--method", method_str, "t | wilcoxon | both");
    pairwise_cmd->add_flag("--json", as_json, "machine-readable output");

    double cd_alpha = 0.05;
    std::string svg_path;
    auto* cd_cmd = app.add_subcommand("cd", "critical-difference analysis");
    cd_cmd->add_option("--in", in_path, "report cache path");
    cd_cmd->add_option("--alpha", cd_alpha, "significance level (0.05 or 0.10)");
    cd_cmd->add_option("--svg", svg_path, "write the CD diagram SVG here");
    cd_cmd->add_flag("--json", as_json, "machine-readable output");

    std::string format = "latex";
    std::string which = "summary";
    std::string export_out;
    std::string winner_color;
    std::string tie_color;
    auto* export_cmd = app.add_subcommand("export", "export report tables");
    export_cmd->add_option("--in", in_path, "report cache path");
    export_cmd->add_option("--format", format, "output format (latex)");
    export_cmd->add_option("--which", which, "summary | pairwise");
    export_cmd->add_option("--out", export_out, "output file (default stdout)");
    export_cmd->add_option("--winner-color", winner_color, "winner cell-color macro");
    export_cmd->add_option("--tie-color", tie_color, "tie cell-color macro");

    int cal_runs = 2000;
    double cal_alpha = 0.05;
    std::string cal_method = "t";
    int cal_k = 4;
    int cal_n = 1;
    int cal_s = 10;
    double cal_noise = 0.01;
    std::int64_t cal_seed = 0;
    auto* calibrate_cmd =
        app.add_subcommand("calibrate", "Monte-Carlo FWER calibration");
    calibrate_cmd->add_option("--runs", cal_runs, "simulated null benchmarks");
    calibrate_cmd->add_option("--alpha", cal_alpha, "significance level");
    calibrate_cmd->add_option("--method", cal_method, "t | wilcoxon");
    calibrate_cmd->add_option("--k", cal_k, "models per benchmark");
    calibrate_cmd->add_option("--n", cal_n, "tasks per benchmark");
    calibrate_cmd->add_option("--s", cal_s, "seeds per benchmark");
    calibrate_cmd->add_option("--noise", cal_noise, "Gaussian noise sd");
    calibrate_cmd->add_option("--seed", cal_seed, "simulation seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (run->parsed()) {
            if (run_args.out_path.empty()) run_args.out_path = default_cache_path();
            try {
                return cmd_run(run_args);
            } catch (const benchstat::TrialError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitTrial;
            }
        }

        if (in_path.empty()) in_path = default_cache_path();

        if (report_cmd->parsed()) {
            print_summary(benchstat::cache_load(in_path), as_json);
            return kExitOk;
        }
        if (pairwise_cmd->parsed()) {
            benchstat::PairwiseMethod method;
            try {
                method = benchstat::pairwise_method_from_string(method_str);
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            print_pairwise(benchstat::cache_load(in_path), method, as_json);
            return kExitOk;
        }
        if (cd_cmd->parsed()) {
            const benchstat::BenchmarkReport report = benchstat::cache_load(in_path);
            const benchstat::CdResult cd =
                benchstat::cd_analysis(report.tensor, cd_alpha);
            if (!svg_path.empty()) {
                write_file(svg_path, benchstat::render_cd_svg(cd));
            }
            if (as_json) {
                std::cout << benchstat::to_json(cd).dump(2) << "\n";
            } else {
                std::cout << "Friedman chi2 = " << cd.chi2_friedman
                          << "  p = " << cd.p_friedman << "\n"
                          << "CD_" << cd.alpha << " = " << cd.cd << "  (k=" << cd.k
                          << ", N=" << cd.N << ")\n";
                for (std::size_t i = 0; i < cd.models.size(); ++i) {
                    std::cout << "  " << cd.models[i] << "  mean rank "
                              << cd.mean_ranks[i] << "\n";
                }
            }
            return kExitOk;
        }
        if (export_cmd->parsed()) {
            if (format != "latex") {
                std::cerr << "error: unsupported format: " << format << "\n";
                return kExitUsage;
            }
            benchstat::LatexTable table;
            if (which == "summary") {
                table = benchstat::LatexTable::Summary;
            } else if (which == "pairwise") {
                table = benchstat::LatexTable::Pairwise;
            } else {
                std::cerr << "error: --which must be summary or pairwise\n";
                return kExitUsage;
            }
            const benchstat::BenchmarkReport report = benchstat::cache_load(in_path);
            const std::string latex = benchstat::to_latex(
                report, table, {winner_color, tie_color});
            if (export_out.empty()) {
                std::cout << latex;
            } else {
                write_file(export_out, latex);
            }
            return kExitOk;
        }
        if (calibrate_cmd->parsed()) {
            benchstat::PairwiseMethod method;
            try {
                method = benchstat::pairwise_method_from_string(cal_method);
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
            const benchstat::FwerEstimate est = benchstat::estimate_fwer(
                cal_runs, cal_k, cal_n, cal_s, cal_noise, cal_alpha, method,
                cal_seed);
            std::cout << benchstat::to_json(est).dump(2) << "\n";
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
