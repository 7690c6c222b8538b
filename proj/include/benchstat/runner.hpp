#pragma once

// Benchmark orchestration: task/model registries, compatibility filtering,
// the seed loop with deterministic per-(task, model, seed) RNG streams,
// pluggable trial executors, and report caching. Trials are independent
// units and may execute concurrently; results merge in canonical
// (task, model, seed) order so parallel and serial runs are byte-identical.

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "benchstat/core.hpp"
#include "benchstat/report.hpp"
#include "benchstat/rng.hpp"

namespace benchstat {

struct TrialRequest {
    TaskSpec task;
    ModelSpec model;
    std::int64_t seed = 0;
    int epochs = 1;
};

struct TrialOutcome {
    double final_metric = 0.0;
    std::vector<double> per_epoch;  // stored opportunistically, never analyzed
    double wall_time_seconds = 0.0;
};

// A failing trial aborts the whole run with the failing triple identified;
// partial tensors are never reported.
class TrialError : public std::runtime_error {
public:
    TrialError(const std::string& task, const std::string& model,
               std::int64_t seed, const std::string& detail)
        : std::runtime_error("trial failed at (" + task + ", " + model + ", " +
                             std::to_string(seed) + "): " + detail),
          task_(task),
          model_(model),
          seed_(seed) {}

    const std::string& task() const { return task_; }
    const std::string& model() const { return model_; }
    std::int64_t seed() const { return seed_; }

private:
    std::string task_;
    std::string model_;
    std::int64_t seed_;
};

// Independent deterministic generator streams for one (task, model, seed)
// triple. Key derivation: hash64(task) ^ hash64(model) ^ seed with a
// distinct FNV-1a tag per stream, so cross-platform runs agree.
struct StreamBundle {
    Rng model_init;
    Rng data;
    Rng trial_noise;
};

inline StreamBundle reseed_all(std::int64_t seed, const std::string& task,
                               const std::string& model) {
    const std::uint64_t key =
        fnv1a64(task) ^ fnv1a64(model) ^ static_cast<std::uint64_t>(seed);
    return StreamBundle{Rng(key ^ fnv1a64("model_init")),
                        Rng(key ^ fnv1a64("data")),
                        Rng(key ^ fnv1a64("trial_noise"))};
}

using Executor =
    std::function<TrialOutcome(const TrialRequest&, StreamBundle&)>;

// Task registry: category -> tasks in registration order; model registry in
// registration order. Registration is idempotent-checked.
class Registry {
public:
    void register_task(const std::string& category, TaskSpec spec) {
        for (const auto& [cat, tasks] : tasks_) {
            for (const auto& t : tasks) {
                if (t.name == spec.name) {
                    throw std::invalid_argument("task already registered: " +
                                                spec.name);
                }
            }
        }
        auto it = std::find_if(tasks_.begin(), tasks_.end(),
                               [&](const auto& e) { return e.first == category; });
        if (it == tasks_.end()) {
            tasks_.emplace_back(category, std::vector<TaskSpec>{});
            it = std::prev(tasks_.end());
        }
        spec.category = category;
        it->second.push_back(std::move(spec));
    }

    void unregister_task(const std::string& category, const std::string& name) {
        for (auto& [cat, tasks] : tasks_) {
            if (cat != category) continue;
            const auto it = std::find_if(
                tasks.begin(), tasks.end(),
                [&](const TaskSpec& t) { return t.name == name; });
            if (it != tasks.end()) {
                tasks.erase(it);
                return;
            }
        }
        throw std::invalid_argument("unregister_task: unknown task " + name +
                                    " in category " + category);
    }

    void register_model(ModelSpec spec) {
        if (spec.compatible_task_types.empty()) {
            throw std::invalid_argument("model " + spec.name +
                                        ": empty compatibility set");
        }
        for (const auto& m : models_) {
            if (m.name == spec.name) {
                throw std::invalid_argument("model already registered: " +
                                            spec.name);
            }
        }
        models_.push_back(std::move(spec));
    }

    const std::vector<ModelSpec>& models() const { return models_; }

    const ModelSpec& model(const std::string& name) const {
        for (const auto& m : models_) {
            if (m.name == name) return m;
        }
        throw std::invalid_argument("unknown model: " + name);
    }

    bool has_category(const std::string& category) const {
        return std::any_of(tasks_.begin(), tasks_.end(),
                           [&](const auto& e) { return e.first == category; });
    }

    std::vector<TaskSpec> tasks_in_category(const std::string& category) const {
        for (const auto& [cat, tasks] : tasks_) {
            if (cat == category) return tasks;
        }
        throw std::invalid_argument("unknown category: " + category);
    }

private:
    std::vector<std::pair<std::string, std::vector<TaskSpec>>> tasks_;
    std::vector<ModelSpec> models_;
};

// Resolve a category selector to its tasks in registration order, with an
// optional task-type filter. An empty result is an error: nothing to
// benchmark.
inline std::vector<TaskSpec> resolve_tasks(
    const Registry& registry, const std::string& category,
    const std::optional<std::string>& task_type = std::nullopt) {
    std::vector<TaskSpec> tasks = registry.tasks_in_category(category);
    if (task_type) {
        std::erase_if(tasks, [&](const TaskSpec& t) {
            return t.task_type != *task_type;
        });
    }
    if (tasks.empty()) {
        throw std::invalid_argument("no tasks resolved for category " + category);
    }
    return tasks;
}

inline std::vector<TaskSpec> resolve_tasks(
    std::vector<TaskSpec> explicit_tasks,
    const std::optional<std::string>& task_type = std::nullopt) {
    if (task_type) {
        std::erase_if(explicit_tasks, [&](const TaskSpec& t) {
            return t.task_type != *task_type;
        });
    }
    if (explicit_tasks.empty()) {
        throw std::invalid_argument("no tasks resolved from explicit list");
    }
    return explicit_tasks;
}

struct RunConfig {
    std::string category;          // used when explicit_tasks is empty
    std::vector<TaskSpec> explicit_tasks;
    std::optional<std::string> task_type_filter;
    std::vector<std::string> model_names;  // empty = every registered model
    std::vector<std::int64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::map<std::string, int> epoch_overrides;  // task name -> epochs
    ReportConfig report;
    int parallelism = 1;
    std::optional<std::string> cache_path;

    void check() const {
        if (seeds.empty()) throw std::invalid_argument("RunConfig: empty seed list");
        if (std::set<std::int64_t>(seeds.begin(), seeds.end()).size() !=
            seeds.size()) {
            throw std::invalid_argument("RunConfig: duplicate seeds");
        }
        if (parallelism < 1) {
            throw std::invalid_argument("RunConfig: parallelism must be >= 1");
        }
        report.check();
    }
};

// Algorithm: for each task, each compatible model, each seed -- reseed,
// execute the trial, record the final metric -- then build the report.
// Output is independent of trial execution order.
inline BenchmarkReport run_benchmark(const RunConfig& config,
                                     const Registry& registry,
                                     const Executor& executor) {
    config.check();

    std::vector<TaskSpec> tasks =
        config.explicit_tasks.empty()
            ? resolve_tasks(registry, config.category, config.task_type_filter)
            : resolve_tasks(config.explicit_tasks, config.task_type_filter);

    std::vector<ModelSpec> models;
    if (config.model_names.empty()) {
        models = registry.models();
    } else {
        for (const auto& name : config.model_names) {
            models.push_back(registry.model(name));
        }
    }
    if (models.empty()) throw std::invalid_argument("no models to benchmark");

    std::vector<std::int64_t> seeds = config.seeds;
    std::sort(seeds.begin(), seeds.end());

    struct Job {
        TrialRequest request;
    };
    std::vector<Job> jobs;
    for (const auto& t : tasks) {
        for (const auto& m : models) {
            if (!m.compatible_with(t)) continue;  // skipped automatically
            int epochs = t.epochs;
            const auto ov = config.epoch_overrides.find(t.name);
            if (ov != config.epoch_overrides.end()) epochs = ov->second;
            for (const auto s : seeds) {
                jobs.push_back({TrialRequest{t, m, s, epochs}});
            }
        }
    }

    std::vector<std::optional<TrialOutcome>> outcomes(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());
    std::atomic<std::size_t> next{0};
    const int workers =
        std::min<int>(config.parallelism, static_cast<int>(jobs.size()));

    const auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const TrialRequest& req = jobs[i].request;
            try {
                StreamBundle streams =
                    reseed_all(req.seed, req.task.name, req.model.name);
                outcomes[i] = executor(req, streams);
                if (!std::isfinite(outcomes[i]->final_metric)) {
                    throw std::runtime_error("non-finite final metric");
                }
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (errors[i]) {
            const TrialRequest& req = jobs[i].request;
            try {
                std::rethrow_exception(errors[i]);
            } catch (const TrialError&) {
                throw;
            } catch (const std::exception& e) {
                throw TrialError(req.task.name, req.model.name, req.seed,
                                 e.what());
            }
        }
    }

    std::vector<std::string> model_names;
    for (const auto& m : models) model_names.push_back(m.name);
    MetricTensor tensor(tasks, model_names, seeds);
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const TrialRequest& req = jobs[i].request;
        tensor.add_cell(req.task.name, req.model.name, req.seed,
                        outcomes[i]->final_metric);
    }

    BenchmarkReport report = build_report(tensor, config.report);
    if (config.cache_path) cache_save(report, *config.cache_path);
    return report;
}

// ---------------------------------------------------------------------------
// External trial executor. Spawns the command template with {task}, {model},
// {seed}, {epochs} substituted and BENCH_TASK / BENCH_MODEL / BENCH_SEED
// exported, then reads one JSON object {"final_metric": real,
// "per_epoch": optional array} from its standard output.

namespace detail {

inline void replace_all(std::string& s, const std::string& from,
                        const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

}  // namespace detail

inline TrialOutcome execute_trial_external(const TrialRequest& request,
                                           const std::string& command_template,
                                           double timeout_seconds = 3600.0) {
    std::string cmd = command_template;
    detail::replace_all(cmd, "{task}", request.task.name);
    detail::replace_all(cmd, "{model}", request.model.name);
    detail::replace_all(cmd, "{seed}", std::to_string(request.seed));
    detail::replace_all(cmd, "{epochs}", std::to_string(request.epochs));

    int out_pipe[2];
    int err_pipe[2];
    if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
        throw TrialError(request.task.name, request.model.name, request.seed,
                         "pipe() failed");
    }
    const auto start = std::chrono::steady_clock::now();
    const pid_t pid = fork();
    if (pid < 0) {
        throw TrialError(request.task.name, request.model.name, request.seed,
                         "fork() failed");
    }
    if (pid == 0) {
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        setenv("BENCH_TASK", request.task.name.c_str(), 1);
        setenv("BENCH_MODEL", request.model.name.c_str(), 1);
        setenv("BENCH_SEED", std::to_string(request.seed).c_str(), 1);
        execl("/bin/sh", "sh", "-c", cmd.c_str(), (char*)nullptr);
        _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);

    std::string out_buf;
    std::string err_buf;
    bool out_open = true;
    bool err_open = true;
    const auto deadline =
        start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(timeout_seconds));
    while (out_open || err_open) {
        struct pollfd fds[2];
        int nfds = 0;
        if (out_open) fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (err_open) fds[nfds++] = {err_pipe[0], POLLIN, 0};
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            kill(pid, SIGKILL);
            waitpid(pid, nullptr, 0);
            close(out_pipe[0]);
            close(err_pipe[0]);
            throw TrialError(request.task.name, request.model.name,
                             request.seed, "timeout after " +
                                 std::to_string(timeout_seconds) + "s");
        }
        const int wait_ms = static_cast<int>(
            std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now)
                .count());
        const int rc = poll(fds, nfds, std::max(1, std::min(wait_ms, 1000)));
        if (rc < 0) break;
        char chunk[4096];
        for (int f = 0; f < nfds; ++f) {
            if (!(fds[f].revents & (POLLIN | POLLHUP))) continue;
            const ssize_t n = read(fds[f].fd, chunk, sizeof chunk);
            const bool is_out = fds[f].fd == out_pipe[0];
            if (n > 0) {
                (is_out ? out_buf : err_buf).append(chunk, std::size_t(n));
            } else {
                (is_out ? out_open : err_open) = false;
            }
        }
    }
    close(out_pipe[0]);
    close(err_pipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();

    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        throw TrialError(request.task.name, request.model.name, request.seed,
                         "command exited with status " +
                             std::to_string(WIFEXITED(status)
                                                ? WEXITSTATUS(status)
                                                : -1) +
                             "; stderr: " + err_buf);
    }

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(out_buf);
    } catch (const nlohmann::json::exception& e) {
        throw TrialError(request.task.name, request.model.name, request.seed,
                         std::string("malformed trial output: ") + e.what());
    }
    if (!j.is_object() || !j.contains("final_metric") ||
        !j.at("final_metric").is_number()) {
        throw TrialError(request.task.name, request.model.name, request.seed,
                         "trial output missing numeric final_metric");
    }
    TrialOutcome outcome;
    outcome.final_metric = j.at("final_metric").get<double>();
    if (j.contains("per_epoch") && j.at("per_epoch").is_array()) {
        outcome.per_epoch = j.at("per_epoch").get<std::vector<double>>();
    }
    outcome.wall_time_seconds = wall;
    return outcome;
}

// Wraps a command template as an Executor; timeout applies per trial.
inline Executor make_external_executor(std::string command_template,
                                       double timeout_seconds = 3600.0) {
    return [command_template = std::move(command_template), timeout_seconds](
               const TrialRequest& request, StreamBundle&) {
        return execute_trial_external(request, command_template,
                                      timeout_seconds);
    };
}

}  // namespace benchstat
