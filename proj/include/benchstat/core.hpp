#pragma once

// Domain types shared by every layer: the metric tensor X[t, m, s], task and
// model registry entries, and the report configuration. Types are immutable
// after construction and safe to share across concurrent readers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "benchstat/version.hpp"

namespace benchstat {

enum class MetricDirection { HigherIsBetter, LowerIsBetter };

inline std::string to_string(MetricDirection d) {
    return d == MetricDirection::HigherIsBetter ? "higher_is_better"
                                                : "lower_is_better";
}

inline MetricDirection direction_from_string(const std::string& s) {
    if (s == "higher_is_better") return MetricDirection::HigherIsBetter;
    if (s == "lower_is_better") return MetricDirection::LowerIsBetter;
    throw std::invalid_argument("unknown metric direction: " + s);
}

struct TaskSpec {
    std::string name;
    std::string category;
    std::string task_type;  // node_cls | graph_cls | graph_reg | link_pred | custom
    std::string metric_name;
    MetricDirection direction = MetricDirection::HigherIsBetter;
    int epochs = 1;
    bool seed_aware_data = false;

    bool operator==(const TaskSpec&) const = default;
};

struct ModelSpec {
    std::string name;
    std::set<std::string> compatible_task_types;
    std::string executor_binding;

    bool compatible_with(const TaskSpec& task) const {
        return compatible_task_types.count(task.task_type) > 0;
    }

    bool operator==(const ModelSpec&) const = default;
};

enum class CiMethod { T, Bootstrap };
enum class PairwiseMethod { T, Wilcoxon, Both };

inline std::string to_string(CiMethod m) {
    return m == CiMethod::T ? "t" : "bootstrap";
}

inline CiMethod ci_method_from_string(const std::string& s) {
    if (s == "t") return CiMethod::T;
    if (s == "bootstrap") return CiMethod::Bootstrap;
    throw std::invalid_argument("unknown ci method: " + s);
}

inline std::string to_string(PairwiseMethod m) {
    switch (m) {
        case PairwiseMethod::T: return "t";
        case PairwiseMethod::Wilcoxon: return "wilcoxon";
        default: return "both";
    }
}

inline PairwiseMethod pairwise_method_from_string(const std::string& s) {
    if (s == "t") return PairwiseMethod::T;
    if (s == "wilcoxon") return PairwiseMethod::Wilcoxon;
    if (s == "both") return PairwiseMethod::Both;
    throw std::invalid_argument("unknown pairwise method: " + s);
}

struct ReportConfig {
    double alpha = 0.05;
    CiMethod ci_method = CiMethod::T;
    PairwiseMethod pairwise_method = PairwiseMethod::Both;
    int bootstrap_B = 10000;
    std::int64_t bootstrap_seed = 0;

    bool operator==(const ReportConfig&) const = default;

    void check() const {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("ReportConfig: alpha outside (0, 1)");
        }
        if (bootstrap_B < 1) {
            throw std::invalid_argument("ReportConfig: bootstrap_B must be >= 1");
        }
    }
};

// Per-seed final metrics indexed by (task, model, seed). Incompatible
// (task, model) pairs are encoded by absence, never by sentinel values.
class MetricTensor {
public:
    MetricTensor() = default;

    MetricTensor(std::vector<TaskSpec> tasks, std::vector<std::string> models,
                 std::vector<std::int64_t> seeds)
        : tasks_(std::move(tasks)),
          models_(std::move(models)),
          seeds_(std::move(seeds)) {}

    void add_cell(const std::string& task, const std::string& model,
                  std::int64_t seed, double value) {
        cells_[{task, model}][seed] = value;
    }

    const std::vector<TaskSpec>& tasks() const { return tasks_; }
    const std::vector<std::string>& models() const { return models_; }
    const std::vector<std::int64_t>& seeds() const { return seeds_; }

    const TaskSpec& task(const std::string& name) const {
        for (const auto& t : tasks_) {
            if (t.name == name) return t;
        }
        throw std::invalid_argument("unknown task: " + name);
    }

    bool has_pair(const std::string& task, const std::string& model) const {
        return cells_.count({task, model}) > 0;
    }

    // Models with cells on the given task, in registry order.
    std::vector<std::string> models_on(const std::string& task_name) const {
        task(task_name);  // throws on unknown task
        std::vector<std::string> out;
        for (const auto& m : models_) {
            if (has_pair(task_name, m)) out.push_back(m);
        }
        return out;
    }

    // Seed-aligned values for a present pair; order follows the seed list.
    std::vector<double> values(const std::string& task,
                               const std::string& model) const {
        const auto it = cells_.find({task, model});
        if (it == cells_.end()) {
            throw std::invalid_argument("no cells for (" + task + ", " + model + ")");
        }
        std::vector<double> out;
        out.reserve(seeds_.size());
        for (const auto s : seeds_) {
            const auto vit = it->second.find(s);
            if (vit == it->second.end()) {
                throw std::runtime_error("ragged seed set at (" + task + ", " +
                                         model + ")");
            }
            out.push_back(vit->second);
        }
        return out;
    }

    // Every invariant violation; empty means the tensor is valid.
    std::vector<std::string> validate() const {
        std::vector<std::string> v;
        std::set<std::string> task_names;
        for (const auto& t : tasks_) {
            if (!task_names.insert(t.name).second) {
                v.push_back("duplicate task name: " + t.name);
            }
            if (t.epochs < 1) {
                v.push_back("task " + t.name + ": epochs < 1");
            }
        }
        std::set<std::string> model_names;
        for (const auto& m : models_) {
            if (!model_names.insert(m).second) {
                v.push_back("duplicate model name: " + m);
            }
        }
        if (seeds_.empty()) v.push_back("empty seed list");
        for (std::size_t i = 1; i < seeds_.size(); ++i) {
            if (seeds_[i] <= seeds_[i - 1]) {
                v.push_back("seeds not strictly increasing");
                break;
            }
        }
        const std::set<std::int64_t> seed_set(seeds_.begin(), seeds_.end());
        for (const auto& [key, per_seed] : cells_) {
            const auto& [tname, mname] = key;
            if (!task_names.count(tname)) {
                v.push_back("cell references unknown task: " + tname);
            }
            if (!model_names.count(mname)) {
                v.push_back("cell references unknown model: " + mname);
            }
            bool ragged = per_seed.size() != seeds_.size();
            for (const auto& [seed, value] : per_seed) {
                if (!seed_set.count(seed)) ragged = true;
                if (!std::isfinite(value)) {
                    v.push_back("non-finite value at (" + tname + ", " + mname +
                                ", " + std::to_string(seed) + ")");
                }
            }
            if (ragged) {
                v.push_back("ragged seed set at (" + tname + ", " + mname + ")");
            }
        }
        return v;
    }

    // Cells in canonical (task, model, seed) registry order.
    struct Cell {
        std::string task;
        std::string model;
        std::int64_t seed;
        double value;
    };
    std::vector<Cell> cells_in_order() const {
        std::vector<Cell> out;
        for (const auto& t : tasks_) {
            for (const auto& m : models_) {
                const auto it = cells_.find({t.name, m});
                if (it == cells_.end()) continue;
                for (const auto s : seeds_) {
                    const auto vit = it->second.find(s);
                    if (vit != it->second.end()) {
                        out.push_back({t.name, m, s, vit->second});
                    }
                }
            }
        }
        return out;
    }

    bool operator==(const MetricTensor& other) const {
        return tasks_ == other.tasks_ && models_ == other.models_ &&
               seeds_ == other.seeds_ && cells_ == other.cells_;
    }

private:
    std::vector<TaskSpec> tasks_;
    std::vector<std::string> models_;
    std::vector<std::int64_t> seeds_;
    std::map<std::pair<std::string, std::string>, std::map<std::int64_t, double>>
        cells_;
};

// ---------------------------------------------------------------------------
// JSON serialization (schema_version 1)

inline nlohmann::json to_json(const TaskSpec& t) {
    return nlohmann::json{{"name", t.name},
                          {"category", t.category},
                          {"task_type", t.task_type},
                          {"metric_name", t.metric_name},
                          {"direction", to_string(t.direction)},
                          {"epochs", t.epochs},
                          {"seed_aware_data", t.seed_aware_data}};
}

inline TaskSpec task_from_json(const nlohmann::json& j) {
    TaskSpec t;
    t.name = j.at("name").get<std::string>();
    t.category = j.value("category", std::string{});
    t.task_type = j.at("task_type").get<std::string>();
    t.metric_name = j.value("metric_name", std::string{});
    t.direction = direction_from_string(j.at("direction").get<std::string>());
    t.epochs = j.value("epochs", 1);
    t.seed_aware_data = j.value("seed_aware_data", false);
    return t;
}

inline nlohmann::json to_json(const ModelSpec& m) {
    return nlohmann::json{
        {"name", m.name},
        {"compatible_task_types", m.compatible_task_types},
        {"executor_binding", m.executor_binding}};
}

inline ModelSpec model_from_json(const nlohmann::json& j) {
    ModelSpec m;
    m.name = j.at("name").get<std::string>();
    m.compatible_task_types =
        j.at("compatible_task_types").get<std::set<std::string>>();
    m.executor_binding = j.value("executor_binding", std::string{});
    return m;
}

inline nlohmann::json to_json(const ReportConfig& c) {
    return nlohmann::json{{"alpha", c.alpha},
                          {"ci_method", to_string(c.ci_method)},
                          {"pairwise_method", to_string(c.pairwise_method)},
                          {"bootstrap_B", c.bootstrap_B},
                          {"bootstrap_seed", c.bootstrap_seed}};
}

inline ReportConfig report_config_from_json(const nlohmann::json& j) {
    ReportConfig c;
    c.alpha = j.value("alpha", 0.05);
    c.ci_method = ci_method_from_string(j.value("ci_method", std::string{"t"}));
    c.pairwise_method =
        pairwise_method_from_string(j.value("pairwise_method", std::string{"both"}));
    c.bootstrap_B = j.value("bootstrap_B", 10000);
    c.bootstrap_seed = j.value("bootstrap_seed", static_cast<std::int64_t>(0));
    c.check();
    return c;
}

inline nlohmann::json to_json(const MetricTensor& x) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : x.tasks()) tasks.push_back(to_json(t));
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : x.cells_in_order()) {
        cells.push_back(nlohmann::json{{"task", c.task},
                                       {"model", c.model},
                                       {"seed", c.seed},
                                       {"value", c.value}});
    }
    return nlohmann::json{{"schema_version", kTensorSchemaVersion},
                          {"tasks", std::move(tasks)},
                          {"models", x.models()},
                          {"seeds", x.seeds()},
                          {"cells", std::move(cells)}};
}

inline MetricTensor tensor_from_json(const nlohmann::json& j) {
    if (j.value("schema_version", kTensorSchemaVersion) != kTensorSchemaVersion) {
        throw std::runtime_error("unsupported metric tensor schema version");
    }
    std::vector<TaskSpec> tasks;
    for (const auto& tj : j.at("tasks")) tasks.push_back(task_from_json(tj));
    MetricTensor x(std::move(tasks),
                   j.at("models").get<std::vector<std::string>>(),
                   j.at("seeds").get<std::vector<std::int64_t>>());
    for (const auto& cj : j.at("cells")) {
        x.add_cell(cj.at("task").get<std::string>(),
                   cj.at("model").get<std::string>(),
                   cj.at("seed").get<std::int64_t>(),
                   cj.at("value").get<double>());
    }
    return x;
}

// ---------------------------------------------------------------------------
// CSV ingestion: header `task,model,seed,value` plus a sidecar task-spec JSON
// carrying `tasks` (array of TaskSpec) and optionally `models` (name order).

inline MetricTensor tensor_from_csv(std::istream& csv,
                                    const nlohmann::json& sidecar) {
    std::vector<TaskSpec> tasks;
    for (const auto& tj : sidecar.at("tasks")) tasks.push_back(task_from_json(tj));

    std::string line;
    if (!std::getline(csv, line)) {
        throw std::runtime_error("empty CSV input");
    }
    if (line != "task,model,seed,value") {
        throw std::runtime_error("CSV header must be 'task,model,seed,value'");
    }
    struct Row {
        std::string task, model;
        std::int64_t seed;
        double value;
    };
    std::vector<Row> rows;
    while (std::getline(csv, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        Row r;
        std::string seed_s, value_s;
        if (!std::getline(ss, r.task, ',') || !std::getline(ss, r.model, ',') ||
            !std::getline(ss, seed_s, ',') || !std::getline(ss, value_s)) {
            throw std::runtime_error("malformed CSV row: " + line);
        }
        r.seed = std::stoll(seed_s);
        r.value = std::stod(value_s);
        rows.push_back(std::move(r));
    }

    std::vector<std::string> models;
    if (sidecar.contains("models")) {
        models = sidecar.at("models").get<std::vector<std::string>>();
    } else {
        for (const auto& r : rows) {
            if (std::find(models.begin(), models.end(), r.model) == models.end()) {
                models.push_back(r.model);
            }
        }
    }
    std::set<std::int64_t> seed_set;
    for (const auto& r : rows) seed_set.insert(r.seed);

    MetricTensor x(std::move(tasks), std::move(models),
                   std::vector<std::int64_t>(seed_set.begin(), seed_set.end()));
    for (const auto& r : rows) x.add_cell(r.task, r.model, r.seed, r.value);
    return x;
}

}  // namespace benchstat
