#pragma once

// Shared test fixtures: a ten-task, five-model tensor shaped like a real
// cross-category benchmark (one model incompatible with most tasks), with
// per-seed values constructed so that each cell reproduces a prescribed
// (mean, t-halfwidth) pair at S = 3.

#include <cmath>
#include <string>
#include <vector>

#include "benchstat/core.hpp"

namespace fixtures {

// t_{2, 0.975}; with values {m-d, m, m+d} the sample sd is exactly d, so the
// 95% halfwidth is t2 * d / sqrt(3).
inline constexpr double kT2 = 4.3026527297494639;

inline std::vector<double> cell_values(double mean, double halfwidth) {
    const double d = halfwidth * std::sqrt(3.0) / kT2;
    return {mean - d, mean, mean + d};
}

struct CellFixture {
    std::string model;
    double mean;
    double halfwidth;
};

struct TaskFixture {
    benchstat::TaskSpec spec;
    std::vector<CellFixture> cells;
};

inline benchstat::MetricTensor benchmark_tensor() {
    using benchstat::MetricDirection;
    using benchstat::TaskSpec;

    const auto task = [](std::string name, std::string category,
                         std::string task_type, std::string metric,
                         MetricDirection dir) {
        TaskSpec t;
        t.name = std::move(name);
        t.category = std::move(category);
        t.task_type = std::move(task_type);
        t.metric_name = std::move(metric);
        t.direction = dir;
        t.epochs = 10;
        return t;
    };
    const auto up = MetricDirection::HigherIsBetter;

    const std::vector<TaskFixture> table = {
        {task("TSP-random", "combinatorial", "link_pred", "AUC", up),
         {{"GCN", 0.864, 0.025}, {"GAT", 0.832, 0.017}, {"SAGE", 0.884, 0.021},
          {"GT", 0.871, 0.023}}},
        {task("MUTAG", "biology", "graph_cls", "Acc", up),
         {{"GCN", 0.705, 0.059}, {"GAT", 0.637, 0.038}, {"SAGE", 0.708, 0.050},
          {"GT", 0.721, 0.049}, {"GIN", 0.834, 0.036}}},
        {task("Cora", "social", "node_cls", "Acc", up),
         {{"GCN", 0.811, 0.001}, {"GAT", 0.793, 0.007}, {"SAGE", 0.798, 0.003},
          {"GT", 0.794, 0.004}}},
        {task("FB15k-237", "knowledge", "link_pred", "AUC", up),
         {{"GCN", 0.674, 0.009}, {"GAT", 0.528, 0.007}, {"SAGE", 0.633, 0.044},
          {"GT", 0.538, 0.012}}},
        {task("Euroroad", "infrastructure", "link_pred", "AUC", up),
         {{"GCN", 0.524, 0.019}, {"GAT", 0.609, 0.022}, {"SAGE", 0.534, 0.030},
          {"GT", 0.524, 0.021}}},
        {task("Board-directors", "finance", "link_pred", "AUC", up),
         {{"GCN", 0.968, 0.007}, {"GAT", 0.988, 0.002}, {"SAGE", 0.902, 0.016},
          {"GT", 0.847, 0.016}}},
        {task("Internet-AS", "computing", "link_pred", "AUC", up),
         {{"GCN", 0.967, 0.001}, {"GAT", 0.652, 0.015}, {"SAGE", 0.751, 0.018},
          {"GT", 0.598, 0.070}}},
        {task("MNIST-superpixels", "vision", "graph_cls", "Acc", up),
         {{"GCN", 0.103, 0.010}, {"GAT", 0.107, 0.010}, {"SAGE", 0.123, 0.017},
          {"GT", 0.137, 0.026}, {"GIN", 0.267, 0.038}}},
        {task("Ising-lattice", "physics", "link_pred", "AUC", up),
         {{"GCN", 0.676, 0.030}, {"GAT", 0.625, 0.031}, {"SAGE", 0.632, 0.021},
          {"GT", 0.628, 0.026}}},
        {task("terrorists-911", "security", "link_pred", "AUC", up),
         {{"GCN", 0.685, 0.096}, {"GAT", 0.756, 0.083}, {"SAGE", 0.700, 0.103},
          {"GT", 0.712, 0.089}}},
    };

    std::vector<TaskSpec> tasks;
    for (const auto& row : table) tasks.push_back(row.spec);
    benchstat::MetricTensor tensor(tasks, {"GCN", "GAT", "SAGE", "GT", "GIN"},
                                   {0, 1, 2});
    for (const auto& row : table) {
        for (const auto& cell : row.cells) {
            const std::vector<double> values =
                cell_values(cell.mean, cell.halfwidth);
            for (std::size_t s = 0; s < values.size(); ++s) {
                tensor.add_cell(row.spec.name, cell.model,
                                static_cast<std::int64_t>(s), values[s]);
            }
        }
    }
    return tensor;
}

}  // namespace fixtures
