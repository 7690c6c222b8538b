#include <doctest.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "benchstat/rng.hpp"
#include "benchstat/runner.hpp"

using namespace benchstat;

namespace {

TaskSpec make_task(const std::string& name, const std::string& type,
                   int epochs = 1) {
    TaskSpec t;
    t.name = name;
    t.category = "test";
    t.task_type = type;
    t.metric_name = "Acc";
    t.epochs = epochs;
    return t;
}

ModelSpec make_model(const std::string& name,
                     std::set<std::string> types = {"node_cls"}) {
    ModelSpec m;
    m.name = name;
    m.compatible_task_types = std::move(types);
    return m;
}

// Executor whose output encodes the triple, so tensor placement is checkable.
Executor tagging_executor(std::atomic<int>* calls = nullptr) {
    return [calls](const TrialRequest& req, StreamBundle&) {
        if (calls) calls->fetch_add(1);
        TrialOutcome out;
        out.final_metric = double(fnv1a64(req.task.name + "/" + req.model.name) %
                                  1000) +
                           double(req.seed) * 0.001 + double(req.epochs) * 0.1;
        return out;
    };
}

}  // namespace

TEST_CASE("fnv1a64 reference vectors") {
    CHECK(fnv1a64("") == 14695981039346656037ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
}

TEST_CASE("reseed_all stream independence") {
    const StreamBundle a = reseed_all(3, "Cora", "GCN");
    StreamBundle a2 = reseed_all(3, "Cora", "GCN");
    StreamBundle mut = reseed_all(3, "Cora", "GCN");
    CHECK(mut.model_init.next_u64() == a2.model_init.next_u64());
    CHECK(mut.data.next_u64() == a2.data.next_u64());
    CHECK(mut.trial_noise.next_u64() == a2.trial_noise.next_u64());

    // streams within a bundle differ
    StreamBundle b = reseed_all(3, "Cora", "GCN");
    const std::uint64_t v1 = b.model_init.next_u64();
    const std::uint64_t v2 = b.data.next_u64();
    const std::uint64_t v3 = b.trial_noise.next_u64();
    CHECK(v1 != v2);
    CHECK(v2 != v3);

    // any coordinate change moves every stream
    for (StreamBundle other : {reseed_all(4, "Cora", "GCN"),
                               reseed_all(3, "CiteSeer", "GCN"),
                               reseed_all(3, "Cora", "GAT")}) {
        CHECK(other.trial_noise.next_u64() != v3);
    }
    (void)a;
}

TEST_CASE("Rng stream properties") {
    Rng r(123);
    Rng r2(123);
    for (int i = 0; i < 100; ++i) CHECK(r.next_u64() == r2.next_u64());
    Rng u(7);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
        CHECK(u.uniform_index(10) < 10);
    }
    // normal stream roughly centered
    Rng g(11);
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) sum += g.normal();
    CHECK(std::fabs(sum / 10000.0) < 0.05);
}

TEST_CASE("Registry registration rules") {
    Registry reg;
    reg.register_task("social", make_task("Cora", "node_cls"));
    reg.register_task("social", make_task("CiteSeer", "node_cls"));
    reg.register_task("bio", make_task("MUTAG", "graph_cls"));

    CHECK_THROWS_AS(reg.register_task("bio", make_task("Cora", "node_cls")),
                    std::invalid_argument);  // globally unique names

    reg.register_model(make_model("GCN"));
    CHECK_THROWS_AS(reg.register_model(make_model("GCN")),
                    std::invalid_argument);
    CHECK_THROWS_AS(reg.register_model(make_model("bad", {})),
                    std::invalid_argument);

    CHECK(reg.has_category("social"));
    CHECK_FALSE(reg.has_category("vision"));
    const auto social = reg.tasks_in_category("social");
    REQUIRE(social.size() == 2);
    CHECK(social[0].name == "Cora");  // registration order
    CHECK_THROWS_AS(reg.tasks_in_category("vision"), std::invalid_argument);
    CHECK(reg.model("GCN").name == "GCN");
    CHECK_THROWS_AS(reg.model("GAT"), std::invalid_argument);

    reg.unregister_task("social", "CiteSeer");
    CHECK(reg.tasks_in_category("social").size() == 1);
    CHECK_THROWS_AS(reg.unregister_task("social", "CiteSeer"),
                    std::invalid_argument);
}

TEST_CASE("resolve_tasks filtering") {
    Registry reg;
    reg.register_task("mixed", make_task("n1", "node_cls"));
    reg.register_task("mixed", make_task("g1", "graph_cls"));
    reg.register_task("mixed", make_task("n2", "node_cls"));

    CHECK(resolve_tasks(reg, "mixed").size() == 3);
    const auto nodes = resolve_tasks(reg, "mixed", "node_cls");
    REQUIRE(nodes.size() == 2);
    CHECK(nodes[0].name == "n1");
    CHECK_THROWS_AS(resolve_tasks(reg, "mixed", "link_pred"),
                    std::invalid_argument);

    // explicit-list overload
    const auto explicit_tasks = resolve_tasks(
        std::vector<TaskSpec>{make_task("x", "node_cls")}, std::nullopt);
    CHECK(explicit_tasks.size() == 1);
    CHECK_THROWS_AS(
        resolve_tasks(std::vector<TaskSpec>{make_task("x", "node_cls")},
                      std::optional<std::string>{"graph_cls"}),
        std::invalid_argument);
}

TEST_CASE("RunConfig validation") {
    RunConfig c;
    c.category = "test";
    CHECK_NOTHROW(c.check());
    CHECK(c.seeds == std::vector<std::int64_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

    c.seeds = {};
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
    c.seeds = {1, 1};
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
    c.seeds = {0, 1};
    c.parallelism = 0;
    CHECK_THROWS_AS(c.check(), std::invalid_argument);
}

TEST_CASE("run_benchmark executes the full grid in canonical order") {
    Registry reg;
    reg.register_task("test", make_task("t1", "node_cls", 5));
    reg.register_task("test", make_task("t2", "graph_cls", 3));
    reg.register_model(make_model("m1", {"node_cls", "graph_cls"}));
    reg.register_model(make_model("m2", {"node_cls"}));

    RunConfig config;
    config.category = "test";
    config.seeds = {2, 0, 1};  // deliberately unsorted
    config.epoch_overrides["t2"] = 7;

    std::atomic<int> calls{0};
    const BenchmarkReport report =
        run_benchmark(config, reg, tagging_executor(&calls));

    // m2 is incompatible with t2: 3 pairs x 3 seeds
    CHECK(calls.load() == 9);
    CHECK(report.tensor.seeds() == std::vector<std::int64_t>{0, 1, 2});
    CHECK(report.tensor.has_pair("t1", "m2"));
    CHECK_FALSE(report.tensor.has_pair("t2", "m2"));
    // epoch override reaches the executor (0.1 per epoch in the tag)
    const double base = double(fnv1a64("t2/m1") % 1000);
    CHECK(report.tensor.values("t2", "m1")[0] ==
          doctest::Approx(base + 0.7).epsilon(1e-12));
    CHECK(report.tensor.validate().empty());
}

TEST_CASE("parallel and serial runs are byte-identical") {
    Registry reg;
    for (int t = 0; t < 6; ++t) {
        reg.register_task("test", make_task("t" + std::to_string(t), "node_cls"));
    }
    for (int m = 0; m < 3; ++m) {
        reg.register_model(make_model("m" + std::to_string(m)));
    }
    // executor that consumes the streams, so scheduling bugs would surface
    const Executor executor = [](const TrialRequest&, StreamBundle& s) {
        TrialOutcome out;
        out.final_metric = s.trial_noise.normal() + s.model_init.uniform();
        return out;
    };

    RunConfig serial;
    serial.category = "test";
    serial.seeds = {0, 1, 2, 3};
    RunConfig parallel = serial;
    parallel.parallelism = 8;

    const std::string a = serialize_cache(run_benchmark(serial, reg, executor));
    const std::string b =
        serialize_cache(run_benchmark(parallel, reg, executor));
    CHECK(a == b);
}

TEST_CASE("trial failures abort the run with the failing triple") {
    Registry reg;
    reg.register_task("test", make_task("t1", "node_cls"));
    reg.register_model(make_model("m1"));
    RunConfig config;
    config.category = "test";
    config.seeds = {0, 1};

    SUBCASE("executor exception") {
        const Executor failing = [](const TrialRequest& req,
                                    StreamBundle&) -> TrialOutcome {
            if (req.seed == 1) throw std::runtime_error("diverged");
            return {0.5, {}, 0.0};
        };
        try {
            run_benchmark(config, reg, failing);
            FAIL("expected TrialError");
        } catch (const TrialError& e) {
            CHECK(e.task() == "t1");
            CHECK(e.model() == "m1");
            CHECK(e.seed() == 1);
            CHECK(std::string(e.what()).find("diverged") != std::string::npos);
        }
    }
    SUBCASE("non-finite metric") {
        const Executor nan_exec = [](const TrialRequest&, StreamBundle&) {
            return TrialOutcome{std::nan(""), {}, 0.0};
        };
        CHECK_THROWS_AS(run_benchmark(config, reg, nan_exec), TrialError);
    }
    SUBCASE("no compatible work") {
        RunConfig bad = config;
        bad.model_names = {"m1"};
        Registry reg2;
        reg2.register_task("test", make_task("g1", "graph_cls"));
        reg2.register_model(make_model("m1"));  // node_cls only
        bad.category = "test";
        const BenchmarkReport r = run_benchmark(bad, reg2, tagging_executor());
        // grid resolves but the tensor has no cells; validate still passes
        CHECK(r.cells.empty());
    }
}

TEST_CASE("run_benchmark writes the cache when asked") {
    Registry reg;
    reg.register_task("test", make_task("t1", "node_cls"));
    reg.register_task("test", make_task("t2", "node_cls"));
    reg.register_model(make_model("m1"));
    reg.register_model(make_model("m2"));

    RunConfig config;
    config.category = "test";
    config.seeds = {0, 1, 2};
    const std::string path = "bs_test_runner_cache.json";
    config.cache_path = path;

    const BenchmarkReport report =
        run_benchmark(config, reg, tagging_executor());
    const BenchmarkReport loaded = cache_load(path);
    CHECK(serialize_cache(loaded) == serialize_cache(report));
    std::remove(path.c_str());
}

TEST_CASE("external executor") {
    TrialRequest req;
    req.task = make_task("Cora", "node_cls");
    req.model = make_model("GCN");
    req.seed = 3;
    req.epochs = 20;

    SUBCASE("reads one JSON object from stdout") {
        const TrialOutcome out = execute_trial_external(
            req, "printf '{\"final_metric\": 0.5, \"per_epoch\": [0.1, 0.2]}'");
        CHECK(out.final_metric == 0.5);
        CHECK(out.per_epoch == std::vector<double>{0.1, 0.2});
        CHECK(out.wall_time_seconds >= 0.0);
    }
    SUBCASE("placeholders are substituted") {
        const TrialOutcome out = execute_trial_external(
            req, "printf '{\"final_metric\": {seed}{epochs}}'");
        CHECK(out.final_metric == 320.0);
    }
    SUBCASE("environment variables are exported") {
        const TrialOutcome out = execute_trial_external(
            req,
            "printf '{\"final_metric\": %s}' \"$BENCH_SEED\"; "
            "test \"$BENCH_TASK\" = Cora && test \"$BENCH_MODEL\" = GCN");
        CHECK(out.final_metric == 3.0);
    }
    SUBCASE("nonzero exit carries stderr into the error") {
        CHECK_THROWS_WITH_AS(
            execute_trial_external(req, "echo boom >&2; exit 4"),
            doctest::Contains("boom"), TrialError);
    }
    SUBCASE("malformed output is a trial error") {
        CHECK_THROWS_AS(execute_trial_external(req, "printf 'not json'"),
                        TrialError);
        CHECK_THROWS_AS(
            execute_trial_external(req, "printf '{\"final_metric\": \"hi\"}'"),
            TrialError);
        CHECK_THROWS_AS(execute_trial_external(req, "printf '{}'"), TrialError);
    }
    SUBCASE("timeout kills the child") {
        CHECK_THROWS_WITH_AS(
            execute_trial_external(req, "sleep 30", 0.2),
            doctest::Contains("timeout"), TrialError);
    }
    SUBCASE("make_external_executor wraps the template") {
        const Executor ex =
            make_external_executor("printf '{\"final_metric\": {seed}}'");
        StreamBundle streams = reseed_all(req.seed, req.task.name, req.model.name);
        CHECK(ex(req, streams).final_metric == 3.0);
    }
}
