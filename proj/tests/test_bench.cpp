#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <sys/wait.h>
#include <unistd.h>

#include "api_harness.hpp"
#include "metasolver/bench.hpp"
#include "metasolver/classical.hpp"
#include "metasolver/decomposition.hpp"
#include "metasolver/errors.hpp"
#include "support.hpp"

using namespace metasolver;
using namespace metasolver::bench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("metasolver-bench-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) { return api_harness::slurp(p.string()); }

int run_cli(const std::string& args) {
    const int raw = std::system((std::string(BENCH_EXE) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

}  // namespace

TEST_CASE("generated suite: determinism, sizes and structure") {
    const auto suite = generate_suite(42);
    CHECK(suite == generate_suite(42));
    CHECK_FALSE(suite == generate_suite(43));

    std::map<std::size_t, int> histogram;
    for (const auto& v : suite) {
        const auto n = v.customers().size();
        ++histogram[n];
        CHECK(v.max_vehicles == std::optional<std::int64_t>(2));
        CHECK(v.capacity == static_cast<std::int64_t>((n + 1) / 2));
        CHECK(v.demand_of(v.depot) == 0);
        for (auto c : v.customers()) CHECK(v.demand_of(c) == 1);
        for (const auto& node : v.nodes) {
            CHECK(node.x >= 0.0);
            CHECK(node.x <= 100.0);
            CHECK(node.y >= 0.0);
            CHECK(node.y <= 100.0);
        }
        // Two routes always suffice.
        CHECK(2 * v.capacity >= v.total_demand());
    }
    CHECK(histogram == std::map<std::size_t, int>{{4, 2}, {5, 2}, {6, 2}, {7, 2}, {8, 2}});

    const auto a = scratch("gen-a"), b = scratch("gen-b");
    write_suite(suite, a);
    write_suite(generate_suite(42), b);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        ++files;
        CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    CHECK(files == 10);
    CHECK(load_suite(a) == suite);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("baselines agree with a two-route enumeration oracle and are ordered") {
    for (const auto& v : generate_suite(42)) {
        CAPTURE(v.name);
        const auto b = compute_baselines(v);
        CHECK(classical::nearly_equal(b.without_clustering, testing_support::two_route_oracle(v), 1e-9));

        const auto clustering = decomposition::two_phase_cluster(v, classical::knapsack_dp);
        double clustered = 0.0;
        for (const auto& cluster : clustering.clusters) clustered += testing_support::tour_oracle(v, cluster);
        CHECK(classical::nearly_equal(b.with_clustering, clustered, 1e-9));
        CHECK(b.without_clustering <= b.with_clustering + 1e-9);
    }
}

TEST_CASE("baselines: unconstraining clustering and one customer per cluster") {
    VrpInstance far;
    far.name = "far";
    far.depot = 1;
    far.capacity = 2;
    far.max_vehicles = 2;
    far.nodes = {{1, 50, 50}, {2, 95, 50}, {3, 96, 52}, {4, 5, 50}, {5, 4, 48}};
    for (auto& n : far.nodes) far.demand[n.id] = n.id == 1 ? 0 : 1;
    const auto b = compute_baselines(far);
    CHECK(b.without_clustering == b.with_clustering);

    VrpInstance single = far;
    single.capacity = 1;
    single.max_vehicles = std::nullopt;
    double expected = 0.0;
    for (auto c : single.customers()) expected += 2.0 * testing_support::hyp(single.node(1), single.node(c));
    CHECK(compute_baselines(single).with_clustering == doctest::Approx(expected).epsilon(1e-12));

    testing_support::Rng rng(3);
    CHECK_THROWS_AS(compute_baselines(testing_support::random_vrp(rng, 9, 5, 2)), TooLarge);
}

TEST_CASE("embedded pipelines: classical is deterministic and optimal, hybrid is valid") {
    EmbeddedDriver driver;
    const auto suite = generate_suite(7);
    for (std::size_t i : {0u, 3u, 6u}) {
        const auto& v = suite[i];
        CAPTURE(v.name);
        const auto b = compute_baselines(v);
        const auto classical_runs = run_pipeline(driver, v, Pipeline::Classical, 4, 11);
        REQUIRE(classical_runs.size() == 4);
        for (const auto& r : classical_runs) {
            CHECK(r.valid);
            CHECK(r.status == "SOLVED");
            CHECK(r.route_length == classical_runs.front().route_length);
            CHECK(classical::nearly_equal(r.route_length, b.with_clustering, 1e-9));
        }
        std::set<std::uint64_t> seeds;
        for (const auto& r : run_pipeline(driver, v, Pipeline::Hybrid, 3, 11)) {
            CHECK(r.valid);
            CHECK(r.route_length >= b.with_clustering - 1e-9 * b.with_clustering);
            seeds.insert(r.seed);
        }
        CHECK(seeds.size() == 3);
        for (const auto& r : run_pipeline(driver, v, Pipeline::Classical, 2, 11, TspStep::TwoOpt)) {
            CHECK(r.valid);
            CHECK(r.route_length >= b.with_clustering - 1e-9 * b.with_clustering);
        }
    }
}

TEST_CASE("HTTP driver matches the embedded driver") {
    api_harness::TestServer server;
    HttpDriver http("http://127.0.0.1:" + std::to_string(server.port()));
    EmbeddedDriver embedded;
    const auto v = generate_suite(5)[4];
    const auto over_http = run_pipeline(http, v, Pipeline::Classical, 2, 9);
    const auto in_process = run_pipeline(embedded, v, Pipeline::Classical, 2, 9);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(over_http[i].valid);
        CHECK(over_http[i].route_length == in_process[i].route_length);
        CHECK(over_http[i].seed == in_process[i].seed);
    }

    HttpDriver nowhere("http://127.0.0.1:1");
    const auto failed = run_pipeline(nowhere, v, Pipeline::Classical, 1, 9);
    CHECK_FALSE(failed.front().valid);
    CHECK(std::isnan(failed.front().route_length));
}

TEST_CASE("CSV and summary") {
    CHECK(runs_to_csv({}) == std::string(kCsvHeader) + "\n");
    CHECK(runs_from_csv(runs_to_csv({})).empty());

    std::vector<BenchmarkRun> runs;
    for (std::size_t i = 0; i < 100; ++i) {
        BenchmarkRun r;
        r.instance_name = "inst" + std::to_string(i / 10);
        r.pipeline = i % 2 ? Pipeline::Hybrid : Pipeline::Classical;
        r.run_index = i % 10;
        r.route_length = 100.0 + 1.0 / 3.0 + static_cast<double>(i);
        r.valid = i != 17;
        r.wall_ms = static_cast<std::int64_t>(i);
        r.seed = std::uint64_t{1} << 62 | i;
        runs.push_back(r);
    }
    runs[17].route_length = std::nan("");
    const auto csv = runs_to_csv(runs);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 101);
    const auto back = runs_from_csv(csv);
    REQUIRE(back.size() == runs.size());
    for (std::size_t i = 0; i < runs.size(); ++i) {
        CHECK(back[i].instance_name == runs[i].instance_name);
        CHECK(back[i].pipeline == runs[i].pipeline);
        CHECK(back[i].valid == runs[i].valid);
        CHECK(back[i].seed == runs[i].seed);
        if (i == 17) CHECK(std::isnan(back[i].route_length));
        else CHECK(back[i].route_length == runs[i].route_length);
    }
    CHECK_THROWS_AS(runs_from_csv("instance,pipeline\n"), ParseError);
    CHECK_THROWS_AS(runs_from_csv(std::string(kCsvHeader) + "\na,CLASSICAL,0,1,maybe,1,1\n"), ParseError);

    // A run below its clustered optimum is flagged.
    const auto table = summary_table(runs, {{"inst0", {90.0, 150.0}}});
    CHECK(table.find("WARNING: inst0") != std::string::npos);
    CHECK(table.find("simulator") != std::string::npos);
    CHECK(summary_table(runs, {{"inst0", {90.0, 100.0}}}).find("WARNING") == std::string::npos);

    const auto dir = scratch("report");
    emit_report(runs, {}, dir / "r.csv");
    CHECK(slurp(dir / "r.csv") == csv);
    CHECK(fs::exists(dir / "r.csv.summary.txt"));
    CHECK_THROWS_AS(emit_report(runs, {}, dir / "missing" / "r.csv"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("command line exit codes") {
    const auto dir = scratch("cli");
    const auto suite = (dir / "suite").string();
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("generate --seed 42 --out " + suite) == 0);
    CHECK(run_cli("run --suite " + suite + " --pipeline quantum --out x.csv") == 2);
    CHECK(run_cli("run --suite " + suite + " --pipeline classical --embedded --api http://x --out x.csv") == 2);
    const auto csv = (dir / "c.csv").string();
    CHECK(run_cli("run --dir " + suite + " --pipeline classical --runs 2 --seed 3 --out " + csv) == 0);
    CHECK(runs_from_csv(slurp(csv)).size() == 20);
    CHECK(run_cli("report --in " + csv + " --out " + (dir / "s.txt").string() + " --suite " + suite) == 0);
    CHECK(run_cli("run --suite " + suite + " --pipeline classical --runs 1 --api http://127.0.0.1:1 --out " + csv) == 1);
    fs::remove_all(dir);
}
