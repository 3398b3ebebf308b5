// bench: generate a VRP suite, run the classical or hybrid pipeline on it and
// tabulate the results.
//
//   bench generate --seed 42 --out suite/
//   bench run --suite suite/ --pipeline hybrid --runs 10 --seed 7 --out results.csv [--api URL | --embedded]
//   bench report --in results.csv --out summary.txt [--suite suite/]
//
// Exit status: 0 success, 1 when a run failed or came back invalid, 2 usage.

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "metasolver/bench.hpp"
#include "metasolver/classical.hpp"
#include "metasolver/errors.hpp"
#include "metasolver/rng.hpp"

using namespace metasolver;

namespace {

std::vector<std::pair<std::string, bench::Baselines>> baselines_for(const std::vector<formats::VrpInstance>& suite) {
    std::vector<std::pair<std::string, bench::Baselines>> out;
    for (const auto& instance : suite) {
        if (instance.customers().size() > classical::kBruteForceMaxCustomers) {
            std::cerr << "note: " << instance.name << " is too large for baselines\n";
            continue;
        }
        out.emplace_back(instance.name, bench::compute_baselines(instance));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Benchmark harness for the VRP pipelines"};
    app.require_subcommand(1);

    auto* generate = app.add_subcommand("generate", "Write a generated instance suite");
    std::uint64_t gen_seed = 42;
    std::string gen_out;
    generate->add_option("--seed", gen_seed, "Suite seed");
    generate->add_option("--out", gen_out, "Output directory")->required();

    auto* run = app.add_subcommand("run", "Run a pipeline on every instance of a suite");
    std::string suite_dir, pipeline_name, run_out, api_url, tsp_solver = "exact";
    std::size_t runs = 10;
    std::uint64_t run_seed = 0;
    bool embedded = false, parallel = false;
    run->add_option("--suite,--dir", suite_dir, "Directory of .vrp files")->required()->check(CLI::ExistingDirectory);
    run->add_option("--pipeline", pipeline_name, "classical or hybrid")
        ->required()
        ->check(CLI::IsMember({"classical", "hybrid"}, CLI::ignore_case));
    run->add_option("--runs", runs, "Runs per instance")->check(CLI::PositiveNumber);
    run->add_option("--seed", run_seed, "Master seed");
    run->add_option("--out", run_out, "Result CSV; a summary is written next to it")->required();
    auto* api_opt = run->add_option("--api", api_url, "Base URL of a running server");
    run->add_flag("--embedded", embedded, "Solve in-process (default)")->excludes(api_opt);
    run->add_option("--tsp-solver", tsp_solver, "Classical TSP step")->check(CLI::IsMember({"exact", "two-opt"}));
    run->add_flag("--parallel", parallel, "Run instances concurrently");

    auto* report = app.add_subcommand("report", "Summarise a result CSV");
    std::string report_in, report_out, report_suite;
    report->add_option("--in", report_in, "Result CSV")->required()->check(CLI::ExistingFile);
    report->add_option("--out", report_out, "Summary file")->required();
    report->add_option("--suite", report_suite, "Suite directory, for the baseline columns")->check(CLI::ExistingDirectory);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) {
            const auto suite = bench::generate_suite(gen_seed);
            bench::write_suite(suite, gen_out);
            std::cout << "wrote " << suite.size() << " instances to " << gen_out << '\n';
            return 0;
        }

        if (*report) {
            std::ifstream in(report_in);
            std::stringstream ss;
            ss << in.rdbuf();
            const auto rows = bench::runs_from_csv(ss.str());
            std::vector<std::pair<std::string, bench::Baselines>> baselines;
            if (!report_suite.empty()) baselines = baselines_for(bench::load_suite(report_suite));
            const auto table = bench::summary_table(rows, baselines);
            std::ofstream out(report_out);
            if (!(out << table)) throw std::runtime_error("cannot write " + report_out);
            std::cout << table;
            return 0;
        }

        const auto suite = bench::load_suite(suite_dir);
        const auto pipeline = bench::pipeline_from_string(pipeline_name);
        const auto tsp = tsp_solver == "exact" ? bench::TspStep::Exact : bench::TspStep::TwoOpt;
        std::unique_ptr<bench::Driver> driver;
        if (!api_url.empty()) driver = std::make_unique<bench::HttpDriver>(api_url);
        else driver = std::make_unique<bench::EmbeddedDriver>();

        std::vector<std::vector<bench::BenchmarkRun>> per_instance(suite.size());
        std::mutex log_mutex;
        auto run_one = [&](std::size_t i) {
            per_instance[i] = bench::run_pipeline(*driver, suite[i], pipeline, runs, derive_seed(run_seed, i), tsp);
            std::lock_guard lock(log_mutex);
            for (const auto& r : per_instance[i]) {
                std::cerr << r.instance_name << " run " << r.run_index << ": " << r.status
                          << (r.valid ? " valid " : " INVALID ") << r.route_length << " (" << r.wall_ms << " ms)"
                          << (r.message.empty() ? "" : " " + r.message) << '\n';
            }
        };
        if (parallel) {
            std::atomic<std::size_t> next{0};
            std::vector<std::thread> pool;
            const std::size_t width = std::max<std::size_t>(1, std::min<std::size_t>(suite.size(), std::thread::hardware_concurrency()));
            for (std::size_t t = 0; t < width; ++t) {
                pool.emplace_back([&] {
                    for (std::size_t i; (i = next++) < suite.size();) run_one(i);
                });
            }
            for (auto& t : pool) t.join();
        } else {
            for (std::size_t i = 0; i < suite.size(); ++i) run_one(i);
        }

        std::vector<bench::BenchmarkRun> all;
        for (auto& rows : per_instance) all.insert(all.end(), rows.begin(), rows.end());
        bench::emit_report(all, baselines_for(suite), run_out);
        const auto failed = std::count_if(all.begin(), all.end(), [](const auto& r) { return !r.valid; });
        std::cout << all.size() - static_cast<std::size_t>(failed) << "/" << all.size() << " valid runs; wrote " << run_out
                  << '\n';
        return failed == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
