#pragma once

// Benchmark harness: a generated VRP suite, the classical and hybrid
// pipelines driven through the problem API, baselines and result tables.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "metasolver/formats.hpp"
#include "metasolver/problem_manager.hpp"

namespace metasolver::bench {

using formats::VrpInstance;
using Json = nlohmann::json;

enum class Pipeline { Classical, Hybrid };
enum class TspStep { Exact, TwoOpt };

std::string to_string(Pipeline pipeline);  // CLASSICAL / HYBRID
Pipeline pipeline_from_string(const std::string& text);  // either case; throws BadRequest

struct BenchmarkRun {
    std::string instance_name;
    Pipeline pipeline = Pipeline::Classical;
    std::size_t run_index = 0;
    double route_length = 0.0;  // NaN when the run produced no routes
    bool valid = false;
    std::int64_t wall_ms = 0;
    std::uint64_t seed = 0;
    std::string status;  // terminal solution status, kept out of the CSV
    std::string message;
};

/// Ten instances, two per customer count 4..8, unit demands,
/// capacity ceil(n/2), two vehicles, depot first. Deterministic in `seed`.
std::vector<VrpInstance> generate_suite(std::uint64_t seed);
/// One `<name>.vrp` per instance; creates `dir`.
void write_suite(const std::vector<VrpInstance>& suite, const std::filesystem::path& dir);
/// Every *.vrp file in `dir`, ordered by file name.
std::vector<VrpInstance> load_suite(const std::filesystem::path& dir);

struct Baselines {
    double without_clustering = 0.0;  // unrestricted optimum
    double with_clustering = 0.0;     // optimum under the two-phase clustering
};

/// Throws TooLarge beyond the brute-force customer limit.
Baselines compute_baselines(const VrpInstance& instance);

/// Terminal outcome of one cluster-vrp problem.
struct Outcome {
    std::string status;
    std::string result;
    std::optional<double> objective;
    std::string message;
};

/// Creates a problem, applies `patch` (which ends in state SOLVING) and waits
/// for the result.
class Driver {
public:
    virtual ~Driver() = default;
    virtual Outcome solve(const std::string& type_id, const std::string& input, const Json& patch) = 0;
};

/// Calls the problem manager directly.
class EmbeddedDriver : public Driver {
public:
    explicit EmbeddedDriver(std::size_t workers = 0,
                            std::chrono::milliseconds timeout = std::chrono::minutes(5));
    Outcome solve(const std::string& type_id, const std::string& input, const Json& patch) override;

private:
    std::shared_ptr<meta::ProblemManager> manager_;
    std::chrono::milliseconds timeout_;
};

/// Talks to a running server, e.g. "http://localhost:8080".
class HttpDriver : public Driver {
public:
    explicit HttpDriver(std::string base_url, std::chrono::milliseconds timeout = std::chrono::minutes(5));
    Outcome solve(const std::string& type_id, const std::string& input, const Json& patch) override;

private:
    std::string base_url_;
    std::chrono::milliseconds timeout_;
};

/// PATCH body configuring two-phase clustering with the pipeline's TSP step.
Json pipeline_patch(Pipeline pipeline, TspStep tsp, std::uint64_t seed);

/// Seed used by run `run_index` under master `seed`.
std::uint64_t run_seed(std::uint64_t seed, std::size_t run_index);

/// `runs` sequential runs of one instance. Failed or invalid runs come back
/// with valid == false.
std::vector<BenchmarkRun> run_pipeline(Driver& driver, const VrpInstance& instance, Pipeline pipeline, std::size_t runs,
                                       std::uint64_t seed, TspStep tsp = TspStep::Exact);

inline const char* kCsvHeader = "instance,pipeline,run,length,valid,ms,seed";

std::string runs_to_csv(const std::vector<BenchmarkRun>& runs);
/// Throws ParseError on malformed rows.
std::vector<BenchmarkRun> runs_from_csv(const std::string& text);

/// Per-instance table of both pipelines against the baselines. Instances
/// without an entry in `baselines` show "-" in the baseline columns.
std::string summary_table(const std::vector<BenchmarkRun>& runs,
                          const std::vector<std::pair<std::string, Baselines>>& baselines);

/// Writes `<path>` (CSV) and `<path>.summary.txt`. Throws std::runtime_error
/// with the OS message on I/O failure.
void emit_report(const std::vector<BenchmarkRun>& runs, const std::vector<std::pair<std::string, Baselines>>& baselines,
                 const std::filesystem::path& path);

}  // namespace metasolver::bench
