#include "metasolver/bench.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "metasolver/api.hpp"
#include "metasolver/classical.hpp"
#include "metasolver/decomposition.hpp"
#include "metasolver/errors.hpp"
#include "metasolver/rng.hpp"
#include "metasolver/solvers.hpp"

namespace metasolver::bench {

namespace {

constexpr double kDominanceSlack = 1e-9;

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string() + ": " + std::strerror(errno));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string() + ": " + std::strerror(errno));
    out << text;
    if (!out.flush()) throw std::runtime_error("cannot write " + path.string() + ": " + std::strerror(errno));
}

Outcome outcome_of(const Json& problem) {
    Outcome out;
    const auto& solution = problem.at("solution");
    if (solution.is_null()) return {"MISSING", "", std::nullopt, "problem finished without a solution"};
    out.status = solution.at("status").get<std::string>();
    out.result = solution.at("result").get<std::string>();
    if (solution.at("objectiveValue").is_number()) out.objective = solution.at("objectiveValue").get<double>();
    const auto& metadata = solution.at("metadata");
    if (metadata.contains("error")) out.message = metadata["error"].get<std::string>();
    return out;
}

std::string real_cell(double value) {
    if (std::isnan(value)) return "nan";
    return formats::format_real(value);
}

}  // namespace

std::string to_string(Pipeline pipeline) { return pipeline == Pipeline::Classical ? "CLASSICAL" : "HYBRID"; }

Pipeline pipeline_from_string(const std::string& text) {
    std::string upper = text;
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
    if (upper == "CLASSICAL") return Pipeline::Classical;
    if (upper == "HYBRID") return Pipeline::Hybrid;
    throw BadRequest("unknown pipeline '" + text + "'");
}

// Suite -------------------------------------------------------------------------

std::vector<VrpInstance> generate_suite(std::uint64_t seed) {
    std::vector<VrpInstance> suite;
    for (std::size_t customers = 4; customers <= 8; ++customers) {
        for (std::size_t copy = 0; copy < 2; ++copy) {
            Rng rng(derive_seed(seed, customers * 2 + copy));
            VrpInstance v;
            v.name = "qv" + std::to_string(customers) + (copy == 0 ? "a" : "b");
            v.depot = 1;
            v.capacity = static_cast<std::int64_t>((customers + 1) / 2);
            v.max_vehicles = 2;
            for (std::size_t i = 0; i <= customers; ++i) {
                const auto id = static_cast<formats::NodeId>(i + 1);
                // Two decimals keep the files short and the coordinates exact on reload.
                const double x = std::round(rng.real(0.0, 100.0) * 100.0) / 100.0;
                const double y = std::round(rng.real(0.0, 100.0) * 100.0) / 100.0;
                v.nodes.push_back({id, x, y});
                v.demand[id] = i == 0 ? 0 : 1;
            }
            suite.push_back(std::move(v));
        }
    }
    return suite;
}

void write_suite(const std::vector<VrpInstance>& suite, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& instance : suite) write_file(dir / (instance.name + ".vrp"), formats::serialize_vrp(instance));
}

std::vector<VrpInstance> load_suite(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".vrp") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<VrpInstance> suite;
    for (const auto& file : files) {
        auto instance = formats::parse_vrp(read_file(file));
        if (instance.name.empty()) instance.name = file.stem().string();
        suite.push_back(std::move(instance));
    }
    return suite;
}

Baselines compute_baselines(const VrpInstance& instance) {
    Baselines b;
    b.without_clustering = classical::vrp_brute_force(instance).total_length;
    const auto clustering = decomposition::two_phase_cluster(instance, classical::knapsack_dp);
    b.with_clustering = decomposition::clustered_optimum(instance, clustering).total_length;
    return b;
}

// Drivers -----------------------------------------------------------------------

EmbeddedDriver::EmbeddedDriver(std::size_t workers, std::chrono::milliseconds timeout)
    : manager_(std::make_shared<meta::ProblemManager>(solvers::make_default_registry(), workers)), timeout_(timeout) {}

Outcome EmbeddedDriver::solve(const std::string& type_id, const std::string& input, const Json& patch) {
    const auto created = manager_->create_problem(type_id, input);
    manager_->patch(created.id, api::patch_from_json(patch));
    if (!manager_->wait_until_solved(created.id, timeout_)) return {"TIMEOUT", "", std::nullopt, "run timed out"};
    return outcome_of(api::to_json(manager_->get(created.id)));
}

HttpDriver::HttpDriver(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

Outcome HttpDriver::solve(const std::string& type_id, const std::string& input, const Json& patch) {
    httplib::Client client(base_url_);
    client.set_read_timeout(60, 0);
    auto fail = [](const std::string& what, const httplib::Result& r) {
        std::string detail = r ? "HTTP " + std::to_string(r->status) + " " + r->body : httplib::to_string(r.error());
        return Outcome{"ERROR", "", std::nullopt, what + ": " + detail};
    };

    const auto created = client.Post("/problems/" + type_id, Json{{"typeId", type_id}, {"input", input}}.dump(),
                                     "application/json");
    if (!created || created->status != 201) return fail("create", created);
    const std::string path = "/problems/" + type_id + "/" + Json::parse(created->body).at("id").get<std::string>();

    const auto patched = client.Patch(path, patch.dump(), "application/json");
    if (!patched || patched->status != 200) return fail("patch", patched);

    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    auto delay = std::chrono::milliseconds(2);
    for (;;) {
        const auto got = client.Get(path);
        if (!got || got->status != 200) return fail("poll", got);
        const auto body = Json::parse(got->body);
        if (body.at("state") == "SOLVED") return outcome_of(body);
        if (std::chrono::steady_clock::now() > deadline) return {"TIMEOUT", "", std::nullopt, "run timed out"};
        std::this_thread::sleep_for(delay);
        delay = std::min(delay * 2, std::chrono::milliseconds(100));
    }
}

// Runs --------------------------------------------------------------------------

Json pipeline_patch(Pipeline pipeline, TspStep tsp, std::uint64_t seed) {
    Json settings = {{"knapsackSolver", "dp"}};
    if (pipeline == Pipeline::Classical) {
        settings["subSolver"] = tsp == TspStep::Exact ? "tsp.exact.held-karp" : "tsp.classical.two-opt";
        settings["subSolverSettings"] = tsp == TspStep::Exact ? "{}" : Json{{"seed", seed}}.dump();
    } else {
        settings["subSolver"] = "tsp.qubo";
        settings["subSolverSettings"] = Json{{"seed", seed}}.dump();
    }
    return {{"solverId", "vrp.clusterer.two-phase"}, {"solverSettings", settings}, {"state", "SOLVING"}};
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t run_index) {
    // Settings are signed 64-bit, so keep the top bit clear.
    return derive_seed(seed, run_index) >> 1;
}

std::vector<BenchmarkRun> run_pipeline(Driver& driver, const VrpInstance& instance, Pipeline pipeline, std::size_t runs,
                                       std::uint64_t seed, TspStep tsp) {
    const auto input = formats::serialize_vrp(instance);
    std::vector<BenchmarkRun> out;
    for (std::size_t r = 0; r < runs; ++r) {
        BenchmarkRun run;
        run.instance_name = instance.name;
        run.pipeline = pipeline;
        run.run_index = r;
        run.seed = run_seed(seed, r);
        run.route_length = std::numeric_limits<double>::quiet_NaN();

        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = driver.solve(std::string(solvers::kVrpType), input, pipeline_patch(pipeline, tsp, run.seed));
        } catch (const std::exception& e) {
            outcome = {"ERROR", "", std::nullopt, e.what()};
        }
        run.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
        run.status = outcome.status;
        run.message = outcome.message;

        if (outcome.status == "SOLVED") {
            try {
                const auto routes = formats::parse_route_solution(outcome.result);
                run.route_length = routes.total_length;
                const auto report = classical::validate_routes(instance, routes);
                run.valid = report.ok() && outcome.objective && *outcome.objective == routes.total_length;
                if (!report.ok()) run.message = report.violations.front().message;
            } catch (const std::exception& e) {
                run.message = e.what();
            }
        }
        out.push_back(std::move(run));
    }
    return out;
}

// Reports -----------------------------------------------------------------------

std::string runs_to_csv(const std::vector<BenchmarkRun>& runs) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& r : runs) {
        out << r.instance_name << ',' << to_string(r.pipeline) << ',' << r.run_index << ',' << real_cell(r.route_length)
            << ',' << (r.valid ? "true" : "false") << ',' << r.wall_ms << ',' << r.seed << '\n';
    }
    return out.str();
}

std::vector<BenchmarkRun> runs_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    std::vector<BenchmarkRun> runs;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (number == 1) {
            if (line != kCsvHeader) throw ParseError(number, "expected header '" + std::string(kCsvHeader) + "'");
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) throw ParseError(number, "expected 7 columns");
        try {
            BenchmarkRun r;
            r.instance_name = cells[0];
            r.pipeline = pipeline_from_string(cells[1]);
            r.run_index = std::stoul(cells[2]);
            r.route_length = cells[3] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[3]);
            if (cells[4] != "true" && cells[4] != "false") throw std::invalid_argument("valid");
            r.valid = cells[4] == "true";
            r.wall_ms = std::stoll(cells[5]);
            r.seed = std::stoull(cells[6]);
            runs.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw ParseError(number, std::string("bad cell: ") + e.what());
        }
    }
    return runs;
}

std::string summary_table(const std::vector<BenchmarkRun>& runs,
                          const std::vector<std::pair<std::string, Baselines>>& baselines) {
    std::vector<std::string> order;
    std::map<std::string, Baselines> base(baselines.begin(), baselines.end());
    for (const auto& [name, b] : baselines) order.push_back(name);
    for (const auto& r : runs) {
        if (std::find(order.begin(), order.end(), r.instance_name) == order.end()) order.push_back(r.instance_name);
    }

    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << std::left << std::setw(12) << "instance" << std::right << std::setw(12) << "no-cluster" << std::setw(12)
        << "cluster-opt";
    for (const char* p : {"classical", "hybrid"}) {
        out << std::setw(7) << (std::string(p, 1) + "-ok") << std::setw(12) << (std::string(p, 1) + "-min")
            << std::setw(12) << (std::string(p, 1) + "-mean") << std::setw(12) << (std::string(p, 1) + "-max")
            << std::setw(7) << (std::string(p, 1) + "-hit") << std::setw(9) << (std::string(p, 1) + "-ms");
    }
    out << '\n';

    std::vector<std::string> warnings;
    for (const auto& name : order) {
        const auto b = base.find(name);
        out << std::left << std::setw(12) << name << std::right;
        if (b != base.end()) {
            out << std::setw(12) << b->second.without_clustering << std::setw(12) << b->second.with_clustering;
        } else {
            out << std::setw(12) << "-" << std::setw(12) << "-";
        }
        for (const auto pipeline : {Pipeline::Classical, Pipeline::Hybrid}) {
            std::size_t total = 0, ok = 0, hits = 0;
            double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
            std::int64_t ms = 0;
            for (const auto& r : runs) {
                if (r.instance_name != name || r.pipeline != pipeline) continue;
                ++total;
                ms += r.wall_ms;
                if (!r.valid) continue;
                ++ok;
                lo = std::min(lo, r.route_length);
                hi = std::max(hi, r.route_length);
                sum += r.route_length;
                if (b != base.end()) {
                    const double opt = b->second.with_clustering;
                    if (classical::nearly_equal(r.route_length, opt)) ++hits;
                    if (r.route_length < opt - kDominanceSlack * std::max(1.0, std::abs(opt))) {
                        warnings.push_back(name + " " + to_string(pipeline) + " run " + std::to_string(r.run_index) +
                                           " is below the clustered optimum");
                    }
                }
            }
            const std::string okcell = std::to_string(ok) + "/" + std::to_string(total);
            out << std::setw(7) << okcell;
            if (ok == 0) {
                out << std::setw(12) << "-" << std::setw(12) << "-" << std::setw(12) << "-";
            } else {
                out << std::setw(12) << lo << std::setw(12) << sum / static_cast<double>(ok) << std::setw(12) << hi;
            }
            out << std::setw(7) << (b != base.end() && total > 0 ? std::to_string(hits) : std::string("-"));
            out << std::setw(9) << (total > 0 ? std::to_string(ms / static_cast<std::int64_t>(total)) : std::string("-"));
        }
        out << '\n';
    }
    out << "\nok = valid runs; hit = valid runs equal to cluster-opt; ms = mean wall time per run.\n"
           "Hybrid timings include the local quantum simulator and are not comparable with the classical ones.\n";
    for (const auto& w : warnings) out << "WARNING: " << w << '\n';
    return out.str();
}

void emit_report(const std::vector<BenchmarkRun>& runs, const std::vector<std::pair<std::string, Baselines>>& baselines,
                 const std::filesystem::path& path) {
    write_file(path, runs_to_csv(runs));
    write_file(path.string() + ".summary.txt", summary_table(runs, baselines));
}

}  // namespace metasolver::bench
