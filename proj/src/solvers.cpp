#include "metasolver/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

#include "metasolver/classical.hpp"
#include "metasolver/decomposition.hpp"
#include "metasolver/errors.hpp"
#include "metasolver/formats.hpp"
#include "metasolver/quantum_sim.hpp"
#include "metasolver/qubo_transform.hpp"
#include "metasolver/rng.hpp"

namespace metasolver::solvers {

using meta::BoundReport;
using meta::BoundType;
using meta::ChildRequest;
using meta::ChildResult;
using meta::Settings;
using meta::SettingDescriptor;
using meta::SettingKind;
using meta::Solution;
using meta::SolveRequest;
using meta::SolverDescriptor;
using meta::Step;

meta::Settings parse_settings_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.empty() ? std::string_view("{}") : text);
    } catch (const nlohmann::json::parse_error& e) {
        throw BadRequest(std::string("settings are not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw BadRequest("settings must be a JSON object");
    Settings out;
    for (const auto& [name, value] : doc.items()) {
        if (value.is_number_unsigned()) {
            const auto v = value.get<std::uint64_t>();
            if (v > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
                throw InvalidSetting(name, "integer out of range");
            }
            out[name] = static_cast<std::int64_t>(v);
        } else if (value.is_number_integer()) {
            out[name] = value.get<std::int64_t>();
        } else if (value.is_number_float()) {
            out[name] = value.get<double>();
        } else if (value.is_string()) {
            out[name] = value.get<std::string>();
        } else {
            throw InvalidSetting(name, "expected a number or a string");
        }
    }
    return out;
}

std::string settings_to_json(const meta::Settings& settings) {
    nlohmann::json doc = nlohmann::json::object();
    for (const auto& [name, value] : settings) {
        std::visit([&](const auto& v) { doc[name] = v; }, value);
    }
    return doc.dump();
}

std::int64_t child_seed(std::int64_t seed, std::uint64_t stream) {
    return static_cast<std::int64_t>(derive_seed(static_cast<std::uint64_t>(seed), stream) >> 1);
}

namespace {

// Descriptor helpers ----------------------------------------------------------

SettingDescriptor integer(std::string name, std::int64_t def, std::string description, std::optional<double> min = {},
                          std::optional<double> max = {}) {
    return {std::move(name), SettingKind::Integer, def, {}, std::move(description), min, max};
}

SettingDescriptor real(std::string name, double def, std::string description, std::optional<double> min = {},
                       std::optional<double> max = {}) {
    return {std::move(name), SettingKind::Real, def, {}, std::move(description), min, max};
}

SettingDescriptor text(std::string name, std::string def, std::string description) {
    return {std::move(name), SettingKind::Text, std::move(def), {}, std::move(description), {}, {}};
}

SettingDescriptor choice(std::string name, std::vector<std::string> choices, std::string description) {
    std::string def = choices.front();
    return {std::move(name), SettingKind::Choice, std::move(def), std::move(choices), std::move(description), {}, {}};
}

/// Solver assembled from callbacks.
class FnSolver : public meta::Solver {
public:
    using SolveFn = std::function<Step(const SolveRequest&)>;
    using ComposeFn = std::function<Step(const SolveRequest&, std::size_t, const std::vector<ChildResult>&)>;

    FnSolver(SolverDescriptor descriptor, SolveFn solve, ComposeFn compose = {})
        : descriptor_(std::move(descriptor)), solve_(std::move(solve)), compose_(std::move(compose)) {}

    const SolverDescriptor& descriptor() const override { return descriptor_; }
    Step solve(const SolveRequest& request) override { return solve_(request); }
    Step compose(const SolveRequest& request, std::size_t round, const std::vector<ChildResult>& children) override {
        if (!compose_) return Solver::compose(request, round, children);
        return compose_(request, round, children);
    }

private:
    SolverDescriptor descriptor_;
    SolveFn solve_;
    ComposeFn compose_;
};

/// Child requests for `inputs`, auto-configured when `subSolver` names a solver.
std::vector<ChildRequest> children_for(const Settings& settings, std::string_view type_id,
                                       const std::vector<std::string>& inputs) {
    const auto& sub_solver = meta::text_setting(settings, "subSolver");
    Settings sub_settings;
    if (!sub_solver.empty()) sub_settings = parse_settings_json(meta::text_setting(settings, "subSolverSettings"));
    std::vector<ChildRequest> out;
    for (const auto& input : inputs) {
        ChildRequest child{std::string(type_id), input, std::nullopt, {}};
        if (!sub_solver.empty()) {
            child.solver_id = sub_solver;
            child.settings = sub_settings;
        }
        out.push_back(std::move(child));
    }
    return out;
}

Solution route_solution(const formats::RouteSolution& routes) {
    return Solution::solved(formats::serialize_route_solution(routes), routes.total_length);
}

Solution tour_solution(const classical::Tour& tour) {
    return route_solution({{tour.order}, tour.length});
}

// cluster-vrp -------------------------------------------------------------------

Step spawn_clusters(const formats::VrpInstance& instance, const decomposition::Clustering& clustering,
                    const Settings& settings) {
    decomposition::check_partition(instance, clustering);
    std::vector<std::string> inputs;
    for (const auto& cluster : clustering.clusters) {
        auto tsp = decomposition::cluster_to_tsp(instance, cluster);
        inputs.push_back(formats::serialize_tsp(tsp));
    }
    return children_for(settings, kTspType, inputs);
}

Step compose_clusters(const SolveRequest& request, const std::vector<ChildResult>& children) {
    const auto instance = formats::parse_vrp(request.input);
    std::vector<classical::Tour> tours;
    for (const auto& child : children) {
        const auto routes = formats::parse_route_solution(child.solution.result);
        if (routes.routes.size() != 1) {
            return Solution::invalid("subproblem " + child.id + " did not return a single tour");
        }
        tours.push_back({routes.routes.front(), routes.total_length});
    }
    formats::RouteSolution composed;
    try {
        composed = decomposition::compose_routes(instance, tours);
    } catch (const CompositionError& e) {
        return Solution::invalid(e.what());
    }
    const auto report = classical::validate_routes(instance, composed);
    if (!report.ok()) return Solution::invalid("composed routes fail validation: " + report.violations.front().message);
    auto solution = route_solution(composed);
    solution.metadata["clusters"] = std::to_string(children.size());
    return solution;
}

void add_vrp_solvers(meta::Registry& registry) {
    const auto sub_solver = choice("subSolver", {"", "tsp.classical.two-opt", "tsp.exact.held-karp", "tsp.qubo"},
                                   "Solver assigned to every TSP cluster; empty leaves the clusters to be configured");
    const auto sub_settings = text("subSolverSettings", "{}", "JSON object of settings for the TSP cluster solver");

    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"vrp.clusterer.two-phase",
                         "Two-Phase Clustering",
                         "Clusters customers by repeated knapsack selection around farthest-point seeds, then routes "
                         "each cluster as a TSP through the depot.",
                         std::string(kVrpType),
                         {choice("knapsackSolver", {"dp", "branch-bound"}, "Knapsack solver for the clustering phase"),
                          sub_solver, sub_settings},
                         {std::string(kTspType)}},
        [](const SolveRequest& request) -> Step {
            const auto instance = formats::parse_vrp(request.input);
            const auto& method = meta::text_setting(request.settings, "knapsackSolver");
            decomposition::KnapsackSolverFn knapsack =
                method == "dp" ? decomposition::KnapsackSolverFn(classical::knapsack_dp)
                               : decomposition::KnapsackSolverFn(classical::knapsack_branch_bound);
            return spawn_clusters(instance, decomposition::two_phase_cluster(instance, knapsack), request.settings);
        },
        [](const SolveRequest& request, std::size_t, const std::vector<ChildResult>& children) -> Step {
            return compose_clusters(request, children);
        }));

    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"vrp.clusterer.kmeans",
                         "Capacitated k-means",
                         "Lloyd iterations from seeded customers with capacity repair, then one TSP per cluster.",
                         std::string(kVrpType),
                         {integer("k", 0, "Cluster count; 0 uses the minimum feasible count", 0),
                          integer("seed", 0, "Seed for the initial centroids", 0),
                          integer("maxIters", 100, "Lloyd iteration limit", 1), sub_solver, sub_settings},
                         {std::string(kTspType)}},
        [](const SolveRequest& request) -> Step {
            const auto instance = formats::parse_vrp(request.input);
            decomposition::KMeansOptions options;
            const auto k = meta::integer_setting(request.settings, "k");
            options.k = k == 0 ? decomposition::min_cluster_count(instance) : static_cast<std::size_t>(k);
            options.seed = static_cast<std::uint64_t>(meta::integer_setting(request.settings, "seed"));
            options.max_iters = static_cast<std::size_t>(meta::integer_setting(request.settings, "maxIters"));
            return spawn_clusters(instance, decomposition::kmeans_cluster(instance, options), request.settings);
        },
        [](const SolveRequest& request, std::size_t, const std::vector<ChildResult>& children) -> Step {
            return compose_clusters(request, children);
        }));

    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"vrp.classical.savings",
                         "Clarke-Wright savings",
                         "Parallel savings heuristic with 2-opt on every route.",
                         std::string(kVrpType),
                         {},
                         {}},
        [](const SolveRequest& request) -> Step {
            return route_solution(classical::vrp_savings(formats::parse_vrp(request.input)));
        }));

    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"vrp.exact.brute-force",
                         "Brute force",
                         "Enumerates every route partition and ordering; at most 8 customers.",
                         std::string(kVrpType),
                         {},
                         {}},
        [](const SolveRequest& request) -> Step {
            return route_solution(classical::vrp_brute_force(formats::parse_vrp(request.input)));
        }));
}

// tsp ---------------------------------------------------------------------------

qubo::EncodeOptions encode_options(const Settings& settings) {
    qubo::EncodeOptions options;
    options.weight_b = meta::real_setting(settings, "weightB");
    const double a = meta::real_setting(settings, "penaltyA");
    if (a > 0.0) options.penalty_a = a;
    return options;
}

std::vector<ChildRequest> qubo_children(const SolveRequest& request, const qubo::TspQuboEncoding& encoding,
                                        std::size_t round) {
    auto children = children_for(request.settings, kQuboType, {formats::serialize_qubo(encoding.qubo)});
    auto& child = children.front();
    if (child.solver_id == "qubo.quantum-sampler") {
        child.settings["seed"] = child_seed(meta::integer_setting(request.settings, "seed"), round);
    }
    return children;
}

void add_tsp_solvers(meta::Registry& registry) {
    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"tsp.classical.two-opt",
                         "Nearest neighbour + 2-opt",
                         "Heuristic routing in place of the external LKH-3 binary: a nearest-neighbour tour improved "
                         "by seeded first-improvement 2-opt.",
                         std::string(kTspType),
                         {integer("seed", 0, "Seed for the 2-opt move order", 0),
                          integer("maxPasses", 1000, "2-opt pass limit", 1),
                          integer("startNode", 0, "Start node id for nearest neighbour; 0 uses the first node", 0)},
                         {}},
        [](const SolveRequest& request) -> Step {
            const auto instance = formats::parse_tsp(request.input);
            auto start = meta::integer_setting(request.settings, "startNode");
            if (start == 0) start = instance.nodes.front().id;
            classical::TwoOptOptions options;
            options.seed = static_cast<std::uint64_t>(meta::integer_setting(request.settings, "seed"));
            options.max_passes = static_cast<std::size_t>(meta::integer_setting(request.settings, "maxPasses"));
            return tour_solution(classical::tsp_two_opt(instance, classical::tsp_nearest_neighbor(instance, start), options));
        }));

    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"tsp.exact.held-karp",
                         "Held-Karp",
                         "Exact subset dynamic program; at most 20 nodes.",
                         std::string(kTspType),
                         {},
                         {}},
        [](const SolveRequest& request) -> Step {
            return tour_solution(classical::tsp_held_karp(formats::parse_tsp(request.input)));
        }));

    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{
            "tsp.qubo",
            "TSP to QUBO",
            "One-hot city/position QUBO with equality penalties, sampled by a QUBO solver and decoded back to a "
            "tour. Sampling is repeated with a fresh seed while no sample decodes to a valid tour.",
            std::string(kTspType),
            {real("penaltyA", 0.0, "Constraint penalty; 0 picks weightB * n * max distance + 1", 0.0),
             real("weightB", 1.0, "Weight of the tour length term", 0.0),
             integer("retryBudget", 3, "Extra sampling rounds when no sample is a valid tour", 0, 100),
             integer("seed", 0, "Master seed; round r samples with a seed derived from it", 0),
             choice("subSolver", {"qubo.quantum-sampler", "qubo.exhaustive", ""},
                    "Solver assigned to the QUBO subproblem; empty leaves it to be configured"),
             text("subSolverSettings", "{}", "JSON object of settings for the QUBO solver")},
            {std::string(kQuboType)}},
        [](const SolveRequest& request) -> Step {
            const auto instance = formats::parse_tsp(request.input);
            if (instance.size() == 1) return tour_solution({{instance.nodes.front().id}, 0.0});
            return qubo_children(request, qubo::encode_tsp(instance, encode_options(request.settings)), 0);
        },
        [](const SolveRequest& request, std::size_t round, const std::vector<ChildResult>& children) -> Step {
            const auto encoding = qubo::encode_tsp(formats::parse_tsp(request.input), encode_options(request.settings));
            const auto samples = quantum::parse_sampleset(children.front().solution.result);
            if (auto tour = quantum::decode_first_valid(encoding, samples)) {
                auto solution = tour_solution(*tour);
                solution.metadata["attempts"] = std::to_string(round + 1);
                solution.metadata["penaltyA"] = formats::format_real(encoding.penalty_a);
                return solution;
            }
            const auto budget = static_cast<std::size_t>(meta::integer_setting(request.settings, "retryBudget"));
            if (round < budget) return qubo_children(request, encoding, round + 1);
            auto invalid = Solution::invalid("no sample decoded to a valid tour");
            invalid.metadata["attempts"] = std::to_string(round + 1);
            return invalid;
        }));
}

// qubo / quantum-circuit-processing -------------------------------------------

struct CircuitSolverInfo {
    const char* solver_id;
    const char* backend;
    const char* name;
    const char* description;
};

const CircuitSolverInfo kCircuitSolvers[] = {
    {"qcp.local-statevector", "local-statevector", "Local statevector simulator",
     "Exact QAOA statevector simulation with optimised angles and seeded measurement; at most 20 qubits."},
    {"qcp.local-annealer", "local-sa", "Local simulated annealer",
     "Metropolis single-flip annealing with a geometric inverse-temperature schedule."},
    {"qcp.remote-stub", "remote-stub", "Remote backend",
     "Placeholder for hosted quantum hardware. Needs a token and always reports the backend as unavailable."},
};

const char* circuit_solver_for(const std::string& backend) {
    for (const auto& info : kCircuitSolvers) {
        if (backend == info.backend) return info.solver_id;
    }
    throw NoCompatibleBackend("no circuit processor for backend " + backend);
}

std::optional<std::string> non_empty(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return s;
}

Solution sampleset_solution(const quantum::SampleSet& set) {
    auto solution = Solution::solved(quantum::serialize_sampleset(set), set.samples.at(set.best).energy);
    solution.metadata["backendName"] = set.backend_name;
    for (const auto& [key, value] : set.timings) solution.metadata["timing." + key] = formats::format_real(value);
    for (const auto& [key, value] : set.diagnostics) solution.metadata[key] = value;
    return solution;
}

void add_qubo_solvers(meta::Registry& registry) {
    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{
            "qubo.quantum-sampler",
            "Quantum sampler",
            "Packages the QUBO as an annealing or QAOA job, matches it to a fitting backend and runs it as a "
            "quantum-circuit-processing subproblem.",
            std::string(kQuboType),
            {choice("method", {"anneal", "qaoa"}, "Annealing schedule or QAOA circuit"),
             integer("shots", 1024, "Measurements drawn from the final QAOA state", 1),
             integer("seed", 0, "Sampling seed", 0),
             integer("sweeps", 1000, "Annealing sweeps per restart", 1),
             integer("restarts", 10, "Annealing restarts (one sample each)", 1),
             real("betaStart", 0.1, "Initial inverse temperature, in units of 1 / max|Q|", 0.0),
             real("betaEnd", 10.0, "Final inverse temperature, in units of 1 / max|Q|", 0.0),
             integer("layers", 1, "QAOA layers p", 0, 16),
             integer("iterations", 60, "Coordinate-descent rounds per QAOA start", 0),
             choice("backend", {"auto", "local-statevector", "local-sa", "remote-stub", "manual"},
                    "Backend to run on; auto picks the first compatible local simulator, manual leaves the circuit "
                    "subproblem to be configured"),
             text("token", "", "Access token for remote backends")},
            {std::string(kCircuitType)}},
        [](const SolveRequest& request) -> Step {
            const auto& s = request.settings;
            quantum::QuantumJob job;
            job.kind = meta::text_setting(s, "method") == "qaoa" ? quantum::JobKind::Qaoa : quantum::JobKind::Anneal;
            job.qubo = formats::parse_qubo(request.input);
            job.shots = static_cast<std::size_t>(meta::integer_setting(s, "shots"));
            job.seed = static_cast<std::uint64_t>(meta::integer_setting(s, "seed"));
            job.anneal.sweeps = static_cast<std::size_t>(meta::integer_setting(s, "sweeps"));
            job.anneal.restarts = static_cast<std::size_t>(meta::integer_setting(s, "restarts"));
            job.anneal.beta_start = meta::real_setting(s, "betaStart");
            job.anneal.beta_end = meta::real_setting(s, "betaEnd");
            job.qaoa.layers = static_cast<std::size_t>(meta::integer_setting(s, "layers"));
            job.qaoa.iterations = static_cast<std::size_t>(meta::integer_setting(s, "iterations"));
            job.qaoa.parameter_seed = job.seed;

            ChildRequest child{std::string(kCircuitType), quantum::serialize_job(job), std::nullopt, {}};
            const auto& backend = meta::text_setting(s, "backend");
            if (backend != "manual") {
                const auto token = non_empty(meta::text_setting(s, "token"));
                const auto choice = backend == "auto" ? std::nullopt : std::optional<std::string>(backend);
                const auto& matched = quantum::match_backend(job, quantum::default_backends(), choice, token);
                child.solver_id = circuit_solver_for(matched.name);
                if (matched.requires_token) child.settings["token"] = *token;
            }
            return std::vector<ChildRequest>{std::move(child)};
        },
        [](const SolveRequest&, std::size_t, const std::vector<ChildResult>& children) -> Step {
            const auto& child = children.front();
            auto solution = Solution::solved(child.solution.result, child.solution.objective_value);
            if (const auto it = child.solution.metadata.find("backendName"); it != child.solution.metadata.end()) {
                solution.metadata["backendName"] = it->second;
            }
            return solution;
        }));

    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"qubo.exhaustive",
                         "Exhaustive minimiser",
                         "Enumerates every assignment; at most 24 variables.",
                         std::string(kQuboType),
                         {},
                         {}},
        [](const SolveRequest& request) -> Step {
            const auto min = qubo::exhaustive_qubo_min(formats::parse_qubo(request.input));
            return sampleset_solution(quantum::make_sampleset({{min.x, min.energy, 1}}, "exhaustive"));
        }));

    for (const auto& info : kCircuitSolvers) {
        std::vector<SettingDescriptor> settings{
            choice("circuitOptimization", {"none", "zx-t-count", "zero-noise-extrapolation"},
                   "Circuit optimisation pass; only none is available")};
        const bool remote = std::string_view(info.backend) == "remote-stub";
        if (remote) settings.push_back(text("token", "", "Access token for the remote backend"));
        const std::string backend = info.backend;
        registry.add_solver(std::make_shared<FnSolver>(
            SolverDescriptor{info.solver_id, info.name, info.description, std::string(kCircuitType), settings, {}},
            [backend, remote](const SolveRequest& request) -> Step {
                const auto job = quantum::parse_job(request.input);
                std::optional<std::string> token;
                if (remote) token = non_empty(meta::text_setting(request.settings, "token"));
                const auto& matched = quantum::match_backend(job, quantum::default_backends(), backend, token);
                auto solution = sampleset_solution(quantum::run_quantum_job(job, matched));
                const auto& pass = meta::text_setting(request.settings, "circuitOptimization");
                if (pass != "none") solution.metadata["circuitOptimization"] = pass + " not available";
                return solution;
            }));
    }
}

// knapsack ------------------------------------------------------------------------

Solution knapsack_solution(const formats::KnapsackSolution& s) {
    return Solution::solved(formats::serialize_knapsack_solution(s), s.total_value);
}

void add_knapsack_solvers(meta::Registry& registry) {
    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"knapsack.dp", "Dynamic program", "Exact DP over integer capacities.",
                         std::string(kKnapsackType), {}, {}},
        [](const SolveRequest& request) -> Step {
            return knapsack_solution(classical::knapsack_dp(formats::parse_knapsack(request.input)));
        }));
    registry.add_solver(std::make_shared<FnSolver>(
        SolverDescriptor{"knapsack.branch-bound", "Branch and bound",
                         "Depth-first branch and bound with the fractional bound.", std::string(kKnapsackType), {}, {}},
        [](const SolveRequest& request) -> Step {
            return knapsack_solution(classical::knapsack_branch_bound(formats::parse_knapsack(request.input)));
        }));
}

/// Sum of the two smallest entries of `edges` (partially sorts it).
double two_smallest(std::vector<double>& edges) {
    std::partial_sort(edges.begin(), edges.begin() + 2, edges.end());
    return edges[0] + edges[1];
}

}  // namespace

// Bounds ---------------------------------------------------------------------------

meta::BoundReport tsp_bound(const std::string& input) {
    const auto instance = formats::parse_tsp(input);
    const auto n = instance.size();
    BoundReport report{BoundType::Lower, 0.0, "half the sum over nodes of the two cheapest incident edges"};
    if (n < 2) return report;
    const formats::DistanceMatrix d(instance.nodes);
    if (n == 2) {
        report.value = 2.0 * d(0, 1);
        return report;
    }
    double total = 0.0;
    std::vector<double> edges;
    for (std::size_t i = 0; i < n; ++i) {
        edges.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) edges.push_back(d(i, j));
        }
        total += two_smallest(edges);
    }
    report.value = total / 2.0;
    return report;
}

meta::BoundReport vrp_bound(const std::string& input) {
    const auto instance = formats::parse_vrp(input);
    BoundReport report{BoundType::Lower, 0.0,
                       "half the sum of cheapest incident edges: two per customer (the depot edge may count twice), "
                       "two per required vehicle at the depot"};
    const auto customers = instance.customers();
    if (customers.empty()) return report;
    const formats::DistanceMatrix d(instance.nodes);
    const auto depot = instance.index_of(instance.depot);

    double total = 0.0;
    std::vector<double> depot_edges;
    std::vector<double> edges;
    for (const auto c : customers) {
        const auto i = instance.index_of(c);
        edges.clear();
        for (std::size_t j = 0; j < instance.nodes.size(); ++j) {
            if (j != i) edges.push_back(d(i, j));
        }
        // A single-customer route uses its depot edge twice.
        edges.push_back(d(i, depot));
        total += two_smallest(edges);
        depot_edges.push_back(d(i, depot));
        depot_edges.push_back(d(i, depot));
    }
    const auto k = decomposition::min_cluster_count(instance);
    std::sort(depot_edges.begin(), depot_edges.end());
    for (std::size_t i = 0; i < std::min(2 * k, depot_edges.size()); ++i) total += depot_edges[i];
    report.value = total / 2.0;
    return report;
}

meta::BoundReport knapsack_bound(const std::string& input) {
    return {BoundType::Upper, classical::knapsack_fractional_bound(formats::parse_knapsack(input)),
            "fractional relaxation (greedy by value density)"};
}

meta::BoundReport qubo_bound(const std::string& input) {
    const auto qubo = formats::parse_qubo(input);
    double value = qubo.offset;
    for (const auto& [index, c] : qubo.coefficients) value += std::min(c, 0.0);
    return {BoundType::Lower, value, "offset plus every negative coefficient"};
}

std::shared_ptr<meta::Registry> make_default_registry() {
    auto registry = std::make_shared<meta::Registry>();
    registry->add_type({std::string(kVrpType), "Capacitated vehicle routing over a TSPLIB-style instance; result is "
                                               "one route per vehicle plus the total LENGTH",
                        meta::Objective::Minimize, vrp_bound});
    registry->add_type({std::string(kTspType), "Travelling salesperson over a TSPLIB EUC_2D instance; result is one "
                                               "cyclic route plus its LENGTH",
                        meta::Objective::Minimize, tsp_bound});
    registry->add_type({std::string(kQuboType), "Quadratic unconstrained binary optimisation; result is a sample set",
                        meta::Objective::Minimize, qubo_bound});
    registry->add_type({std::string(kCircuitType),
                        "A sampling job (annealing schedule or QAOA circuit over a QUBO) for a quantum backend; "
                        "result is a sample set",
                        meta::Objective::Minimize,
                        [](const std::string& input) {
                            return qubo_bound(formats::serialize_qubo(quantum::parse_job(input).qubo));
                        }});
    registry->add_type({std::string(kKnapsackType), "0/1 knapsack; result lists the chosen items",
                        meta::Objective::Maximize, knapsack_bound});
    add_vrp_solvers(*registry);
    add_tsp_solvers(*registry);
    add_qubo_solvers(*registry);
    add_knapsack_solvers(*registry);
    return registry;
}

}  // namespace metasolver::solvers
