#pragma once

// The built-in problem types and solvers.
//
//   cluster-vrp                 vrp.clusterer.two-phase, vrp.clusterer.kmeans (-> tsp),
//                               vrp.classical.savings, vrp.exact.brute-force
//   tsp                         tsp.classical.two-opt, tsp.exact.held-karp, tsp.qubo (-> qubo)
//   qubo                        qubo.quantum-sampler (-> quantum-circuit-processing), qubo.exhaustive
//   quantum-circuit-processing  qcp.local-statevector, qcp.local-annealer, qcp.remote-stub
//   knapsack                    knapsack.dp, knapsack.branch-bound
//
// Decomposing solvers take a `subSolver` setting; when it names a solver the
// children are configured and started automatically with the JSON object in
// `subSolverSettings`, otherwise they wait in NEEDS_CONFIGURATION.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "metasolver/meta.hpp"

namespace metasolver::solvers {

inline constexpr std::string_view kVrpType = "cluster-vrp";
inline constexpr std::string_view kTspType = "tsp";
inline constexpr std::string_view kQuboType = "qubo";
inline constexpr std::string_view kCircuitType = "quantum-circuit-processing";
inline constexpr std::string_view kKnapsackType = "knapsack";

std::shared_ptr<meta::Registry> make_default_registry();

/// JSON object text -> settings. Integers stay integers. Throws BadRequest.
meta::Settings parse_settings_json(std::string_view text);
std::string settings_to_json(const meta::Settings& settings);

/// Non-negative int64 seed for stream `stream` of `seed`.
std::int64_t child_seed(std::int64_t seed, std::uint64_t stream);

/// Bounds served by the bound endpoint, exposed for testing.
meta::BoundReport tsp_bound(const std::string& input);
meta::BoundReport vrp_bound(const std::string& input);
meta::BoundReport knapsack_bound(const std::string& input);
meta::BoundReport qubo_bound(const std::string& input);

}  // namespace metasolver::solvers
