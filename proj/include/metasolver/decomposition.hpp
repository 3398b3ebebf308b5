#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "metasolver/classical.hpp"
#include "metasolver/formats.hpp"

namespace metasolver::decomposition {

using classical::Tour;
using formats::NodeId;
using formats::RouteSolution;
using formats::TspInstance;
using formats::VrpInstance;

struct Clustering {
    std::vector<std::vector<NodeId>> clusters;  // each ascending by id
    std::vector<NodeId> seed_nodes;

    friend bool operator==(const Clustering&, const Clustering&) = default;
};

using KnapsackSolverFn = std::function<formats::KnapsackSolution(const formats::KnapsackInstance&)>;

/// Capacity-respecting clustering phase: each cluster grows from a
/// farthest-point seed by solving a knapsack whose item values reward
/// proximity to the seed.
Clustering two_phase_cluster(const VrpInstance& instance, const KnapsackSolverFn& knapsack_solver);

/// Minimum feasible cluster count, ceil(total demand / capacity) (at least 1).
std::size_t min_cluster_count(const VrpInstance& instance);

struct KMeansOptions {
    std::size_t k = 1;
    std::uint64_t seed = 0;
    std::size_t max_iters = 100;
};

/// Lloyd iterations from k seeded customers, then capacity repair.
Clustering kmeans_cluster(const VrpInstance& instance, const KMeansOptions& options);

/// TSP over the depot (first) and the cluster's customers, ids preserved.
TspInstance cluster_to_tsp(const VrpInstance& instance, const std::vector<NodeId>& cluster);

/// Opens each depot-containing tour at the depot. No inter-route moves.
RouteSolution compose_routes(const VrpInstance& instance, const std::vector<Tour>& tours);

/// Held-Karp on every cluster, composed: the best solution once the
/// clustering is fixed.
RouteSolution clustered_optimum(const VrpInstance& instance, const Clustering& clustering);

/// Throws Infeasible unless `clustering` partitions the customers within
/// capacity and vehicle limits.
void check_partition(const VrpInstance& instance, const Clustering& clustering);

}  // namespace metasolver::decomposition
