#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metasolver/formats.hpp"

namespace metasolver::classical {

using formats::KnapsackInstance;
using formats::KnapsackSolution;
using formats::NodeId;
using formats::RouteSolution;
using formats::TspInstance;
using formats::VrpInstance;

struct Tour {
    std::vector<NodeId> order;
    double length = 0.0;

    friend bool operator==(const Tour&, const Tour&) = default;
};

/// Cyclic length of `order`, summed in order and closed back to the first node.
double tour_length(const TspInstance& instance, std::span<const NodeId> order);

/// depot -> route[0] -> ... -> route.back() -> depot.
double route_length(const VrpInstance& instance, std::span<const NodeId> route);

/// Rotates `order` to start at the smallest node id and picks the direction
/// whose second node id is smaller than the last one.
std::vector<NodeId> canonical_cycle(std::span<const NodeId> order);

// Knapsack ------------------------------------------------------------------

/// Exact dynamic program over integer capacities. Among optimal subsets the
/// lexicographically smallest ascending id list is returned.
KnapsackSolution knapsack_dp(const KnapsackInstance& instance);

/// Depth-first branch and bound with the fractional (Dantzig) bound.
KnapsackSolution knapsack_branch_bound(const KnapsackInstance& instance);

/// Fractional relaxation value: an upper bound on any feasible value.
double knapsack_fractional_bound(const KnapsackInstance& instance);

// TSP -------------------------------------------------------------------------

Tour tsp_nearest_neighbor(const TspInstance& instance, NodeId start);

struct TwoOptOptions {
    std::size_t max_passes = 1000;
    std::uint64_t seed = 0;
};

/// First-improvement 2-opt over a freshly shuffled move list each pass.
/// Never returns a tour longer than `initial`.
Tour tsp_two_opt(const TspInstance& instance, const Tour& initial, const TwoOptOptions& options = {});

inline constexpr std::size_t kHeldKarpMaxNodes = 20;

/// Exact bitmask dynamic program; throws TooLarge above kHeldKarpMaxNodes.
Tour tsp_held_karp(const TspInstance& instance);

// VRP -------------------------------------------------------------------------

/// Clarke-Wright parallel savings followed by 2-opt on every route.
RouteSolution vrp_savings(const VrpInstance& instance);

inline constexpr std::size_t kBruteForceMaxCustomers = 8;

/// Exhaustive enumeration of route partitions and orderings.
RouteSolution vrp_brute_force(const VrpInstance& instance);

enum class ViolationKind {
    MissingCustomer,
    DuplicateCustomer,
    UnknownNode,
    DepotInRoute,
    CapacityExceeded,
    VehicleCountExceeded,
    LengthMismatch,
};

std::string to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::optional<std::size_t> route;
    std::optional<NodeId> node;
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

inline constexpr double kLengthRelTolerance = 1e-9;

ValidationReport validate_routes(const VrpInstance& instance, const RouteSolution& candidate);

/// |a - b| <= rel * max(|a|, |b|); exact zeros compare equal.
bool nearly_equal(double a, double b, double rel = kLengthRelTolerance) noexcept;

}  // namespace metasolver::classical
