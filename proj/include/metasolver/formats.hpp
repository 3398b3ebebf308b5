#pragma once

// Text formats for routing, knapsack and QUBO instances plus their solutions.
//
// Routing instances use a strict TSPLIB subset (EUC_2D only). Distances are
// exact Euclidean values; there is no nearest-integer rounding.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace metasolver::formats {

using NodeId = std::int64_t;

struct Node {
    NodeId id = 0;
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Node&, const Node&) = default;
};

struct TspInstance {
    std::string name;
    std::vector<Node> nodes;

    std::size_t size() const noexcept { return nodes.size(); }
    /// Position of `id` in `nodes`; throws UnknownNode.
    std::size_t index_of(NodeId id) const;
    const Node& node(NodeId id) const { return nodes[index_of(id)]; }

    friend bool operator==(const TspInstance&, const TspInstance&) = default;
};

struct VrpInstance {
    std::string name;
    NodeId depot = 0;
    std::vector<Node> nodes;
    std::map<NodeId, std::int64_t> demand;
    std::int64_t capacity = 1;
    std::optional<std::int64_t> max_vehicles;  // absent = unbounded

    std::size_t index_of(NodeId id) const;
    const Node& node(NodeId id) const { return nodes[index_of(id)]; }
    std::int64_t demand_of(NodeId id) const;
    /// Every node except the depot, in file order.
    std::vector<NodeId> customers() const;
    std::int64_t total_demand() const;

    friend bool operator==(const VrpInstance&, const VrpInstance&) = default;
};

struct KnapsackItem {
    std::int64_t id = 0;
    std::int64_t weight = 0;
    double value = 0.0;

    friend bool operator==(const KnapsackItem&, const KnapsackItem&) = default;
};

struct KnapsackInstance {
    std::vector<KnapsackItem> items;
    std::int64_t capacity = 0;

    friend bool operator==(const KnapsackInstance&, const KnapsackInstance&) = default;
};

/// Upper-triangular QUBO: energy(x) = offset + sum_{i<=j} Q[i,j] x_i x_j.
struct Qubo {
    std::size_t n = 0;
    std::map<std::pair<std::size_t, std::size_t>, double> coefficients;
    double offset = 0.0;

    /// Accumulates into (min(i,j), max(i,j)); entries that cancel to zero are erased.
    void add(std::size_t i, std::size_t j, double value);
    double coefficient(std::size_t i, std::size_t j) const;

    friend bool operator==(const Qubo&, const Qubo&) = default;
};

/// Routes exclude the depot for VRP; a TSP tour is a single cyclic route.
struct RouteSolution {
    std::vector<std::vector<NodeId>> routes;
    double total_length = 0.0;

    friend bool operator==(const RouteSolution&, const RouteSolution&) = default;
};

struct KnapsackSolution {
    std::vector<std::int64_t> chosen_item_ids;  // ascending
    double total_value = 0.0;
    std::int64_t total_weight = 0;

    friend bool operator==(const KnapsackSolution&, const KnapsackSolution&) = default;
};

TspInstance parse_tsp(std::string_view text);
std::string serialize_tsp(const TspInstance& instance);

VrpInstance parse_vrp(std::string_view text);
std::string serialize_vrp(const VrpInstance& instance);

KnapsackInstance parse_knapsack(std::string_view text);
std::string serialize_knapsack(const KnapsackInstance& instance);

Qubo parse_qubo(std::string_view text);
std::string serialize_qubo(const Qubo& qubo);

RouteSolution parse_route_solution(std::string_view text);
std::string serialize_route_solution(const RouteSolution& solution);

KnapsackSolution parse_knapsack_solution(std::string_view text);
std::string serialize_knapsack_solution(const KnapsackSolution& solution);

double euclidean(const Node& a, const Node& b) noexcept;
double distance(const TspInstance& instance, NodeId u, NodeId v);
double distance(const VrpInstance& instance, NodeId u, NodeId v);

/// Dense symmetric distance table indexed by node position.
class DistanceMatrix {
public:
    DistanceMatrix() = default;
    explicit DistanceMatrix(const std::vector<Node>& nodes);

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
    double max_entry() const noexcept;

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
};

/// Shortest decimal text that reads back to exactly `value`.
std::string format_real(double value);

}  // namespace metasolver::formats
