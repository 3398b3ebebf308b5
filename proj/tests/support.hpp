#pragma once

// Instance generators and brute-force oracles shared by the test binaries.
// Oracles deliberately avoid the library's own algorithms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "metasolver/formats.hpp"
#include "metasolver/rng.hpp"

namespace testing_support {

using metasolver::Rng;
using metasolver::formats::KnapsackInstance;
using metasolver::formats::Node;
using metasolver::formats::NodeId;
using metasolver::formats::Qubo;
using metasolver::formats::TspInstance;
using metasolver::formats::VrpInstance;

/// Plain sqrt-of-squares distance; agrees with the library to ~1 ulp only.
inline double hyp(const Node& a, const Node& b) { return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y)); }

inline TspInstance random_tsp(Rng& rng, std::size_t n, double extent = 100.0) {
    TspInstance t;
    t.name = "rand" + std::to_string(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.nodes.push_back({static_cast<NodeId>(i + 1), rng.real(0.0, extent), rng.real(0.0, extent)});
    }
    return t;
}

inline TspInstance unit_square() {
    TspInstance t;
    t.name = "square";
    t.nodes = {{1, 0, 0}, {2, 1, 0}, {3, 1, 1}, {4, 0, 1}};
    return t;
}

/// Depot is node 1, every customer has demand 1.
inline VrpInstance random_vrp(Rng& rng, std::size_t customers, std::int64_t capacity,
                              std::optional<std::int64_t> vehicles = std::nullopt) {
    VrpInstance v;
    v.name = "vrp" + std::to_string(customers);
    v.depot = 1;
    v.capacity = capacity;
    v.max_vehicles = vehicles;
    for (std::size_t i = 0; i <= customers; ++i) {
        const auto id = static_cast<NodeId>(i + 1);
        v.nodes.push_back({id, rng.real(0.0, 100.0), rng.real(0.0, 100.0)});
        v.demand[id] = i == 0 ? 0 : 1;
    }
    return v;
}

/// Cyclic length summed from the smallest id in the direction whose second
/// id is smaller than the last, which is the summation order the library uses
/// for reported lengths. Exact comparisons depend on that order.
inline double canonical_cycle_length(const std::vector<Node>& nodes, std::vector<std::size_t> order) {
    const std::size_t n = order.size();
    auto first = std::min_element(order.begin(), order.end(),
                                  [&](std::size_t a, std::size_t b) { return nodes[a].id < nodes[b].id; });
    std::rotate(order.begin(), first, order.end());
    if (n > 2 && nodes[order[1]].id > nodes[order[n - 1]].id) std::reverse(order.begin() + 1, order.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) total += metasolver::formats::euclidean(nodes[order[k]], nodes[order[k + 1]]);
    if (n > 1) total += metasolver::formats::euclidean(nodes[order[n - 1]], nodes[order[0]]);
    return total;
}

/// Shortest tour by enumerating every permutation with the first node fixed.
inline double brute_force_tsp(const TspInstance& t) {
    const std::size_t n = t.nodes.size();
    if (n <= 1) return 0.0;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        best = std::min(best, canonical_cycle_length(t.nodes, order));
    } while (std::next_permutation(order.begin() + 1, order.end()));
    return best;
}

/// Shortest closed tour through the depot and `members`, by permutation.
inline double tour_oracle(const VrpInstance& v, const std::vector<NodeId>& members) {
    TspInstance t;
    t.nodes.push_back(v.node(v.depot));
    for (auto id : members) t.nodes.push_back(v.node(id));
    return brute_force_tsp(t);
}

/// Optimum over every split of unit-demand customers into at most two
/// capacity-feasible routes.
inline double two_route_oracle(const VrpInstance& v) {
    const auto customers = v.customers();
    const std::size_t n = customers.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::vector<NodeId> a, b;
        for (std::size_t i = 0; i < n; ++i) (mask >> i & 1U ? a : b).push_back(customers[i]);
        if (static_cast<std::int64_t>(a.size()) > v.capacity || static_cast<std::int64_t>(b.size()) > v.capacity) continue;
        double total = 0.0;
        if (!a.empty()) total += tour_oracle(v, a);
        if (!b.empty()) total += tour_oracle(v, b);
        best = std::min(best, total);
    }
    return best;
}

inline KnapsackInstance random_knapsack(Rng& rng, std::size_t n) {
    KnapsackInstance k;
    std::int64_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = static_cast<std::int64_t>(rng.index(20));
        total += w;
        // Integer values keep sums exact so optimal values compare with ==.
        k.items.push_back({static_cast<std::int64_t>(i + 1), w, static_cast<double>(rng.index(30))});
    }
    k.capacity = static_cast<std::int64_t>(rng.index(static_cast<std::size_t>(total) + 2));
    return k;
}

/// Best value over all 2^n subsets.
inline double brute_force_knapsack(const KnapsackInstance& k) {
    const std::size_t n = k.items.size();
    double best = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::int64_t w = 0;
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (mask >> i & 1U) {
                w += k.items[i].weight;
                v += k.items[i].value;
            }
        }
        if (w <= k.capacity) best = std::max(best, v);
    }
    return best;
}

/// x^T Q x + c using a dense matrix, for cross-checking sparse energies.
inline double dense_energy(const Qubo& q, const std::vector<std::uint8_t>& x) {
    std::vector<double> m(q.n * q.n, 0.0);
    for (const auto& [key, value] : q.coefficients) m[key.first * q.n + key.second] = value;
    double e = q.offset;
    for (std::size_t i = 0; i < q.n; ++i) {
        for (std::size_t j = 0; j < q.n; ++j) e += m[i * q.n + j] * x[i] * x[j];
    }
    return e;
}

inline Qubo random_qubo(Rng& rng, std::size_t n, double density = 0.6) {
    Qubo q;
    q.n = n;
    q.offset = rng.real(-2.0, 2.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            if (rng.real() < density) q.add(i, j, rng.real(-3.0, 3.0));
        }
    }
    return q;
}

inline std::vector<std::uint8_t> bits_of(std::uint64_t value, std::size_t n) {
    std::vector<std::uint8_t> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<std::uint8_t>(value >> i & 1U);
    return x;
}

}  // namespace testing_support
