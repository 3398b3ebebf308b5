#include "metasolver/classical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "metasolver/errors.hpp"
#include "metasolver/rng.hpp"

namespace metasolver::classical {

using formats::DistanceMatrix;
using formats::euclidean;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 2-opt accepts a move only if it shortens the tour by more than this,
// measured relative to the current length.
constexpr double kImprovementEps = 1e-12;

std::vector<std::size_t> ids_ascending(const std::vector<formats::KnapsackItem>& items) {
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return items[a].id < items[b].id; });
    return order;
}

KnapsackSolution totals_from(const KnapsackInstance& instance, std::vector<std::size_t> chosen) {
    std::sort(chosen.begin(), chosen.end(),
              [&](std::size_t a, std::size_t b) { return instance.items[a].id < instance.items[b].id; });
    KnapsackSolution solution;
    for (auto idx : chosen) {
        const auto& item = instance.items[idx];
        solution.chosen_item_ids.push_back(item.id);
        solution.total_value += item.value;
        solution.total_weight += item.weight;
    }
    return solution;
}

// Items worth taking at all, sorted by value density (descending), ties by id.
std::vector<std::size_t> by_density(const KnapsackInstance& instance) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < instance.items.size(); ++i) {
        if (instance.items[i].value > 0.0) order.push_back(i);
    }
    auto density = [&](std::size_t i) {
        const auto& it = instance.items[i];
        return it.weight == 0 ? kInf : it.value / static_cast<double>(it.weight);
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double da = density(a);
        const double db = density(b);
        if (da != db) return da > db;
        return instance.items[a].id < instance.items[b].id;
    });
    return order;
}

class BranchAndBound {
public:
    BranchAndBound(const KnapsackInstance& instance)
        : instance_(instance), order_(by_density(instance)) {}

    std::vector<std::size_t> run() {
        std::vector<std::size_t> current;
        search(0, instance_.capacity, 0.0, current);
        return best_set_;
    }

private:
    double bound(std::size_t k, std::int64_t room, double value) const {
        for (; k < order_.size(); ++k) {
            const auto& item = instance_.items[order_[k]];
            if (item.weight <= room) {
                room -= item.weight;
                value += item.value;
            } else {
                return value + item.value * static_cast<double>(room) / static_cast<double>(item.weight);
            }
        }
        return value;
    }

    void search(std::size_t k, std::int64_t room, double value, std::vector<std::size_t>& current) {
        if (value > best_value_) {
            best_value_ = value;
            best_set_ = current;
        }
        if (k == order_.size() || bound(k, room, value) <= best_value_) return;
        const auto idx = order_[k];
        const auto& item = instance_.items[idx];
        if (item.weight <= room) {
            current.push_back(idx);
            search(k + 1, room - item.weight, value + item.value, current);
            current.pop_back();
        }
        search(k + 1, room, value, current);
    }

    const KnapsackInstance& instance_;
    std::vector<std::size_t> order_;
    double best_value_ = 0.0;
    std::vector<std::size_t> best_set_;
};

TspInstance route_instance(const VrpInstance& instance, const std::vector<NodeId>& route) {
    TspInstance tsp;
    tsp.name = instance.name;
    tsp.nodes.push_back(instance.node(instance.depot));
    for (auto id : route) tsp.nodes.push_back(instance.node(id));
    return tsp;
}

// Drops the depot from a cyclic order that contains it, starting right after it.
std::vector<NodeId> open_at_depot(const std::vector<NodeId>& cycle, NodeId depot) {
    const auto it = std::find(cycle.begin(), cycle.end(), depot);
    std::vector<NodeId> route;
    for (auto p = std::next(it); p != cycle.end(); ++p) route.push_back(*p);
    for (auto p = cycle.begin(); p != it; ++p) route.push_back(*p);
    return route;
}

}  // namespace

bool nearly_equal(double a, double b, double rel) noexcept {
    if (a == b) return true;
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

double tour_length(const TspInstance& instance, std::span<const NodeId> order) {
    if (order.size() < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        total += euclidean(instance.node(order[i]), instance.node(order[i + 1]));
    }
    return total + euclidean(instance.node(order.back()), instance.node(order.front()));
}

double route_length(const VrpInstance& instance, std::span<const NodeId> route) {
    if (route.empty()) return 0.0;
    const auto& depot = instance.node(instance.depot);
    double total = euclidean(depot, instance.node(route.front()));
    for (std::size_t i = 0; i + 1 < route.size(); ++i) {
        total += euclidean(instance.node(route[i]), instance.node(route[i + 1]));
    }
    return total + euclidean(instance.node(route.back()), depot);
}

std::vector<NodeId> canonical_cycle(std::span<const NodeId> order) {
    std::vector<NodeId> out(order.begin(), order.end());
    if (out.empty()) return out;
    std::rotate(out.begin(), std::min_element(out.begin(), out.end()), out.end());
    if (out.size() >= 3 && out[1] > out.back()) std::reverse(out.begin() + 1, out.end());
    return out;
}

KnapsackSolution knapsack_dp(const KnapsackInstance& instance) {
    const auto order = ids_ascending(instance.items);
    const std::size_t n = order.size();
    std::int64_t total_weight = 0;
    for (const auto& item : instance.items) total_weight += item.weight;
    const auto cap = static_cast<std::size_t>(std::max<std::int64_t>(0, std::min(instance.capacity, total_weight)));
    const std::size_t width = cap + 1;

    // best[i][w]: optimal value using items order[i..n) with capacity w.
    std::vector<double> best((n + 1) * width, 0.0);
    auto at = [&](std::size_t i, std::size_t w) -> double& { return best[i * width + w]; };
    for (std::size_t i = n; i-- > 0;) {
        const auto& item = instance.items[order[i]];
        const auto wi = static_cast<std::size_t>(item.weight);
        for (std::size_t w = 0; w < width; ++w) {
            double value = at(i + 1, w);
            if (wi <= w) value = std::max(value, item.value + at(i + 1, w - wi));
            at(i, w) = value;
        }
    }

    std::vector<std::size_t> chosen;
    std::size_t i = 0;
    std::size_t w = cap;
    while (i < n && at(i, w) > 0.0) {
        const double target = at(i, w);
        std::size_t j = i;
        for (; j < n && at(j, w) == target; ++j) {
            const auto& item = instance.items[order[j]];
            const auto wj = static_cast<std::size_t>(item.weight);
            if (wj <= w && item.value + at(j + 1, w - wj) == target) break;
        }
        if (j == n || at(j, w) != target) break;  // unreachable for a consistent table
        chosen.push_back(order[j]);
        w -= static_cast<std::size_t>(instance.items[order[j]].weight);
        i = j + 1;
    }
    return totals_from(instance, std::move(chosen));
}

KnapsackSolution knapsack_branch_bound(const KnapsackInstance& instance) {
    return totals_from(instance, BranchAndBound(instance).run());
}

double knapsack_fractional_bound(const KnapsackInstance& instance) {
    double value = 0.0;
    std::int64_t room = instance.capacity;
    for (auto idx : by_density(instance)) {
        const auto& item = instance.items[idx];
        if (item.weight <= room) {
            room -= item.weight;
            value += item.value;
        } else {
            value += item.value * static_cast<double>(room) / static_cast<double>(item.weight);
            break;
        }
    }
    return value;
}

Tour tsp_nearest_neighbor(const TspInstance& instance, NodeId start) {
    const std::size_t n = instance.size();
    const DistanceMatrix dist(instance.nodes);
    std::vector<bool> visited(n, false);
    std::size_t current = instance.index_of(start);
    visited[current] = true;
    Tour tour;
    tour.order.push_back(start);
    for (std::size_t step = 1; step < n; ++step) {
        std::size_t next = n;
        for (std::size_t k = 0; k < n; ++k) {
            if (visited[k]) continue;
            if (next == n || dist(current, k) < dist(current, next) ||
                (dist(current, k) == dist(current, next) && instance.nodes[k].id < instance.nodes[next].id)) {
                next = k;
            }
        }
        visited[next] = true;
        tour.order.push_back(instance.nodes[next].id);
        current = next;
    }
    tour.length = tour_length(instance, tour.order);
    return tour;
}

Tour tsp_two_opt(const TspInstance& instance, const Tour& initial, const TwoOptOptions& options) {
    const std::size_t n = initial.order.size();
    if (n < 4) return initial;

    const DistanceMatrix dist(instance.nodes);
    std::vector<std::size_t> pos(n);  // tour position -> node index
    for (std::size_t k = 0; k < n; ++k) pos[k] = instance.index_of(initial.order[k]);

    std::vector<std::pair<std::size_t, std::size_t>> moves;
    for (std::size_t i = 0; i + 2 < n; ++i) {
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;
            moves.emplace_back(i, j);
        }
    }

    Rng rng(options.seed);
    bool improved_any = false;
    double current = initial.length;
    for (std::size_t pass = 0; pass < options.max_passes; ++pass) {
        rng.shuffle(moves);
        bool improved = false;
        for (const auto& [i, j] : moves) {
            const auto a = pos[i];
            const auto b = pos[i + 1];
            const auto c = pos[j];
            const auto d = pos[(j + 1) % n];
            const double delta = dist(a, c) + dist(b, d) - dist(a, b) - dist(c, d);
            if (delta < -kImprovementEps * std::max(1.0, current)) {
                std::reverse(pos.begin() + static_cast<std::ptrdiff_t>(i + 1),
                             pos.begin() + static_cast<std::ptrdiff_t>(j + 1));
                current += delta;
                improved = improved_any = true;
            }
        }
        if (!improved) break;
    }
    if (!improved_any) return initial;

    Tour tour;
    for (auto p : pos) tour.order.push_back(instance.nodes[p].id);
    tour.length = tour_length(instance, tour.order);
    return tour.length < initial.length ? tour : initial;
}

Tour tsp_held_karp(const TspInstance& instance) {
    const std::size_t n = instance.size();
    if (n > kHeldKarpMaxNodes) {
        throw TooLarge("Held-Karp supports at most " + std::to_string(kHeldKarpMaxNodes) + " nodes, got " +
                       std::to_string(n));
    }
    if (n == 0) return {};

    // Work in ascending-id order so "smallest index" ties mean "smallest id".
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::sort(ids.begin(), ids.end(), [&](auto a, auto b) { return instance.nodes[a].id < instance.nodes[b].id; });
    const DistanceMatrix raw(instance.nodes);
    auto d = [&](std::size_t a, std::size_t b) { return raw(ids[a], ids[b]); };

    Tour tour;
    if (n <= 3) {
        for (auto i : ids) tour.order.push_back(instance.nodes[i].id);
    } else {
        const std::size_t m = n - 1;  // nodes 1..m, node 0 is the fixed start
        const std::size_t full = (std::size_t{1} << m) - 1;
        std::vector<double> dp((full + 1) * m, kInf);
        std::vector<std::uint8_t> parent((full + 1) * m, 0);
        for (std::size_t j = 0; j < m; ++j) dp[(std::size_t{1} << j) * m + j] = d(0, j + 1);

        for (std::size_t mask = 1; mask <= full; ++mask) {
            for (std::size_t j = 0; j < m; ++j) {
                const double here = dp[mask * m + j];
                if (!(mask >> j & 1U) || here == kInf) continue;
                for (std::size_t k = 0; k < m; ++k) {
                    if (mask >> k & 1U) continue;
                    const std::size_t next = mask | (std::size_t{1} << k);
                    const double cand = here + d(j + 1, k + 1);
                    if (cand < dp[next * m + k]) {
                        dp[next * m + k] = cand;
                        parent[next * m + k] = static_cast<std::uint8_t>(j);
                    }
                }
            }
        }

        std::size_t last = 0;
        double best = kInf;
        for (std::size_t j = 0; j < m; ++j) {
            const double cand = dp[full * m + j] + d(j + 1, 0);
            if (cand < best) {
                best = cand;
                last = j;
            }
        }
        std::vector<std::size_t> reversed;
        std::size_t mask = full;
        std::size_t j = last;
        while (mask) {
            reversed.push_back(j + 1);
            const std::size_t prev = parent[mask * m + j];
            mask &= ~(std::size_t{1} << j);
            j = prev;
        }
        tour.order.push_back(instance.nodes[ids[0]].id);
        for (auto it = reversed.rbegin(); it != reversed.rend(); ++it) tour.order.push_back(instance.nodes[ids[*it]].id);
    }
    tour.order = canonical_cycle(tour.order);
    tour.length = tour_length(instance, tour.order);
    return tour;
}

RouteSolution vrp_savings(const VrpInstance& instance) {
    if (instance.max_vehicles && instance.total_demand() > *instance.max_vehicles * instance.capacity) {
        throw Infeasible("total demand exceeds vehicles * capacity");
    }
    const auto customers = instance.customers();
    for (auto c : customers) {
        if (instance.demand_of(c) > instance.capacity) {
            throw Infeasible("customer " + std::to_string(c) + " exceeds capacity");
        }
    }

    std::vector<std::vector<NodeId>> routes;
    std::vector<std::int64_t> load;
    std::map<NodeId, std::size_t> route_of;
    for (auto c : customers) {
        route_of[c] = routes.size();
        routes.push_back({c});
        load.push_back(instance.demand_of(c));
    }

    struct Saving {
        double value;
        NodeId i;
        NodeId j;
    };
    std::vector<Saving> savings;
    for (std::size_t a = 0; a < customers.size(); ++a) {
        for (std::size_t b = a + 1; b < customers.size(); ++b) {
            const auto i = customers[a];
            const auto j = customers[b];
            savings.push_back({formats::distance(instance, instance.depot, i) +
                                   formats::distance(instance, instance.depot, j) - formats::distance(instance, i, j),
                               std::min(i, j), std::max(i, j)});
        }
    }
    std::sort(savings.begin(), savings.end(), [](const Saving& x, const Saving& y) {
        if (x.value != y.value) return x.value > y.value;
        if (x.i != y.i) return x.i < y.i;
        return x.j < y.j;
    });

    for (const auto& s : savings) {
        const auto ri = route_of[s.i];
        const auto rj = route_of[s.j];
        if (ri == rj || load[ri] + load[rj] > instance.capacity) continue;
        auto& a = routes[ri];
        auto& b = routes[rj];
        const bool i_front = a.front() == s.i, i_back = a.back() == s.i;
        const bool j_front = b.front() == s.j, j_back = b.back() == s.j;
        if (!(i_front || i_back) || !(j_front || j_back)) continue;

        std::vector<NodeId> merged;
        if (i_back && j_front) {
            merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
        } else if (i_front && j_back) {
            merged = b;
            merged.insert(merged.end(), a.begin(), a.end());
        } else if (i_back && j_back) {
            merged = a;
            merged.insert(merged.end(), b.rbegin(), b.rend());
        } else {
            merged.assign(a.rbegin(), a.rend());
            merged.insert(merged.end(), b.begin(), b.end());
        }
        a = std::move(merged);
        b.clear();
        load[ri] += load[rj];
        load[rj] = 0;
        for (auto c : a) route_of[c] = ri;
    }

    RouteSolution solution;
    for (const auto& route : routes) {
        if (route.empty()) continue;
        const auto tsp = route_instance(instance, route);
        Tour initial;
        initial.order.push_back(instance.depot);
        initial.order.insert(initial.order.end(), route.begin(), route.end());
        initial.length = tour_length(tsp, initial.order);
        const auto improved = tsp_two_opt(tsp, initial);
        solution.routes.push_back(open_at_depot(improved.order, instance.depot));
    }
    if (instance.max_vehicles && solution.routes.size() > static_cast<std::size_t>(*instance.max_vehicles)) {
        throw Infeasible("savings construction needs " + std::to_string(solution.routes.size()) +
                         " vehicles, only " + std::to_string(*instance.max_vehicles) + " available");
    }
    for (const auto& route : solution.routes) solution.total_length += route_length(instance, route);
    return solution;
}

RouteSolution vrp_brute_force(const VrpInstance& instance) {
    const auto customers = instance.customers();
    const std::size_t n = customers.size();
    if (n > kBruteForceMaxCustomers) {
        throw TooLarge("brute force supports at most " + std::to_string(kBruteForceMaxCustomers) +
                       " customers, got " + std::to_string(n));
    }
    const std::size_t subsets = std::size_t{1} << n;

    // Best single route (canonical direction: first id < last id) for every subset.
    std::vector<std::int64_t> subset_load(subsets, 0);
    std::vector<double> subset_cost(subsets, kInf);
    std::vector<std::vector<NodeId>> subset_route(subsets);
    for (std::size_t mask = 1; mask < subsets; ++mask) {
        std::vector<NodeId> members;
        for (std::size_t k = 0; k < n; ++k) {
            if (mask >> k & 1U) {
                members.push_back(customers[k]);
                subset_load[mask] += instance.demand_of(customers[k]);
            }
        }
        if (subset_load[mask] > instance.capacity) continue;
        std::sort(members.begin(), members.end());
        do {
            if (members.size() >= 2 && members.front() > members.back()) continue;
            const double len = route_length(instance, members);
            if (len < subset_cost[mask]) {
                subset_cost[mask] = len;
                subset_route[mask] = members;
            }
        } while (std::next_permutation(members.begin(), members.end()));
    }

    const std::size_t max_routes = instance.max_vehicles ? static_cast<std::size_t>(*instance.max_vehicles) : n;
    double best = kInf;
    std::vector<std::size_t> best_blocks;
    std::vector<std::size_t> blocks;

    // Set partitions in restricted-growth order.
    auto recurse = [&](auto& self, std::size_t k) -> void {
        if (k == n) {
            double total = 0.0;
            for (auto b : blocks) total += subset_cost[b];
            if (total < best) {
                best = total;
                best_blocks = blocks;
            }
            return;
        }
        const std::size_t bit = std::size_t{1} << k;
        // Indexed: the recursion may grow `blocks`.
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (subset_load[blocks[b]] + instance.demand_of(customers[k]) > instance.capacity) continue;
            blocks[b] |= bit;
            self(self, k + 1);
            blocks[b] &= ~bit;
        }
        if (blocks.size() < max_routes && instance.demand_of(customers[k]) <= instance.capacity) {
            blocks.push_back(bit);
            self(self, k + 1);
            blocks.pop_back();
        }
    };
    recurse(recurse, 0);

    if (n > 0 && best_blocks.empty()) throw Infeasible("no capacity-feasible route partition exists");
    RouteSolution solution;
    for (auto b : best_blocks) {
        solution.routes.push_back(subset_route[b]);
        solution.total_length += route_length(instance, subset_route[b]);
    }
    return solution;
}

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::MissingCustomer: return "missing-customer";
        case ViolationKind::DuplicateCustomer: return "duplicate-customer";
        case ViolationKind::UnknownNode: return "unknown-node";
        case ViolationKind::DepotInRoute: return "depot-in-route";
        case ViolationKind::CapacityExceeded: return "capacity-exceeded";
        case ViolationKind::VehicleCountExceeded: return "vehicle-count-exceeded";
        case ViolationKind::LengthMismatch: return "length-mismatch";
    }
    return "unknown";
}

ValidationReport validate_routes(const VrpInstance& instance, const RouteSolution& candidate) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, std::optional<std::size_t> route, std::optional<NodeId> node, std::string msg) {
        report.violations.push_back({kind, route, node, std::move(msg)});
    };

    std::map<NodeId, int> seen;
    for (auto c : instance.customers()) seen[c] = 0;
    bool lengths_computable = true;
    std::size_t used_routes = 0;

    for (std::size_t r = 0; r < candidate.routes.size(); ++r) {
        const auto& route = candidate.routes[r];
        if (!route.empty()) ++used_routes;
        std::int64_t load = 0;
        for (auto id : route) {
            if (id == instance.depot) {
                add(ViolationKind::DepotInRoute, r, id, "route " + std::to_string(r) + " lists the depot");
                continue;
            }
            auto it = seen.find(id);
            if (it == seen.end()) {
                add(ViolationKind::UnknownNode, r, id, "route " + std::to_string(r) + " visits unknown node " + std::to_string(id));
                lengths_computable = false;
                continue;
            }
            if (++it->second == 2) {
                add(ViolationKind::DuplicateCustomer, r, id, "customer " + std::to_string(id) + " visited more than once");
            }
            load += instance.demand_of(id);
        }
        if (load > instance.capacity) {
            add(ViolationKind::CapacityExceeded, r, std::nullopt,
                "route " + std::to_string(r) + " demand " + std::to_string(load) + " exceeds capacity " +
                    std::to_string(instance.capacity));
        }
    }
    for (const auto& [id, count] : seen) {
        if (count == 0) add(ViolationKind::MissingCustomer, std::nullopt, id, "customer " + std::to_string(id) + " not visited");
    }
    if (instance.max_vehicles && used_routes > static_cast<std::size_t>(*instance.max_vehicles)) {
        add(ViolationKind::VehicleCountExceeded, std::nullopt, std::nullopt,
            std::to_string(used_routes) + " routes exceed the vehicle limit " + std::to_string(*instance.max_vehicles));
    }
    if (lengths_computable) {
        double total = 0.0;
        for (const auto& route : candidate.routes) {
            std::vector<NodeId> clean;
            for (auto id : route) {
                if (id != instance.depot) clean.push_back(id);
            }
            total += route_length(instance, clean);
        }
        if (!nearly_equal(total, candidate.total_length)) {
            add(ViolationKind::LengthMismatch, std::nullopt, std::nullopt,
                "stated length " + formats::format_real(candidate.total_length) + " differs from recomputed " +
                    formats::format_real(total));
        }
    }
    return report;
}

}  // namespace metasolver::classical
