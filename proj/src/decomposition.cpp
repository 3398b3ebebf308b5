#include "metasolver/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "metasolver/errors.hpp"
#include "metasolver/rng.hpp"

namespace metasolver::decomposition {

using formats::euclidean;

namespace {

double diameter(const VrpInstance& instance) {
    double best = 0.0;
    for (std::size_t i = 0; i < instance.nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < instance.nodes.size(); ++j) {
            best = std::max(best, euclidean(instance.nodes[i], instance.nodes[j]));
        }
    }
    return best;
}

void check_customer_demands(const VrpInstance& instance) {
    for (auto c : instance.customers()) {
        if (instance.demand_of(c) > instance.capacity) {
            throw Infeasible("customer " + std::to_string(c) + " demand " + std::to_string(instance.demand_of(c)) +
                             " exceeds capacity " + std::to_string(instance.capacity));
        }
    }
}

}  // namespace

std::size_t min_cluster_count(const VrpInstance& instance) {
    const auto total = instance.total_demand();
    return std::max<std::size_t>(1, static_cast<std::size_t>((total + instance.capacity - 1) / instance.capacity));
}

void check_partition(const VrpInstance& instance, const Clustering& clustering) {
    std::set<NodeId> expected;
    for (auto c : instance.customers()) expected.insert(c);
    std::set<NodeId> seen;
    for (std::size_t k = 0; k < clustering.clusters.size(); ++k) {
        std::int64_t load = 0;
        for (auto c : clustering.clusters[k]) {
            if (!expected.contains(c)) throw Infeasible("cluster " + std::to_string(k) + " holds non-customer " + std::to_string(c));
            if (!seen.insert(c).second) throw Infeasible("customer " + std::to_string(c) + " in two clusters");
            load += instance.demand_of(c);
        }
        if (load > instance.capacity) throw Infeasible("cluster " + std::to_string(k) + " exceeds capacity");
    }
    if (seen != expected) throw Infeasible("clustering does not cover every customer");
    if (instance.max_vehicles && clustering.clusters.size() > static_cast<std::size_t>(*instance.max_vehicles)) {
        throw Infeasible(std::to_string(clustering.clusters.size()) + " clusters exceed the vehicle limit " +
                         std::to_string(*instance.max_vehicles));
    }
}

Clustering two_phase_cluster(const VrpInstance& instance, const KnapsackSolverFn& knapsack_solver) {
    check_customer_demands(instance);
    // One unit above the diameter keeps every proximity value positive, so the
    // knapsack never leaves usable capacity to a zero-valued customer.
    const double reach = diameter(instance) + 1.0;
    const auto& depot = instance.node(instance.depot);

    std::vector<NodeId> unassigned = instance.customers();
    std::sort(unassigned.begin(), unassigned.end());
    std::vector<const formats::Node*> anchors{&depot};

    Clustering result;
    while (!unassigned.empty()) {
        // Farthest-point seed: maximise the distance to the depot and all earlier seeds.
        NodeId seed = unassigned.front();
        double seed_score = -1.0;
        for (auto c : unassigned) {
            double nearest = std::numeric_limits<double>::infinity();
            for (const auto* a : anchors) nearest = std::min(nearest, euclidean(instance.node(c), *a));
            if (nearest > seed_score) {
                seed_score = nearest;
                seed = c;
            }
        }
        const auto& seed_node = instance.node(seed);
        anchors.push_back(&seed_node);
        result.seed_nodes.push_back(seed);

        formats::KnapsackInstance knapsack;
        knapsack.capacity = instance.capacity - instance.demand_of(seed);
        for (auto c : unassigned) {
            if (c == seed) continue;
            knapsack.items.push_back({c, instance.demand_of(c), reach - euclidean(instance.node(c), seed_node)});
        }
        const auto chosen = knapsack_solver(knapsack);

        std::vector<NodeId> cluster{seed};
        std::int64_t load = instance.demand_of(seed);
        for (auto id : chosen.chosen_item_ids) {
            if (std::find(unassigned.begin(), unassigned.end(), id) == unassigned.end() || id == seed) {
                throw Infeasible("knapsack solver chose unknown item " + std::to_string(id));
            }
            cluster.push_back(id);
            load += instance.demand_of(id);
        }
        if (load > instance.capacity) throw Infeasible("knapsack solver exceeded capacity");
        std::sort(cluster.begin(), cluster.end());
        std::erase_if(unassigned, [&](NodeId c) { return std::binary_search(cluster.begin(), cluster.end(), c); });
        result.clusters.push_back(std::move(cluster));
    }
    check_partition(instance, result);
    return result;
}

Clustering kmeans_cluster(const VrpInstance& instance, const KMeansOptions& options) {
    const auto customers = instance.customers();
    const std::size_t n = customers.size();
    const std::size_t k = options.k;
    if (k < 1 || k > n) {
        throw std::invalid_argument("k must lie in [1, " + std::to_string(n) + "], got " + std::to_string(k));
    }
    check_customer_demands(instance);
    if (instance.max_vehicles && k > static_cast<std::size_t>(*instance.max_vehicles)) {
        throw Infeasible("k exceeds the vehicle limit");
    }
    if (instance.total_demand() > static_cast<std::int64_t>(k) * instance.capacity) {
        throw Infeasible("total demand exceeds k * capacity");
    }

    Rng rng(options.seed);
    std::vector<std::size_t> draw(n);
    for (std::size_t i = 0; i < n; ++i) draw[i] = i;
    rng.shuffle(draw);

    struct Point {
        double x, y;
    };
    std::vector<Point> centroid(k);
    Clustering result;
    for (std::size_t c = 0; c < k; ++c) {
        const auto& node = instance.node(customers[draw[c]]);
        centroid[c] = {node.x, node.y};
        result.seed_nodes.push_back(node.id);
    }
    auto dist = [&](std::size_t customer, std::size_t cluster) {
        const auto& node = instance.node(customers[customer]);
        return std::hypot(node.x - centroid[cluster].x, node.y - centroid[cluster].y);
    };

    std::vector<std::size_t> assign(n, k);
    for (std::size_t iter = 0; iter < std::max<std::size_t>(1, options.max_iters); ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < k; ++c) {
                if (dist(i, c) < dist(i, best)) best = c;
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<Point> sum(k, {0.0, 0.0});
        std::vector<std::size_t> count(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& node = instance.node(customers[i]);
            sum[assign[i]].x += node.x;
            sum[assign[i]].y += node.y;
            ++count[assign[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c]) centroid[c] = {sum[c].x / static_cast<double>(count[c]), sum[c].y / static_cast<double>(count[c])};
        }
    }

    // Capacity repair.
    std::vector<std::int64_t> load(k, 0);
    for (std::size_t i = 0; i < n; ++i) load[assign[i]] += instance.demand_of(customers[i]);
    while (true) {
        std::size_t over = k;
        for (std::size_t c = 0; c < k; ++c) {
            if (load[c] > instance.capacity) {
                over = c;
                break;
            }
        }
        if (over == k) break;

        std::size_t move_customer = n;
        std::size_t move_target = k;
        double best_increase = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (assign[i] != over) continue;
            const auto demand = instance.demand_of(customers[i]);
            std::size_t target = k;
            for (std::size_t c = 0; c < k; ++c) {
                if (c == over || load[c] + demand > instance.capacity) continue;
                if (target == k || dist(i, c) < dist(i, target)) target = c;
            }
            if (target == k) continue;
            const double increase = dist(i, target) - dist(i, over);
            if (increase < best_increase) {
                best_increase = increase;
                move_customer = i;
                move_target = target;
            }
        }
        if (move_customer == n) throw Infeasible("capacity repair cannot make progress with k = " + std::to_string(k));
        const auto demand = instance.demand_of(customers[move_customer]);
        load[over] -= demand;
        load[move_target] += demand;
        assign[move_customer] = move_target;
    }

    for (std::size_t c = 0; c < k; ++c) {
        std::vector<NodeId> cluster;
        for (std::size_t i = 0; i < n; ++i) {
            if (assign[i] == c) cluster.push_back(customers[i]);
        }
        if (cluster.empty()) continue;
        std::sort(cluster.begin(), cluster.end());
        result.clusters.push_back(std::move(cluster));
    }
    check_partition(instance, result);
    return result;
}

TspInstance cluster_to_tsp(const VrpInstance& instance, const std::vector<NodeId>& cluster) {
    TspInstance tsp;
    tsp.name = instance.name.empty() ? "cluster" : instance.name + "-cluster";
    tsp.nodes.push_back(instance.node(instance.depot));
    for (auto id : cluster) tsp.nodes.push_back(instance.node(id));
    return tsp;
}

RouteSolution compose_routes(const VrpInstance& instance, const std::vector<Tour>& tours) {
    std::set<NodeId> customers;
    for (auto c : instance.customers()) customers.insert(c);
    std::set<NodeId> used;
    RouteSolution solution;
    for (std::size_t t = 0; t < tours.size(); ++t) {
        const auto& order = tours[t].order;
        const auto depot_count = std::count(order.begin(), order.end(), instance.depot);
        if (depot_count != 1) {
            throw CompositionError("tour " + std::to_string(t) + " must contain the depot exactly once");
        }
        const auto at = std::find(order.begin(), order.end(), instance.depot);
        std::vector<NodeId> route(std::next(at), order.end());
        route.insert(route.end(), order.begin(), at);
        for (auto id : route) {
            if (!customers.contains(id)) throw CompositionError("tour " + std::to_string(t) + " visits non-customer " + std::to_string(id));
            if (!used.insert(id).second) throw CompositionError("customer " + std::to_string(id) + " appears in two tours");
        }
        solution.routes.push_back(std::move(route));
        solution.total_length += tours[t].length;
    }
    return solution;
}

RouteSolution clustered_optimum(const VrpInstance& instance, const Clustering& clustering) {
    std::vector<Tour> tours;
    for (const auto& cluster : clustering.clusters) {
        tours.push_back(classical::tsp_held_karp(cluster_to_tsp(instance, cluster)));
    }
    return compose_routes(instance, tours);
}

}  // namespace metasolver::decomposition
