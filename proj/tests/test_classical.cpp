#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "metasolver/classical.hpp"
#include "metasolver/errors.hpp"
#include "support.hpp"

using namespace metasolver;
using namespace metasolver::classical;
using formats::KnapsackItem;
using formats::Node;
using testing_support::brute_force_knapsack;
using testing_support::brute_force_tsp;
using testing_support::random_knapsack;
using testing_support::random_tsp;
using testing_support::random_vrp;
using testing_support::unit_square;

namespace {

bool is_permutation_of(const std::vector<NodeId>& order, const TspInstance& t) {
    std::vector<NodeId> a = order;
    std::vector<NodeId> b;
    for (const auto& n : t.nodes) b.push_back(n.id);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

/// Minimum VRP length by enumerating every assignment of customers to at most
/// `vehicles` labelled routes and every order within each route.
double brute_force_vrp(const VrpInstance& v) {
    const auto customers = v.customers();
    const std::size_t n = customers.size();
    const std::size_t k = v.max_vehicles ? static_cast<std::size_t>(*v.max_vehicles) : n;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> label(n, 0);
    while (true) {
        std::vector<std::vector<NodeId>> routes(k);
        for (std::size_t i = 0; i < n; ++i) routes[label[i]].push_back(customers[i]);
        bool feasible = true;
        double total = 0.0;
        for (auto& r : routes) {
            std::int64_t load = 0;
            for (auto c : r) load += v.demand_of(c);
            if (load > v.capacity) feasible = false;
            if (!feasible || r.empty()) continue;
            std::sort(r.begin(), r.end());
            double route_best = std::numeric_limits<double>::infinity();
            do {
                double len = testing_support::hyp(v.node(v.depot), v.node(r.front())) +
                             testing_support::hyp(v.node(r.back()), v.node(v.depot));
                for (std::size_t i = 0; i + 1 < r.size(); ++i) len += testing_support::hyp(v.node(r[i]), v.node(r[i + 1]));
                route_best = std::min(route_best, len);
            } while (std::next_permutation(r.begin(), r.end()));
            total += route_best;
        }
        if (feasible) best = std::min(best, total);
        std::size_t pos = 0;
        while (pos < n && ++label[pos] == k) label[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

}  // namespace

TEST_CASE("knapsack: worked example") {
    // Items 1 and 2 fill the capacity exactly: 3 + 4 = 7.
    KnapsackInstance k{{{1, 2, 3}, {2, 3, 4}, {3, 4, 5}}, 5};
    const double oracle = brute_force_knapsack(k);
    CHECK(oracle == 7.0);
    const auto dp = knapsack_dp(k);
    CHECK(dp.total_value == oracle);
    CHECK(dp.chosen_item_ids == std::vector<std::int64_t>{1, 2});
    CHECK(dp.total_weight == 5);
    CHECK(knapsack_branch_bound(k).total_value == oracle);
}

TEST_CASE("knapsack: degenerate inputs") {
    CHECK(knapsack_dp({}).chosen_item_ids.empty());
    CHECK(knapsack_dp({}).total_value == 0.0);
    KnapsackInstance heavy{{{1, 9, 5}}, 3};
    CHECK(knapsack_dp(heavy).chosen_item_ids.empty());
    CHECK(knapsack_branch_bound(heavy).chosen_item_ids.empty());
    CHECK(knapsack_fractional_bound({{{1, 1, 2}, {2, 1, 3}}, 10}) == 5.0);
}

TEST_CASE("knapsack: lexicographically smallest optimal set") {
    // Any two items reach value 10 with weight 4.
    KnapsackInstance k{{{1, 2, 5}, {2, 2, 5}, {3, 2, 5}, {4, 2, 5}}, 4};
    CHECK(knapsack_dp(k).chosen_item_ids == std::vector<std::int64_t>{1, 2});
    KnapsackInstance k2{{{3, 1, 4}, {1, 3, 4}, {2, 1, 0}}, 1};
    CHECK(knapsack_dp(k2).chosen_item_ids == std::vector<std::int64_t>{3});
}

TEST_CASE("knapsack: dp, branch and bound and subset enumeration agree") {
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const auto k = random_knapsack(rng, rng.index(13));
        const auto dp = knapsack_dp(k);
        const auto bb = knapsack_branch_bound(k);
        const double oracle = brute_force_knapsack(k);
        CHECK(dp.total_value == oracle);
        CHECK(bb.total_value == oracle);
        CHECK(dp.total_weight <= k.capacity);
        CHECK(bb.total_weight <= k.capacity);
        CHECK(knapsack_fractional_bound(k) >= oracle - 1e-9);
        // Totals recompute from the chosen ids.
        for (const auto* sol : {&dp, &bb}) {
            double v = 0.0;
            std::int64_t w = 0;
            for (auto id : sol->chosen_item_ids) {
                const auto it = std::find_if(k.items.begin(), k.items.end(), [&](const KnapsackItem& i) { return i.id == id; });
                REQUIRE(it != k.items.end());
                v += it->value;
                w += it->weight;
            }
            CHECK(v == sol->total_value);
            CHECK(w == sol->total_weight);
        }
    }
}

TEST_CASE("nearest neighbour") {
    TspInstance two{"two", {{1, 0, 0}, {2, 3, 4}}};
    CHECK(tsp_nearest_neighbor(two, 1).length == 10.0);

    TspInstance three{"three", {{1, 0, 0}, {2, 5, 1}, {3, 2, 7}}};
    const auto t3 = tsp_nearest_neighbor(three, 2);
    CHECK(t3.length == doctest::Approx(brute_force_tsp(three)).epsilon(1e-12));

    const auto sq = tsp_nearest_neighbor(unit_square(), 1);
    CHECK(sq.length == 4.0);
    CHECK(sq.order == std::vector<NodeId>{1, 2, 3, 4});
}

TEST_CASE("2-opt on the unit square") {
    const auto sq = unit_square();
    Tour optimal{{1, 2, 3, 4}, 4.0};
    // Enumerating every 2-opt move on the optimal tour finds none that helps.
    for (std::size_t i = 0; i + 2 < 4; ++i) {
        for (std::size_t j = i + 2; j < 4; ++j) {
            auto order = optimal.order;
            std::reverse(order.begin() + static_cast<std::ptrdiff_t>(i) + 1, order.begin() + static_cast<std::ptrdiff_t>(j) + 1);
            CHECK(tour_length(sq, order) >= 4.0);
        }
    }
    CHECK(tsp_two_opt(sq, optimal).length == 4.0);

    std::vector<NodeId> crossed{1, 3, 2, 4};
    Tour bad{crossed, tour_length(sq, crossed)};
    CHECK(bad.length == doctest::Approx(2.0 + 2.0 * std::sqrt(2.0)));
    const auto fixed = tsp_two_opt(sq, bad, {.max_passes = 1, .seed = 0});
    CHECK(fixed.length == 4.0);
}

TEST_CASE("2-opt is monotone, deterministic and above the optimum") {
    Rng rng(77);
    for (int trial = 0; trial < 60; ++trial) {
        const auto t = random_tsp(rng, 4 + rng.index(9));
        std::vector<NodeId> order;
        for (const auto& n : t.nodes) order.push_back(n.id);
        rng.shuffle(order);
        Tour start{order, tour_length(t, order)};
        const auto seed = rng.next();
        const auto a = tsp_two_opt(t, start, {.max_passes = 1000, .seed = seed});
        const auto b = tsp_two_opt(t, start, {.max_passes = 1000, .seed = seed});
        CHECK(a == b);
        CHECK(a.length <= start.length);
        CHECK(is_permutation_of(a.order, t));
        CHECK(a.length == tour_length(t, a.order));
        CHECK(a.length >= tsp_held_karp(t).length - 1e-9);
    }
}

TEST_CASE("Held-Karp equals brute force exactly") {
    CHECK(tsp_held_karp(unit_square()).length == 4.0);
    Rng rng(1);
    for (int trial = 0; trial < 40; ++trial) {
        const auto t = random_tsp(rng, 2 + rng.index(7));
        const auto hk = tsp_held_karp(t);
        CHECK(is_permutation_of(hk.order, t));
        CHECK(hk.length == brute_force_tsp(t));
        CHECK(hk.order.front() == 1);
    }
    CHECK_THROWS_AS(tsp_held_karp(random_tsp(rng, 21)), TooLarge);
}

TEST_CASE("savings: small cases") {
    Rng rng(4);
    auto v = random_vrp(rng, 2, 2);
    const auto two = vrp_savings(v);
    CHECK(two.routes.size() == 1);
    CHECK(two.total_length == doctest::Approx(brute_force_vrp(v)).epsilon(1e-12));

    auto four = random_vrp(rng, 4, 2);
    const auto s = vrp_savings(four);
    CHECK(s.routes.size() == 2);
    CHECK(validate_routes(four, s).ok());

    auto limited = random_vrp(rng, 4, 1, 3);
    CHECK_THROWS_AS(vrp_savings(limited), Infeasible);
}

TEST_CASE("savings and brute force on random instances") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng.index(7);
        const auto cap = static_cast<std::int64_t>(1 + rng.index(4));
        const auto need = (static_cast<std::int64_t>(n) + cap - 1) / cap;
        auto v = random_vrp(rng, n, cap, trial % 2 ? std::optional<std::int64_t>(need + static_cast<std::int64_t>(rng.index(2))) : std::nullopt);
        const auto bf = vrp_brute_force(v);
        CHECK(validate_routes(v, bf).ok());
        CHECK(bf.total_length == doctest::Approx(brute_force_vrp(v)).epsilon(1e-12));
        try {
            const auto sv = vrp_savings(v);
            CHECK(validate_routes(v, sv).ok());
            CHECK(sv.total_length >= bf.total_length - 1e-9);
        } catch (const Infeasible&) {
            // Savings may need more routes than the limit allows.
            CHECK(v.max_vehicles.has_value());
        }
    }
}

TEST_CASE("brute force cross-checks Held-Karp when one route suffices") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        auto v = random_vrp(rng, 4, 4, 1);
        TspInstance t{"all", v.nodes};
        CHECK(vrp_brute_force(v).total_length == doctest::Approx(tsp_held_karp(t).length).epsilon(1e-12));
    }
    CHECK_THROWS_AS(vrp_brute_force(random_vrp(rng, 9, 3)), TooLarge);
}

TEST_CASE("validate_routes reports each violation kind") {
    Rng rng(6);
    auto v = random_vrp(rng, 4, 2, 2);
    const auto good = vrp_brute_force(v);
    CHECK(validate_routes(v, good).ok());

    auto missing = good;
    missing.routes[0].pop_back();
    missing.total_length = 0.0;
    for (const auto& r : missing.routes) missing.total_length += route_length(v, r);
    auto report = validate_routes(v, missing);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ViolationKind::MissingCustomer);

    RouteSolution heavy{{{2, 3, 4}, {5}}, 0.0};
    heavy.total_length = route_length(v, heavy.routes[0]) + route_length(v, heavy.routes[1]);
    report = validate_routes(v, heavy);
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0].kind == ViolationKind::CapacityExceeded);
    CHECK(report.violations[0].route == std::size_t{0});

    RouteSolution many{{{2}, {3}, {4, 5}}, 0.0};
    for (const auto& r : many.routes) many.total_length += route_length(v, r);
    CHECK(validate_routes(v, many).violations.at(0).kind == ViolationKind::VehicleCountExceeded);

    auto wrong_length = good;
    wrong_length.total_length *= 1.0 + 1e-6;
    CHECK(validate_routes(v, wrong_length).violations.at(0).kind == ViolationKind::LengthMismatch);

    RouteSolution dup{{{2, 3}, {3, 4, 5}}, 0.0};
    std::set<ViolationKind> kinds;
    for (const auto& viol : validate_routes(v, dup).violations) kinds.insert(viol.kind);
    CHECK(kinds.contains(ViolationKind::DuplicateCustomer));

    RouteSolution depot{{{1, 2, 3}, {4, 5}}, 0.0};
    kinds.clear();
    for (const auto& viol : validate_routes(v, depot).violations) kinds.insert(viol.kind);
    CHECK(kinds.contains(ViolationKind::DepotInRoute));
}
