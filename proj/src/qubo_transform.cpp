#include "metasolver/qubo_transform.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "metasolver/errors.hpp"

namespace metasolver::qubo {

double default_penalty(const TspInstance& instance, double weight_b) {
    const formats::DistanceMatrix dist(instance.nodes);
    return weight_b * static_cast<double>(instance.size()) * dist.max_entry() + 1.0;
}

TspQuboEncoding encode_tsp(const TspInstance& instance, const EncodeOptions& options) {
    const std::size_t n = instance.size();
    TspQuboEncoding enc;
    enc.n = n;
    enc.weight_b = options.weight_b;
    enc.penalty_a = options.penalty_a.value_or(default_penalty(instance, options.weight_b));
    enc.instance = instance;
    for (const auto& node : instance.nodes) enc.city_order.push_back(node.id);
    enc.qubo.n = n * n;

    const double a = enc.penalty_a;
    // A * (1 - sum x)^2 over a one-hot group = A - A * sum x + 2A * sum_{pairs} x x.
    auto one_hot = [&](auto member) {
        enc.qubo.offset += a;
        for (std::size_t s = 0; s < n; ++s) {
            enc.qubo.add(member(s), member(s), -a);
            for (std::size_t t = s + 1; t < n; ++t) enc.qubo.add(member(s), member(t), 2.0 * a);
        }
    };
    for (std::size_t p = 0; p < n; ++p) one_hot([&](std::size_t v) { return enc.var(v, p); });
    for (std::size_t v = 0; v < n; ++v) one_hot([&](std::size_t p) { return enc.var(v, p); });

    // B * sum over ordered city pairs of w_uv * x_{u,p} x_{v,p+1}.
    const formats::DistanceMatrix dist(instance.nodes);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (u == v) continue;
            const double w = options.weight_b * dist(u, v);
            for (std::size_t p = 0; p < n; ++p) enc.qubo.add(enc.var(u, p), enc.var(v, (p + 1) % n), w);
        }
    }
    return enc;
}

std::string ConstraintViolation::describe(const TspQuboEncoding& encoding) const {
    if (kind == Kind::Position) {
        return "position " + std::to_string(index) + " holds " + std::to_string(count) + " cities";
    }
    return "city " + std::to_string(encoding.city_order[index]) + " occupies " + std::to_string(count) + " positions";
}

DecodeResult decode_bitstring(const TspQuboEncoding& encoding, std::span<const std::uint8_t> x) {
    const std::size_t n = encoding.n;
    if (x.size() != n * n) {
        throw DimensionMismatch("bitstring has " + std::to_string(x.size()) + " bits, encoding needs " +
                                std::to_string(n * n));
    }
    InvalidAssignment invalid;
    std::vector<NodeId> order(n);
    for (std::size_t p = 0; p < n; ++p) {
        std::size_t count = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (x[encoding.var(v, p)]) {
                ++count;
                order[p] = encoding.city_order[v];
            }
        }
        if (count != 1) invalid.violations.push_back({ConstraintViolation::Kind::Position, p, count});
    }
    for (std::size_t v = 0; v < n; ++v) {
        std::size_t count = 0;
        for (std::size_t p = 0; p < n; ++p) count += x[encoding.var(v, p)] ? 1 : 0;
        if (count != 1) invalid.violations.push_back({ConstraintViolation::Kind::City, v, count});
    }
    if (!invalid.violations.empty()) return invalid;
    // Canonical order so the length is summed exactly as the other TSP solvers sum it.
    Tour tour;
    tour.order = classical::canonical_cycle(order);
    tour.length = classical::tour_length(encoding.instance, tour.order);
    return tour;
}

Bits encode_tour(const TspQuboEncoding& encoding, std::span<const NodeId> order) {
    if (order.size() != encoding.n) throw DimensionMismatch("tour length does not match city count");
    Bits x(encoding.n * encoding.n, 0);
    for (std::size_t p = 0; p < order.size(); ++p) {
        const auto it = std::find(encoding.city_order.begin(), encoding.city_order.end(), order[p]);
        if (it == encoding.city_order.end()) throw UnknownNode("unknown node " + std::to_string(order[p]));
        x[encoding.var(static_cast<std::size_t>(it - encoding.city_order.begin()), p)] = 1;
    }
    return x;
}

double energy(const Qubo& qubo, std::span<const std::uint8_t> x) {
    if (x.size() != qubo.n) {
        throw DimensionMismatch("assignment has " + std::to_string(x.size()) + " bits, qubo has " +
                                std::to_string(qubo.n));
    }
    double e = qubo.offset;
    for (const auto& [key, value] : qubo.coefficients) {
        if (x[key.first] && x[key.second]) e += value;
    }
    return e;
}

QuboModel::QuboModel(const Qubo& qubo)
    : n_(qubo.n), offset_(qubo.offset), linear_(qubo.n, 0.0), coupling_(qubo.n * qubo.n, 0.0) {
    for (const auto& [key, value] : qubo.coefficients) {
        const auto [i, j] = key;
        scale_ = std::max(scale_, std::abs(value));
        if (i == j) {
            linear_[i] += value;
        } else {
            coupling_[i * n_ + j] += value;
            coupling_[j * n_ + i] += value;
        }
    }
}

double QuboModel::energy(std::span<const std::uint8_t> x) const {
    double e = offset_;
    for (std::size_t i = 0; i < n_; ++i) {
        if (!x[i]) continue;
        e += linear_[i];
        for (std::size_t j = i + 1; j < n_; ++j) {
            if (x[j]) e += coupling_[i * n_ + j];
        }
    }
    return e;
}

double QuboModel::local_field(std::span<const std::uint8_t> x, std::size_t i) const {
    double f = linear_[i];
    const double* row = coupling_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) {
        if (x[j]) f += row[j];
    }
    return f;
}

Minimum exhaustive_qubo_min(const Qubo& qubo) {
    const std::size_t n = qubo.n;
    if (n > kExhaustiveMaxVars) {
        throw TooLarge("exhaustive search supports at most " + std::to_string(kExhaustiveMaxVars) +
                       " variables, got " + std::to_string(n));
    }
    const QuboModel model(qubo);
    double magnitude = std::abs(qubo.offset);
    for (const auto& [key, value] : qubo.coefficients) magnitude += std::abs(value);
    const double tolerance = 1e-9 * std::max(1.0, magnitude);

    // Gray-code walk with incremental energies; anything within `tolerance`
    // of the running best is re-scored exactly before the tie-break.
    Bits x(n, 0);
    std::vector<double> field(n);
    for (std::size_t i = 0; i < n; ++i) field[i] = model.linear(i);
    double e = qubo.offset;
    double running = e;
    std::uint64_t value = 0;

    Minimum result{x, energy(qubo, x)};
    std::uint64_t best_value = 0;
    auto consider = [&](bool reset) {
        const double exact = energy(qubo, x);
        if (reset || exact < result.energy || (exact == result.energy && value < best_value)) {
            result.energy = exact;
            result.x = x;
            best_value = value;
        }
    };

    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < total; ++step) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(step));
        const double sign = x[bit] ? -1.0 : 1.0;
        e += sign * field[bit];
        x[bit] ^= 1U;
        value ^= std::uint64_t{1} << bit;
        for (std::size_t j = 0; j < n; ++j) field[j] += sign * model.coupling(j, bit);

        if (e < running - tolerance) {
            running = e;
            consider(true);
        } else if (e <= running + tolerance) {
            running = std::min(running, e);
            consider(false);
        }
    }
    return result;
}

std::string bits_to_string(std::span<const std::uint8_t> x) {
    std::string s(x.size(), '0');
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] ? '1' : '0';
    return s;
}

Bits bits_from_string(std::string_view text) {
    Bits x(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '0' && text[i] != '1') throw ParseError(1, "bitstring may only contain 0 and 1");
        x[i] = text[i] == '1' ? 1 : 0;
    }
    return x;
}

}  // namespace metasolver::qubo
