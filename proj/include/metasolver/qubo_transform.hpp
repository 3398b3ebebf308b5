#pragma once

// One-hot (city x position) QUBO encoding of the TSP with quadratic equality
// penalties, decoding of samples back to tours, and an exhaustive minimiser.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "metasolver/classical.hpp"
#include "metasolver/formats.hpp"

namespace metasolver::qubo {

using classical::Tour;
using formats::NodeId;
using formats::Qubo;
using formats::TspInstance;

using Bits = std::vector<std::uint8_t>;

struct TspQuboEncoding {
    Qubo qubo;
    std::size_t n = 0;  // cities
    double penalty_a = 0.0;
    double weight_b = 1.0;
    std::vector<NodeId> city_order;  // city slot -> node id
    TspInstance instance;

    /// Variable index of (city slot, position).
    std::size_t var(std::size_t city, std::size_t position) const noexcept { return city * n + position; }
};

struct EncodeOptions {
    double weight_b = 1.0;
    /// Overrides the default penalty weight_b * n * w_max + 1. Values at or
    /// below weight_b * n * w_max void the valid/invalid energy separation.
    std::optional<double> penalty_a;
};

/// Smallest integer-margin penalty that separates invalid from valid assignments.
double default_penalty(const TspInstance& instance, double weight_b);

TspQuboEncoding encode_tsp(const TspInstance& instance, const EncodeOptions& options = {});

struct ConstraintViolation {
    enum class Kind { Position, City };
    Kind kind;
    std::size_t index;  // position, or city slot
    std::size_t count;  // how many ones the row/column holds (expected 1)

    std::string describe(const TspQuboEncoding& encoding) const;
};

struct InvalidAssignment {
    std::vector<ConstraintViolation> violations;
};

using DecodeResult = std::variant<Tour, InvalidAssignment>;

/// Reads a permutation matrix back into a tour, in canonical cycle order. No
/// repair is attempted.
DecodeResult decode_bitstring(const TspQuboEncoding& encoding, std::span<const std::uint8_t> x);

/// Bitstring of the tour visiting `order` (node ids) position by position.
Bits encode_tour(const TspQuboEncoding& encoding, std::span<const NodeId> order);

double energy(const Qubo& qubo, std::span<const std::uint8_t> x);

/// Dense form used by the samplers: flipping bit i changes the energy by
/// (1 - 2 x_i) * local_field(i).
class QuboModel {
public:
    explicit QuboModel(const Qubo& qubo);

    std::size_t size() const noexcept { return n_; }
    double offset() const noexcept { return offset_; }
    double linear(std::size_t i) const noexcept { return linear_[i]; }
    double coupling(std::size_t i, std::size_t j) const noexcept { return coupling_[i * n_ + j]; }
    /// Largest absolute coefficient (0 for a constant QUBO).
    double scale() const noexcept { return scale_; }

    double energy(std::span<const std::uint8_t> x) const;
    /// linear(i) + sum_j coupling(i, j) x_j.
    double local_field(std::span<const std::uint8_t> x, std::size_t i) const;

private:
    std::size_t n_;
    double offset_;
    double scale_ = 0.0;
    std::vector<double> linear_;
    std::vector<double> coupling_;  // symmetric, zero diagonal
};

inline constexpr std::size_t kExhaustiveMaxVars = 24;

struct Minimum {
    Bits x;
    double energy = 0.0;
};

/// Global minimiser over all 2^n assignments. Energy ties go to the smallest
/// integer sum_i x_i 2^i.
Minimum exhaustive_qubo_min(const Qubo& qubo);

std::string bits_to_string(std::span<const std::uint8_t> x);
Bits bits_from_string(std::string_view text);

}  // namespace metasolver::qubo
