#pragma once

// Desk-scale stand-ins for quantum execution: a Metropolis simulated annealer
// and an exact QAOA statevector simulator, plus backend matching and the job
// and sample-set text formats exchanged between problems.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "metasolver/formats.hpp"
#include "metasolver/qubo_transform.hpp"

namespace metasolver::quantum {

using formats::Qubo;
using qubo::Bits;

enum class JobKind { Anneal, Qaoa };

std::string to_string(JobKind kind);
JobKind job_kind_from_string(std::string_view text);

struct AnnealParams {
    std::size_t sweeps = 1000;
    std::size_t restarts = 10;
    // Inverse temperatures in units of 1 / max|Q_ij|, so the schedule does not
    // depend on the QUBO's overall scale.
    double beta_start = 0.1;
    double beta_end = 10.0;

    friend bool operator==(const AnnealParams&, const AnnealParams&) = default;
};

struct QaoaParams {
    std::size_t layers = 1;
    std::size_t iterations = 60;  // coordinate-descent rounds per start
    std::size_t starts = 3;
    std::uint64_t parameter_seed = 0;

    friend bool operator==(const QaoaParams&, const QaoaParams&) = default;
};

struct QuantumJob {
    JobKind kind = JobKind::Anneal;
    Qubo qubo;
    std::size_t shots = 1024;
    AnnealParams anneal;
    QaoaParams qaoa;
    std::uint64_t seed = 0;

    friend bool operator==(const QuantumJob&, const QuantumJob&) = default;
};

/// Key/value header (kind, shots, seed, schedule and layer parameters), a
/// "qubo" marker line, then the QUBO text.
std::string serialize_job(const QuantumJob& job);
QuantumJob parse_job(std::string_view text);

struct Sample {
    Bits bits;
    double energy = 0.0;
    std::size_t multiplicity = 1;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct SampleSet {
    std::vector<Sample> samples;  // ascending energy, then bitstring
    std::size_t best = 0;
    std::string backend_name;
    std::map<std::string, double> timings;
    std::map<std::string, std::string> diagnostics;

    std::size_t total_multiplicity() const;
};

/// Merges duplicate bitstrings and sorts ascending by (energy, bitstring).
SampleSet make_sampleset(const std::vector<Sample>& raw, std::string backend_name);

std::string serialize_sampleset(const SampleSet& set);
SampleSet parse_sampleset(std::string_view text);

// Backends ------------------------------------------------------------------

enum class BackendKind { LocalSimulator, RemoteStub };

struct BackendDescriptor {
    std::string name;
    BackendKind kind = BackendKind::LocalSimulator;
    std::size_t max_qubits = 0;
    std::set<JobKind> supported_kinds;
    bool requires_token = false;
    std::string description;
};

inline constexpr std::size_t kStatevectorMaxQubits = 20;

/// local-statevector (QAOA), local-sa (annealing), remote-stub (token, never runs).
const std::vector<BackendDescriptor>& default_backends();

bool compatible(const QuantumJob& job, const BackendDescriptor& backend);

/// The user's choice if it fits the job, otherwise the first compatible local
/// simulator in registry order.
const BackendDescriptor& match_backend(const QuantumJob& job, std::span<const BackendDescriptor> backends,
                                       const std::optional<std::string>& user_choice,
                                       const std::optional<std::string>& token = std::nullopt);

/// Re-checks compatibility, then runs the job on a local simulator.
SampleSet run_quantum_job(const QuantumJob& job, const BackendDescriptor& backend);

// Simulated annealing -------------------------------------------------------

/// Called once per sweep with the best energy seen so far in that restart.
using AnnealObserver = std::function<void(std::size_t restart, std::size_t sweep, double best_energy)>;

/// One sample per restart (merged when bitstrings coincide).
SampleSet simulated_anneal(const QuantumJob& job, const AnnealObserver& observer = {});

// QAOA ------------------------------------------------------------------------

using Amplitudes = std::vector<std::complex<double>>;

struct QaoaAngles {
    std::vector<double> gammas;
    std::vector<double> betas;
};

class QaoaSimulator {
public:
    /// Throws TooLarge above kStatevectorMaxQubits.
    explicit QaoaSimulator(const Qubo& qubo);

    std::size_t qubits() const noexcept { return n_; }
    /// Energy of every basis state; bit i of the index is x_i.
    const std::vector<double>& energies() const noexcept { return energies_; }
    /// Cost phases use energy / phase_scale.
    double phase_scale() const noexcept { return phase_scale_; }

    using LayerObserver = std::function<void(std::size_t layer, const Amplitudes& state)>;

    /// Uniform superposition followed by cost-phase and mixer layers.
    Amplitudes evolve(const QaoaAngles& angles, const LayerObserver& observer = {}) const;
    double expectation(const QaoaAngles& angles) const;
    std::vector<double> probabilities(const QaoaAngles& angles) const;

private:
    std::size_t n_;
    std::vector<double> energies_;
    double phase_scale_ = 1.0;
};

struct QaoaOptimum {
    QaoaAngles angles;
    double expectation = 0.0;
    std::size_t evaluations = 0;
};

/// Seeded multi-start coordinate descent with step halving on <H>.
QaoaOptimum optimize_qaoa(const QaoaSimulator& simulator, const QaoaParams& params);

SampleSet qaoa_statevector(const QuantumJob& job);

/// QASM-like listing of the circuit the statevector path simulates.
std::string qaoa_gate_list(const Qubo& qubo, double phase_scale, const QaoaAngles& angles);

// Decoding ------------------------------------------------------------------

/// First sample (ascending energy) that decodes to a valid tour.
std::optional<classical::Tour> decode_first_valid(const qubo::TspQuboEncoding& encoding, const SampleSet& samples);

struct InvalidSamples {
    std::size_t attempts = 0;
};

using Resampler = std::function<SampleSet(std::size_t attempt)>;

/// Decodes `samples`; on failure draws up to `retry_budget` fresh sample sets
/// from `resample` before giving up.
std::variant<classical::Tour, InvalidSamples> sampleset_to_solution(const qubo::TspQuboEncoding& encoding,
                                                                    const SampleSet& samples, std::size_t retry_budget,
                                                                    const Resampler& resample = {});

}  // namespace metasolver::quantum
