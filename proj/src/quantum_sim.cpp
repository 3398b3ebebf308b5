#include "metasolver/quantum_sim.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include "metasolver/errors.hpp"
#include "metasolver/rng.hpp"

namespace metasolver::quantum {

using Clock = std::chrono::steady_clock;

namespace {

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

template <typename T>
T parse_number(std::string_view token, std::size_t line, std::string_view key) {
    T value{};
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError(line, "invalid value for " + std::string(key) + ": '" + std::string(token) + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) throw ParseError(line, "non-finite value for " + std::string(key));
    }
    return value;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        lines.push_back(text.substr(pos, end - pos));
        if (end == text.size()) break;
        pos = end + 1;
    }
    return lines;
}

std::pair<std::string_view, std::string_view> key_value(std::string_view line) {
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    const auto space = line.find_first_of(" \t");
    if (space == std::string_view::npos) return {line, {}};
    auto value = line.substr(space + 1);
    while (!value.empty() && std::isspace(static_cast<unsigned char>(value.front()))) value.remove_prefix(1);
    return {line.substr(0, space), value};
}

}  // namespace

std::string to_string(JobKind kind) { return kind == JobKind::Anneal ? "ANNEAL" : "QAOA"; }

JobKind job_kind_from_string(std::string_view text) {
    if (text == "ANNEAL") return JobKind::Anneal;
    if (text == "QAOA") return JobKind::Qaoa;
    throw ParseError(1, "unknown job kind '" + std::string(text) + "'");
}

std::string serialize_job(const QuantumJob& job) {
    std::ostringstream out;
    out << "kind " << to_string(job.kind) << "\n"
        << "shots " << job.shots << "\n"
        << "seed " << job.seed << "\n"
        << "sweeps " << job.anneal.sweeps << "\n"
        << "restarts " << job.anneal.restarts << "\n"
        << "beta_start " << formats::format_real(job.anneal.beta_start) << "\n"
        << "beta_end " << formats::format_real(job.anneal.beta_end) << "\n"
        << "layers " << job.qaoa.layers << "\n"
        << "iterations " << job.qaoa.iterations << "\n"
        << "starts " << job.qaoa.starts << "\n"
        << "parameter_seed " << job.qaoa.parameter_seed << "\n"
        << "qubo\n"
        << formats::serialize_qubo(job.qubo);
    return out.str();
}

QuantumJob parse_job(std::string_view text) {
    QuantumJob job;
    const auto lines = split_lines(text);
    std::set<std::string, std::less<>> seen;
    std::size_t i = 0;
    bool have_qubo = false;
    for (; i < lines.size(); ++i) {
        const std::size_t number = i + 1;
        const auto [key, value] = key_value(lines[i]);
        if (key.empty() || key.front() == '#') continue;
        if (key == "qubo") {
            have_qubo = true;
            ++i;
            break;
        }
        if (!seen.insert(std::string(key)).second) throw ParseError(number, "duplicate key " + std::string(key));
        if (key == "kind") {
            try {
                job.kind = job_kind_from_string(value);
            } catch (const ParseError& e) {
                throw ParseError(number, e.reason());
            }
        } else if (key == "shots") {
            job.shots = parse_number<std::size_t>(value, number, key);
            if (job.shots == 0) throw ParseError(number, "shots must be positive");
        } else if (key == "seed") {
            job.seed = parse_number<std::uint64_t>(value, number, key);
        } else if (key == "sweeps") {
            job.anneal.sweeps = parse_number<std::size_t>(value, number, key);
        } else if (key == "restarts") {
            job.anneal.restarts = parse_number<std::size_t>(value, number, key);
        } else if (key == "beta_start") {
            job.anneal.beta_start = parse_number<double>(value, number, key);
        } else if (key == "beta_end") {
            job.anneal.beta_end = parse_number<double>(value, number, key);
        } else if (key == "layers") {
            job.qaoa.layers = parse_number<std::size_t>(value, number, key);
        } else if (key == "iterations") {
            job.qaoa.iterations = parse_number<std::size_t>(value, number, key);
        } else if (key == "starts") {
            job.qaoa.starts = parse_number<std::size_t>(value, number, key);
        } else if (key == "parameter_seed") {
            job.qaoa.parameter_seed = parse_number<std::uint64_t>(value, number, key);
        } else {
            throw ParseError(number, "unknown job key " + std::string(key));
        }
    }
    if (!have_qubo) throw ParseError(lines.size(), "missing 'qubo' section");
    if (!seen.contains("kind")) throw ParseError(1, "missing 'kind'");
    if (job.anneal.beta_start <= 0.0 || job.anneal.beta_end <= 0.0) throw ParseError(1, "inverse temperatures must be positive");

    std::string rest;
    for (std::size_t k = i; k < lines.size(); ++k) {
        rest.append(lines[k]);
        rest.push_back('\n');
    }
    try {
        job.qubo = formats::parse_qubo(rest);
    } catch (const LowerTriangleEntry& e) {
        throw LowerTriangleEntry(e.line() + i, e.reason());
    } catch (const ParseError& e) {
        throw ParseError(e.line() + i, e.reason());
    }
    return job;
}

std::size_t SampleSet::total_multiplicity() const {
    std::size_t total = 0;
    for (const auto& s : samples) total += s.multiplicity;
    return total;
}

SampleSet make_sampleset(const std::vector<Sample>& raw, std::string backend_name) {
    std::map<Bits, Sample> merged;
    for (const auto& s : raw) {
        auto [it, inserted] = merged.try_emplace(s.bits, s);
        if (!inserted) it->second.multiplicity += s.multiplicity;
    }
    SampleSet set;
    set.backend_name = std::move(backend_name);
    for (auto& [bits, sample] : merged) set.samples.push_back(std::move(sample));
    std::stable_sort(set.samples.begin(), set.samples.end(),
                     [](const Sample& a, const Sample& b) { return a.energy < b.energy; });
    set.best = 0;
    return set;
}

std::string serialize_sampleset(const SampleSet& set) {
    std::string out = "backend " + set.backend_name + "\n";
    for (const auto& s : set.samples) {
        out += qubo::bits_to_string(s.bits) + " " + formats::format_real(s.energy) + " " +
               std::to_string(s.multiplicity) + "\n";
    }
    return out;
}

SampleSet parse_sampleset(std::string_view text) {
    SampleSet set;
    bool have_backend = false;
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t number = i + 1;
        std::istringstream in{std::string(lines[i])};
        std::string first;
        if (!(in >> first)) continue;
        if (first == "backend") {
            if (have_backend) throw ParseError(number, "duplicate backend line");
            in >> set.backend_name;
            have_backend = true;
            continue;
        }
        std::string energy;
        std::string count;
        std::string extra;
        if (!(in >> energy >> count) || (in >> extra)) throw ParseError(number, "expected '<bits> <energy> <count>'");
        Sample s;
        s.bits = qubo::bits_from_string(first);
        s.energy = parse_number<double>(energy, number, "energy");
        s.multiplicity = parse_number<std::size_t>(count, number, "multiplicity");
        if (!set.samples.empty() && s.bits.size() != set.samples.front().bits.size()) {
            throw ParseError(number, "bitstrings differ in length");
        }
        set.samples.push_back(std::move(s));
    }
    if (!have_backend) throw ParseError(1, "missing backend line");
    if (set.samples.empty()) throw ParseError(lines.size(), "sample set is empty");
    set.best = 0;
    for (std::size_t k = 1; k < set.samples.size(); ++k) {
        if (set.samples[k].energy < set.samples[set.best].energy) set.best = k;
    }
    return set;
}

// Backends --------------------------------------------------------------------

const std::vector<BackendDescriptor>& default_backends() {
    static const std::vector<BackendDescriptor> backends{
        {"local-statevector", BackendKind::LocalSimulator, kStatevectorMaxQubits, {JobKind::Qaoa}, false,
         "Exact QAOA statevector simulation"},
        {"local-sa", BackendKind::LocalSimulator, 4096, {JobKind::Anneal}, false,
         "Metropolis simulated annealing standing in for an annealing simulator"},
        {"remote-stub", BackendKind::RemoteStub, 127, {JobKind::Anneal, JobKind::Qaoa}, true,
         "Placeholder for cloud hardware; never executes"},
    };
    return backends;
}

bool compatible(const QuantumJob& job, const BackendDescriptor& backend) {
    return backend.supported_kinds.contains(job.kind) && job.qubo.n <= backend.max_qubits;
}

const BackendDescriptor& match_backend(const QuantumJob& job, std::span<const BackendDescriptor> backends,
                                       const std::optional<std::string>& user_choice,
                                       const std::optional<std::string>& token) {
    if (backends.empty()) throw NoCompatibleBackend("no backends registered");
    if (user_choice) {
        const auto it = std::find_if(backends.begin(), backends.end(),
                                     [&](const BackendDescriptor& b) { return b.name == *user_choice; });
        if (it == backends.end()) throw NoCompatibleBackend("unknown backend '" + *user_choice + "'");
        if (!compatible(job, *it)) {
            throw NoCompatibleBackend("backend '" + it->name + "' cannot run a " + to_string(job.kind) + " job on " +
                                      std::to_string(job.qubo.n) + " qubits; select another backend or recompile");
        }
        if (it->requires_token && (!token || token->empty())) {
            throw AuthenticationRequired("backend '" + it->name + "' requires an access token");
        }
        return *it;
    }
    for (const auto& b : backends) {
        if (b.kind == BackendKind::LocalSimulator && compatible(job, b)) return b;
    }
    throw NoCompatibleBackend("no local simulator supports a " + to_string(job.kind) + " job on " +
                              std::to_string(job.qubo.n) + " qubits");
}

SampleSet run_quantum_job(const QuantumJob& job, const BackendDescriptor& backend) {
    if (!compatible(job, backend)) {
        throw BackendMismatch("circuit does not match backend '" + backend.name + "'");
    }
    if (backend.kind == BackendKind::RemoteStub) {
        throw RemoteUnavailable("remote backends are out of scope; supply a local simulator");
    }
    auto set = job.kind == JobKind::Anneal ? simulated_anneal(job) : qaoa_statevector(job);
    set.backend_name = backend.name;
    return set;
}

// Simulated annealing -------------------------------------------------------

SampleSet simulated_anneal(const QuantumJob& job, const AnnealObserver& observer) {
    const auto start = Clock::now();
    const qubo::QuboModel model(job.qubo);
    const std::size_t n = model.size();
    const auto& p = job.anneal;
    const double unit = model.scale() > 0.0 ? 1.0 / model.scale() : 0.0;

    std::vector<Sample> raw;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, p.restarts); ++r) {
        Rng rng(derive_seed(job.seed, r));
        Bits x(n);
        for (auto& b : x) b = rng.coin() ? 1 : 0;
        std::vector<double> field(n);
        for (std::size_t i = 0; i < n; ++i) field[i] = model.local_field(x, i);
        double e = model.energy(x);
        double best_e = e;
        Bits best_x = x;

        for (std::size_t s = 0; s < p.sweeps; ++s) {
            const double t = p.sweeps > 1 ? static_cast<double>(s) / static_cast<double>(p.sweeps - 1) : 0.0;
            const double beta = p.beta_start * std::pow(p.beta_end / p.beta_start, t) * unit;
            for (std::size_t i = 0; i < n; ++i) {
                const double delta = (x[i] ? -1.0 : 1.0) * field[i];
                if (delta > 0.0 && rng.real() >= std::exp(-beta * delta)) continue;
                const double sign = x[i] ? -1.0 : 1.0;
                x[i] ^= 1U;
                e += delta;
                for (std::size_t j = 0; j < n; ++j) field[j] += sign * model.coupling(j, i);
                if (e < best_e) {
                    best_e = e;
                    best_x = x;
                }
            }
            if (observer) observer(r, s, best_e);
        }
        raw.push_back({best_x, qubo::energy(job.qubo, best_x), 1});
    }
    auto set = make_sampleset(raw, "local-sa");
    set.timings["anneal_ms"] = elapsed_ms(start);
    return set;
}

// QAOA ------------------------------------------------------------------------

QaoaSimulator::QaoaSimulator(const Qubo& qubo) : n_(qubo.n) {
    if (n_ > kStatevectorMaxQubits) {
        throw TooLarge("statevector simulation supports at most " + std::to_string(kStatevectorMaxQubits) +
                       " qubits, got " + std::to_string(n_));
    }
    const qubo::QuboModel model(qubo);
    const std::size_t dim = std::size_t{1} << n_;
    energies_.assign(dim, model.offset());
    // E[z] = E[z without its top bit h] + linear(h) + couplings of h to lower set bits.
    for (std::size_t z = 1; z < dim; ++z) {
        const auto h = static_cast<std::size_t>(std::bit_width(z) - 1);
        const std::size_t rest = z & ~(std::size_t{1} << h);
        double e = energies_[rest] + model.linear(h);
        for (std::size_t j = 0; j < h; ++j) {
            if (rest >> j & 1U) e += model.coupling(h, j);
        }
        energies_[z] = e;
    }
    double largest = 0.0;
    for (double e : energies_) largest = std::max(largest, std::abs(e));
    phase_scale_ = largest > 0.0 ? largest : 1.0;
}

Amplitudes QaoaSimulator::evolve(const QaoaAngles& angles, const LayerObserver& observer) const {
    const std::size_t dim = energies_.size();
    Amplitudes state(dim, std::complex<double>(1.0 / std::sqrt(static_cast<double>(dim)), 0.0));
    const std::size_t layers = std::min(angles.gammas.size(), angles.betas.size());
    for (std::size_t layer = 0; layer < layers; ++layer) {
        const double gamma = angles.gammas[layer];
        for (std::size_t z = 0; z < dim; ++z) {
            state[z] *= std::polar(1.0, -gamma * energies_[z] / phase_scale_);
        }
        // exp(-i beta X) on every qubit.
        const double c = std::cos(angles.betas[layer]);
        const std::complex<double> s(0.0, -std::sin(angles.betas[layer]));
        for (std::size_t q = 0; q < n_; ++q) {
            const std::size_t bit = std::size_t{1} << q;
            for (std::size_t z = 0; z < dim; ++z) {
                if (z & bit) continue;
                const auto a = state[z];
                const auto b = state[z | bit];
                state[z] = c * a + s * b;
                state[z | bit] = s * a + c * b;
            }
        }
        if (observer) observer(layer, state);
    }
    return state;
}

std::vector<double> QaoaSimulator::probabilities(const QaoaAngles& angles) const {
    const auto state = evolve(angles);
    std::vector<double> probs(state.size());
    for (std::size_t z = 0; z < state.size(); ++z) probs[z] = std::norm(state[z]);
    return probs;
}

double QaoaSimulator::expectation(const QaoaAngles& angles) const {
    const auto state = evolve(angles);
    double total = 0.0;
    for (std::size_t z = 0; z < state.size(); ++z) total += std::norm(state[z]) * energies_[z];
    return total;
}

QaoaOptimum optimize_qaoa(const QaoaSimulator& simulator, const QaoaParams& params) {
    const std::size_t p = params.layers;
    QaoaOptimum best;
    best.angles.gammas.assign(p, 0.0);
    best.angles.betas.assign(p, 0.0);
    best.expectation = simulator.expectation(best.angles);
    best.evaluations = 1;
    if (p == 0) return best;

    constexpr double kPi = std::numbers::pi;
    Rng rng(params.parameter_seed);
    for (std::size_t start = 0; start < std::max<std::size_t>(1, params.starts); ++start) {
        QaoaAngles angles;
        for (std::size_t l = 0; l < p; ++l) {
            angles.gammas.push_back(rng.real(0.0, kPi));
            angles.betas.push_back(rng.real(0.0, kPi / 2.0));
        }
        double value = simulator.expectation(angles);
        ++best.evaluations;
        double step = kPi / 4.0;
        for (std::size_t iter = 0; iter < params.iterations && step > 1e-6; ++iter) {
            bool moved = false;
            for (std::size_t k = 0; k < 2 * p; ++k) {
                double& coord = k < p ? angles.gammas[k] : angles.betas[k - p];
                const double original = coord;
                double best_coord = original;
                for (double candidate : {original + step, original - step}) {
                    coord = candidate;
                    const double v = simulator.expectation(angles);
                    ++best.evaluations;
                    if (v < value) {
                        value = v;
                        best_coord = candidate;
                        moved = true;
                    }
                }
                coord = best_coord;
            }
            if (!moved) step /= 2.0;
        }
        if (value < best.expectation) {
            best.expectation = value;
            best.angles = angles;
        }
    }
    return best;
}

std::string qaoa_gate_list(const Qubo& qubo, double phase_scale, const QaoaAngles& angles) {
    // x = (1 - z) / 2 turns Q into local fields h_i and couplings J_ij on Z.
    std::map<std::size_t, double> h;
    std::map<std::pair<std::size_t, std::size_t>, double> j;
    for (const auto& [key, value] : qubo.coefficients) {
        if (key.first == key.second) {
            h[key.first] -= value / 2.0;
        } else {
            h[key.first] -= value / 4.0;
            h[key.second] -= value / 4.0;
            j[key] += value / 4.0;
        }
    }
    std::ostringstream out;
    out << "qubits " << qubo.n << "\n";
    for (std::size_t q = 0; q < qubo.n; ++q) out << "h q[" << q << "]\n";
    const std::size_t layers = std::min(angles.gammas.size(), angles.betas.size());
    for (std::size_t l = 0; l < layers; ++l) {
        const double g = angles.gammas[l] / phase_scale;
        for (const auto& [q, coeff] : h) {
            if (coeff != 0.0) out << "rz(" << formats::format_real(2.0 * g * coeff) << ") q[" << q << "]\n";
        }
        for (const auto& [key, coeff] : j) {
            if (coeff != 0.0) {
                out << "rzz(" << formats::format_real(2.0 * g * coeff) << ") q[" << key.first << "],q[" << key.second
                    << "]\n";
            }
        }
        for (std::size_t q = 0; q < qubo.n; ++q) {
            out << "rx(" << formats::format_real(2.0 * angles.betas[l]) << ") q[" << q << "]\n";
        }
    }
    out << "measure\n";
    return out.str();
}

SampleSet qaoa_statevector(const QuantumJob& job) {
    const auto start = Clock::now();
    const QaoaSimulator simulator(job.qubo);
    const auto optimum = optimize_qaoa(simulator, job.qaoa);
    const double optimize_ms = elapsed_ms(start);

    const auto probs = simulator.probabilities(optimum.angles);
    std::vector<double> cumulative(probs.size());
    double acc = 0.0;
    for (std::size_t z = 0; z < probs.size(); ++z) cumulative[z] = acc += probs[z];

    Rng rng(job.seed);
    std::map<std::size_t, std::size_t> counts;
    for (std::size_t shot = 0; shot < job.shots; ++shot) {
        const double u = rng.real() * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end()) --it;
        ++counts[static_cast<std::size_t>(it - cumulative.begin())];
    }
    std::vector<Sample> raw;
    for (const auto& [z, count] : counts) {
        Bits bits(job.qubo.n);
        for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<std::uint8_t>(z >> i & 1U);
        raw.push_back({bits, qubo::energy(job.qubo, bits), count});
    }
    auto set = make_sampleset(raw, "local-statevector");
    set.timings["optimize_ms"] = optimize_ms;
    set.timings["total_ms"] = elapsed_ms(start);
    std::ostringstream angles;
    for (std::size_t l = 0; l < optimum.angles.gammas.size(); ++l) {
        angles << (l ? " " : "") << "gamma" << l << "=" << formats::format_real(optimum.angles.gammas[l]) << " beta"
               << l << "=" << formats::format_real(optimum.angles.betas[l]);
    }
    set.diagnostics["angles"] = angles.str();
    set.diagnostics["expectation"] = formats::format_real(optimum.expectation);
    set.diagnostics["circuit"] = qaoa_gate_list(job.qubo, simulator.phase_scale(), optimum.angles);
    return set;
}

// Decoding ------------------------------------------------------------------

std::optional<classical::Tour> decode_first_valid(const qubo::TspQuboEncoding& encoding, const SampleSet& samples) {
    std::vector<const Sample*> order;
    for (const auto& s : samples.samples) order.push_back(&s);
    std::stable_sort(order.begin(), order.end(), [](const Sample* a, const Sample* b) { return a->energy < b->energy; });
    for (const auto* s : order) {
        if (s->bits.size() != encoding.n * encoding.n) continue;
        auto decoded = qubo::decode_bitstring(encoding, s->bits);
        if (auto* tour = std::get_if<classical::Tour>(&decoded)) return *tour;
    }
    return std::nullopt;
}

std::variant<classical::Tour, InvalidSamples> sampleset_to_solution(const qubo::TspQuboEncoding& encoding,
                                                                    const SampleSet& samples, std::size_t retry_budget,
                                                                    const Resampler& resample) {
    if (auto tour = decode_first_valid(encoding, samples)) return *tour;
    std::size_t attempts = 1;
    if (resample) {
        for (std::size_t retry = 1; retry <= retry_budget; ++retry) {
            ++attempts;
            if (auto tour = decode_first_valid(encoding, resample(retry))) return *tour;
        }
    }
    return InvalidSamples{attempts};
}

}  // namespace metasolver::quantum
