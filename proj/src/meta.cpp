#include "metasolver/meta.hpp"

#include <algorithm>
#include <cmath>

#include "metasolver/errors.hpp"

namespace metasolver::meta {

std::string to_string(ProblemState state) {
    switch (state) {
        case ProblemState::NeedsConfiguration: return "NEEDS_CONFIGURATION";
        case ProblemState::ReadyToSolve: return "READY_TO_SOLVE";
        case ProblemState::Solving: return "SOLVING";
        case ProblemState::Solved: return "SOLVED";
    }
    return "UNKNOWN";
}

std::string to_string(SolutionStatus status) {
    switch (status) {
        case SolutionStatus::Computing: return "COMPUTING";
        case SolutionStatus::Solved: return "SOLVED";
        case SolutionStatus::Error: return "ERROR";
        case SolutionStatus::Invalid: return "INVALID";
    }
    return "UNKNOWN";
}

std::string to_string(BoundType type) { return type == BoundType::Lower ? "LOWER" : "UPPER"; }

std::optional<ProblemState> problem_state_from_string(std::string_view text) {
    for (auto s : {ProblemState::NeedsConfiguration, ProblemState::ReadyToSolve, ProblemState::Solving,
                   ProblemState::Solved}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

bool legal_transition(ProblemState from, ProblemState to) noexcept {
    using enum ProblemState;
    return (from == NeedsConfiguration && to == ReadyToSolve) || (from == ReadyToSolve && to == NeedsConfiguration) ||
           (from == ReadyToSolve && to == Solving) || (from == Solving && to == Solved);
}

std::string to_string(SettingKind kind) {
    switch (kind) {
        case SettingKind::Integer: return "INTEGER";
        case SettingKind::Real: return "REAL";
        case SettingKind::Text: return "TEXT";
        case SettingKind::Choice: return "CHOICE";
    }
    return "UNKNOWN";
}

SettingValue check_setting(const SettingDescriptor& d, const SettingValue& value) {
    auto range = [&](double v) {
        if (d.min && v < *d.min) throw InvalidSetting(d.name, "must be at least " + std::to_string(*d.min));
        if (d.max && v > *d.max) throw InvalidSetting(d.name, "must be at most " + std::to_string(*d.max));
    };
    switch (d.kind) {
        case SettingKind::Integer: {
            std::int64_t v = 0;
            if (const auto* i = std::get_if<std::int64_t>(&value)) {
                v = *i;
            } else if (const auto* r = std::get_if<double>(&value); r && std::isfinite(*r) && std::trunc(*r) == *r &&
                                                                     std::abs(*r) < 9e15) {
                v = static_cast<std::int64_t>(*r);
            } else {
                throw InvalidSetting(d.name, "expected an integer");
            }
            range(static_cast<double>(v));
            return v;
        }
        case SettingKind::Real: {
            double v = 0.0;
            if (const auto* i = std::get_if<std::int64_t>(&value)) {
                v = static_cast<double>(*i);
            } else if (const auto* r = std::get_if<double>(&value)) {
                v = *r;
            } else {
                throw InvalidSetting(d.name, "expected a number");
            }
            if (!std::isfinite(v)) throw InvalidSetting(d.name, "must be finite");
            range(v);
            return v;
        }
        case SettingKind::Text: {
            if (!std::holds_alternative<std::string>(value)) throw InvalidSetting(d.name, "expected text");
            return value;
        }
        case SettingKind::Choice: {
            const auto* s = std::get_if<std::string>(&value);
            if (!s) throw InvalidSetting(d.name, "expected one of the listed choices");
            if (std::find(d.choices.begin(), d.choices.end(), *s) == d.choices.end()) {
                throw InvalidSetting(d.name, "'" + *s + "' is not one of the listed choices");
            }
            return value;
        }
    }
    throw InvalidSetting(d.name, "unknown setting kind");
}

Settings resolve_settings(const SolverDescriptor& descriptor, const Settings& supplied) {
    for (const auto& [name, value] : supplied) {
        const bool known = std::any_of(descriptor.settings.begin(), descriptor.settings.end(),
                                       [&](const SettingDescriptor& d) { return d.name == name; });
        if (!known) throw InvalidSetting(name, "unknown for solver " + descriptor.solver_id);
    }
    Settings resolved;
    for (const auto& d : descriptor.settings) {
        const auto it = supplied.find(d.name);
        resolved[d.name] = check_setting(d, it == supplied.end() ? d.default_value : it->second);
    }
    return resolved;
}

namespace {

const SettingValue& lookup(const Settings& settings, const std::string& name) {
    const auto it = settings.find(name);
    if (it == settings.end()) throw InvalidSetting(name, "missing");
    return it->second;
}

}  // namespace

std::int64_t integer_setting(const Settings& settings, const std::string& name) {
    const auto* v = std::get_if<std::int64_t>(&lookup(settings, name));
    if (!v) throw InvalidSetting(name, "expected an integer");
    return *v;
}

double real_setting(const Settings& settings, const std::string& name) {
    const auto& value = lookup(settings, name);
    if (const auto* i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
    const auto* v = std::get_if<double>(&value);
    if (!v) throw InvalidSetting(name, "expected a number");
    return *v;
}

const std::string& text_setting(const Settings& settings, const std::string& name) {
    const auto* v = std::get_if<std::string>(&lookup(settings, name));
    if (!v) throw InvalidSetting(name, "expected text");
    return *v;
}

Solution Solution::solved(std::string result, std::optional<double> objective) {
    return {SolutionStatus::Solved, std::move(result), objective, {}};
}

Solution Solution::error(std::string message) {
    return {SolutionStatus::Error, "", std::nullopt, {{"error", std::move(message)}}};
}

Solution Solution::invalid(std::string message) {
    return {SolutionStatus::Invalid, "", std::nullopt, {{"error", std::move(message)}}};
}

bool is_terminal(SolutionStatus status) noexcept { return status != SolutionStatus::Computing; }

BoundComparison compare_bound(const BoundReport& bound, double solution_value) {
    BoundComparison c;
    c.bound = bound;
    c.solution_value = solution_value;
    c.absolute_gap = std::abs(solution_value - bound.value);
    c.relative_gap = c.absolute_gap / std::max(std::abs(bound.value), kGapEpsilon);
    return c;
}

Step Solver::compose(const SolveRequest&, std::size_t, const std::vector<ChildResult>&) {
    return Solution::error(descriptor().solver_id + " does not decompose");
}

void Registry::add_type(ProblemType type) {
    if (has_type(type.type_id)) throw Error("problem type " + type.type_id + " registered twice");
    types_.push_back(std::move(type));
}

void Registry::add_solver(std::shared_ptr<Solver> solver) {
    const auto& d = solver->descriptor();
    if (!has_type(d.problem_type_id)) throw UnknownProblemType(d.problem_type_id);
    for (const auto& s : solvers_) {
        if (s->descriptor().solver_id == d.solver_id) throw Error("solver " + d.solver_id + " registered twice");
    }
    for (const auto& setting : d.settings) check_setting(setting, setting.default_value);
    solvers_.push_back(std::move(solver));
}

bool Registry::has_type(std::string_view type_id) const {
    return std::any_of(types_.begin(), types_.end(), [&](const ProblemType& t) { return t.type_id == type_id; });
}

const ProblemType& Registry::type(std::string_view type_id) const {
    for (const auto& t : types_) {
        if (t.type_id == type_id) return t;
    }
    throw UnknownProblemType("unknown problem type '" + std::string(type_id) + "'");
}

std::vector<SolverDescriptor> Registry::list_solvers(std::string_view type_id) const {
    type(type_id);
    std::vector<SolverDescriptor> out;
    for (const auto& s : solvers_) {
        if (s->descriptor().problem_type_id == type_id) out.push_back(s->descriptor());
    }
    return out;
}

std::shared_ptr<Solver> Registry::solver(std::string_view solver_id) const {
    for (const auto& s : solvers_) {
        if (s->descriptor().solver_id == solver_id) return s;
    }
    throw UnknownSolver("unknown solver '" + std::string(solver_id) + "'");
}

}  // namespace metasolver::meta
