#pragma once

// Problem lifecycle, solver descriptors and the registry that ties problem
// types to their solvers.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace metasolver::meta {

using ProblemId = std::string;

enum class ProblemState { NeedsConfiguration, ReadyToSolve, Solving, Solved };
enum class SolutionStatus { Computing, Solved, Error, Invalid };
enum class Objective { Minimize, Maximize };
enum class BoundType { Lower, Upper };

std::string to_string(ProblemState state);
std::string to_string(SolutionStatus status);
std::string to_string(BoundType type);
std::optional<ProblemState> problem_state_from_string(std::string_view text);

/// True for the four transitions the lifecycle allows.
bool legal_transition(ProblemState from, ProblemState to) noexcept;

using SettingValue = std::variant<std::int64_t, double, std::string>;
using Settings = std::map<std::string, SettingValue>;

enum class SettingKind { Integer, Real, Text, Choice };
std::string to_string(SettingKind kind);

struct SettingDescriptor {
    std::string name;
    SettingKind kind = SettingKind::Text;
    SettingValue default_value;
    std::vector<std::string> choices;  // Choice only
    std::string description;
    std::optional<double> min;  // Integer / Real only
    std::optional<double> max;
};

/// Coerces `value` to the descriptor's kind; throws InvalidSetting.
SettingValue check_setting(const SettingDescriptor& descriptor, const SettingValue& value);

struct SolverDescriptor {
    std::string solver_id;
    std::string name;
    std::string description;
    std::string problem_type_id;
    std::vector<SettingDescriptor> settings;
    std::vector<std::string> sub_routines;  // child problem type ids
};

/// Fills defaults and type-checks every supplied value; unknown names throw
/// InvalidSetting.
Settings resolve_settings(const SolverDescriptor& descriptor, const Settings& supplied);

std::int64_t integer_setting(const Settings& settings, const std::string& name);
double real_setting(const Settings& settings, const std::string& name);
const std::string& text_setting(const Settings& settings, const std::string& name);

struct Solution {
    SolutionStatus status = SolutionStatus::Computing;
    std::string result;
    std::optional<double> objective_value;
    std::map<std::string, std::string> metadata;

    static Solution solved(std::string result, std::optional<double> objective);
    static Solution error(std::string message);
    static Solution invalid(std::string message);
};

bool is_terminal(SolutionStatus status) noexcept;

struct SubRoutineBinding {
    std::string sub_routine_type_id;
    std::vector<ProblemId> child_problem_ids;
};

struct BoundReport {
    BoundType bound_type = BoundType::Lower;
    double value = 0.0;
    std::string method;
};

struct BoundComparison {
    BoundReport bound;
    double solution_value = 0.0;
    double absolute_gap = 0.0;
    double relative_gap = 0.0;
};

inline constexpr double kGapEpsilon = 1e-12;
BoundComparison compare_bound(const BoundReport& bound, double solution_value);

struct Problem {
    ProblemId id;
    std::string type_id;
    std::string input;
    ProblemState state = ProblemState::NeedsConfiguration;
    std::optional<std::string> solver_id;
    Settings solver_settings;
    std::optional<Solution> solution;
    std::vector<SubRoutineBinding> sub_problems;
    std::optional<BoundReport> bound;
    std::optional<ProblemId> parent_id;
};

// Solvers ---------------------------------------------------------------------

/// A child problem a decomposing solver wants solved. With a solver id the
/// child is configured and started immediately; without one it waits in
/// NEEDS_CONFIGURATION for a client.
struct ChildRequest {
    std::string type_id;
    std::string input;
    std::optional<std::string> solver_id;
    Settings settings;
};

struct ChildResult {
    ProblemId id;
    std::string type_id;
    std::string input;
    std::optional<std::string> solver_id;
    Settings settings;
    Solution solution;
};

struct SolveRequest {
    ProblemId id;
    std::string input;
    Settings settings;
};

/// A final solution, or children to solve before composing.
using Step = std::variant<Solution, std::vector<ChildRequest>>;

class Solver {
public:
    virtual ~Solver() = default;
    virtual const SolverDescriptor& descriptor() const = 0;
    virtual Step solve(const SolveRequest& request) = 0;
    /// Called once every child of `round` has solved (rounds count from 0).
    /// Returning children starts another round.
    virtual Step compose(const SolveRequest& request, std::size_t round, const std::vector<ChildResult>& children);
};

struct ProblemType {
    std::string type_id;
    std::string description;
    Objective objective = Objective::Minimize;
    /// Throws ParseError on unparseable input.
    std::function<BoundReport(const std::string& input)> bound;
};

class Registry {
public:
    void add_type(ProblemType type);
    void add_solver(std::shared_ptr<Solver> solver);

    bool has_type(std::string_view type_id) const;
    /// Throws UnknownProblemType.
    const ProblemType& type(std::string_view type_id) const;
    const std::vector<ProblemType>& types() const noexcept { return types_; }
    /// Registration order; throws UnknownProblemType.
    std::vector<SolverDescriptor> list_solvers(std::string_view type_id) const;
    /// Throws UnknownSolver.
    std::shared_ptr<Solver> solver(std::string_view solver_id) const;

private:
    std::vector<ProblemType> types_;
    std::vector<std::shared_ptr<Solver>> solvers_;
};

}  // namespace metasolver::meta
