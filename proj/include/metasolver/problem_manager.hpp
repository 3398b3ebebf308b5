#pragma once

// In-memory problem store and the state machine that drives solvers,
// spawned subproblems and their composition on a pool of worker threads.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "metasolver/meta.hpp"

namespace metasolver::meta {

/// Field updates applied atomically by ProblemManager::patch.
struct PatchRequest {
    std::optional<std::string> input;
    /// Outer optional: field present. Inner nullopt clears the solver.
    std::optional<std::optional<std::string>> solver_id;
    std::optional<Settings> solver_settings;
    std::optional<std::string> state;
};

class ProblemManager {
public:
    /// workers == 0 picks max(2, hardware threads).
    explicit ProblemManager(std::shared_ptr<const Registry> registry, std::size_t workers = 0);
    ~ProblemManager();

    ProblemManager(const ProblemManager&) = delete;
    ProblemManager& operator=(const ProblemManager&) = delete;

    const Registry& registry() const noexcept { return *registry_; }

    /// Throws UnknownProblemType.
    Problem create_problem(const std::string& type_id, std::string input);
    /// Throws UnknownProblem.
    Problem get(const ProblemId& id) const;
    /// Type-scoped lookup; nullopt when the id is unknown or has another type.
    std::optional<Problem> find(const std::string& type_id, const ProblemId& id) const;
    /// Creation order; throws UnknownProblemType.
    std::vector<Problem> list(const std::string& type_id) const;

    Problem assign_solver(const ProblemId& id, const std::string& solver_id, const Settings& settings = {});
    Problem clear_solver(const ProblemId& id);
    Problem set_input(const ProblemId& id, std::string input);
    /// READY_TO_SOLVE -> SOLVING and dispatch; throws IllegalState otherwise.
    Problem start_solving(const ProblemId& id);
    /// All-or-nothing update. IllegalState once solving has started,
    /// BadRequest / InvalidSetting / UnknownSolver / SolverTypeMismatch for
    /// bodies that can never apply.
    Problem patch(const ProblemId& id, const PatchRequest& request);

    /// Composes the parent once every child of the current round has solved,
    /// or fails it when a child ended in ERROR / INVALID. No-op otherwise.
    Problem resolve_subproblem_completion(const ProblemId& parent_id);

    /// Computes and stores the bound. Throws ParseError for unparseable input.
    BoundReport compute_bound(const ProblemId& id);
    /// Needs both a solution objective and a stored bound; IllegalState otherwise.
    BoundComparison compare_bound(const ProblemId& id) const;

    /// Blocks until the problem is SOLVED or the timeout expires.
    bool wait_until_solved(const ProblemId& id, std::chrono::milliseconds timeout) const;

    /// Called under the problem's lock for every state change.
    using TransitionObserver = std::function<void(const ProblemId&, ProblemState from, ProblemState to)>;
    void set_transition_observer(TransitionObserver observer);

private:
    struct Entry;

    std::shared_ptr<Entry> lookup(const ProblemId& id) const;
    std::shared_ptr<Entry> insert(const std::string& type_id, std::string input, std::optional<ProblemId> parent);
    void transition(Entry& entry, ProblemState to);
    void begin_solving(Entry& entry, const std::shared_ptr<Entry>& handle);
    void run(const std::shared_ptr<Entry>& entry);
    void handle_step(const std::shared_ptr<Entry>& entry, const SolveRequest& request, Step step);
    void finish(const std::shared_ptr<Entry>& entry, Solution solution);
    void notify_parent(const std::optional<ProblemId>& parent);
    void enqueue(std::function<void()> task);
    void worker_loop();

    std::shared_ptr<const Registry> registry_;

    mutable std::shared_mutex store_mutex_;
    std::unordered_map<ProblemId, std::shared_ptr<Entry>> store_;
    std::unordered_map<std::string, std::vector<ProblemId>> by_type_;

    std::mutex observer_mutex_;
    TransitionObserver observer_;

    mutable std::mutex done_mutex_;
    mutable std::condition_variable done_cv_;
    std::uint64_t done_generation_ = 0;  // bumped whenever a problem reaches SOLVED

    std::mutex queue_mutex_;
    std::condition_variable queue_cv_;
    std::deque<std::function<void()>> queue_;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

/// Random version-4 UUID text.
std::string make_uuid();

}  // namespace metasolver::meta
