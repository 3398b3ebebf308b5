#include "metasolver/problem_manager.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>

#include "metasolver/errors.hpp"
#include "metasolver/formats.hpp"

namespace metasolver::meta {

struct ProblemManager::Entry {
    std::mutex m;
    Problem p;
    bool decomposed = false;  // solve returned children at least once
    bool composing = false;   // a thread owns the compose step
    std::size_t round = 0;
    std::chrono::steady_clock::time_point started;
    std::vector<std::shared_ptr<Entry>> round_children;
};

std::string make_uuid() {
    thread_local std::mt19937_64 engine{std::random_device{}() ^
                                        static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count())};
    const std::uint64_t hi = (engine() & 0xFFFFFFFFFFFF0FFFULL) | 0x0000000000004000ULL;
    const std::uint64_t lo = (engine() & 0x3FFFFFFFFFFFFFFFULL) | 0x8000000000000000ULL;
    char buf[37];
    std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx", static_cast<unsigned>(hi >> 32),
                  static_cast<unsigned>(hi >> 16 & 0xFFFF), static_cast<unsigned>(hi & 0xFFFF),
                  static_cast<unsigned>(lo >> 48), static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFULL));
    return buf;
}

ProblemManager::ProblemManager(std::shared_ptr<const Registry> registry, std::size_t workers)
    : registry_(std::move(registry)) {
    if (workers == 0) workers = std::max(2U, std::thread::hardware_concurrency());
    for (std::size_t i = 0; i < workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

ProblemManager::~ProblemManager() {
    {
        std::lock_guard lock(queue_mutex_);
        stopping_ = true;
    }
    queue_cv_.notify_all();
    for (auto& t : workers_) t.join();
}

void ProblemManager::enqueue(std::function<void()> task) {
    {
        std::lock_guard lock(queue_mutex_);
        if (stopping_) return;
        queue_.push_back(std::move(task));
    }
    queue_cv_.notify_one();
}

void ProblemManager::worker_loop() {
    while (true) {
        std::function<void()> task;
        {
            std::unique_lock lock(queue_mutex_);
            queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) return;
            task = std::move(queue_.front());
            queue_.pop_front();
        }
        task();
    }
}

void ProblemManager::set_transition_observer(TransitionObserver observer) {
    std::lock_guard lock(observer_mutex_);
    observer_ = std::move(observer);
}

std::shared_ptr<ProblemManager::Entry> ProblemManager::lookup(const ProblemId& id) const {
    std::shared_lock lock(store_mutex_);
    const auto it = store_.find(id);
    if (it == store_.end()) throw UnknownProblem("unknown problem '" + id + "'");
    return it->second;
}

std::shared_ptr<ProblemManager::Entry> ProblemManager::insert(const std::string& type_id, std::string input,
                                                               std::optional<ProblemId> parent) {
    registry_->type(type_id);
    auto entry = std::make_shared<Entry>();
    entry->p.type_id = type_id;
    entry->p.input = std::move(input);
    entry->p.parent_id = std::move(parent);
    std::unique_lock lock(store_mutex_);
    do {
        entry->p.id = make_uuid();
    } while (store_.contains(entry->p.id));
    store_.emplace(entry->p.id, entry);
    by_type_[type_id].push_back(entry->p.id);
    return entry;
}

void ProblemManager::transition(Entry& entry, ProblemState to) {
    const auto from = entry.p.state;
    if (!legal_transition(from, to)) {
        throw IllegalState("cannot move problem from " + to_string(from) + " to " + to_string(to));
    }
    {
        std::lock_guard lock(observer_mutex_);
        if (observer_) observer_(entry.p.id, from, to);
    }
    entry.p.state = to;
}

Problem ProblemManager::create_problem(const std::string& type_id, std::string input) {
    auto entry = insert(type_id, std::move(input), std::nullopt);
    std::lock_guard lock(entry->m);
    return entry->p;
}

Problem ProblemManager::get(const ProblemId& id) const {
    auto entry = lookup(id);
    std::lock_guard lock(entry->m);
    return entry->p;
}

std::optional<Problem> ProblemManager::find(const std::string& type_id, const ProblemId& id) const {
    std::shared_ptr<Entry> entry;
    {
        std::shared_lock lock(store_mutex_);
        const auto it = store_.find(id);
        if (it == store_.end()) return std::nullopt;
        entry = it->second;
    }
    std::lock_guard lock(entry->m);
    if (entry->p.type_id != type_id) return std::nullopt;
    return entry->p;
}

std::vector<Problem> ProblemManager::list(const std::string& type_id) const {
    registry_->type(type_id);
    std::vector<std::shared_ptr<Entry>> entries;
    {
        std::shared_lock lock(store_mutex_);
        const auto it = by_type_.find(type_id);
        if (it != by_type_.end()) {
            for (const auto& id : it->second) entries.push_back(store_.at(id));
        }
    }
    std::vector<Problem> out;
    for (const auto& e : entries) {
        std::lock_guard lock(e->m);
        out.push_back(e->p);
    }
    return out;
}

namespace {

void require_configurable(const Problem& p) {
    if (p.state == ProblemState::Solving || p.state == ProblemState::Solved) {
        throw IllegalState("problem " + p.id + " is " + to_string(p.state) + " and can no longer be changed");
    }
}

const SolverDescriptor& checked_solver(const Registry& registry, const Problem& p, const std::string& solver_id,
                                       std::shared_ptr<Solver>& holder) {
    holder = registry.solver(solver_id);
    const auto& d = holder->descriptor();
    if (d.problem_type_id != p.type_id) {
        throw SolverTypeMismatch("solver " + solver_id + " solves " + d.problem_type_id + ", not " + p.type_id);
    }
    return d;
}

}  // namespace

Problem ProblemManager::assign_solver(const ProblemId& id, const std::string& solver_id, const Settings& settings) {
    PatchRequest request;
    request.solver_id = solver_id;
    request.solver_settings = settings;
    return patch(id, request);
}

Problem ProblemManager::clear_solver(const ProblemId& id) {
    PatchRequest request;
    request.solver_id = std::optional<std::string>{};
    return patch(id, request);
}

Problem ProblemManager::set_input(const ProblemId& id, std::string input) {
    PatchRequest request;
    request.input = std::move(input);
    return patch(id, request);
}

Problem ProblemManager::start_solving(const ProblemId& id) {
    auto entry = lookup(id);
    std::lock_guard lock(entry->m);
    if (entry->p.state != ProblemState::ReadyToSolve) {
        throw IllegalState("problem " + id + " is " + to_string(entry->p.state) + ", not READY_TO_SOLVE");
    }
    begin_solving(*entry, entry);
    return entry->p;
}

Problem ProblemManager::patch(const ProblemId& id, const PatchRequest& request) {
    auto entry = lookup(id);
    std::lock_guard lock(entry->m);
    auto& p = entry->p;
    require_configurable(p);

    if (request.state && *request.state != "SOLVING") {
        throw BadRequest("state may only be set to SOLVING");
    }

    // Validate everything before touching the problem.
    std::optional<std::string> solver_id = p.solver_id;
    Settings settings = p.solver_settings;
    if (request.solver_id) {
        solver_id = *request.solver_id;
        if (solver_id) {
            std::shared_ptr<Solver> holder;
            const auto& d = checked_solver(*registry_, p, *solver_id, holder);
            settings = resolve_settings(d, request.solver_settings.value_or(Settings{}));
        } else {
            if (request.solver_settings && !request.solver_settings->empty()) {
                throw BadRequest("solverSettings need a solver");
            }
            settings.clear();
        }
    } else if (request.solver_settings) {
        if (!solver_id) throw BadRequest("solverSettings need a solver");
        std::shared_ptr<Solver> holder;
        settings = resolve_settings(checked_solver(*registry_, p, *solver_id, holder), *request.solver_settings);
    }
    if (request.state && !solver_id) throw BadRequest("a solver must be assigned before solving");

    if (request.input) p.input = *request.input;
    p.solver_id = solver_id;
    p.solver_settings = std::move(settings);
    if (solver_id && p.state == ProblemState::NeedsConfiguration) transition(*entry, ProblemState::ReadyToSolve);
    if (!solver_id && p.state == ProblemState::ReadyToSolve) transition(*entry, ProblemState::NeedsConfiguration);
    if (request.state) begin_solving(*entry, entry);
    return p;
}

void ProblemManager::begin_solving(Entry& entry, const std::shared_ptr<Entry>& handle) {
    transition(entry, ProblemState::Solving);
    entry.p.solution = Solution{};
    entry.p.solution->metadata["solverId"] = *entry.p.solver_id;
    entry.started = std::chrono::steady_clock::now();
    enqueue([this, handle] { run(handle); });
}

void ProblemManager::run(const std::shared_ptr<Entry>& entry) {
    SolveRequest request;
    std::string solver_id;
    {
        std::lock_guard lock(entry->m);
        request = {entry->p.id, entry->p.input, entry->p.solver_settings};
        solver_id = *entry->p.solver_id;
    }
    Step step;
    try {
        step = registry_->solver(solver_id)->solve(request);
    } catch (const std::exception& e) {
        step = Solution::error(e.what());
    }
    handle_step(entry, request, std::move(step));
}

void ProblemManager::handle_step(const std::shared_ptr<Entry>& entry, const SolveRequest& request, Step step) {
    if (auto* solution = std::get_if<Solution>(&step)) {
        finish(entry, std::move(*solution));
        return;
    }
    auto& requests = std::get<std::vector<ChildRequest>>(step);

    std::vector<Settings> resolved(requests.size());
    try {
        for (std::size_t i = 0; i < requests.size(); ++i) {
            const auto& r = requests[i];
            registry_->type(r.type_id);
            if (!r.solver_id) continue;
            const auto& d = registry_->solver(*r.solver_id)->descriptor();
            if (d.problem_type_id != r.type_id) {
                throw SolverTypeMismatch("solver " + *r.solver_id + " cannot solve " + r.type_id + " subproblems");
            }
            resolved[i] = resolve_settings(d, r.settings);
        }
    } catch (const std::exception& e) {
        finish(entry, Solution::error(std::string("cannot configure subproblems: ") + e.what()));
        return;
    }

    std::vector<std::shared_ptr<Entry>> children;
    for (std::size_t i = 0; i < requests.size(); ++i) {
        auto child = insert(requests[i].type_id, requests[i].input, request.id);
        if (requests[i].solver_id) {
            std::lock_guard lock(child->m);
            child->p.solver_id = requests[i].solver_id;
            child->p.solver_settings = std::move(resolved[i]);
            transition(*child, ProblemState::ReadyToSolve);
        }
        children.push_back(std::move(child));
    }

    {
        std::lock_guard lock(entry->m);
        if (entry->decomposed) ++entry->round;
        entry->decomposed = true;
        entry->composing = false;
        entry->round_children = children;
        for (const auto& child : children) {
            const auto& type_id = child->p.type_id;  // immutable after insert
            auto binding = std::find_if(entry->p.sub_problems.begin(), entry->p.sub_problems.end(),
                                        [&](const SubRoutineBinding& b) { return b.sub_routine_type_id == type_id; });
            if (binding == entry->p.sub_problems.end()) {
                entry->p.sub_problems.push_back({type_id, {}});
                binding = std::prev(entry->p.sub_problems.end());
            }
            binding->child_problem_ids.push_back(child->p.id);
        }
    }

    for (std::size_t i = 0; i < children.size(); ++i) {
        if (!requests[i].solver_id) continue;
        std::lock_guard lock(children[i]->m);
        begin_solving(*children[i], children[i]);
    }
    if (children.empty()) resolve_subproblem_completion(request.id);
}

void ProblemManager::finish(const std::shared_ptr<Entry>& entry, Solution solution) {
    std::optional<ProblemId> parent;
    {
        std::lock_guard lock(entry->m);
        if (entry->p.state != ProblemState::Solving) return;
        if (solution.status != SolutionStatus::Solved) {
            solution.result.clear();
            solution.objective_value.reset();
        }
        for (const auto& [key, value] : entry->p.solution->metadata) solution.metadata.try_emplace(key, value);
        const std::chrono::duration<double, std::milli> wall = std::chrono::steady_clock::now() - entry->started;
        solution.metadata["wallMs"] = formats::format_real(wall.count());
        entry->p.solution = std::move(solution);
        transition(*entry, ProblemState::Solved);
        entry->composing = false;
        parent = entry->p.parent_id;
    }
    {
        std::lock_guard lock(done_mutex_);
        ++done_generation_;
    }
    done_cv_.notify_all();
    notify_parent(parent);
}

void ProblemManager::notify_parent(const std::optional<ProblemId>& parent) {
    if (parent) resolve_subproblem_completion(*parent);
}

Problem ProblemManager::resolve_subproblem_completion(const ProblemId& parent_id) {
    auto entry = lookup(parent_id);
    SolveRequest request;
    std::string solver_id;
    std::size_t round = 0;
    std::chrono::steady_clock::time_point started;
    std::vector<ChildResult> results;
    {
        std::unique_lock lock(entry->m);
        if (entry->p.state != ProblemState::Solving || !entry->decomposed || entry->composing) return entry->p;

        bool pending = false;
        std::optional<Solution> failure;
        for (const auto& child : entry->round_children) {
            std::lock_guard child_lock(child->m);
            const auto& c = child->p;
            const bool terminal = c.state == ProblemState::Solved && c.solution && is_terminal(c.solution->status);
            if (!terminal) {
                pending = true;
                continue;
            }
            if (c.solution->status != SolutionStatus::Solved) {
                failure = Solution::error("subproblem " + c.id + " ended " + to_string(c.solution->status));
                failure->metadata["failedChild"] = c.id;
                failure->metadata["failedChildStatus"] = to_string(c.solution->status);
                if (const auto it = c.solution->metadata.find("error"); it != c.solution->metadata.end()) {
                    failure->metadata["failedChildError"] = it->second;
                }
                break;
            }
            results.push_back({c.id, c.type_id, c.input, c.solver_id, c.solver_settings, *c.solution});
        }
        if (failure) {
            lock.unlock();
            finish(entry, std::move(*failure));
            return get(parent_id);
        }
        if (pending) return entry->p;
        entry->composing = true;
        request = {entry->p.id, entry->p.input, entry->p.solver_settings};
        solver_id = *entry->p.solver_id;
        round = entry->round;
    }

    Step step;
    try {
        step = registry_->solver(solver_id)->compose(request, round, results);
    } catch (const std::exception& e) {
        step = Solution::error(e.what());
    }
    handle_step(entry, request, std::move(step));
    return get(parent_id);
}

BoundReport ProblemManager::compute_bound(const ProblemId& id) {
    auto entry = lookup(id);
    std::string type_id;
    std::string input;
    {
        std::lock_guard lock(entry->m);
        type_id = entry->p.type_id;
        input = entry->p.input;
    }
    const auto& type = registry_->type(type_id);
    if (!type.bound) throw BadRequest("no bound is defined for " + type_id);
    auto bound = type.bound(input);
    std::lock_guard lock(entry->m);
    entry->p.bound = bound;
    return bound;
}

BoundComparison ProblemManager::compare_bound(const ProblemId& id) const {
    auto entry = lookup(id);
    std::lock_guard lock(entry->m);
    const auto& p = entry->p;
    if (!p.solution || !p.solution->objective_value) throw IllegalState("problem " + id + " has no solution value yet");
    if (!p.bound) throw IllegalState("problem " + id + " has no computed bound yet");
    return meta::compare_bound(*p.bound, *p.solution->objective_value);
}

bool ProblemManager::wait_until_solved(const ProblemId& id, std::chrono::milliseconds timeout) const {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
        std::uint64_t generation;
        {
            std::lock_guard lock(done_mutex_);
            generation = done_generation_;
        }
        if (get(id).state == ProblemState::Solved) return true;
        std::unique_lock lock(done_mutex_);
        if (!done_cv_.wait_until(lock, deadline, [&] { return done_generation_ != generation; })) {
            return get(id).state == ProblemState::Solved;
        }
    }
}

}  // namespace metasolver::meta
