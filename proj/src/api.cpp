#include "metasolver/api.hpp"

#include <httplib.h>

#include <algorithm>

#include "metasolver/errors.hpp"
#include "metasolver/solvers.hpp"

namespace metasolver::api {

using meta::Problem;

const std::vector<Route>& routes() {
    static const std::vector<Route> table = {
        {"GET", "/problems/{problemType}", "List problem summaries of a type"},
        {"POST", "/problems/{problemType}", "Create a problem"},
        {"GET", "/problems/{problemType}/{problemId}", "Read a problem"},
        {"PATCH", "/problems/{problemType}/{problemId}", "Update input, solver, settings or start solving"},
        {"GET", "/problems/{problemType}/{problemId}/bound", "Compute and store a bound"},
        {"GET", "/problems/{problemType}/{problemId}/bound/compare", "Compare the stored bound with the solution"},
        {"GET", "/solvers/{problemType}", "List solvers of a type"},
        {"GET", "/solvers/{problemType}/{solverId}/sub-routines", "Child problem types a solver spawns"},
        {"GET", "/solvers/{problemType}/{solverId}/settings", "Settings a solver accepts"},
    };
    return table;
}

Json to_json(const meta::SettingValue& value) {
    return std::visit([](const auto& v) { return Json(v); }, value);
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json settings_json(const meta::Settings& settings) {
    Json out = Json::object();
    for (const auto& [name, value] : settings) out[name] = to_json(value);
    return out;
}

}  // namespace

Json to_json(const meta::Solution& solution) {
    return {{"status", meta::to_string(solution.status)},
            {"result", solution.result},
            {"objectiveValue", optional_number(solution.objective_value)},
            {"metadata", solution.metadata}};
}

Json to_json(const Problem& p) {
    Json sub = Json::array();
    for (const auto& b : p.sub_problems) {
        sub.push_back({{"subRoutineTypeId", b.sub_routine_type_id}, {"childProblemIds", b.child_problem_ids}});
    }
    return {{"id", p.id},
            {"typeId", p.type_id},
            {"input", p.input},
            {"state", meta::to_string(p.state)},
            {"solverId", p.solver_id ? Json(*p.solver_id) : Json(nullptr)},
            {"solverSettings", settings_json(p.solver_settings)},
            {"solution", p.solution ? to_json(*p.solution) : Json(nullptr)},
            {"subProblems", sub},
            {"bound", p.bound ? to_json(*p.bound) : Json(nullptr)},
            {"parentId", p.parent_id ? Json(*p.parent_id) : Json(nullptr)}};
}

Json summary_json(const Problem& p) {
    return {{"id", p.id}, {"typeId", p.type_id}, {"state", meta::to_string(p.state)}};
}

Json to_json(const meta::BoundReport& bound) {
    return {{"boundType", meta::to_string(bound.bound_type)}, {"value", bound.value}, {"method", bound.method}};
}

Json to_json(const meta::BoundComparison& c) {
    return {{"bound", to_json(c.bound)},
            {"solutionValue", c.solution_value},
            {"absoluteGap", c.absolute_gap},
            {"relativeGap", c.relative_gap}};
}

Json to_json(const meta::SettingDescriptor& s) {
    Json out = {{"name", s.name},
                {"kind", meta::to_string(s.kind)},
                {"default", to_json(s.default_value)},
                {"description", s.description}};
    if (s.kind == meta::SettingKind::Choice) out["choices"] = s.choices;
    if (s.min) out["min"] = *s.min;
    if (s.max) out["max"] = *s.max;
    return out;
}

Json descriptor_json(const meta::SolverDescriptor& d) {
    return {{"solverId", d.solver_id},
            {"name", d.name},
            {"description", d.description},
            {"problemTypeId", d.problem_type_id},
            {"subRoutines", d.sub_routines}};
}

meta::PatchRequest patch_from_json(const Json& body) {
    if (!body.is_object()) throw BadRequest("body must be a JSON object");
    meta::PatchRequest request;
    for (const auto& [key, value] : body.items()) {
        if (key == "input") {
            if (!value.is_string()) throw BadRequest("input must be a string");
            request.input = value.get<std::string>();
        } else if (key == "solverId") {
            if (value.is_null()) {
                request.solver_id = std::optional<std::string>{};
            } else if (value.is_string()) {
                request.solver_id = std::optional<std::string>(value.get<std::string>());
            } else {
                throw BadRequest("solverId must be a string or null");
            }
        } else if (key == "solverSettings") {
            if (!value.is_object()) throw BadRequest("solverSettings must be an object");
            request.solver_settings = solvers::parse_settings_json(value.dump());
        } else if (key == "state") {
            if (!value.is_string()) throw BadRequest("state must be a string");
            request.state = value.get<std::string>();
        } else {
            throw BadRequest("unknown field '" + key + "'");
        }
    }
    return request;
}

namespace {

Json ref(const std::string& name) { return {{"$ref", "#/components/schemas/" + name}}; }

Json response(const std::string& description, const Json& schema) {
    return {{"description", description}, {"content", {{"application/json", {{"schema", schema}}}}}};
}

Json error_response(const std::string& description) { return response(description, ref("Error")); }

}  // namespace

Json openapi_document() {
    const Json nullable_string = {{"type", "string"}, {"nullable", true}};
    const Json setting_value = {{"oneOf", Json::array({{{"type", "integer"}}, {{"type", "number"}}, {{"type", "string"}}})}};
    Json schemas = {
        {"Error", {{"type", "object"}, {"required", {"error", "message"}},
                   {"properties", {{"error", {{"type", "string"}}}, {"message", {{"type", "string"}}}}}}},
        {"Solution",
         {{"type", "object"},
          {"required", {"status", "result", "objectiveValue", "metadata"}},
          {"properties",
           {{"status", {{"type", "string"}, {"enum", {"COMPUTING", "SOLVED", "ERROR", "INVALID"}}}},
            {"result", {{"type", "string"}}},
            {"objectiveValue", {{"type", "number"}, {"nullable", true}}},
            {"metadata", {{"type", "object"}, {"additionalProperties", {{"type", "string"}}}}}}}}},
        {"BoundReport",
         {{"type", "object"},
          {"required", {"boundType", "value", "method"}},
          {"properties",
           {{"boundType", {{"type", "string"}, {"enum", {"LOWER", "UPPER"}}}},
            {"value", {{"type", "number"}}},
            {"method", {{"type", "string"}}}}}}},
        {"BoundComparison",
         {{"type", "object"},
          {"required", {"bound", "solutionValue", "absoluteGap", "relativeGap"}},
          {"properties",
           {{"bound", ref("BoundReport")},
            {"solutionValue", {{"type", "number"}}},
            {"absoluteGap", {{"type", "number"}}},
            {"relativeGap", {{"type", "number"}}}}}}},
        {"Problem",
         {{"type", "object"},
          {"required", {"id", "typeId", "input", "state", "solverId", "solverSettings", "solution", "subProblems"}},
          {"properties",
           {{"id", {{"type", "string"}, {"format", "uuid"}}},
            {"typeId", {{"type", "string"}}},
            {"input", {{"type", "string"}}},
            {"state",
             {{"type", "string"}, {"enum", {"NEEDS_CONFIGURATION", "READY_TO_SOLVE", "SOLVING", "SOLVED"}}}},
            {"solverId", nullable_string},
            {"solverSettings", {{"type", "object"}, {"additionalProperties", setting_value}}},
            {"solution", {{"allOf", Json::array({ref("Solution")})}, {"nullable", true}}},
            {"subProblems",
             {{"type", "array"},
              {"items",
               {{"type", "object"},
                {"required", {"subRoutineTypeId", "childProblemIds"}},
                {"properties",
                 {{"subRoutineTypeId", {{"type", "string"}}},
                  {"childProblemIds", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}}}}},
            {"bound", {{"allOf", Json::array({ref("BoundReport")})}, {"nullable", true}}},
            {"parentId", nullable_string}}}}},
        {"ProblemSummary",
         {{"type", "object"},
          {"required", {"id", "typeId", "state"}},
          {"properties", {{"id", {{"type", "string"}}}, {"typeId", {{"type", "string"}}}, {"state", {{"type", "string"}}}}}}},
        {"CreateProblem",
         {{"type", "object"},
          {"required", {"typeId", "input"}},
          {"additionalProperties", false},
          {"properties", {{"typeId", {{"type", "string"}}}, {"input", {{"type", "string"}}}}}}},
        {"PatchProblem",
         {{"type", "object"},
          {"additionalProperties", false},
          {"properties",
           {{"input", {{"type", "string"}}},
            {"solverId", nullable_string},
            {"solverSettings", {{"type", "object"}, {"additionalProperties", setting_value}}},
            {"state", {{"type", "string"}, {"enum", {"SOLVING"}}}}}}}},
        {"Solver",
         {{"type", "object"},
          {"required", {"solverId", "name", "description", "problemTypeId", "subRoutines"}},
          {"properties",
           {{"solverId", {{"type", "string"}}},
            {"name", {{"type", "string"}}},
            {"description", {{"type", "string"}}},
            {"problemTypeId", {{"type", "string"}}},
            {"subRoutines", {{"type", "array"}, {"items", {{"type", "string"}}}}}}}}},
        {"Setting",
         {{"type", "object"},
          {"required", {"name", "kind", "default", "description"}},
          {"properties",
           {{"name", {{"type", "string"}}},
            {"kind", {{"type", "string"}, {"enum", {"INTEGER", "REAL", "TEXT", "CHOICE"}}}},
            {"default", setting_value},
            {"description", {{"type", "string"}}},
            {"choices", {{"type", "array"}, {"items", {{"type", "string"}}}}},
            {"min", {{"type", "number"}}},
            {"max", {{"type", "number"}}}}}}},
    };

    const Json type_param = {{"name", "problemType"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
    const Json id_param = {{"name", "problemId"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
    const Json solver_param = {{"name", "solverId"}, {"in", "path"}, {"required", true}, {"schema", {{"type", "string"}}}};
    auto array_of = [](const std::string& name) { return Json{{"type", "array"}, {"items", ref(name)}}; };

    Json paths = Json::object();
    auto add = [&](const Route& route, Json params, Json responses, Json body = nullptr) {
        std::string method = route.method;
        std::transform(method.begin(), method.end(), method.begin(), ::tolower);
        Json op = {{"summary", route.summary}, {"parameters", std::move(params)}, {"responses", std::move(responses)}};
        if (!body.is_null()) op["requestBody"] = {{"required", true}, {"content", {{"application/json", {{"schema", body}}}}}};
        paths[route.path][method] = std::move(op);
    };
    const auto& r = routes();
    add(r[0], {type_param}, {{"200", response("Summaries", array_of("ProblemSummary"))}, {"404", error_response("Unknown type")}});
    add(r[1], {type_param},
        {{"201", response("Created; Location names the new problem", ref("Problem"))},
         {"400", error_response("Malformed body or typeId mismatch")},
         {"404", error_response("Unknown type")}},
        ref("CreateProblem"));
    add(r[2], {type_param, id_param}, {{"200", response("Problem", ref("Problem"))}, {"404", error_response("Unknown")}});
    add(r[3], {type_param, id_param},
        {{"200", response("Updated problem", ref("Problem"))},
         {"400", error_response("Unknown field, bad setting, unknown solver or illegal state value")},
         {"404", error_response("Unknown")},
         {"409", error_response("Solving has started; the problem can no longer be patched")}},
        ref("PatchProblem"));
    add(r[4], {type_param, id_param},
        {{"200", response("Bound", ref("BoundReport"))},
         {"404", error_response("Unknown")},
         {"422", error_response("Input cannot be parsed")}});
    add(r[5], {type_param, id_param},
        {{"200", response("Comparison", ref("BoundComparison"))},
         {"404", error_response("Unknown")},
         {"409", error_response("Solution value or bound missing")}});
    add(r[6], {type_param}, {{"200", response("Solvers", array_of("Solver"))}, {"404", error_response("Unknown type")}});
    add(r[7], {type_param, solver_param},
        {{"200", response("Child problem type ids", {{"type", "array"}, {"items", {{"type", "string"}}}})},
         {"404", error_response("Unknown")}});
    add(r[8], {type_param, solver_param},
        {{"200", response("Settings", array_of("Setting"))}, {"404", error_response("Unknown")}});

    return {{"openapi", "3.0.3"},
            {"info",
             {{"title", "Meta-Solver API"},
              {"version", "1.0.0"},
              {"description",
               "Problems move NEEDS_CONFIGURATION -> READY_TO_SOLVE -> SOLVING -> SOLVED. Solving is asynchronous; "
               "poll the problem. Bounds: tsp and cluster-vrp report a LOWER bound from the cheapest incident edges, "
               "knapsack the fractional UPPER bound, qubo and quantum-circuit-processing the offset plus all "
               "negative coefficients."}}},
            {"paths", paths},
            {"components", {{"schemas", schemas}}}};
}

namespace {

struct HttpError {
    int status;
    std::string kind;
    std::string message;
};

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
    send_json(res, status, {{"error", kind}, {"message", message}});
}

/// Runs `body`, translating library errors into status codes.
template <typename F>
void guarded(httplib::Response& res, F&& body) {
    try {
        body();
    } catch (const HttpError& e) {
        send_error(res, e.status, e.kind, e.message);
    } catch (const Json::exception& e) {
        send_error(res, 400, "BadRequest", e.what());
    } catch (const IllegalState& e) {
        send_error(res, 409, "IllegalState", e.what());
    } catch (const ParseError& e) {
        send_error(res, 422, "ParseError", e.what());
    } catch (const BadRequest& e) {
        send_error(res, 400, "BadRequest", e.what());
    } catch (const InvalidSetting& e) {
        send_error(res, 400, "InvalidSetting", e.what());
    } catch (const SolverTypeMismatch& e) {
        send_error(res, 400, "SolverTypeMismatch", e.what());
    } catch (const UnknownSolver& e) {
        send_error(res, 400, "UnknownSolver", e.what());
    } catch (const UnknownProblem& e) {
        send_error(res, 404, "UnknownProblem", e.what());
    } catch (const UnknownProblemType& e) {
        send_error(res, 404, "UnknownProblemType", e.what());
    } catch (const std::exception& e) {
        send_error(res, 500, "InternalError", e.what());
    }
}

Json parse_body(const httplib::Request& req) {
    try {
        return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
        throw HttpError{400, "BadRequest", std::string("body is not valid JSON: ") + e.what()};
    }
}

}  // namespace

Service::Service(std::shared_ptr<meta::ProblemManager> manager) : manager_(std::move(manager)) {}

void Service::mount(httplib::Server& server) {
    auto& m = *manager_;
    const auto& registry = m.registry();

    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Expose-Headers", "Location"}});
    server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (res.body.empty()) send_error(res, res.status, "NotFound", "no route for " + req.method + " " + req.path);
    });

    auto require_type = [&registry](const std::string& type) {
        if (!registry.has_type(type)) throw HttpError{404, "UnknownProblemType", "unknown problem type '" + type + "'"};
    };
    auto find = [&m, require_type](const std::string& type, const std::string& id) {
        require_type(type);
        auto p = m.find(type, id);
        if (!p) throw HttpError{404, "UnknownProblem", "no " + type + " problem '" + id + "'"};
        return *p;
    };
    auto find_solver = [&registry, require_type](const std::string& type, const std::string& id) {
        require_type(type);
        for (const auto& d : registry.list_solvers(type)) {
            if (d.solver_id == id) return d;
        }
        throw HttpError{404, "UnknownSolver", "no " + type + " solver '" + id + "'"};
    };

    const std::string seg = "([^/]+)";

    server.Get("/problems/" + seg, [&m, require_type](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            require_type(req.matches[1]);
            Json out = Json::array();
            for (const auto& p : m.list(req.matches[1])) out.push_back(summary_json(p));
            send_json(res, 200, out);
        });
    });

    server.Post("/problems/" + seg, [&m, require_type](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const std::string type = req.matches[1];
            require_type(type);
            const auto body = parse_body(req);
            if (!body.is_object()) throw BadRequest("body must be a JSON object");
            for (const auto& [key, value] : body.items()) {
                if (key != "typeId" && key != "input") throw BadRequest("unknown field '" + key + "'");
            }
            if (!body.contains("typeId") || !body["typeId"].is_string()) throw BadRequest("typeId must be a string");
            if (!body.contains("input") || !body["input"].is_string()) throw BadRequest("input must be a string");
            if (body["typeId"] != type) throw BadRequest("body typeId does not match the path");
            const auto p = m.create_problem(type, body["input"].get<std::string>());
            res.set_header("Location", "/problems/" + type + "/" + p.id);
            send_json(res, 201, to_json(p));
        });
    });

    server.Get("/problems/" + seg + "/" + seg, [find](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, to_json(find(req.matches[1], req.matches[2]))); });
    });

    server.Patch("/problems/" + seg + "/" + seg, [&m, find](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto p = find(req.matches[1], req.matches[2]);
            const auto request = patch_from_json(parse_body(req));
            send_json(res, 200, to_json(m.patch(p.id, request)));
        });
    });

    server.Get("/problems/" + seg + "/" + seg + "/bound", [&m, find](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            const auto p = find(req.matches[1], req.matches[2]);
            send_json(res, 200, to_json(m.compute_bound(p.id)));
        });
    });

    server.Get("/problems/" + seg + "/" + seg + "/bound/compare",
               [&m, find](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                       const auto p = find(req.matches[1], req.matches[2]);
                       send_json(res, 200, to_json(m.compare_bound(p.id)));
                   });
               });

    server.Get("/solvers/" + seg, [&registry, require_type](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            require_type(req.matches[1]);
            Json out = Json::array();
            for (const auto& d : registry.list_solvers(req.matches[1].str())) out.push_back(descriptor_json(d));
            send_json(res, 200, out);
        });
    });

    server.Get("/solvers/" + seg + "/" + seg + "/sub-routines",
               [find_solver](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] { send_json(res, 200, find_solver(req.matches[1], req.matches[2]).sub_routines); });
               });

    server.Get("/solvers/" + seg + "/" + seg + "/settings",
               [find_solver](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                       Json out = Json::array();
                       for (const auto& s : find_solver(req.matches[1], req.matches[2]).settings) out.push_back(to_json(s));
                       send_json(res, 200, out);
                   });
               });

    server.Get("/openapi", [](const httplib::Request&, httplib::Response& res) {
        static const std::string doc = openapi_document().dump(2);
        res.set_content(doc, "application/json");
    });
}

}  // namespace metasolver::api
