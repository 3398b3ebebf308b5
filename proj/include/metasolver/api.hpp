#pragma once

// HTTP/JSON front end over the problem manager.

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "metasolver/problem_manager.hpp"

namespace httplib {
class Server;
}

namespace metasolver::api {

using Json = nlohmann::json;

struct Route {
    std::string method;
    std::string path;  // OpenAPI-style template, e.g. /problems/{problemType}
    std::string summary;
};

/// The problem and solver endpoints, in manifest order. /openapi is served
/// in addition to these.
const std::vector<Route>& routes();

Json to_json(const meta::SettingValue& value);
Json to_json(const meta::Solution& solution);
Json to_json(const meta::Problem& problem);
Json summary_json(const meta::Problem& problem);
Json to_json(const meta::BoundReport& bound);
Json to_json(const meta::BoundComparison& comparison);
Json to_json(const meta::SettingDescriptor& setting);
Json descriptor_json(const meta::SolverDescriptor& descriptor);

/// Reads a PATCH body; throws BadRequest for unknown fields or wrong types.
meta::PatchRequest patch_from_json(const Json& body);

/// OpenAPI 3 description of the routes.
Json openapi_document();

class Service {
public:
    explicit Service(std::shared_ptr<meta::ProblemManager> manager);

    /// Installs the routes, /openapi and permissive CORS headers.
    void mount(httplib::Server& server);

    meta::ProblemManager& manager() noexcept { return *manager_; }

private:
    std::shared_ptr<meta::ProblemManager> manager_;
};

}  // namespace metasolver::api
