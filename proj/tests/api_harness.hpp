#pragma once

// In-process HTTP server on an ephemeral port, a tiny JSON-schema checker for
// the checked-in response schema, and the manifest reader. Shared by the API
// tests and the acceptance gate.

#include <chrono>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "metasolver/api.hpp"
#include "metasolver/solvers.hpp"

namespace api_harness {

using Json = nlohmann::json;

#ifndef METASOLVER_SOURCE_DIR
#define METASOLVER_SOURCE_DIR "."
#endif

inline std::string source_path(const std::string& relative) { return std::string(METASOLVER_SOURCE_DIR) + "/" + relative; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// "METHOD PATH" lines of api/routes.txt, comments dropped.
inline std::vector<std::pair<std::string, std::string>> manifest_routes() {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(slurp(source_path("api/routes.txt")));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string method, path;
        ls >> method >> path;
        out.emplace_back(method, path);
    }
    return out;
}

class TestServer {
public:
    explicit TestServer(std::size_t workers = 4)
        : manager_(std::make_shared<metasolver::meta::ProblemManager>(metasolver::solvers::make_default_registry(), workers)),
          service_(manager_) {
        service_.mount(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~TestServer() {
        server_.stop();
        thread_.join();
    }
    TestServer(const TestServer&) = delete;
    TestServer& operator=(const TestServer&) = delete;

    int port() const noexcept { return port_; }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port_);
        c.set_read_timeout(30, 0);
        return c;
    }
    metasolver::meta::ProblemManager& manager() { return *manager_; }

private:
    std::shared_ptr<metasolver::meta::ProblemManager> manager_;
    metasolver::api::Service service_;
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

/// Validates against the subset of JSON schema used by api/response-schema.json.
/// Returns an empty string when valid, otherwise the first problem found.
class SchemaChecker {
public:
    explicit SchemaChecker(Json root) : root_(std::move(root)) {}
    static SchemaChecker from_repo() { return SchemaChecker(Json::parse(slurp(source_path("api/response-schema.json")))); }

    std::string check(const std::string& definition, const Json& value) const {
        return check_node(root_.at("definitions").at(definition), value, "$");
    }

private:
    static bool type_matches(const std::string& type, const Json& v) {
        if (type == "object") return v.is_object();
        if (type == "array") return v.is_array();
        if (type == "string") return v.is_string();
        if (type == "integer") return v.is_number_integer();
        if (type == "number") return v.is_number();
        if (type == "boolean") return v.is_boolean();
        if (type == "null") return v.is_null();
        throw std::runtime_error("schema uses unsupported type " + type);
    }

    std::string check_node(const Json& schema, const Json& v, const std::string& at) const {
        if (schema.contains("$ref")) {
            const std::string ref = schema["$ref"];
            const std::string prefix = "#/definitions/";
            if (ref.rfind(prefix, 0) != 0) throw std::runtime_error("unsupported $ref " + ref);
            return check_node(root_.at("definitions").at(ref.substr(prefix.size())), v, at);
        }
        if (schema.contains("oneOf")) {
            int matched = 0;
            for (const auto& alt : schema["oneOf"]) matched += check_node(alt, v, at).empty() ? 1 : 0;
            if (matched != 1) return at + ": matched " + std::to_string(matched) + " oneOf alternatives";
        }
        if (schema.contains("enum")) {
            bool found = false;
            for (const auto& e : schema["enum"]) found = found || e == v;
            if (!found) return at + ": " + v.dump() + " not in enum";
        }
        if (schema.contains("type")) {
            const auto& t = schema["type"];
            bool ok = false;
            if (t.is_array()) {
                for (const auto& one : t) ok = ok || type_matches(one.get<std::string>(), v);
            } else {
                ok = type_matches(t.get<std::string>(), v);
            }
            if (!ok) return at + ": expected type " + t.dump() + ", got " + v.dump();
        }
        if (v.is_object()) {
            if (schema.contains("required")) {
                for (const auto& key : schema["required"]) {
                    if (!v.contains(key.get<std::string>())) return at + ": missing " + key.get<std::string>();
                }
            }
            const Json props = schema.value("properties", Json::object());
            for (const auto& [key, child] : v.items()) {
                if (props.contains(key)) {
                    if (auto e = check_node(props[key], child, at + "." + key); !e.empty()) return e;
                } else if (schema.contains("additionalProperties")) {
                    const auto& extra = schema["additionalProperties"];
                    if (extra.is_boolean()) {
                        if (!extra.get<bool>()) return at + ": unexpected property " + key;
                    } else if (auto e = check_node(extra, child, at + "." + key); !e.empty()) {
                        return e;
                    }
                }
            }
        }
        if (v.is_array() && schema.contains("items")) {
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (auto e = check_node(schema["items"], v[i], at + "[" + std::to_string(i) + "]"); !e.empty()) return e;
            }
        }
        return {};
    }

    Json root_;
};

/// Polls GET until `done` accepts the body or the deadline passes.
template <class Pred>
Json poll(httplib::Client& c, const std::string& path, Pred done, std::chrono::seconds limit = std::chrono::seconds(30)) {
    const auto deadline = std::chrono::steady_clock::now() + limit;
    for (;;) {
        auto r = c.Get(path);
        if (!r) throw std::runtime_error("GET " + path + " failed");
        auto body = Json::parse(r->body);
        if (done(body)) return body;
        if (std::chrono::steady_clock::now() > deadline) throw std::runtime_error("timed out polling " + path);
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
}

}  // namespace api_harness
