// Serves the Meta-Solver HTTP API. PORT (default 8080) and HOST (default
// 0.0.0.0) come from the environment.

#include <httplib.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "metasolver/api.hpp"
#include "metasolver/solvers.hpp"

int main() {
    const char* port_env = std::getenv("PORT");
    const char* host_env = std::getenv("HOST");
    const std::string host = host_env ? host_env : "0.0.0.0";
    int port = 8080;
    if (port_env) {
        try {
            port = std::stoi(port_env);
        } catch (const std::exception&) {
            std::cerr << "PORT must be an integer, got '" << port_env << "'\n";
            return 2;
        }
    }

    auto manager = std::make_shared<metasolver::meta::ProblemManager>(metasolver::solvers::make_default_registry());
    metasolver::api::Service service(manager);
    httplib::Server server;
    service.mount(server);

    std::cout << "listening on " << host << ":" << port << std::endl;
    if (!server.listen(host, port)) {
        std::cerr << "cannot listen on " << host << ":" << port << "\n";
        return 1;
    }
    return 0;
}
