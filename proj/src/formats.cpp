#include "metasolver/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

#include "metasolver/errors.hpp"

namespace metasolver::formats {

namespace {

constexpr std::string_view kWhitespace = " \t\r\v\f";

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(kWhitespace);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(kWhitespace);
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> tokens;
    std::size_t pos = 0;
    while (pos < s.size()) {
        pos = s.find_first_not_of(kWhitespace, pos);
        if (pos == std::string_view::npos) break;
        auto end = s.find_first_of(kWhitespace, pos);
        if (end == std::string_view::npos) end = s.size();
        tokens.push_back(s.substr(pos, end - pos));
        pos = end;
    }
    return tokens;
}

struct Line {
    std::size_t number;  // 1-based
    std::string_view text;  // trimmed, non-empty
};

/// Non-blank lines with their 1-based numbers. `comment` strips trailing comments.
std::vector<Line> meaningful_lines(std::string_view text, char comment = '\0') {
    std::vector<Line> out;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++number;
        auto raw = text.substr(pos, end - pos);
        if (comment != '\0') {
            if (auto c = raw.find(comment); c != std::string_view::npos) raw = raw.substr(0, c);
        }
        if (auto t = trim(raw); !t.empty()) out.push_back({number, t});
        if (end == text.size()) break;
        pos = end + 1;
    }
    return out;
}

std::int64_t parse_int(std::string_view token, std::size_t line, std::string_view what) {
    std::int64_t value = 0;
    const auto* begin = token.data();
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ParseError(line, "expected integer " + std::string(what) + ", got '" + std::string(token) + "'");
    }
    return value;
}

double parse_real(std::string_view token, std::size_t line, std::string_view what) {
    double value = 0.0;
    const auto* begin = token.data();
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ParseError(line, "expected finite real " + std::string(what) + ", got '" + std::string(token) + "'");
    }
    return value;
}

std::size_t last_line_number(std::string_view text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
}

// Shared reader for the TSP and CVRP dialects.
struct RoutingFile {
    std::string name;
    std::string type;
    std::optional<std::int64_t> dimension;
    std::optional<std::string> edge_weight_type;
    std::optional<std::int64_t> capacity;
    std::optional<std::int64_t> vehicles;
    std::map<std::string, std::size_t, std::less<>> key_lines;

    struct NodeLine {
        std::size_t line;
        Node node;
    };
    struct DemandLine {
        std::size_t line;
        NodeId id;
        std::int64_t demand;
    };
    std::vector<NodeLine> nodes;
    std::vector<DemandLine> demands;
    std::vector<std::pair<std::size_t, NodeId>> depots;
    bool has_coords = false;
    bool has_demands = false;
    bool has_depots = false;
    std::size_t end_line = 0;
};

RoutingFile read_routing_file(std::string_view text) {
    enum class Section { Header, Coords, Demand, Depot, DepotClosed };
    RoutingFile file;
    Section section = Section::Header;
    bool saw_eof = false;

    for (const auto& [number, line] : meaningful_lines(text)) {
        if (saw_eof) throw ParseError(number, "content after EOF");
        if (line == "EOF") {
            saw_eof = true;
            file.end_line = number;
            continue;
        }
        auto enter = [&](bool& flag, Section next) {
            if (flag) throw ParseError(number, "duplicate section " + std::string(line));
            flag = true;
            section = next;
        };
        if (line == "NODE_COORD_SECTION") {
            enter(file.has_coords, Section::Coords);
            continue;
        }
        if (line == "DEMAND_SECTION") {
            enter(file.has_demands, Section::Demand);
            continue;
        }
        if (line == "DEPOT_SECTION") {
            enter(file.has_depots, Section::Depot);
            continue;
        }

        if (const auto colon = line.find(':'); colon != std::string_view::npos) {
            const auto key = trim(line.substr(0, colon));
            const auto value = trim(line.substr(colon + 1));
            if (file.key_lines.contains(key)) throw ParseError(number, "duplicate key " + std::string(key));
            file.key_lines.emplace(std::string(key), number);
            if (key == "NAME") {
                file.name = std::string(value);
            } else if (key == "TYPE") {
                file.type = std::string(value);
            } else if (key == "COMMENT") {
                // ignored
            } else if (key == "DIMENSION") {
                file.dimension = parse_int(value, number, "DIMENSION");
            } else if (key == "EDGE_WEIGHT_TYPE") {
                file.edge_weight_type = std::string(value);
            } else if (key == "CAPACITY") {
                file.capacity = parse_int(value, number, "CAPACITY");
            } else if (key == "VEHICLES") {
                file.vehicles = parse_int(value, number, "VEHICLES");
            } else {
                throw ParseError(number, "unknown key " + std::string(key));
            }
            section = Section::Header;
            continue;
        }

        const auto tokens = split_ws(line);
        switch (section) {
            case Section::Header:
            case Section::DepotClosed:
                throw ParseError(number, "unexpected line '" + std::string(line) + "'");
            case Section::Coords: {
                if (tokens.size() != 3) throw ParseError(number, "coordinate line needs '<id> <x> <y>'");
                Node node{parse_int(tokens[0], number, "node id"), parse_real(tokens[1], number, "x"),
                          parse_real(tokens[2], number, "y")};
                file.nodes.push_back({number, node});
                break;
            }
            case Section::Demand: {
                if (tokens.size() != 2) throw ParseError(number, "demand line needs '<id> <demand>'");
                file.demands.push_back(
                    {number, parse_int(tokens[0], number, "node id"), parse_int(tokens[1], number, "demand")});
                break;
            }
            case Section::Depot: {
                if (tokens.size() != 1) throw ParseError(number, "depot line needs a single id");
                const auto id = parse_int(tokens[0], number, "depot id");
                if (id == -1) {
                    section = Section::DepotClosed;
                } else {
                    file.depots.emplace_back(number, id);
                }
                break;
            }
        }
    }
    if (file.end_line == 0) file.end_line = last_line_number(text);
    if (section == Section::Depot) throw ParseError(file.end_line, "DEPOT_SECTION not terminated by -1");
    return file;
}

std::vector<Node> validate_nodes(const RoutingFile& file) {
    auto dim_line = [&] {
        auto it = file.key_lines.find("DIMENSION");
        return it == file.key_lines.end() ? file.end_line : it->second;
    };
    if (!file.dimension) throw ParseError(file.end_line, "missing DIMENSION");
    if (*file.dimension < 2) throw ParseError(dim_line(), "DIMENSION must be at least 2");
    if (!file.edge_weight_type) throw ParseError(file.end_line, "missing EDGE_WEIGHT_TYPE");
    if (*file.edge_weight_type != "EUC_2D") {
        throw ParseError(file.key_lines.at("EDGE_WEIGHT_TYPE"),
                         "unsupported EDGE_WEIGHT_TYPE " + *file.edge_weight_type + " (only EUC_2D)");
    }
    if (!file.has_coords) throw ParseError(file.end_line, "missing NODE_COORD_SECTION");

    std::vector<Node> nodes;
    std::set<NodeId> seen;
    for (const auto& [line, node] : file.nodes) {
        if (!seen.insert(node.id).second) throw ParseError(line, "duplicate node id " + std::to_string(node.id));
        nodes.push_back(node);
    }
    if (static_cast<std::int64_t>(nodes.size()) != *file.dimension) {
        throw ParseError(file.end_line, "DIMENSION is " + std::to_string(*file.dimension) + " but " +
                                            std::to_string(nodes.size()) + " coordinates were given");
    }
    return nodes;
}

std::size_t find_index(const std::vector<Node>& nodes, NodeId id) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].id == id) return i;
    }
    throw UnknownNode("unknown node " + std::to_string(id));
}

void append_nodes(std::string& out, const std::vector<Node>& nodes) {
    out += "NODE_COORD_SECTION\n";
    for (const auto& n : nodes) {
        out += std::to_string(n.id) + " " + format_real(n.x) + " " + format_real(n.y) + "\n";
    }
}

}  // namespace

std::string format_real(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

std::size_t TspInstance::index_of(NodeId id) const { return find_index(nodes, id); }
std::size_t VrpInstance::index_of(NodeId id) const { return find_index(nodes, id); }

std::int64_t VrpInstance::demand_of(NodeId id) const {
    auto it = demand.find(id);
    return it == demand.end() ? 0 : it->second;
}

std::vector<NodeId> VrpInstance::customers() const {
    std::vector<NodeId> out;
    for (const auto& n : nodes) {
        if (n.id != depot) out.push_back(n.id);
    }
    return out;
}

std::int64_t VrpInstance::total_demand() const {
    std::int64_t total = 0;
    for (const auto& [id, d] : demand) {
        if (id != depot) total += d;
    }
    return total;
}

void Qubo::add(std::size_t i, std::size_t j, double value) {
    if (j < i) std::swap(i, j);
    if (value == 0.0) return;
    auto& slot = coefficients[{i, j}];
    slot += value;
    if (slot == 0.0) coefficients.erase({i, j});
}

double Qubo::coefficient(std::size_t i, std::size_t j) const {
    if (j < i) std::swap(i, j);
    auto it = coefficients.find({i, j});
    return it == coefficients.end() ? 0.0 : it->second;
}

TspInstance parse_tsp(std::string_view text) {
    const auto file = read_routing_file(text);
    if (file.type != "TSP") {
        auto it = file.key_lines.find("TYPE");
        throw ParseError(it == file.key_lines.end() ? file.end_line : it->second, "TYPE must be TSP");
    }
    for (const char* key : {"CAPACITY", "VEHICLES"}) {
        if (auto it = file.key_lines.find(key); it != file.key_lines.end()) {
            throw ParseError(it->second, std::string(key) + " is not valid for TSP");
        }
    }
    if (file.has_demands || file.has_depots) throw ParseError(file.end_line, "TSP files have no demand/depot sections");
    return TspInstance{file.name, validate_nodes(file)};
}

std::string serialize_tsp(const TspInstance& instance) {
    std::string out;
    out += "NAME: " + instance.name + "\n";
    out += "TYPE: TSP\n";
    out += "DIMENSION: " + std::to_string(instance.nodes.size()) + "\n";
    out += "EDGE_WEIGHT_TYPE: EUC_2D\n";
    append_nodes(out, instance.nodes);
    out += "EOF\n";
    return out;
}

VrpInstance parse_vrp(std::string_view text) {
    const auto file = read_routing_file(text);
    auto key_line = [&](std::string_view key) {
        auto it = file.key_lines.find(key);
        return it == file.key_lines.end() ? file.end_line : it->second;
    };
    if (file.type != "CVRP") throw ParseError(key_line("TYPE"), "TYPE must be CVRP");

    VrpInstance vrp;
    vrp.name = file.name;
    vrp.nodes = validate_nodes(file);

    if (!file.capacity) throw ParseError(file.end_line, "missing CAPACITY");
    if (*file.capacity <= 0) throw ParseError(key_line("CAPACITY"), "CAPACITY must be positive");
    vrp.capacity = *file.capacity;
    if (file.vehicles) {
        if (*file.vehicles <= 0) throw ParseError(key_line("VEHICLES"), "VEHICLES must be positive");
        vrp.max_vehicles = file.vehicles;
    }

    if (!file.has_depots) throw ParseError(file.end_line, "missing DEPOT_SECTION");
    if (file.depots.size() != 1) throw ParseError(file.end_line, "exactly one depot is supported");
    const auto [depot_line, depot] = file.depots.front();
    if (std::none_of(vrp.nodes.begin(), vrp.nodes.end(), [&](const Node& n) { return n.id == depot; })) {
        throw ParseError(depot_line, "depot " + std::to_string(depot) + " is not a node");
    }
    vrp.depot = depot;

    if (!file.has_demands) throw ParseError(file.end_line, "missing DEMAND_SECTION");
    for (const auto& d : file.demands) {
        if (std::none_of(vrp.nodes.begin(), vrp.nodes.end(), [&](const Node& n) { return n.id == d.id; })) {
            throw ParseError(d.line, "demand for unknown node " + std::to_string(d.id));
        }
        if (d.demand < 0) throw ParseError(d.line, "negative demand");
        if (!vrp.demand.emplace(d.id, d.demand).second) {
            throw ParseError(d.line, "duplicate demand for node " + std::to_string(d.id));
        }
        if (d.id == depot && d.demand != 0) throw ParseError(d.line, "depot demand must be 0");
        if (d.id != depot && d.demand > vrp.capacity) {
            throw ParseError(d.line, "infeasible customer " + std::to_string(d.id) + ": demand " +
                                         std::to_string(d.demand) + " exceeds capacity " +
                                         std::to_string(vrp.capacity));
        }
    }
    if (vrp.demand.size() != vrp.nodes.size()) throw ParseError(file.end_line, "every node needs a demand entry");
    if (vrp.max_vehicles && vrp.total_demand() > *vrp.max_vehicles * vrp.capacity) {
        throw ParseError(key_line("VEHICLES"), "total demand exceeds VEHICLES * CAPACITY");
    }
    return vrp;
}

std::string serialize_vrp(const VrpInstance& instance) {
    std::string out;
    out += "NAME: " + instance.name + "\n";
    out += "TYPE: CVRP\n";
    out += "DIMENSION: " + std::to_string(instance.nodes.size()) + "\n";
    out += "EDGE_WEIGHT_TYPE: EUC_2D\n";
    out += "CAPACITY: " + std::to_string(instance.capacity) + "\n";
    if (instance.max_vehicles) out += "VEHICLES: " + std::to_string(*instance.max_vehicles) + "\n";
    append_nodes(out, instance.nodes);
    out += "DEMAND_SECTION\n";
    for (const auto& n : instance.nodes) out += std::to_string(n.id) + " " + std::to_string(instance.demand_of(n.id)) + "\n";
    out += "DEPOT_SECTION\n" + std::to_string(instance.depot) + "\n-1\nEOF\n";
    return out;
}

KnapsackInstance parse_knapsack(std::string_view text) {
    KnapsackInstance instance;
    std::optional<std::int64_t> capacity;
    bool in_items = false;
    bool saw_items = false;
    bool saw_eof = false;
    std::set<std::int64_t> ids;
    const auto lines = meaningful_lines(text, '#');
    for (const auto& [number, line] : lines) {
        if (saw_eof) throw ParseError(number, "content after EOF");
        if (line == "EOF") {
            saw_eof = true;
            continue;
        }
        if (line == "ITEM_SECTION") {
            if (saw_items) throw ParseError(number, "duplicate ITEM_SECTION");
            saw_items = in_items = true;
            continue;
        }
        if (const auto colon = line.find(':'); colon != std::string_view::npos) {
            const auto key = trim(line.substr(0, colon));
            if (key != "CAPACITY") throw ParseError(number, "unknown key " + std::string(key));
            if (capacity) throw ParseError(number, "duplicate CAPACITY");
            capacity = parse_int(trim(line.substr(colon + 1)), number, "CAPACITY");
            if (*capacity < 0) throw ParseError(number, "CAPACITY must be nonnegative");
            in_items = false;
            continue;
        }
        if (!in_items) throw ParseError(number, "unexpected line '" + std::string(line) + "'");
        const auto tokens = split_ws(line);
        if (tokens.size() != 3) throw ParseError(number, "item line needs '<id> <weight> <value>'");
        KnapsackItem item{parse_int(tokens[0], number, "item id"), parse_int(tokens[1], number, "weight"),
                          parse_real(tokens[2], number, "value")};
        if (item.weight < 0) throw ParseError(number, "negative weight");
        if (!ids.insert(item.id).second) throw ParseError(number, "duplicate item id " + std::to_string(item.id));
        instance.items.push_back(item);
    }
    if (!capacity) throw ParseError(last_line_number(text), "missing CAPACITY");
    if (!saw_items) throw ParseError(last_line_number(text), "missing ITEM_SECTION");
    instance.capacity = *capacity;
    return instance;
}

std::string serialize_knapsack(const KnapsackInstance& instance) {
    std::string out = "CAPACITY: " + std::to_string(instance.capacity) + "\nITEM_SECTION\n";
    for (const auto& item : instance.items) {
        out += std::to_string(item.id) + " " + std::to_string(item.weight) + " " + format_real(item.value) + "\n";
    }
    out += "EOF\n";
    return out;
}

Qubo parse_qubo(std::string_view text) {
    Qubo qubo;
    bool have_n = false;
    bool have_offset = false;
    for (const auto& [number, line] : meaningful_lines(text, '#')) {
        const auto tokens = split_ws(line);
        if (tokens.front() == "n") {
            if (have_n) throw ParseError(number, "duplicate 'n' line");
            if (tokens.size() != 2) throw ParseError(number, "expected 'n <vars>'");
            const auto n = parse_int(tokens[1], number, "variable count");
            if (n < 0) throw ParseError(number, "variable count must be nonnegative");
            qubo.n = static_cast<std::size_t>(n);
            have_n = true;
            continue;
        }
        if (!have_n) throw ParseError(number, "first line must be 'n <vars>'");
        if (tokens.front() == "c") {
            if (have_offset) throw ParseError(number, "duplicate 'c' line");
            if (tokens.size() != 2) throw ParseError(number, "expected 'c <offset>'");
            qubo.offset = parse_real(tokens[1], number, "offset");
            have_offset = true;
            continue;
        }
        if (tokens.size() != 3) throw ParseError(number, "expected '<i> <j> <coeff>'");
        const auto i = parse_int(tokens[0], number, "index i");
        const auto j = parse_int(tokens[1], number, "index j");
        const auto value = parse_real(tokens[2], number, "coefficient");
        if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= qubo.n || static_cast<std::size_t>(j) >= qubo.n) {
            throw ParseError(number, "index out of range for n = " + std::to_string(qubo.n));
        }
        if (j < i) throw LowerTriangleEntry(number, "lower-triangle entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
        const std::pair<std::size_t, std::size_t> key{static_cast<std::size_t>(i), static_cast<std::size_t>(j)};
        if (qubo.coefficients.contains(key)) throw ParseError(number, "duplicate coefficient");
        if (value != 0.0) qubo.coefficients.emplace(key, value);
    }
    if (!have_n) throw ParseError(last_line_number(text), "missing 'n <vars>' line");
    return qubo;
}

std::string serialize_qubo(const Qubo& qubo) {
    std::string out = "n " + std::to_string(qubo.n) + "\nc " + format_real(qubo.offset) + "\n";
    for (const auto& [key, value] : qubo.coefficients) {
        if (value == 0.0) continue;
        out += std::to_string(key.first) + " " + std::to_string(key.second) + " " + format_real(value) + "\n";
    }
    return out;
}

RouteSolution parse_route_solution(std::string_view text) {
    RouteSolution solution;
    bool have_length = false;
    for (const auto& [number, line] : meaningful_lines(text)) {
        if (have_length) throw ParseError(number, "content after LENGTH");
        const auto tokens = split_ws(line);
        if (tokens.front() == "LENGTH") {
            if (tokens.size() != 2) throw ParseError(number, "expected 'LENGTH <real>'");
            solution.total_length = parse_real(tokens[1], number, "length");
            have_length = true;
            continue;
        }
        std::vector<NodeId> route;
        for (auto t : tokens) route.push_back(parse_int(t, number, "node id"));
        solution.routes.push_back(std::move(route));
    }
    if (!have_length) throw ParseError(last_line_number(text), "missing LENGTH line");
    return solution;
}

std::string serialize_route_solution(const RouteSolution& solution) {
    std::string out;
    for (const auto& route : solution.routes) {
        if (route.empty()) continue;
        for (std::size_t i = 0; i < route.size(); ++i) {
            if (i) out += ' ';
            out += std::to_string(route[i]);
        }
        out += '\n';
    }
    out += "LENGTH " + format_real(solution.total_length) + "\n";
    return out;
}

KnapsackSolution parse_knapsack_solution(std::string_view text) {
    KnapsackSolution solution;
    std::set<std::string_view> seen;
    for (const auto& [number, line] : meaningful_lines(text)) {
        const auto tokens = split_ws(line);
        if (!seen.insert(tokens.front()).second) throw ParseError(number, "duplicate " + std::string(tokens.front()));
        if (tokens.front() == "ITEMS") {
            for (std::size_t i = 1; i < tokens.size(); ++i) solution.chosen_item_ids.push_back(parse_int(tokens[i], number, "item id"));
        } else if (tokens.front() == "VALUE" && tokens.size() == 2) {
            solution.total_value = parse_real(tokens[1], number, "value");
        } else if (tokens.front() == "WEIGHT" && tokens.size() == 2) {
            solution.total_weight = parse_int(tokens[1], number, "weight");
        } else {
            throw ParseError(number, "unexpected line '" + std::string(line) + "'");
        }
    }
    if (seen.size() != 3) throw ParseError(last_line_number(text), "expected ITEMS, VALUE and WEIGHT lines");
    return solution;
}

std::string serialize_knapsack_solution(const KnapsackSolution& solution) {
    std::string out = "ITEMS";
    for (auto id : solution.chosen_item_ids) out += " " + std::to_string(id);
    out += "\nVALUE " + format_real(solution.total_value) + "\nWEIGHT " + std::to_string(solution.total_weight) + "\n";
    return out;
}

double euclidean(const Node& a, const Node& b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

double distance(const TspInstance& instance, NodeId u, NodeId v) {
    return euclidean(instance.node(u), instance.node(v));
}

double distance(const VrpInstance& instance, NodeId u, NodeId v) {
    return euclidean(instance.node(u), instance.node(v));
}

DistanceMatrix::DistanceMatrix(const std::vector<Node>& nodes) : n_(nodes.size()), d_(n_ * n_, 0.0) {
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            d_[i * n_ + j] = d_[j * n_ + i] = euclidean(nodes[i], nodes[j]);
        }
    }
}

double DistanceMatrix::max_entry() const noexcept {
    return d_.empty() ? 0.0 : *std::max_element(d_.begin(), d_.end());
}

}  // namespace metasolver::formats
