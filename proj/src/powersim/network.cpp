#include "tsa/powersim/network.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace tsa::powersim {

std::string to_string(BusType t) {
    switch (t) {
        case BusType::slack: return "slack";
        case BusType::pv: return "pv";
        case BusType::pq: return "pq";
    }
    return "pq";
}

BusType bus_type_from_string(const std::string& s) {
    if (s == "slack") return BusType::slack;
    if (s == "pv" || s == "PV") return BusType::pv;
    if (s == "pq" || s == "PQ") return BusType::pq;
    throw ConfigError("unknown bus type: " + s);
}

double PowerNetwork::omega_s() const { return 2.0 * std::numbers::pi * frequency_hz; }

int PowerNetwork::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == bus_id) return static_cast<int>(i);
    throw InputError("unknown bus id " + std::to_string(bus_id));
}

int PowerNetwork::slack_index() const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].type == BusType::slack) return static_cast<int>(i);
    throw ConfigError("network has no slack bus");
}

void PowerNetwork::validate() const {
    if (buses.empty()) throw ConfigError("network has no buses");
    if (base_mva <= 0.0) throw ConfigError("base MVA must be positive");

    std::set<int> ids;
    for (const auto& bus : buses)
        if (!ids.insert(bus.id).second)
            throw ConfigError("duplicate bus id " + std::to_string(bus.id));

    int n_slack = 0;
    for (const auto& bus : buses)
        if (bus.type == BusType::slack) ++n_slack;
    if (n_slack != 1) throw ConfigError("network must have exactly one slack bus");

    for (const auto& br : branches) {
        bus_index(br.from);
        bus_index(br.to);
        if (br.x <= 0.0)
            throw ConfigError("branch " + std::to_string(br.from) + "-" +
                              std::to_string(br.to) + " must have positive reactance");
        if (br.tap <= 0.0) throw ConfigError("branch tap ratio must be positive");
    }

    for (const auto& gen : generators) {
        bus_index(gen.bus);
        if (gen.inertia_h <= 0.0)
            throw ConfigError("generator at bus " + std::to_string(gen.bus) +
                              " must have positive inertia");
        if (gen.xd_prime <= 0.0)
            throw ConfigError("generator at bus " + std::to_string(gen.bus) +
                              " must have positive transient reactance");
        if (gen.rating_mva <= 0.0)
            throw ConfigError("generator at bus " + std::to_string(gen.bus) +
                              " must have positive rating");
    }

    // connectivity over the branch graph
    std::vector<char> seen(buses.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        for (const auto& br : branches) {
            int a = bus_index(br.from), b = bus_index(br.to);
            int other = -1;
            if (a == i) other = b;
            else if (b == i) other = a;
            if (other >= 0 && !seen[static_cast<std::size_t>(other)]) {
                seen[static_cast<std::size_t>(other)] = 1;
                stack.push_back(other);
            }
        }
    }
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (!seen[i])
            throw TopologyError("bus " + std::to_string(buses[i].id) +
                                " is disconnected from the network");
}

PowerNetwork network_from_json(const nlohmann::json& j) {
    PowerNetwork net;
    net.name = j.value("name", "");
    net.base_mva = j.at("base_mva").get<double>();
    net.frequency_hz = j.value("frequency_hz", 60.0);

    for (const auto& b : j.at("buses")) {
        Bus bus;
        bus.id = b.at("id").get<int>();
        bus.type = bus_type_from_string(b.at("type").get<std::string>());
        bus.pd_mw = b.value("pd_mw", 0.0);
        bus.qd_mvar = b.value("qd_mvar", 0.0);
        bus.vset = b.value("vset", 1.0);
        net.buses.push_back(bus);
    }
    for (const auto& b : j.at("branches")) {
        Branch br;
        br.from = b.at("from").get<int>();
        br.to = b.at("to").get<int>();
        br.r = b.value("r", 0.0);
        br.x = b.at("x").get<double>();
        br.b_half = b.value("b_half", 0.0);
        br.tap = b.value("tap", 1.0);
        br.kind = b.value("kind", std::string("line")) == "transformer"
                      ? BranchKind::transformer
                      : BranchKind::line;
        net.branches.push_back(br);
    }
    for (const auto& g : j.at("generators")) {
        Generator gen;
        gen.bus = g.at("bus").get<int>();
        gen.inertia_h = g.at("h").get<double>();
        gen.xd_prime = g.at("xd_prime").get<double>();
        gen.damping = g.value("damping", 0.0);
        gen.rating_mva = g.value("rating_mva", net.base_mva);
        gen.pg_mw = g.value("pg_mw", 0.0);
        net.generators.push_back(gen);
    }
    net.validate();
    return net;
}

nlohmann::json to_json(const PowerNetwork& net) {
    nlohmann::json buses = nlohmann::json::array();
    for (const auto& b : net.buses)
        buses.push_back({{"id", b.id},
                         {"type", to_string(b.type)},
                         {"pd_mw", b.pd_mw},
                         {"qd_mvar", b.qd_mvar},
                         {"vset", b.vset}});
    nlohmann::json branches = nlohmann::json::array();
    for (const auto& b : net.branches)
        branches.push_back({{"from", b.from},
                            {"to", b.to},
                            {"r", b.r},
                            {"x", b.x},
                            {"b_half", b.b_half},
                            {"tap", b.tap},
                            {"kind", b.kind == BranchKind::transformer ? "transformer"
                                                                       : "line"}});
    nlohmann::json gens = nlohmann::json::array();
    for (const auto& g : net.generators)
        gens.push_back({{"bus", g.bus},
                        {"h", g.inertia_h},
                        {"xd_prime", g.xd_prime},
                        {"damping", g.damping},
                        {"rating_mva", g.rating_mva},
                        {"pg_mw", g.pg_mw}});
    return {{"name", net.name},
            {"base_mva", net.base_mva},
            {"frequency_hz", net.frequency_hz},
            {"buses", std::move(buses)},
            {"branches", std::move(branches)},
            {"generators", std::move(gens)}};
}

PowerNetwork load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open network file: " + path);
    nlohmann::json j;
    in >> j;
    return network_from_json(j);
}

}  // namespace tsa::powersim
