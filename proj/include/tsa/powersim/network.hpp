#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tsa/common.hpp"
#include "json.hpp"

namespace tsa::powersim {

enum class BusType { slack, pv, pq };

std::string to_string(BusType t);
BusType bus_type_from_string(const std::string& s);

struct Bus {
    int id = 0;
    BusType type = BusType::pq;
    double pd_mw = 0.0;
    double qd_mvar = 0.0;
    double vset = 1.0;  // used for slack / PV buses
};

enum class BranchKind { line, transformer };

struct Branch {
    int from = 0;
    int to = 0;
    double r = 0.0;       // p.u.
    double x = 0.0;       // p.u., > 0 for lines
    double b_half = 0.0;  // half charging susceptance per end, p.u.
    double tap = 1.0;     // from-side tap ratio
    BranchKind kind = BranchKind::line;
};

struct Generator {
    int bus = 0;
    double inertia_h = 0.0;   // s, on machine base
    double xd_prime = 0.0;    // p.u., on machine base
    double damping = 0.0;     // p.u., on machine base
    double rating_mva = 0.0;  // machine base
    double pg_mw = 0.0;       // base-case active dispatch
};

struct PowerNetwork {
    std::string name;
    double base_mva = 100.0;
    double frequency_hz = 60.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    double omega_s() const;  // synchronous speed, rad/s
    int bus_index(int bus_id) const;
    int slack_index() const;

    // Unique ids, exactly one slack, positive line reactances, generators on
    // existing buses, connected graph.
    void validate() const;
};

PowerNetwork network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PowerNetwork& network);
PowerNetwork load_network(const std::string& path);

}  // namespace tsa::powersim
