#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wmc/instance.hpp"

namespace wmc {

struct Arc {
    int from = 0;
    int to = 0;
    friend bool operator==(const Arc&, const Arc&) = default;
};

/// Node sequence 0 -> ... -> n+1.
struct Route {
    int vehicle = 0;
    std::vector<int> nodes;

    std::size_t edge_count() const { return nodes.size() < 2 ? 0 : nodes.size() - 1; }
    Arc edge(std::size_t k) const { return {nodes[k], nodes[k + 1]}; }
    bool serves_customers() const { return nodes.size() > 2; }
    std::vector<double> edge_lengths(const Instance& inst) const {
        std::vector<double> out;
        out.reserve(edge_count());
        for (std::size_t k = 0; k + 1 < nodes.size(); ++k) out.push_back(inst.c(nodes[k], nodes[k + 1]));
        return out;
    }
};

inline Route make_route(const Instance& inst, const std::vector<int>& customers, int vehicle = 0) {
    Route r{vehicle, {}};
    r.nodes.reserve(customers.size() + 2);
    r.nodes.push_back(inst.depot());
    r.nodes.insert(r.nodes.end(), customers.begin(), customers.end());
    r.nodes.push_back(inst.sink());
    return r;
}

/// Which MTEV edge an MCT edge charges on. `edge` is 0-based.
struct Service {
    int mtev = 0;
    int edge = 0;
    friend bool operator==(const Service&, const Service&) = default;
};

struct MtevRoute {
    Route route;
    std::vector<std::optional<int>> charger;  // per edge: serving MCT id
    std::vector<double> arrival;              // t_i^e per node
    std::vector<double> battery;              // b_i^e per node
};

struct MctRoute {
    Route route;
    std::vector<std::optional<Service>> serves;  // per edge
    std::vector<double> arrival;                 // s_i^c per node
    std::vector<double> battery;                 // b_i^c per node
};

struct Solution {
    std::vector<MtevRoute> mtev_routes;
    std::vector<MctRoute> mct_routes;
    double total_cost = 0.0;

    int used_mtevs() const {
        int k = 0;
        for (const auto& r : mtev_routes) k += r.route.serves_customers() ? 1 : 0;
        return k;
    }
    int used_mcts() const {
        int k = 0;
        for (const auto& r : mct_routes) k += r.route.serves_customers() ? 1 : 0;
        return k;
    }
};

enum class Family { Flow, Coverage, Timing, Sync, EnergyMtev, EnergyMct, Capacity, Usage };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::Flow: return "flow";
        case Family::Coverage: return "coverage";
        case Family::Timing: return "timing";
        case Family::Sync: return "sync";
        case Family::EnergyMtev: return "energy-MTEV";
        case Family::EnergyMct: return "energy-MCT";
        case Family::Capacity: return "capacity";
        case Family::Usage: return "usage";
    }
    return "unknown";
}

struct Violation {
    Family family;
    std::string vehicle;  // "mtev 0", "mct 2", or empty for global findings
    int edge = 0;         // 1-based edge index along the vehicle's route; 0 if not edge-specific
    double magnitude = 0.0;
    std::string detail;
};

struct FeasibilityReport {
    std::vector<Violation> violations;

    bool pass() const { return violations.empty(); }
    bool has(Family f) const {
        for (const auto& v : violations)
            if (v.family == f) return true;
        return false;
    }
    void add(Family f, std::string vehicle, int edge, double magnitude, std::string detail) {
        violations.push_back({f, std::move(vehicle), edge, magnitude, std::move(detail)});
    }
    void merge(const FeasibilityReport& other) {
        violations.insert(violations.end(), other.violations.begin(), other.violations.end());
    }
    std::string to_string() const {
        std::string out;
        for (const auto& v : violations) {
            out += std::string(family_name(v.family)) + ": " + v.vehicle;
            if (v.edge > 0) out += " edge " + std::to_string(v.edge);
            out += " (" + v.detail + ", magnitude " + std::to_string(v.magnitude) + ")\n";
        }
        return out;
    }
};

inline json to_json(const Solution& sol) {
    json mtevs = json::array();
    for (const auto& r : sol.mtev_routes) {
        json edges = json::array();
        for (std::size_t k = 0; k < r.route.edge_count(); ++k) {
            const Arc a = r.route.edge(k);
            json e = {{"from", a.from}, {"to", a.to}, {"mct_id", nullptr}};
            if (k < r.charger.size() && r.charger[k]) e["mct_id"] = *r.charger[k];
            edges.push_back(std::move(e));
        }
        mtevs.push_back({{"id", r.route.vehicle},
                         {"used", r.route.serves_customers()},
                         {"nodes", r.route.nodes},
                         {"edges", edges},
                         {"arrival", r.arrival},
                         {"battery", r.battery}});
    }
    json mcts = json::array();
    for (const auto& r : sol.mct_routes) {
        json edges = json::array();
        for (std::size_t k = 0; k < r.route.edge_count(); ++k) {
            const Arc a = r.route.edge(k);
            json e = {{"from", a.from}, {"to", a.to}, {"charges", nullptr}};
            if (k < r.serves.size() && r.serves[k]) e["charges"] = {{"mtev", r.serves[k]->mtev}, {"edge", r.serves[k]->edge}};
            edges.push_back(std::move(e));
        }
        mcts.push_back({{"id", r.route.vehicle},
                        {"used", r.route.serves_customers()},
                        {"nodes", r.route.nodes},
                        {"edges", edges},
                        {"arrival", r.arrival},
                        {"battery", r.battery}});
    }
    return {{"cost", sol.total_cost},
            {"E", sol.used_mtevs()},
            {"C", sol.used_mcts()},
            {"mtev_routes", mtevs},
            {"mct_routes", mcts}};
}

inline Solution solution_from_json(const json& j) {
    Solution sol;
    try {
        sol.total_cost = j.value("cost", 0.0);
        for (const auto& r : j.at("mtev_routes")) {
            MtevRoute m;
            m.route.vehicle = r.at("id").get<int>();
            m.route.nodes = r.at("nodes").get<std::vector<int>>();
            for (const auto& e : r.at("edges")) {
                const auto& id = e.at("mct_id");
                m.charger.push_back(id.is_null() ? std::nullopt : std::optional<int>(id.get<int>()));
            }
            m.arrival = r.value("arrival", std::vector<double>{});
            m.battery = r.value("battery", std::vector<double>{});
            sol.mtev_routes.push_back(std::move(m));
        }
        for (const auto& r : j.at("mct_routes")) {
            MctRoute m;
            m.route.vehicle = r.at("id").get<int>();
            m.route.nodes = r.at("nodes").get<std::vector<int>>();
            for (const auto& e : r.at("edges")) {
                const auto& s = e.at("charges");
                if (s.is_null()) {
                    m.serves.emplace_back();
                } else {
                    m.serves.emplace_back(Service{s.at("mtev").get<int>(), s.at("edge").get<int>()});
                }
            }
            m.arrival = r.value("arrival", std::vector<double>{});
            m.battery = r.value("battery", std::vector<double>{});
            sol.mct_routes.push_back(std::move(m));
        }
    } catch (const json::exception& e) {
        throw StructuralError(std::string("solution json: ") + e.what());
    }
    return sol;
}

} // namespace wmc
