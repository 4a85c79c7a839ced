#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmc/errors.hpp"

namespace wmc {

using json = nlohmann::json;

/// Shortest round-trip decimal form of v.
inline std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

/// Problem data. Node 0 is the departure depot, nodes 1..n are customers
/// (hospitals), node n+1 is the return depot and a copy of node 0.
/// Distances double as travel times.
struct Instance {
    std::string name;
    int n = 0;
    std::vector<double> dist;  // row-major (n+2) x (n+2)
    std::vector<int> demand;   // demand[i-1] for customer i

    double P = 0.0;      // MTEV energy capacity
    double B = 0.0;      // MCT energy capacity
    double Q = 0.0;      // MTEV load capacity
    double rho_t = 0.0;  // MTEV energy per distance (also cost per distance)
    double rho_e = 0.0;  // cost per deployed MTEV
    double rho_c = 0.0;  // cost per deployed MCT
    double gamma = 0.0;  // energy delivered per distance while co-traveling
    double phi = 0.0;    // MCT energy per distance
    int max_mtev = 0;
    int max_mct = 0;

    double big_m = 1e5;
    // MCT battery also pays the transferred energy gamma * c on charging arcs.
    bool mct_transfer_depletes = true;

    int node_count() const { return n + 2; }
    int depot() const { return 0; }
    int sink() const { return n + 1; }
    bool is_customer(int i) const { return i >= 1 && i <= n; }

    double c(int i, int j) const {
        return dist[static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 2) + static_cast<std::size_t>(j)];
    }
    double& c(int i, int j) {
        return dist[static_cast<std::size_t>(i) * static_cast<std::size_t>(n + 2) + static_cast<std::size_t>(j)];
    }
    int demand_of(int i) const { return is_customer(i) ? demand[static_cast<std::size_t>(i - 1)] : 0; }
};

/// Checks structural invariants. Throws StructuralError on hard violations and
/// returns human-readable warnings for soft ones.
inline std::vector<std::string> validate(const Instance& inst) {
    std::vector<std::string> warnings;
    const int N = inst.node_count();
    if (inst.n < 0) throw StructuralError("instance: n must be nonnegative");
    if (inst.dist.size() != static_cast<std::size_t>(N) * static_cast<std::size_t>(N))
        throw StructuralError("instance: dist must be (n+2)x(n+2)");
    if (inst.demand.size() != static_cast<std::size_t>(inst.n))
        throw StructuralError("instance: demand must have n entries");
    for (int i = 0; i < N; ++i) {
        if (inst.c(i, i) != 0.0) throw StructuralError("instance: dist[i][i] must be 0 (i=" + std::to_string(i) + ")");
        for (int j = 0; j < N; ++j) {
            const double v = inst.c(i, j);
            if (!std::isfinite(v) || v < 0.0) throw StructuralError("instance: dist entries must be finite and >= 0");
            if (v != inst.c(j, i))
                throw StructuralError("instance: dist not symmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
        }
    }
    if (inst.c(0, inst.sink()) != 0.0) throw StructuralError("instance: depot copies must be 0 apart");
    for (int j = 1; j <= inst.n; ++j) {
        if (inst.c(inst.sink(), j) != inst.c(0, j))
            throw StructuralError("instance: row n+1 must equal row 0");
    }
    for (int d : inst.demand) {
        if (d < 1) throw StructuralError("instance: demands must be >= 1");
    }
    const std::pair<const char*, double> positive[] = {
        {"P", inst.P}, {"B", inst.B}, {"Q", inst.Q}, {"rho_t", inst.rho_t}, {"rho_e", inst.rho_e},
        {"rho_c", inst.rho_c}, {"gamma", inst.gamma}, {"phi", inst.phi}};
    for (const auto& [key, value] : positive) {
        if (!(value > 0.0) || !std::isfinite(value)) throw StructuralError(std::string("instance: ") + key + " must be > 0");
    }
    if (inst.max_mtev < 0 || inst.max_mct < 0) throw StructuralError("instance: fleet caps must be >= 0");
    if (inst.gamma <= inst.rho_t)
        warnings.push_back("gamma <= rho_t: in-motion charging yields no net energy gain");
    for (int i = 1; i <= inst.n; ++i) {
        if (inst.demand_of(i) > inst.Q) warnings.push_back("customer " + std::to_string(i) + " demand exceeds Q");
    }
    return warnings;
}

inline json to_json(const Instance& inst) {
    const int N = inst.node_count();
    json rows = json::array();
    for (int i = 0; i < N; ++i) {
        json row = json::array();
        for (int j = 0; j < N; ++j) row.push_back(inst.c(i, j));
        rows.push_back(std::move(row));
    }
    json j = {{"n", inst.n},         {"dist", rows},           {"demand", inst.demand},
              {"P", inst.P},         {"B", inst.B},            {"Q", inst.Q},
              {"rho_t", inst.rho_t}, {"rho_e", inst.rho_e},    {"rho_c", inst.rho_c},
              {"gamma", inst.gamma}, {"phi", inst.phi},        {"max_mtev", inst.max_mtev},
              {"max_mct", inst.max_mct}};
    if (!inst.name.empty()) j["name"] = inst.name;
    if (!inst.mct_transfer_depletes) j["mct_transfer_depletes"] = false;
    return j;
}

inline Instance instance_from_json(const json& j) {
    Instance inst;
    try {
        inst.n = j.at("n").get<int>();
        const int N = inst.n + 2;
        const auto& rows = j.at("dist");
        if (!rows.is_array() || rows.size() != static_cast<std::size_t>(N))
            throw StructuralError("instance: dist must have n+2 rows");
        inst.dist.reserve(static_cast<std::size_t>(N) * static_cast<std::size_t>(N));
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != static_cast<std::size_t>(N))
                throw StructuralError("instance: dist rows must have n+2 entries");
            for (const auto& v : row) inst.dist.push_back(v.get<double>());
        }
        inst.demand = j.at("demand").get<std::vector<int>>();
        // Tolerate a depot-inclusive demand vector (n+2 entries, zero at both depots).
        if (inst.demand.size() == static_cast<std::size_t>(N) && inst.demand.front() == 0 && inst.demand.back() == 0) {
            inst.demand = std::vector<int>(inst.demand.begin() + 1, inst.demand.end() - 1);
        }
        inst.P = j.at("P").get<double>();
        inst.B = j.at("B").get<double>();
        inst.Q = j.at("Q").get<double>();
        inst.rho_t = j.at("rho_t").get<double>();
        inst.rho_e = j.at("rho_e").get<double>();
        inst.rho_c = j.at("rho_c").get<double>();
        inst.gamma = j.at("gamma").get<double>();
        inst.phi = j.at("phi").get<double>();
        inst.max_mtev = j.at("max_mtev").get<int>();
        inst.max_mct = j.at("max_mct").get<int>();
        inst.name = j.value("name", std::string{});
        inst.mct_transfer_depletes = j.value("mct_transfer_depletes", true);
        inst.big_m = j.value("big_m", 1e5);
    } catch (const json::exception& e) {
        throw StructuralError(std::string("instance json: ") + e.what());
    }
    validate(inst);
    return inst;
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open instance file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw StructuralError("instance parse error in " + path + ": " + e.what());
    }
    Instance inst = instance_from_json(j);
    if (inst.name.empty()) {
        const auto slash = path.find_last_of('/');
        std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
        const auto dot = base.rfind(".json");
        inst.name = dot == std::string::npos ? base : base.substr(0, dot);
    }
    return inst;
}

inline void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw StructuralError("cannot write instance file: " + path);
    out << to_json(inst).dump(1) << '\n';
}

} // namespace wmc
