#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wmc/errors.hpp"
#include "wmc/instance.hpp"
#include "wmc/pattern.hpp"
#include "wmc/solution.hpp"

namespace wmc {

/// Absolute slack for time and energy comparisons.
inline constexpr double kTolerance = 1e-6;

/// MTEV battery parameters as seen by a single route.
struct EnergyModel {
    double capacity = 0.0;     // P
    double consumption = 0.0;  // rho_t, energy per distance
    double transfer = 0.0;     // gamma, energy received per distance while charged

    static EnergyModel of(const Instance& inst) { return {inst.P, inst.rho_t, inst.gamma}; }
};

/// Battery level at every node: starts full, each edge costs rho_t * c and a
/// charged edge returns gamma * c, clamped at capacity. Values may go negative.
inline std::vector<double> energy_profile(std::span<const double> lengths, const ChargePattern& pattern,
                                          const EnergyModel& em) {
    if (static_cast<std::size_t>(pattern.width()) != lengths.size())
        throw StructuralError("pattern width " + std::to_string(pattern.width()) + " does not match " +
                              std::to_string(lengths.size()) + " route edges");
    std::vector<double> trace;
    trace.reserve(lengths.size() + 1);
    double b = em.capacity;
    trace.push_back(b);
    for (std::size_t e = 0; e < lengths.size(); ++e) {
        const double c = lengths[e];
        b -= em.consumption * c;
        if (pattern.test(static_cast<int>(e))) b = std::min(b + em.transfer * c, em.capacity);
        trace.push_back(b);
    }
    return trace;
}

inline std::vector<double> route_energy_profile(const Route& route, const ChargePattern& pattern, const Instance& inst) {
    const auto lengths = route.edge_lengths(inst);
    return energy_profile(lengths, pattern, EnergyModel::of(inst));
}

inline void require_depot_anchored(const Route& route, const Instance& inst, const char* what) {
    if (route.nodes.size() < 2 || route.nodes.front() != inst.depot() || route.nodes.back() != inst.sink())
        throw StructuralError(std::string(what) + " route " + std::to_string(route.vehicle) +
                              " must start at node 0 and end at node n+1");
}

inline double route_distance(const Route& route, const Instance& inst) {
    double d = 0.0;
    for (std::size_t k = 0; k < route.edge_count(); ++k) d += inst.c(route.nodes[k], route.nodes[k + 1]);
    return d;
}

/// Objective: rho_t * MTEV distance + rho_e per used MTEV + rho_c per used MCT.
/// A vehicle counts as used iff its route visits at least one non-depot node.
inline double evaluate_cost(const Solution& sol, const Instance& inst) {
    double distance = 0.0;
    int mtevs = 0;
    int mcts = 0;
    for (const auto& r : sol.mtev_routes) {
        require_depot_anchored(r.route, inst, "MTEV");
        distance += route_distance(r.route, inst);
        mtevs += r.route.serves_customers() ? 1 : 0;
    }
    for (const auto& r : sol.mct_routes) {
        require_depot_anchored(r.route, inst, "MCT");
        mcts += r.route.serves_customers() ? 1 : 0;
    }
    return inst.rho_t * distance + inst.rho_e * mtevs + inst.rho_c * mcts;
}

inline ChargePattern realized_pattern(const MtevRoute& r) {
    const int m = static_cast<int>(r.route.edge_count());
    if (m > ChargePattern::kMaxWidth) throw StructuralError("route too long for a charge pattern");
    ChargePattern p(m);
    for (int k = 0; k < m && k < static_cast<int>(r.charger.size()); ++k)
        if (r.charger[static_cast<std::size_t>(k)]) p.set(k);
    return p;
}

inline std::vector<double> mtev_arrivals(const Route& route, const Instance& inst) {
    std::vector<double> t(route.nodes.size(), 0.0);
    for (std::size_t k = 0; k < route.edge_count(); ++k) t[k + 1] = t[k] + inst.c(route.nodes[k], route.nodes[k + 1]);
    return t;
}

namespace detail {

inline std::map<int, std::size_t> index_by_vehicle(const auto& routes) {
    std::map<int, std::size_t> out;
    for (std::size_t i = 0; i < routes.size(); ++i) out.emplace(routes[i].route.vehicle, i);
    return out;
}

// MTEV arrival time at the tail of the served edge, or nullopt when the
// reference does not resolve.
inline std::optional<double> served_tail_time(const Solution& sol, const std::map<int, std::size_t>& mtev_index,
                                              const Service& s, const Instance& inst) {
    auto it = mtev_index.find(s.mtev);
    if (it == mtev_index.end()) return std::nullopt;
    const auto& m = sol.mtev_routes[it->second];
    if (s.edge < 0 || static_cast<std::size_t>(s.edge) >= m.route.edge_count()) return std::nullopt;
    if (m.arrival.size() == m.route.nodes.size()) return m.arrival[static_cast<std::size_t>(s.edge)];
    return mtev_arrivals(m.route, inst)[static_cast<std::size_t>(s.edge)];
}

inline double mct_edge_energy(const Instance& inst, double c, bool charging) {
    return inst.phi * c + ((charging && inst.mct_transfer_depletes) ? inst.gamma * c : 0.0);
}

// Earliest arrivals with waiting at charging tails for the served MTEV.
inline std::vector<double> mct_earliest_arrivals(const MctRoute& r, const Solution& sol,
                                                 const std::map<int, std::size_t>& mtev_index, const Instance& inst) {
    std::vector<double> s(r.route.nodes.size(), 0.0);
    for (std::size_t k = 0; k < r.route.edge_count(); ++k) {
        double depart = s[k];
        if (k < r.serves.size() && r.serves[k]) {
            if (auto t = served_tail_time(sol, mtev_index, *r.serves[k], inst)) depart = std::max(depart, *t);
        }
        s[k + 1] = depart + inst.c(r.route.nodes[k], r.route.nodes[k + 1]);
    }
    return s;
}

} // namespace detail

struct ScheduleOutcome {
    Solution solution;
    FeasibilityReport sync;  // late MCT arrivals found while scheduling
};

/// Earliest-arrival times and battery traces. MTEVs never wait. An MCT waits
/// at the tail of each charging edge until its MTEV arrives and the pair
/// departs together, so lateness is the only possible sync failure.
inline ScheduleOutcome build_schedule(Solution sol, const Instance& inst) {
    ScheduleOutcome out;
    for (auto& r : sol.mtev_routes) {
        require_depot_anchored(r.route, inst, "MTEV");
        r.charger.resize(r.route.edge_count());
        r.arrival = mtev_arrivals(r.route, inst);
        r.battery = route_energy_profile(r.route, realized_pattern(r), inst);
    }
    const auto mtev_index = detail::index_by_vehicle(sol.mtev_routes);
    for (auto& r : sol.mct_routes) {
        require_depot_anchored(r.route, inst, "MCT");
        r.serves.resize(r.route.edge_count());
        r.arrival.assign(r.route.nodes.size(), 0.0);
        r.battery.assign(r.route.nodes.size(), inst.B);
        for (std::size_t k = 0; k < r.route.edge_count(); ++k) {
            const Arc a = r.route.edge(k);
            const double c = inst.c(a.from, a.to);
            double depart = r.arrival[k];
            bool charging = false;
            if (r.serves[k]) {
                if (auto t = detail::served_tail_time(sol, mtev_index, *r.serves[k], inst)) {
                    charging = true;
                    if (r.arrival[k] > *t + kTolerance) {
                        out.sync.add(Family::Sync, "mct " + std::to_string(r.route.vehicle), static_cast<int>(k) + 1,
                                     r.arrival[k] - *t, "MCT reaches charging arc after the MTEV");
                    }
                    depart = std::max(depart, *t);
                }
            }
            r.arrival[k + 1] = depart + c;
            r.battery[k + 1] = r.battery[k] - detail::mct_edge_energy(inst, c, charging);
        }
    }
    sol.total_cost = evaluate_cost(sol, inst);
    out.solution = std::move(sol);
    return out;
}

namespace detail {

inline void check_mtev_structure(const MtevRoute& r, const Instance& inst, FeasibilityReport& rep, bool& ok) {
    const std::string who = "mtev " + std::to_string(r.route.vehicle);
    const auto& nodes = r.route.nodes;
    ok = true;
    if (nodes.size() < 2 || nodes.front() != inst.depot() || nodes.back() != inst.sink()) {
        rep.add(Family::Flow, who, 0, 1.0, "route must start at node 0 and end at node n+1");
        ok = false;
        return;
    }
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        if (!inst.is_customer(nodes[k])) {
            rep.add(Family::Flow, who, static_cast<int>(k), 1.0, "interior node " + std::to_string(nodes[k]) + " is not a customer");
            ok = false;
        }
    }
    if (r.charger.size() != r.route.edge_count()) {
        rep.add(Family::Flow, who, 0, 1.0, "charge assignment list does not match edge count");
        ok = false;
    }
}

inline void check_mct_structure(const MctRoute& r, const Instance& inst, FeasibilityReport& rep, bool& ok) {
    const std::string who = "mct " + std::to_string(r.route.vehicle);
    const auto& nodes = r.route.nodes;
    ok = true;
    if (nodes.size() < 2 || nodes.front() != inst.depot() || nodes.back() != inst.sink()) {
        rep.add(Family::Flow, who, 0, 1.0, "route must start at node 0 and end at node n+1");
        ok = false;
        return;
    }
    for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        if (!inst.is_customer(nodes[k])) {
            rep.add(Family::Flow, who, static_cast<int>(k), 1.0, "interior node " + std::to_string(nodes[k]) + " is not a customer");
            ok = false;
        }
    }
    if (r.serves.size() != r.route.edge_count()) {
        rep.add(Family::Flow, who, 0, 1.0, "service list does not match edge count");
        ok = false;
    }
}

inline void check_times(const Route& route, const std::vector<double>& arrival, const Instance& inst, const std::string& who,
                        FeasibilityReport& rep) {
    if (arrival.size() != route.nodes.size()) {
        rep.add(Family::Timing, who, 0, 1.0, "arrival times missing or wrong length");
        return;
    }
    if (std::abs(arrival[0]) > kTolerance) rep.add(Family::Timing, who, 0, std::abs(arrival[0]), "depot departure time must be 0");
    for (std::size_t k = 0; k < route.edge_count(); ++k) {
        const double need = arrival[k] + inst.c(route.nodes[k], route.nodes[k + 1]);
        if (arrival[k + 1] < need - kTolerance)
            rep.add(Family::Timing, who, static_cast<int>(k) + 1, need - arrival[k + 1], "arrival earlier than travel time allows");
    }
}

inline void compare_trace(const std::vector<double>& recorded, const std::vector<double>& expected, Family fam,
                          const std::string& who, FeasibilityReport& rep) {
    if (recorded.empty()) return;
    if (recorded.size() != expected.size()) {
        rep.add(fam, who, 0, 1.0, "battery trace has wrong length");
        return;
    }
    for (std::size_t k = 0; k < recorded.size(); ++k) {
        if (std::abs(recorded[k] - expected[k]) > kTolerance) {
            rep.add(fam, who, static_cast<int>(k), std::abs(recorded[k] - expected[k]), "recorded battery disagrees with recursion");
            return;
        }
    }
}

} // namespace detail

/// MCT-side checks shared by the full checker and coordination validation:
/// depot structure, timing, co-traversal, synchronization, MCT energy.
inline FeasibilityReport check_mct_side(const Solution& sol, const Instance& inst) {
    FeasibilityReport rep;
    const auto mtev_index = detail::index_by_vehicle(sol.mtev_routes);
    std::map<std::pair<int, int>, int> claimed;  // (mtev id, edge) -> times served

    for (const auto& r : sol.mct_routes) {
        const std::string who = "mct " + std::to_string(r.route.vehicle);
        bool ok = false;
        detail::check_mct_structure(r, inst, rep, ok);
        if (!ok) continue;

        std::vector<double> arrival = r.arrival;
        if (arrival.empty()) arrival = detail::mct_earliest_arrivals(r, sol, mtev_index, inst);
        detail::check_times(r.route, arrival, inst, who, rep);
        const bool timed = arrival.size() == r.route.nodes.size();

        std::vector<double> battery(r.route.nodes.size(), inst.B);
        for (std::size_t k = 0; k < r.route.edge_count(); ++k) {
            const Arc a = r.route.edge(k);
            const double c = inst.c(a.from, a.to);
            bool charging = false;
            if (r.serves[k]) {
                const Service s = *r.serves[k];
                ++claimed[{s.mtev, s.edge}];
                auto it = mtev_index.find(s.mtev);
                const MtevRoute* m = it == mtev_index.end() ? nullptr : &sol.mtev_routes[it->second];
                if (m == nullptr || s.edge < 0 || static_cast<std::size_t>(s.edge) >= m->route.edge_count()) {
                    rep.add(Family::Sync, who, static_cast<int>(k) + 1, 1.0, "charges a nonexistent MTEV edge");
                } else if (!(m->route.edge(static_cast<std::size_t>(s.edge)) == a)) {
                    rep.add(Family::Sync, who, static_cast<int>(k) + 1, 1.0, "charging arc differs from the MTEV's arc");
                } else if (static_cast<std::size_t>(s.edge) >= m->charger.size() || m->charger[static_cast<std::size_t>(s.edge)] != r.route.vehicle) {
                    rep.add(Family::Sync, who, static_cast<int>(k) + 1, 1.0, "MTEV edge is not assigned to this MCT");
                } else {
                    charging = true;
                    if (timed) {
                        const double t = detail::served_tail_time(sol, mtev_index, s, inst).value_or(0.0);
                        if (arrival[k] > t + kTolerance)
                            rep.add(Family::Sync, who, static_cast<int>(k) + 1, arrival[k] - t, "MCT arrives after the MTEV at the charging arc");
                    }
                }
            }
            if (charging && !inst.mct_transfer_depletes && battery[k] < inst.gamma * c - kTolerance)
                rep.add(Family::EnergyMct, who, static_cast<int>(k) + 1, inst.gamma * c - battery[k], "MCT holds less energy than it must transfer");
            battery[k + 1] = battery[k] - detail::mct_edge_energy(inst, c, charging);
            if (battery[k + 1] < -kTolerance)
                rep.add(Family::EnergyMct, who, static_cast<int>(k) + 1, -battery[k + 1], "MCT battery negative");
        }
        detail::compare_trace(r.battery, battery, Family::EnergyMct, who, rep);
    }

    for (const auto& m : sol.mtev_routes) {
        for (std::size_t k = 0; k < m.charger.size(); ++k) {
            if (!m.charger[k]) continue;
            const int times = claimed.count({m.route.vehicle, static_cast<int>(k)}) ? claimed[{m.route.vehicle, static_cast<int>(k)}] : 0;
            if (times == 0)
                rep.add(Family::Sync, "mtev " + std::to_string(m.route.vehicle), static_cast<int>(k) + 1, 1.0,
                        "assigned MCT " + std::to_string(*m.charger[k]) + " does not traverse this arc while charging");
            else if (times > 1)
                rep.add(Family::Sync, "mtev " + std::to_string(m.route.vehicle), static_cast<int>(k) + 1, times,
                        "edge charged more than once");
        }
    }
    return rep;
}

/// Path-wise check of every constraint family. Missing arrival/battery
/// vectors are derived by earliest-arrival scheduling before checking.
inline FeasibilityReport check_feasibility(const Solution& sol, const Instance& inst) {
    FeasibilityReport rep;
    std::vector<int> visits(static_cast<std::size_t>(inst.n) + 2, 0);
    std::map<int, int> ids;
    int used_mtevs = 0;
    int used_mcts = 0;

    for (const auto& r : sol.mtev_routes) {
        const std::string who = "mtev " + std::to_string(r.route.vehicle);
        if (++ids[r.route.vehicle] == 2) rep.add(Family::Usage, who, 0, 1.0, "duplicate MTEV id");
        bool ok = false;
        detail::check_mtev_structure(r, inst, rep, ok);
        for (std::size_t k = 1; k + 1 < r.route.nodes.size(); ++k)
            if (inst.is_customer(r.route.nodes[k])) ++visits[static_cast<std::size_t>(r.route.nodes[k])];
        if (!ok) continue;
        used_mtevs += r.route.serves_customers() ? 1 : 0;

        double load = 0.0;
        for (int v : r.route.nodes) load += inst.demand_of(v);
        if (load > inst.Q + kTolerance) rep.add(Family::Capacity, who, 0, load - inst.Q, "load exceeds Q");

        const auto expected_t = mtev_arrivals(r.route, inst);
        detail::check_times(r.route, r.arrival.empty() ? expected_t : r.arrival, inst, who, rep);

        const auto trace = route_energy_profile(r.route, realized_pattern(r), inst);
        for (std::size_t k = 1; k < trace.size(); ++k) {
            if (trace[k] < -kTolerance) {
                rep.add(Family::EnergyMtev, who, static_cast<int>(k), -trace[k], "MTEV battery negative");
                break;
            }
        }
        detail::compare_trace(r.battery, trace, Family::EnergyMtev, who, rep);
    }
    for (int i = 1; i <= inst.n; ++i) {
        const int v = visits[static_cast<std::size_t>(i)];
        if (v != 1) rep.add(Family::Coverage, "", 0, std::abs(v - 1), "customer " + std::to_string(i) + " visited " + std::to_string(v) + " times");
    }

    std::map<int, int> mct_ids;
    for (const auto& r : sol.mct_routes) {
        if (++mct_ids[r.route.vehicle] == 2) rep.add(Family::Usage, "mct " + std::to_string(r.route.vehicle), 0, 1.0, "duplicate MCT id");
        used_mcts += r.route.serves_customers() ? 1 : 0;
    }
    if (used_mtevs > inst.max_mtev) rep.add(Family::Usage, "", 0, used_mtevs - inst.max_mtev, "more MTEVs than the fleet cap");
    if (used_mcts > inst.max_mct) rep.add(Family::Usage, "", 0, used_mcts - inst.max_mct, "more MCTs than the fleet cap");

    rep.merge(check_mct_side(sol, inst));
    return rep;
}

} // namespace wmc
