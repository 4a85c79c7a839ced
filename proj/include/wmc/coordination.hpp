#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "wmc/bdp.hpp"
#include "wmc/errors.hpp"
#include "wmc/instance.hpp"
#include "wmc/model.hpp"
#include "wmc/solution.hpp"

namespace wmc {

/// Shortest MCT deadhead paths. Intermediate nodes are restricted to
/// customers so an MCT never passes through a depot mid-route.
class DeadheadGraph {
public:
    DeadheadGraph() = default;
    explicit DeadheadGraph(const Instance& inst) : size_(inst.node_count()) {
        const auto N = static_cast<std::size_t>(size_);
        dist_.assign(N * N, 0.0);
        next_.assign(N * N, -1);
        for (int i = 0; i < size_; ++i) {
            for (int j = 0; j < size_; ++j) {
                at(dist_, i, j) = inst.c(i, j);
                at(next_, i, j) = j;
            }
        }
        for (int k = 1; k <= inst.n; ++k) {
            for (int i = 0; i < size_; ++i) {
                for (int j = 0; j < size_; ++j) {
                    const double via = at(dist_, i, k) + at(dist_, k, j);
                    if (via < at(dist_, i, j)) {
                        at(dist_, i, j) = via;
                        at(next_, i, j) = at(next_, i, k);
                    }
                }
            }
        }
    }

    double distance(int from, int to) const { return at(dist_, from, to); }

    /// Nodes visited after `from`, ending with `to`; empty when from == to.
    std::vector<int> path(int from, int to) const {
        std::vector<int> out;
        int cur = from;
        while (cur != to) {
            cur = at(next_, cur, to);
            out.push_back(cur);
        }
        return out;
    }

private:
    template <typename T>
    T& at(std::vector<T>& v, int i, int j) const {
        return v[static_cast<std::size_t>(i) * static_cast<std::size_t>(size_) + static_cast<std::size_t>(j)];
    }
    template <typename T>
    const T& at(const std::vector<T>& v, int i, int j) const {
        return v[static_cast<std::size_t>(i) * static_cast<std::size_t>(size_) + static_cast<std::size_t>(j)];
    }

    int size_ = 0;
    std::vector<double> dist_;
    std::vector<int> next_;
};

/// One charging obligation: an MCT must co-travel arc (tail, head) with the
/// MTEV of route `route`, departing at `start`.
struct ChargingDuty {
    int route = 0;  // index into the routes passed to coordination
    int edge = 0;   // 0-based edge along that route
    int tail = 0;
    int head = 0;
    double start = 0.0;
    double length = 0.0;
    double transfer = 0.0;

    double end() const { return start + length; }
};

struct CoordinationOptions {
    double exact_cap = 1e6;                     // max pattern combinations for the exact search
    std::uint64_t node_budget = 2'000'000;      // search nodes before the exact search stops early
    int heuristic_retries = 20;
};

struct CoordinationPlan {
    bool feasible = false;
    std::vector<ChargePattern> choice;       // one pattern per route
    std::vector<ChargingDuty> duties;
    std::vector<std::vector<int>> sequences;  // per MCT, duty indices in service order
    std::vector<MctRoute> tours;              // expanded MCT routes
    int mct_count = 0;
    double deadhead = 0.0;                    // total MCT travel outside charging arcs
    int lower_bound = 0;                      // max pairwise-overlapping duties
    bool certified = false;                   // exhaustive search completed
    double cost = 0.0;                        // full objective for the routes
    std::uint64_t combinations = 0;
    std::uint64_t nodes = 0;
};

inline double routing_cost(const std::vector<Route>& routes, const Instance& inst) {
    double cost = 0.0;
    for (const auto& r : routes) {
        if (!r.serves_customers()) continue;
        cost += inst.rho_t * route_distance(r, inst) + inst.rho_e;
    }
    return cost;
}

/// Duties for the given per-route patterns, sorted by departure time.
inline std::vector<ChargingDuty> duties_for(const std::vector<Route>& routes, const std::vector<ChargePattern>& choice,
                                            const Instance& inst) {
    std::vector<ChargingDuty> out;
    for (std::size_t l = 0; l < routes.size(); ++l) {
        const auto t = mtev_arrivals(routes[l], inst);
        for (int e = 0; e < choice[l].width(); ++e) {
            if (!choice[l].test(e)) continue;
            const Arc a = routes[l].edge(static_cast<std::size_t>(e));
            const double c = inst.c(a.from, a.to);
            out.push_back({static_cast<int>(l), e, a.from, a.to, t[static_cast<std::size_t>(e)], c, inst.gamma * c});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ChargingDuty& a, const ChargingDuty& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.route != b.route) return a.route < b.route;
        return a.edge < b.edge;
    });
    return out;
}

/// Largest set of duties whose half-open intervals [start, end) share a point.
inline int overlap_lower_bound(const std::vector<ChargingDuty>& duties) {
    std::vector<std::pair<double, int>> events;
    events.reserve(duties.size() * 2);
    for (const auto& d : duties) {
        if (d.length <= 0.0) continue;
        events.emplace_back(d.start, +1);
        events.emplace_back(d.end(), -1);
    }
    std::sort(events.begin(), events.end());  // at equal times, ends (-1) sort first
    int cur = 0;
    int best = 0;
    for (const auto& [time, delta] : events) {
        cur += delta;
        best = std::max(best, cur);
    }
    return best;
}

namespace detail {

struct McState {
    int position = 0;
    double free_at = 0.0;
    double battery = 0.0;
    double deadhead = 0.0;  // excludes the final return leg
};

struct Assignment {
    bool feasible = false;
    bool complete = true;
    std::vector<std::vector<int>> sequences;
    int count = 0;
    double deadhead = 0.0;
};

inline bool lex_better(int count, double deadhead, int best_count, double best_deadhead) {
    if (count != best_count) return count < best_count;
    return deadhead < best_deadhead - kTolerance;
}

class DutyChainer {
public:
    DutyChainer(const std::vector<ChargingDuty>& duties, const Instance& inst, const DeadheadGraph& dh)
        : duties_(duties), inst_(inst), dh_(dh) {}

    McState fresh() const { return {inst_.depot(), 0.0, inst_.B, 0.0}; }

    /// State after serving duty d from state st, or nullopt when timing or energy fails.
    std::optional<McState> extend(const McState& st, bool empty, const ChargingDuty& d) const {
        if (!empty && (st.position == inst_.sink() || d.tail == inst_.depot())) return std::nullopt;
        const double leg = dh_.distance(st.position, d.tail);
        if (st.free_at + leg > d.start + kTolerance) return std::nullopt;
        const double at_tail = st.battery - inst_.phi * leg;
        if (!inst_.mct_transfer_depletes && at_tail < d.transfer - kTolerance) return std::nullopt;
        const double after = at_tail - inst_.phi * d.length - (inst_.mct_transfer_depletes ? d.transfer : 0.0);
        if (after - inst_.phi * dh_.distance(d.head, inst_.sink()) < -kTolerance) return std::nullopt;
        return McState{d.head, d.end(), after, st.deadhead + leg};
    }

    double return_leg(const McState& st) const { return dh_.distance(st.position, inst_.sink()); }

    Assignment greedy(double new_vehicle_cost, int* failed_duty) const {
        Assignment out;
        std::vector<McState> states;
        for (std::size_t i = 0; i < duties_.size(); ++i) {
            const auto& d = duties_[i];
            int pick = -1;
            double pick_cost = std::numeric_limits<double>::infinity();
            McState pick_state;
            for (std::size_t m = 0; m < states.size(); ++m) {
                auto next = extend(states[m], false, d);
                if (!next) continue;
                const double delta = (next->deadhead - states[m].deadhead) + return_leg(*next) - return_leg(states[m]);
                if (delta < pick_cost) {
                    pick_cost = delta;
                    pick = static_cast<int>(m);
                    pick_state = *next;
                }
            }
            if (static_cast<int>(states.size()) < inst_.max_mct) {
                if (auto next = extend(fresh(), true, d)) {
                    const double delta = new_vehicle_cost + next->deadhead + return_leg(*next);
                    if (delta < pick_cost) {
                        pick_cost = delta;
                        pick = static_cast<int>(states.size());
                        pick_state = *next;
                    }
                }
            }
            if (pick < 0) {
                if (failed_duty) *failed_duty = static_cast<int>(i);
                return out;
            }
            if (pick == static_cast<int>(states.size())) {
                states.push_back(pick_state);
                out.sequences.emplace_back();
            } else {
                states[static_cast<std::size_t>(pick)] = pick_state;
            }
            out.sequences[static_cast<std::size_t>(pick)].push_back(static_cast<int>(i));
        }
        out.feasible = true;
        out.count = static_cast<int>(states.size());
        for (const auto& st : states) out.deadhead += st.deadhead + return_leg(st);
        return out;
    }

    /// Lexicographic (MCT count, deadhead) minimum by depth-first search over
    /// append-to-existing / open-new decisions in time order. Only solutions
    /// strictly better than (bound_count, bound_deadhead) are returned.
    Assignment exact(int bound_count, double bound_deadhead, std::uint64_t& nodes, std::uint64_t budget) const {
        Assignment best;
        best.count = bound_count;
        best.deadhead = bound_deadhead;
        std::vector<McState> states;
        std::vector<std::vector<int>> seqs;
        bool aborted = false;

        auto dfs = [&](auto&& self, std::size_t i) -> void {
            if (aborted) return;
            if (++nodes > budget) {
                aborted = true;
                return;
            }
            const int count = static_cast<int>(states.size());
            double partial = 0.0;
            for (const auto& st : states) partial += st.deadhead;
            if (!lex_better(count, partial, best.count, best.deadhead)) return;
            if (i == duties_.size()) {
                double total = 0.0;
                for (const auto& st : states) total += st.deadhead + return_leg(st);
                if (lex_better(count, total, best.count, best.deadhead)) {
                    best.feasible = true;
                    best.count = count;
                    best.deadhead = total;
                    best.sequences = seqs;
                }
                return;
            }
            const auto& d = duties_[i];
            for (std::size_t m = 0; m < states.size(); ++m) {
                auto next = extend(states[m], false, d);
                if (!next) continue;
                const McState saved = states[m];
                states[m] = *next;
                seqs[m].push_back(static_cast<int>(i));
                self(self, i + 1);
                seqs[m].pop_back();
                states[m] = saved;
            }
            if (count < inst_.max_mct && count + 1 <= best.count) {
                if (auto next = extend(fresh(), true, d)) {
                    states.push_back(*next);
                    seqs.push_back({static_cast<int>(i)});
                    self(self, i + 1);
                    seqs.pop_back();
                    states.pop_back();
                }
            }
        };
        dfs(dfs, 0);
        best.complete = !aborted;
        return best;
    }

private:
    const std::vector<ChargingDuty>& duties_;
    const Instance& inst_;
    const DeadheadGraph& dh_;
};

inline std::vector<std::vector<PatternEntry>> ordered_options(const std::vector<BdpResult>& results) {
    std::vector<std::vector<PatternEntry>> out;
    out.reserve(results.size());
    for (const auto& r : results) {
        auto opts = r.patterns;
        std::stable_sort(opts.begin(), opts.end(), [](const PatternEntry& a, const PatternEntry& b) {
            const int ca = a.pattern.count(), cb = b.pattern.count();
            return ca != cb ? ca < cb : a.pattern.bits() < b.pattern.bits();
        });
        out.push_back(std::move(opts));
    }
    return out;
}

// Expands duty sequences into MCT routes with deadhead paths, waits and batteries.
inline std::vector<MctRoute> build_tours(const std::vector<Route>& routes, const std::vector<ChargingDuty>& duties,
                                         const std::vector<std::vector<int>>& sequences, const Instance& inst,
                                         const DeadheadGraph& dh) {
    std::vector<MctRoute> tours;
    for (std::size_t m = 0; m < sequences.size(); ++m) {
        MctRoute t;
        t.route.vehicle = static_cast<int>(m);
        t.route.nodes.push_back(inst.depot());
        t.arrival.push_back(0.0);
        t.battery.push_back(inst.B);
        auto travel = [&](int to, std::optional<Service> serves, double depart_not_before) {
            const int from = t.route.nodes.back();
            const double c = inst.c(from, to);
            const double depart = std::max(t.arrival.back(), depart_not_before);
            t.route.nodes.push_back(to);
            t.serves.push_back(serves);
            t.arrival.push_back(depart + c);
            t.battery.push_back(t.battery.back() - detail::mct_edge_energy(inst, c, serves.has_value()));
        };
        for (int idx : sequences[m]) {
            const auto& d = duties[static_cast<std::size_t>(idx)];
            for (int v : dh.path(t.route.nodes.back(), d.tail)) travel(v, std::nullopt, 0.0);
            travel(d.head, Service{routes[static_cast<std::size_t>(d.route)].vehicle, d.edge}, d.start);
        }
        for (int v : dh.path(t.route.nodes.back(), inst.sink())) travel(v, std::nullopt, 0.0);
        tours.push_back(std::move(t));
    }
    return tours;
}

inline void finish_plan(CoordinationPlan& plan, const std::vector<Route>& routes, const Instance& inst, const DeadheadGraph& dh) {
    plan.lower_bound = overlap_lower_bound(plan.duties);
    plan.mct_count = static_cast<int>(plan.sequences.size());
    plan.tours = build_tours(routes, plan.duties, plan.sequences, inst, dh);
    plan.cost = routing_cost(routes, inst) + inst.rho_c * plan.mct_count;
}

} // namespace detail

/// Greedy coordination for large pattern spaces: fewest-charge pattern per
/// route, cheapest-insertion duty assignment, and on failure the failing
/// route moves to its next pattern.
inline CoordinationPlan coordinate_heuristic(const std::vector<Route>& routes, const std::vector<BdpResult>& results,
                                             const Instance& inst, const DeadheadGraph& dh,
                                             const CoordinationOptions& opts = {}) {
    if (routes.size() != results.size()) throw StructuralError("coordination: one pattern set per route required");
    CoordinationPlan plan;
    for (const auto& r : results)
        if (r.patterns.empty()) return plan;
    const auto options = detail::ordered_options(results);
    std::vector<std::size_t> pick(routes.size(), 0);
    for (int attempt = 0; attempt <= opts.heuristic_retries; ++attempt) {
        std::vector<ChargePattern> choice;
        for (std::size_t l = 0; l < routes.size(); ++l) choice.push_back(options[l][pick[l]].pattern);
        auto duties = duties_for(routes, choice, inst);
        detail::DutyChainer chainer(duties, inst, dh);
        int failed = -1;
        auto a = chainer.greedy(inst.rho_c, &failed);
        ++plan.combinations;
        if (a.feasible) {
            plan.feasible = true;
            plan.choice = std::move(choice);
            plan.duties = std::move(duties);
            plan.sequences = std::move(a.sequences);
            plan.deadhead = a.deadhead;
            detail::finish_plan(plan, routes, inst, dh);
            return plan;
        }
        const auto l = static_cast<std::size_t>(duties[static_cast<std::size_t>(failed)].route);
        if (pick[l] + 1 >= options[l].size()) break;
        ++pick[l];
    }
    return plan;
}

/// Exhaustive pattern-combination search with exact duty assignment,
/// minimizing (MCT count, deadhead). Seeded with the heuristic plan, so the
/// result never costs more than coordinate_heuristic.
inline CoordinationPlan coordinate_exact(const std::vector<Route>& routes, const std::vector<BdpResult>& results,
                                         const Instance& inst, const DeadheadGraph& dh, const CoordinationOptions& opts = {}) {
    if (routes.size() != results.size()) throw StructuralError("coordination: one pattern set per route required");
    double product = 1.0;
    for (const auto& r : results) {
        if (r.patterns.empty()) return {};
        product *= static_cast<double>(r.patterns.size());
    }
    if (product > opts.exact_cap) throw LimitExceeded("coordination: pattern combinations exceed exact_cap");

    CoordinationPlan best = coordinate_heuristic(routes, results, inst, dh, opts);
    const auto options = detail::ordered_options(results);
    std::vector<std::vector<double>> times;
    for (const auto& r : routes) times.push_back(mtev_arrivals(r, inst));

    std::uint64_t nodes = 0;
    std::uint64_t combos = 0;
    bool complete = true;
    std::vector<ChargePattern> choice(routes.size());
    std::vector<ChargingDuty> duties;

    auto dfs = [&](auto&& self, std::size_t l) -> void {
        if (!complete) return;
        if (++nodes > opts.node_budget) {
            complete = false;
            return;
        }
        const int lb = overlap_lower_bound(duties);
        if (lb > inst.max_mct) return;
        if (best.feasible && lb > best.mct_count) return;
        if (l == routes.size()) {
            ++combos;
            auto sorted = duties;
            std::stable_sort(sorted.begin(), sorted.end(), [](const ChargingDuty& a, const ChargingDuty& b) {
                if (a.start != b.start) return a.start < b.start;
                if (a.route != b.route) return a.route < b.route;
                return a.edge < b.edge;
            });
            detail::DutyChainer chainer(sorted, inst, dh);
            const int bound = best.feasible ? best.mct_count : inst.max_mct + 1;
            const double bound_dh = best.feasible ? best.deadhead : std::numeric_limits<double>::infinity();
            auto a = chainer.exact(bound, bound_dh, nodes, opts.node_budget);
            if (!a.complete) complete = false;
            if (a.feasible) {
                best.feasible = true;
                best.choice = choice;
                best.duties = std::move(sorted);
                best.sequences = std::move(a.sequences);
                best.deadhead = a.deadhead;
                best.mct_count = a.count;
            }
            return;
        }
        const auto& route = routes[l];
        for (const auto& opt : options[l]) {
            choice[l] = opt.pattern;
            const std::size_t mark = duties.size();
            for (int e = 0; e < opt.pattern.width(); ++e) {
                if (!opt.pattern.test(e)) continue;
                const Arc a = route.edge(static_cast<std::size_t>(e));
                const double c = inst.c(a.from, a.to);
                duties.push_back({static_cast<int>(l), e, a.from, a.to, times[l][static_cast<std::size_t>(e)], c, inst.gamma * c});
            }
            self(self, l + 1);
            duties.resize(mark);
            if (!complete) return;
        }
    };
    dfs(dfs, 0);

    best.combinations += combos;
    best.nodes = nodes;
    best.certified = complete;
    if (best.feasible) detail::finish_plan(best, routes, inst, dh);
    return best;
}

/// Exact search when the combination count fits exact_cap, greedy otherwise.
inline CoordinationPlan coordinate(const std::vector<Route>& routes, const std::vector<BdpResult>& results, const Instance& inst,
                                  const DeadheadGraph& dh, const CoordinationOptions& opts = {}) {
    double product = 1.0;
    for (const auto& r : results) product *= static_cast<double>(std::max<std::size_t>(r.patterns.size(), 1));
    if (product <= opts.exact_cap) return coordinate_exact(routes, results, inst, dh, opts);
    return coordinate_heuristic(routes, results, inst, dh, opts);
}

/// MTEV routes with charger assignments from the plan, plus the plan's MCT tours.
inline Solution assemble_solution(const std::vector<Route>& routes, const CoordinationPlan& plan, const Instance& inst) {
    Solution sol;
    std::map<int, std::size_t> by_vehicle;
    for (std::size_t l = 0; l < routes.size(); ++l) {
        MtevRoute m;
        m.route = routes[l];
        m.charger.assign(routes[l].edge_count(), std::nullopt);
        by_vehicle[routes[l].vehicle] = l;
        sol.mtev_routes.push_back(std::move(m));
    }
    for (const auto& tour : plan.tours) {
        for (const auto& s : tour.serves) {
            if (!s) continue;
            auto it = by_vehicle.find(s->mtev);
            if (it == by_vehicle.end()) throw StructuralError("plan references an unknown MTEV");
            sol.mtev_routes[it->second].charger.at(static_cast<std::size_t>(s->edge)) = tour.route.vehicle;
        }
    }
    sol.mct_routes = plan.tours;
    for (auto& m : sol.mtev_routes) {
        m.arrival = mtev_arrivals(m.route, inst);
        m.battery = route_energy_profile(m.route, realized_pattern(m), inst);
    }
    sol.total_cost = evaluate_cost(sol, inst);
    return sol;
}

/// Re-checks a plan against its routes: one pattern per route, duties equal
/// to the set bits, and MCT structure, co-traversal, timing and energy.
inline FeasibilityReport validate_sync(const CoordinationPlan& plan, const std::vector<Route>& routes, const Instance& inst) {
    FeasibilityReport rep;
    if (plan.choice.size() != routes.size()) {
        rep.add(Family::Sync, "", 0, 1.0, "plan must select exactly one pattern per route");
        return rep;
    }
    std::map<std::pair<int, int>, int> required;
    for (std::size_t l = 0; l < routes.size(); ++l) {
        if (plan.choice[l].width() != static_cast<int>(routes[l].edge_count())) {
            rep.add(Family::Sync, "mtev " + std::to_string(routes[l].vehicle), 0, 1.0, "pattern width differs from route");
            continue;
        }
        for (int e = 0; e < plan.choice[l].width(); ++e)
            if (plan.choice[l].test(e)) required[{routes[l].vehicle, e}] = 0;
    }
    for (const auto& tour : plan.tours) {
        for (std::size_t k = 0; k < tour.serves.size(); ++k) {
            if (!tour.serves[k]) continue;
            auto it = required.find({tour.serves[k]->mtev, tour.serves[k]->edge});
            if (it == required.end()) {
                rep.add(Family::Sync, "mct " + std::to_string(tour.route.vehicle), static_cast<int>(k) + 1, 1.0,
                        "charges an edge the selected pattern does not charge");
            } else {
                ++it->second;
            }
        }
    }
    for (const auto& [key, served] : required) {
        if (served != 1)
            rep.add(Family::Sync, "mtev " + std::to_string(key.first), key.second + 1, std::abs(served - 1),
                    "selected charging edge served " + std::to_string(served) + " times");
    }
    if (!rep.pass()) return rep;
    Solution sol;
    try {
        sol = assemble_solution(routes, plan, inst);
    } catch (const std::exception& e) {
        rep.add(Family::Flow, "", 0, 1.0, e.what());
        return rep;
    }
    rep.merge(check_mct_side(sol, inst));
    int used = 0;
    for (const auto& t : plan.tours) used += t.route.serves_customers() ? 1 : 0;
    if (used > inst.max_mct) rep.add(Family::Usage, "", 0, used - inst.max_mct, "more MCTs than the fleet cap");
    return rep;
}

/// Plan as JSON with a `summary` line of the form `E=<n> C=<n> cost=<v>`.
inline json plan_to_json(const CoordinationPlan& plan, const std::vector<Route>& routes) {
    int used = 0;
    for (const auto& r : routes) used += r.serves_customers() ? 1 : 0;
    json mcts = json::array();
    for (std::size_t m = 0; m < plan.sequences.size(); ++m) {
        json duties = json::array();
        for (int idx : plan.sequences[m]) {
            const auto& d = plan.duties[static_cast<std::size_t>(idx)];
            duties.push_back({{"mtev", routes[static_cast<std::size_t>(d.route)].vehicle},
                              {"edge", d.edge},
                              {"from", d.tail},
                              {"to", d.head},
                              {"start", d.start},
                              {"length", d.length},
                              {"transfer", d.transfer}});
        }
        const auto& tour = plan.tours[m];
        mcts.push_back({{"id", tour.route.vehicle},
                        {"duties", duties},
                        {"nodes", tour.route.nodes},
                        {"arrival", tour.arrival},
                        {"battery", tour.battery}});
    }
    const std::string summary =
        "E=" + std::to_string(used) + " C=" + std::to_string(plan.mct_count) + " cost=" + format_number(plan.cost);
    return {{"summary", summary},
            {"feasible", plan.feasible},
            {"certified", plan.certified},
            {"lower_bound", plan.lower_bound},
            {"deadhead", plan.deadhead},
            {"mcts", mcts}};
}

} // namespace wmc
