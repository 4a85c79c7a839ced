#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <unordered_map>
#include <string>
#include <vector>

#include "wmc/bdp.hpp"
#include "wmc/coordination.hpp"
#include "wmc/errors.hpp"
#include "wmc/instance.hpp"
#include "wmc/lns_operators.hpp"
#include "wmc/model.hpp"
#include "wmc/rng.hpp"
#include "wmc/solution.hpp"

namespace wmc::lns {

struct LnsConfig {
    int iterations = 5000;
    double time_limit = 0.0;  // seconds; 0 disables the wall-clock cap

    double removal_min_fraction = 0.1;
    double removal_max_fraction = 0.3;

    double score_best = 33.0;
    double score_improved = 9.0;
    double score_accepted = 13.0;
    int segment_length = 100;
    double reaction = 0.5;
    double weight_floor = 1e-6;

    double initial_temperature_factor = 0.05;
    double cooling = 0.9975;

    OperatorParams operators;

    double exact_cap = 1e6;
    std::uint64_t coordination_node_budget = 50'000;

    bool record_log = true;
};

inline json to_json(const LnsConfig& c) {
    return {{"iterations", c.iterations},
            {"time_limit", c.time_limit},
            {"removal_min_fraction", c.removal_min_fraction},
            {"removal_max_fraction", c.removal_max_fraction},
            {"score_best", c.score_best},
            {"score_improved", c.score_improved},
            {"score_accepted", c.score_accepted},
            {"segment_length", c.segment_length},
            {"reaction", c.reaction},
            {"weight_floor", c.weight_floor},
            {"initial_temperature_factor", c.initial_temperature_factor},
            {"cooling", c.cooling},
            {"shaw_distance_weight", c.operators.shaw_distance_weight},
            {"shaw_demand_weight", c.operators.shaw_demand_weight},
            {"shaw_randomness", c.operators.shaw_randomness},
            {"worst_randomness", c.operators.worst_randomness},
            {"string_min", c.operators.string_min},
            {"string_max", c.operators.string_max},
            {"bdp_max_edges", c.operators.bdp_max_edges},
            {"exact_cap", c.exact_cap},
            {"coordination_node_budget", c.coordination_node_budget},
            {"record_log", c.record_log}};
}

/// Unknown keys are rejected so typos do not silently fall back to defaults.
inline LnsConfig config_from_json(const json& j) {
    LnsConfig c;
    const json known = to_json(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw StructuralError("config: unknown key '" + key + "'");
    }
    try {
        c.iterations = j.value("iterations", c.iterations);
        c.time_limit = j.value("time_limit", c.time_limit);
        c.removal_min_fraction = j.value("removal_min_fraction", c.removal_min_fraction);
        c.removal_max_fraction = j.value("removal_max_fraction", c.removal_max_fraction);
        c.score_best = j.value("score_best", c.score_best);
        c.score_improved = j.value("score_improved", c.score_improved);
        c.score_accepted = j.value("score_accepted", c.score_accepted);
        c.segment_length = j.value("segment_length", c.segment_length);
        c.reaction = j.value("reaction", c.reaction);
        c.weight_floor = j.value("weight_floor", c.weight_floor);
        c.initial_temperature_factor = j.value("initial_temperature_factor", c.initial_temperature_factor);
        c.cooling = j.value("cooling", c.cooling);
        c.operators.shaw_distance_weight = j.value("shaw_distance_weight", c.operators.shaw_distance_weight);
        c.operators.shaw_demand_weight = j.value("shaw_demand_weight", c.operators.shaw_demand_weight);
        c.operators.shaw_randomness = j.value("shaw_randomness", c.operators.shaw_randomness);
        c.operators.worst_randomness = j.value("worst_randomness", c.operators.worst_randomness);
        c.operators.string_min = j.value("string_min", c.operators.string_min);
        c.operators.string_max = j.value("string_max", c.operators.string_max);
        c.operators.bdp_max_edges = j.value("bdp_max_edges", c.operators.bdp_max_edges);
        c.exact_cap = j.value("exact_cap", c.exact_cap);
        c.coordination_node_budget = j.value("coordination_node_budget", c.coordination_node_budget);
        c.record_log = j.value("record_log", c.record_log);
    } catch (const json::exception& e) {
        throw StructuralError(std::string("config: ") + e.what());
    }
    if (c.iterations < 0 || c.segment_length < 1 || c.reaction < 0.0 || c.reaction > 1.0 || c.weight_floor <= 0.0 ||
        c.cooling <= 0.0 || c.cooling > 1.0 || c.removal_min_fraction < 0.0 ||
        c.removal_max_fraction < c.removal_min_fraction || c.operators.string_min < 1 ||
        c.operators.string_max < c.operators.string_min)
        throw StructuralError("config: value out of range");
    return c;
}

inline LnsConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw StructuralError(std::string("config parse error: ") + e.what());
    }
    return config_from_json(j);
}

/// Roulette-wheel weights for one operator family.
class OperatorStats {
public:
    explicit OperatorStats(std::size_t count = 0)
        : weights_(count, 1.0), scores_(count, 0.0), uses_(count, 0), total_uses_(count, 0) {}

    std::size_t size() const { return weights_.size(); }
    const std::vector<double>& weights() const { return weights_; }
    double weight(std::size_t op) const { return weights_[op]; }
    double score(std::size_t op) const { return scores_[op]; }
    int uses(std::size_t op) const { return uses_[op]; }
    long total_uses(std::size_t op) const { return total_uses_[op]; }

    std::vector<double> probabilities() const {
        double total = 0.0;
        for (double w : weights_) total += w;
        std::vector<double> p;
        for (double w : weights_) p.push_back(w / total);
        return p;
    }

    std::size_t select(Rng& rng) const { return rng.roulette(weights_); }

    void record(std::size_t op, double score) {
        scores_[op] += score;
        ++uses_[op];
        ++total_uses_[op];
    }

    /// End of segment: w <- (1 - reaction) * w + reaction * score / uses for
    /// operators used in the segment; unused operators keep their weight.
    void update(double reaction, double floor) {
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            if (uses_[i] > 0) weights_[i] = (1.0 - reaction) * weights_[i] + reaction * scores_[i] / uses_[i];
            weights_[i] = std::max(weights_[i], floor);
            scores_[i] = 0.0;
            uses_[i] = 0;
        }
    }

private:
    std::vector<double> weights_;
    std::vector<double> scores_;
    std::vector<int> uses_;
    std::vector<long> total_uses_;
};

struct Candidate {
    Routes routes;
    CoordinationPlan plan;
    double cost = std::numeric_limits<double>::infinity();
    bool feasible = false;
};

inline std::vector<Route> to_routes(const Routes& seqs, const Instance& inst) {
    std::vector<Route> out;
    for (std::size_t i = 0; i < seqs.size(); ++i) out.push_back(make_route(inst, seqs[i], static_cast<int>(i)));
    return out;
}

/// Charging patterns per route plus fleet coordination for a routing.
class Evaluator {
public:
    Evaluator(const Instance& inst, const LnsConfig& cfg)
        : inst_(inst), dh_(inst), cache_(inst, cfg.operators.bdp_max_edges),
          coord_{cfg.exact_cap, cfg.coordination_node_budget, 20} {}

    Candidate evaluate(Routes seqs) {
        detail::drop_empty(seqs);
        std::vector<int> key;
        for (const auto& r : seqs) {
            key.insert(key.end(), r.begin(), r.end());
            key.push_back(-1);
        }
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        if (memo_.size() > kMemoLimit) memo_.clear();
        auto cand = evaluate_uncached(std::move(seqs));
        memo_.emplace(std::move(key), cand);
        return cand;
    }

    Candidate evaluate_uncached(Routes seqs) const {
        Candidate cand;
        cand.routes = std::move(seqs);
        if (static_cast<int>(cand.routes.size()) > inst_.max_mtev) return cand;
        std::vector<BdpResult> results;
        for (const auto& r : cand.routes) {
            if (sequence_load(r, inst_) > inst_.Q + kTolerance) return cand;
            const auto& res = cache_.get(r);
            if (!res.feasible()) return cand;
            results.push_back(res);
        }
        const auto routes = to_routes(cand.routes, inst_);
        cand.plan = coordinate(routes, results, inst_, dh_, coord_);
        if (!cand.plan.feasible) return cand;
        cand.feasible = true;
        cand.cost = cand.plan.cost;
        return cand;
    }

    Solution solution(const Candidate& cand) const {
        return assemble_solution(to_routes(cand.routes, inst_), cand.plan, inst_);
    }

    PatternCache& cache() { return cache_; }
    const DeadheadGraph& deadheads() const { return dh_; }

private:
    static constexpr std::size_t kMemoLimit = 50'000;

    const Instance& inst_;
    DeadheadGraph dh_;
    mutable PatternCache cache_;
    CoordinationOptions coord_;
    std::unordered_map<std::vector<int>, Candidate, VectorHash> memo_;
};

namespace detail {

enum class GrowthRule { ChargingAllowed, NoCharging, Singletons };

inline Routes nearest_neighbor_routes(const Instance& inst, Rng& rng, PatternCache& cache, GrowthRule rule) {
    std::vector<bool> open(static_cast<std::size_t>(inst.n) + 1, true);
    open[0] = false;
    int remaining = inst.n;
    Routes routes;
    while (remaining > 0) {
        std::vector<int> route;
        int pos = inst.depot();
        int load = 0;
        for (;;) {
            if (rule == GrowthRule::Singletons && !route.empty()) break;
            double best = std::numeric_limits<double>::infinity();
            std::vector<int> ties;
            for (int u = 1; u <= inst.n; ++u) {
                if (!open[static_cast<std::size_t>(u)] || load + inst.demand_of(u) > inst.Q + kTolerance) continue;
                const double d = inst.c(pos, u);
                if (d < best) {
                    best = d;
                    ties.assign(1, u);
                } else if (d == best) {
                    ties.push_back(u);
                }
            }
            if (ties.empty()) break;
            const int u = ties[rng.index(ties.size())];
            auto grown = route;
            grown.push_back(u);
            if (!route.empty()) {
                if (rule == GrowthRule::NoCharging && inst.rho_t * sequence_distance(grown, inst) > inst.P + kTolerance) break;
                if (!cache.get(grown).feasible()) break;
            }
            route = std::move(grown);
            open[static_cast<std::size_t>(u)] = false;
            load += inst.demand_of(u);
            --remaining;
            pos = u;
        }
        if (route.empty()) throw InfeasibleError("some customer cannot be served by any single vehicle");
        routes.push_back(std::move(route));
    }
    return routes;
}

} // namespace detail

/// Nearest-neighbour growth from the depot. Falls back to charge-free growth
/// and then to one customer per route when fleet coordination fails.
inline Candidate initial_candidate(const Instance& inst, Rng& rng, Evaluator& eval) {
    using detail::GrowthRule;
    for (GrowthRule rule : {GrowthRule::ChargingAllowed, GrowthRule::NoCharging, GrowthRule::Singletons}) {
        auto cand = eval.evaluate(detail::nearest_neighbor_routes(inst, rng, eval.cache(), rule));
        if (cand.feasible) return cand;
    }
    throw InfeasibleError("no feasible plan even with one customer per route and full charging");
}

inline Solution initial_solution(const Instance& inst, Rng& rng, const LnsConfig& cfg = {}) {
    Evaluator eval(inst, cfg);
    return eval.solution(initial_candidate(inst, rng, eval));
}

struct LogRow {
    int iteration = 0;
    int destroy = -1;
    int repair = -1;
    double incumbent = 0.0;
    double best = 0.0;
    double temperature = 0.0;
};

struct RunResult {
    Solution best;
    Candidate best_candidate;
    double initial_cost = 0.0;
    double best_cost = 0.0;
    int iterations = 0;
    double seconds = 0.0;
    std::vector<LogRow> log;
    OperatorStats destroy_stats{kDestroyCount};
    OperatorStats repair_stats{kRepairCount};
    FeasibilityReport report;
};

inline std::string log_csv(const std::vector<LogRow>& log) {
    std::ostringstream out;
    out.precision(17);
    out << "iteration,destroy,repair,incumbent_cost,best_cost,temperature\n";
    for (const auto& row : log) {
        out << row.iteration << ',' << (row.destroy >= 0 ? op_name(static_cast<DestroyOp>(row.destroy)) : "") << ','
            << (row.repair >= 0 ? op_name(static_cast<RepairOp>(row.repair)) : "") << ',' << row.incumbent << ','
            << row.best << ',' << row.temperature << '\n';
    }
    return out.str();
}

/// Adaptive destroy/repair loop: per-route pattern enumeration and fleet
/// coordination score every candidate; simulated annealing governs the
/// incumbent and the best solution only moves on strict improvement.
inline RunResult run(const Instance& inst, const LnsConfig& cfg, Rng& rng) {
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

    RunResult res;
    Evaluator eval(inst, cfg);
    Candidate incumbent = initial_candidate(inst, rng, eval);
    Candidate best = incumbent;
    res.initial_cost = incumbent.cost;
    double temperature = cfg.initial_temperature_factor * incumbent.cost;
    if (cfg.record_log) res.log.push_back({0, -1, -1, incumbent.cost, best.cost, temperature});

    const int kmin = std::max(1, static_cast<int>(std::floor(cfg.removal_min_fraction * inst.n)));
    const int kmax = std::max({2, kmin, static_cast<int>(std::floor(cfg.removal_max_fraction * inst.n))});

    int it = 0;
    for (it = 1; it <= cfg.iterations && inst.n > 0; ++it) {
        if (cfg.time_limit > 0.0 && elapsed() > cfg.time_limit) {
            --it;
            break;
        }
        const auto d = res.destroy_stats.select(rng);
        const auto r = res.repair_stats.select(rng);
        const int k = static_cast<int>(rng.uniform_int(kmin, kmax));
        auto removal = destroy(static_cast<DestroyOp>(d), incumbent.routes, inst, rng, k, cfg.operators);
        auto repaired = repair(static_cast<RepairOp>(r), std::move(removal.routes), std::move(removal.removed), inst, rng,
                               &eval.cache());
        double score = 0.0;
        if (repaired) {
            Candidate cand = eval.evaluate(std::move(*repaired));
            if (cand.feasible) {
                if (cand.cost < best.cost - kTolerance) {
                    score = cfg.score_best;
                    best = cand;
                    incumbent = std::move(cand);
                } else if (cand.cost < incumbent.cost - kTolerance) {
                    score = cfg.score_improved;
                    incumbent = std::move(cand);
                } else if (temperature > 0.0 && rng.uniform01() < std::exp(-(cand.cost - incumbent.cost) / temperature)) {
                    score = cfg.score_accepted;
                    incumbent = std::move(cand);
                }
            }
        }
        res.destroy_stats.record(d, score);
        res.repair_stats.record(r, score);
        temperature *= cfg.cooling;
        if (cfg.record_log) res.log.push_back({it, static_cast<int>(d), static_cast<int>(r), incumbent.cost, best.cost, temperature});
        if (it % cfg.segment_length == 0) {
            res.destroy_stats.update(cfg.reaction, cfg.weight_floor);
            res.repair_stats.update(cfg.reaction, cfg.weight_floor);
        }
    }
    res.iterations = std::min(it, cfg.iterations);
    res.best = eval.solution(best);
    res.best_cost = best.cost;
    res.best_candidate = std::move(best);
    res.report = check_feasibility(res.best, inst);
    res.seconds = elapsed();
    return res;
}

inline RunResult run(const Instance& inst, const LnsConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    return run(inst, cfg, rng);
}

} // namespace wmc::lns
