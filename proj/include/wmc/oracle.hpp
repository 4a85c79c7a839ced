#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "wmc/bdp.hpp"
#include "wmc/coordination.hpp"
#include "wmc/errors.hpp"
#include "wmc/instance.hpp"
#include "wmc/model.hpp"
#include "wmc/solution.hpp"

namespace wmc {

struct OracleConfig {
    int max_customers = 6;
    int max_mtev = -1;  // -1: take the instance cap
    int max_mct = -1;
    std::uint64_t node_budget = 50'000'000;  // coordination search nodes summed over all routings
};

struct OracleResult {
    bool feasible = false;
    bool certified = false;
    double cost = std::numeric_limits<double>::infinity();
    Solution solution;
    CoordinationPlan plan;
    std::vector<Route> routes;

    std::uint64_t routings = 0;   // sets of ordered routes enumerated
    std::uint64_t evaluated = 0;  // routings that reached coordination
    std::uint64_t combinations = 0;
    std::uint64_t nodes = 0;
};

namespace detail {

class OracleSearch {
public:
    OracleSearch(const Instance& inst, int max_routes, std::uint64_t budget)
        : inst_(inst), dh_(inst), max_routes_(max_routes), budget_(budget) {}

    OracleResult solve() {
        for (int k = 1; k <= std::min(max_routes_, inst_.n); ++k) {
            routes_.clear();
            loads_.clear();
            place(1, k);
        }
        res_.certified = true;
        if (res_.feasible) res_.solution = assemble_solution(res_.routes, res_.plan, inst_);
        return std::move(res_);
    }

private:
    // Customer i joins a new route or any position of an existing one, so
    // every set of customer sequences appears exactly once.
    void place(int i, int k) {
        const int open = static_cast<int>(routes_.size());
        if (i > inst_.n) {
            if (open == k) evaluate();
            return;
        }
        if (open + (inst_.n - i + 1) < k) return;
        const int d = inst_.demand_of(i);
        for (int r = 0; r < open; ++r) {
            if (loads_[static_cast<std::size_t>(r)] + d > inst_.Q + kTolerance) continue;
            const auto ri = static_cast<std::size_t>(r);
            loads_[ri] += d;
            for (std::size_t pos = 0; pos <= routes_[ri].size(); ++pos) {
                routes_[ri].insert(routes_[ri].begin() + static_cast<std::ptrdiff_t>(pos), i);
                place(i + 1, k);
                routes_[ri].erase(routes_[ri].begin() + static_cast<std::ptrdiff_t>(pos));
            }
            loads_[ri] -= d;
        }
        if (open < k && d <= inst_.Q + kTolerance) {
            routes_.push_back({i});
            loads_.push_back(d);
            place(i + 1, k);
            routes_.pop_back();
            loads_.pop_back();
        }
    }

    const BdpResult& patterns(const std::vector<int>& seq) {
        if (auto it = cache_.find(seq); it != cache_.end()) return it->second;
        const auto lengths = make_route(inst_, seq).edge_lengths(inst_);
        return cache_.emplace(seq, brute_force_patterns(lengths, EnergyModel::of(inst_))).first->second;
    }

    void evaluate() {
        ++res_.routings;
        std::vector<Route> routes;
        for (std::size_t l = 0; l < routes_.size(); ++l) routes.push_back(make_route(inst_, routes_[l], static_cast<int>(l)));
        if (routing_cost(routes, inst_) >= res_.cost - kTolerance) return;
        std::vector<BdpResult> results;
        for (const auto& seq : routes_) {
            const auto& r = patterns(seq);
            if (r.patterns.empty()) return;
            results.push_back(r);
        }
        ++res_.evaluated;
        if (res_.nodes >= budget_) throw LimitExceeded("oracle: node budget exhausted");
        CoordinationOptions opts;
        opts.exact_cap = std::numeric_limits<double>::infinity();
        opts.node_budget = budget_ - res_.nodes;
        auto plan = coordinate_exact(routes, results, inst_, dh_, opts);
        res_.nodes += plan.nodes;
        res_.combinations += plan.combinations;
        if (!plan.certified) throw LimitExceeded("oracle: node budget exhausted");
        if (plan.feasible && plan.cost < res_.cost - kTolerance) {
            res_.feasible = true;
            res_.cost = plan.cost;
            res_.plan = std::move(plan);
            res_.routes = std::move(routes);
        }
    }

    const Instance& inst_;
    DeadheadGraph dh_;
    int max_routes_;
    std::uint64_t budget_;
    std::vector<std::vector<int>> routes_;
    std::vector<double> loads_;
    std::map<std::vector<int>, BdpResult> cache_;
    OracleResult res_;
};

} // namespace detail

/// Exhaustive optimum for tiny instances: every set of ordered routes (route
/// count ascending), every minimal charging pattern per route and an exact
/// fleet coordination for each. Refuses rather than truncating.
inline OracleResult solve_exact(const Instance& inst, const OracleConfig& cfg = {}) {
    if (inst.n > cfg.max_customers)
        throw LimitExceeded("oracle: " + std::to_string(inst.n) + " customers exceeds limit " +
                            std::to_string(cfg.max_customers));
    Instance local = inst;
    if (cfg.max_mtev >= 0) local.max_mtev = std::min(local.max_mtev, cfg.max_mtev);
    if (cfg.max_mct >= 0) local.max_mct = std::min(local.max_mct, cfg.max_mct);
    if (inst.n == 0) {
        OracleResult res;
        res.feasible = true;
        res.certified = true;
        res.cost = 0.0;
        return res;
    }
    detail::OracleSearch search(local, local.max_mtev, cfg.node_budget);
    auto res = search.solve();
    if (res.feasible) {
        // report against the caller's instance so ids and caps line up
        res.solution.total_cost = evaluate_cost(res.solution, inst);
    }
    return res;
}

} // namespace wmc
