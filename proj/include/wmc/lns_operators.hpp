#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "wmc/bdp.hpp"
#include "wmc/errors.hpp"
#include "wmc/instance.hpp"
#include "wmc/rng.hpp"

namespace wmc::lns {

/// Customer sequences, depots implied.
using Routes = std::vector<std::vector<int>>;

enum class DestroyOp { Random, Distance, String, Worst, Shaw, Charge };
enum class RepairOp { Random, Greedy, Sequential, Regret2, Regret3, Charge };

inline constexpr int kDestroyCount = 6;
inline constexpr int kRepairCount = 6;

inline const char* op_name(DestroyOp op) {
    static constexpr const char* names[] = {"RR", "DR", "SR", "WR", "ShR", "CR"};
    return names[static_cast<int>(op)];
}
inline const char* op_name(RepairOp op) {
    static constexpr const char* names[] = {"RI", "GI", "SI", "R2I", "R3I", "CI"};
    return names[static_cast<int>(op)];
}

struct OperatorParams {
    double shaw_distance_weight = 0.75;
    double shaw_demand_weight = 0.25;
    double shaw_randomness = 6.0;
    double worst_randomness = 3.0;
    int string_min = 2;
    int string_max = 6;
    int bdp_max_edges = 20;
};

struct VectorHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (int x : v) h = (h ^ static_cast<std::uint64_t>(x)) * 0x100000001b3ULL;
        return static_cast<std::size_t>(h);
    }
};

/// Memoized charging-pattern sets keyed by customer sequence.
class PatternCache {
public:
    PatternCache(const Instance& inst, int max_edges) : inst_(inst), opts_{max_edges, TableMode::Rolling} {}

    const BdpResult& get(const std::vector<int>& customers) {
        if (auto it = cache_.find(customers); it != cache_.end()) return it->second;
        if (cache_.size() > 200'000) cache_.clear();
        return cache_.emplace(customers, enumerate_patterns(make_route(inst_, customers), inst_, opts_)).first->second;
    }

private:
    const Instance& inst_;
    BdpOptions opts_;
    std::unordered_map<std::vector<int>, BdpResult, VectorHash> cache_;
};

inline double sequence_distance(const std::vector<int>& r, const Instance& inst) {
    if (r.empty()) return 0.0;
    double d = inst.c(inst.depot(), r.front()) + inst.c(r.back(), inst.sink());
    for (std::size_t k = 0; k + 1 < r.size(); ++k) d += inst.c(r[k], r[k + 1]);
    return d;
}

inline int sequence_load(const std::vector<int>& r, const Instance& inst) {
    int load = 0;
    for (int u : r) load += inst.demand_of(u);
    return load;
}

/// Distance saved by removing the customer at position pos.
inline double detour(const std::vector<int>& r, std::size_t pos, const Instance& inst) {
    const int prev = pos == 0 ? inst.depot() : r[pos - 1];
    const int next = pos + 1 == r.size() ? inst.sink() : r[pos + 1];
    const int u = r[pos];
    return inst.c(prev, u) + inst.c(u, next) - inst.c(prev, next);
}

struct Removal {
    Routes routes;
    std::vector<int> removed;
};

namespace detail {

inline void erase_customer(Routes& routes, int u) {
    for (auto& r : routes) {
        auto it = std::find(r.begin(), r.end(), u);
        if (it != r.end()) {
            r.erase(it);
            return;
        }
    }
}

inline void drop_empty(Routes& routes) {
    routes.erase(std::remove_if(routes.begin(), routes.end(), [](const auto& r) { return r.empty(); }), routes.end());
}

inline std::vector<int> all_customers(const Routes& routes) {
    std::vector<int> out;
    for (const auto& r : routes) out.insert(out.end(), r.begin(), r.end());
    std::sort(out.begin(), out.end());
    return out;
}

struct Scored {
    double score;
    int customer;
};

// Highest score first, ties to the lower customer id.
inline void sort_desc(std::vector<Scored>& v) {
    std::sort(v.begin(), v.end(), [](const Scored& a, const Scored& b) {
        return a.score != b.score ? a.score > b.score : a.customer < b.customer;
    });
}

inline std::size_t biased_index(Rng& rng, std::size_t size, double power) {
    const double y = rng.uniform01();
    return std::min(size - 1, static_cast<std::size_t>(std::floor(std::pow(y, power) * static_cast<double>(size))));
}

} // namespace detail

/// Removes k customers following the named rule; empty routes are dropped.
inline Removal destroy(DestroyOp op, const Routes& routes, const Instance& inst, Rng& rng, int k,
                       const OperatorParams& params = {}) {
    Removal out{routes, {}};
    const auto customers = detail::all_customers(routes);
    k = std::min<int>(k, static_cast<int>(customers.size()));
    if (k <= 0) return out;
    auto take = [&](int u) {
        detail::erase_customer(out.routes, u);
        out.removed.push_back(u);
    };

    switch (op) {
        case DestroyOp::Random: {
            auto pool = customers;
            rng.shuffle(pool);
            for (int i = 0; i < k; ++i) take(pool[static_cast<std::size_t>(i)]);
            break;
        }
        case DestroyOp::Distance:
        case DestroyOp::Worst:
        case DestroyOp::Charge: {
            for (int step = 0; step < k; ++step) {
                std::vector<detail::Scored> cand;
                bool over_capacity_only = false;
                if (op == DestroyOp::Charge) {
                    for (const auto& r : out.routes)
                        if (inst.rho_t * sequence_distance(r, inst) > inst.P + kTolerance) over_capacity_only = true;
                }
                for (const auto& r : out.routes) {
                    if (over_capacity_only && inst.rho_t * sequence_distance(r, inst) <= inst.P + kTolerance) continue;
                    for (std::size_t pos = 0; pos < r.size(); ++pos) {
                        double s = detour(r, pos, inst);
                        if (op == DestroyOp::Worst) s = inst.rho_t * s + (r.size() == 1 ? inst.rho_e : 0.0);
                        if (op == DestroyOp::Charge) s *= inst.rho_t;
                        cand.push_back({s, r[pos]});
                    }
                }
                detail::sort_desc(cand);
                const std::size_t pick = op == DestroyOp::Worst ? detail::biased_index(rng, cand.size(), params.worst_randomness) : 0;
                take(cand[pick].customer);
            }
            break;
        }
        case DestroyOp::String: {
            while (static_cast<int>(out.removed.size()) < k) {
                std::vector<std::size_t> nonempty;
                for (std::size_t i = 0; i < out.routes.size(); ++i)
                    if (!out.routes[i].empty()) nonempty.push_back(i);
                auto& r = out.routes[nonempty[rng.index(nonempty.size())]];
                const int size = static_cast<int>(r.size());
                const int hi = std::min(params.string_max, size);
                const int lo = std::min(params.string_min, hi);
                int len = static_cast<int>(rng.uniform_int(lo, hi));
                len = std::min(len, k - static_cast<int>(out.removed.size()));
                const auto start = static_cast<std::size_t>(rng.uniform_int(0, size - len));
                std::vector<int> seg(r.begin() + static_cast<std::ptrdiff_t>(start), r.begin() + static_cast<std::ptrdiff_t>(start) + len);
                r.erase(r.begin() + static_cast<std::ptrdiff_t>(start), r.begin() + static_cast<std::ptrdiff_t>(start) + len);
                out.removed.insert(out.removed.end(), seg.begin(), seg.end());
            }
            break;
        }
        case DestroyOp::Shaw: {
            double cmin = std::numeric_limits<double>::infinity(), cmax = -cmin;
            int dmin = std::numeric_limits<int>::max(), dmax = std::numeric_limits<int>::min();
            for (int u = 1; u <= inst.n; ++u) {
                dmin = std::min(dmin, inst.demand_of(u));
                dmax = std::max(dmax, inst.demand_of(u));
                for (int v = u + 1; v <= inst.n; ++v) {
                    cmin = std::min(cmin, inst.c(u, v));
                    cmax = std::max(cmax, inst.c(u, v));
                }
            }
            const double crange = cmax > cmin ? cmax - cmin : 1.0;
            const double drange = dmax > dmin ? static_cast<double>(dmax - dmin) : 1.0;
            auto related = [&](int u, int v) {
                return params.shaw_distance_weight * (inst.c(u, v) - cmin) / crange +
                       params.shaw_demand_weight * std::abs(inst.demand_of(u) - inst.demand_of(v)) / drange;
            };
            take(customers[rng.index(customers.size())]);
            while (static_cast<int>(out.removed.size()) < k) {
                const int ref = out.removed[rng.index(out.removed.size())];
                std::vector<detail::Scored> cand;
                for (const auto& r : out.routes)
                    for (int v : r) cand.push_back({-related(ref, v), v});
                detail::sort_desc(cand);  // most related first
                take(cand[detail::biased_index(rng, cand.size(), params.shaw_randomness)].customer);
            }
            break;
        }
    }
    detail::drop_empty(out.routes);
    return out;
}

struct Insertion {
    double cost = 0.0;
    int route = -1;  // -1 opens a new route
    std::size_t pos = 0;
};

namespace detail {

inline double insertion_delta(const std::vector<int>& r, std::size_t pos, int u, const Instance& inst) {
    const int prev = pos == 0 ? inst.depot() : r[pos - 1];
    const int next = pos == r.size() ? inst.sink() : r[pos];
    return inst.c(prev, u) + inst.c(u, next) - inst.c(prev, next);
}

inline bool keeps_charge_count(const std::vector<int>& before, const std::vector<int>& after, const Instance& inst,
                               PatternCache& cache) {
    if (inst.rho_t * sequence_distance(after, inst) <= inst.P + kTolerance) return true;
    if (inst.rho_t * sequence_distance(before, inst) <= inst.P + kTolerance) return false;
    const auto& old_res = cache.get(before);
    const auto& new_res = cache.get(after);
    if (!new_res.feasible()) return false;
    return !old_res.feasible() || new_res.min_charges() <= old_res.min_charges();
}

} // namespace detail

/// Best insertion per route plus the new-route option, cheapest first.
/// With `charge_aware`, a route only qualifies if its fewest-charge pattern
/// does not grow.
inline std::vector<Insertion> insertion_options(int u, const Routes& routes, const Instance& inst, bool charge_aware,
                                                PatternCache* cache) {
    std::vector<Insertion> out;
    const int d = inst.demand_of(u);
    for (std::size_t i = 0; i < routes.size(); ++i) {
        const auto& r = routes[i];
        if (sequence_load(r, inst) + d > inst.Q + kTolerance) continue;
        Insertion best{std::numeric_limits<double>::infinity(), static_cast<int>(i), 0};
        for (std::size_t pos = 0; pos <= r.size(); ++pos) {
            const double delta = inst.rho_t * detail::insertion_delta(r, pos, u, inst);
            if (delta >= best.cost) continue;
            if (charge_aware) {
                auto after = r;
                after.insert(after.begin() + static_cast<std::ptrdiff_t>(pos), u);
                if (!detail::keeps_charge_count(r, after, inst, *cache)) continue;
            }
            best.cost = delta;
            best.pos = pos;
        }
        if (std::isfinite(best.cost)) out.push_back(best);
    }
    if (static_cast<int>(routes.size()) < inst.max_mtev && d <= inst.Q + kTolerance)
        out.push_back({inst.rho_e + inst.rho_t * (inst.c(inst.depot(), u) + inst.c(u, inst.sink())), -1, 0});
    std::stable_sort(out.begin(), out.end(), [](const Insertion& a, const Insertion& b) { return a.cost < b.cost; });
    return out;
}

inline void apply_insertion(Routes& routes, int u, const Insertion& ins) {
    if (ins.route < 0) {
        routes.push_back({u});
    } else {
        auto& r = routes[static_cast<std::size_t>(ins.route)];
        r.insert(r.begin() + static_cast<std::ptrdiff_t>(ins.pos), u);
    }
}

/// Reinserts every removed customer; nullopt when some customer fits nowhere.
inline std::optional<Routes> repair(RepairOp op, Routes routes, std::vector<int> removed, const Instance& inst, Rng& rng,
                                    PatternCache* cache = nullptr) {
    if (op == RepairOp::Charge && cache == nullptr) throw StructuralError("charge insertion needs a pattern cache");
    switch (op) {
        case RepairOp::Random:
        case RepairOp::Sequential: {
            if (op == RepairOp::Random) rng.shuffle(removed);
            for (int u : removed) {
                auto opts = insertion_options(u, routes, inst, false, nullptr);
                if (opts.empty()) return std::nullopt;
                apply_insertion(routes, u, opts.front());
            }
            return routes;
        }
        case RepairOp::Greedy:
        case RepairOp::Charge: {
            const bool aware = op == RepairOp::Charge;
            while (!removed.empty()) {
                std::size_t pick = 0;
                Insertion best{std::numeric_limits<double>::infinity(), -1, 0};
                for (std::size_t i = 0; i < removed.size(); ++i) {
                    auto opts = insertion_options(removed[i], routes, inst, aware, cache);
                    if (opts.empty()) return std::nullopt;
                    if (opts.front().cost < best.cost) {
                        best = opts.front();
                        pick = i;
                    }
                }
                apply_insertion(routes, removed[pick], best);
                removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(pick));
            }
            return routes;
        }
        case RepairOp::Regret2:
        case RepairOp::Regret3: {
            const std::size_t depth = op == RepairOp::Regret2 ? 2 : 3;
            while (!removed.empty()) {
                std::size_t pick = 0;
                double pick_regret = -1.0;
                Insertion pick_ins;
                for (std::size_t i = 0; i < removed.size(); ++i) {
                    auto opts = insertion_options(removed[i], routes, inst, false, nullptr);
                    if (opts.empty()) return std::nullopt;
                    double regret = 0.0;
                    for (std::size_t h = 1; h < depth; ++h) {
                        if (h >= opts.size()) {
                            regret = std::numeric_limits<double>::infinity();
                            break;
                        }
                        regret += opts[h].cost - opts.front().cost;
                    }
                    const bool better = regret > pick_regret ||
                                        (regret == pick_regret && opts.front().cost < pick_ins.cost);
                    if (better) {
                        pick = i;
                        pick_regret = regret;
                        pick_ins = opts.front();
                    }
                }
                apply_insertion(routes, removed[pick], pick_ins);
                removed.erase(removed.begin() + static_cast<std::ptrdiff_t>(pick));
            }
            return routes;
        }
    }
    return std::nullopt;
}

} // namespace wmc::lns
