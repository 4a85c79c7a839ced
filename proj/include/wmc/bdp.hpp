#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wmc/errors.hpp"
#include "wmc/instance.hpp"
#include "wmc/model.hpp"
#include "wmc/pattern.hpp"
#include "wmc/solution.hpp"

namespace wmc {

enum class RouteClass { TriviallyFeasibleNoCharge, Infeasible, NeedsBdp };

enum class BdpClass { TriviallyFeasibleNoCharge, Infeasible, Enumerated };

struct PatternEntry {
    ChargePattern pattern;
    double final_battery = 0.0;
};

struct BdpResult {
    BdpClass classification = BdpClass::Infeasible;
    std::vector<PatternEntry> patterns;  // minimal antichain, increasing bitmask order
    bool fallback = false;               // route exceeded max_edges; single greedy pattern

    bool feasible() const { return !patterns.empty(); }
    int min_charges() const {
        int best = std::numeric_limits<int>::max();
        for (const auto& p : patterns) best = std::min(best, p.pattern.count());
        return best;
    }
};

enum class TableMode { Rolling, Full };

struct BdpOptions {
    int max_edges = 20;
    TableMode table = TableMode::Rolling;
};

/// r[e] = energy needed after edge e to finish without charging; r[m-1] = 0.
inline std::vector<double> suffix_requirements(std::span<const double> lengths, const EnergyModel& em) {
    std::vector<double> r(lengths.size(), 0.0);
    double acc = 0.0;
    for (std::size_t e = lengths.size(); e-- > 0;) {
        r[e] = acc;
        acc += em.consumption * lengths[e];
    }
    return r;
}

inline std::vector<double> suffix_requirements(const Route& route, const Instance& inst) {
    const auto lengths = route.edge_lengths(inst);
    return suffix_requirements(lengths, EnergyModel::of(inst));
}

inline bool never_negative(std::span<const double> trace) {
    return std::all_of(trace.begin(), trace.end(), [](double b) { return b >= -kTolerance; });
}

/// Constant/linear-time screening before the search.
inline RouteClass preprocess_route(std::span<const double> lengths, const EnergyModel& em) {
    double total = 0.0;
    for (double c : lengths) total += em.consumption * c;
    if (lengths.size() == 1) return total <= em.capacity + kTolerance ? RouteClass::TriviallyFeasibleNoCharge : RouteClass::Infeasible;
    if (total <= em.capacity + kTolerance) return RouteClass::TriviallyFeasibleNoCharge;
    for (double c : lengths) {
        if ((em.consumption - em.transfer) * c > em.capacity + kTolerance) return RouteClass::Infeasible;
    }
    // Charging every edge dominates every other pattern pointwise.
    if (lengths.size() <= static_cast<std::size_t>(ChargePattern::kMaxWidth)) {
        const auto all = ChargePattern::all(static_cast<int>(lengths.size()));
        if (!never_negative(energy_profile(lengths, all, em))) return RouteClass::Infeasible;
    }
    return RouteClass::NeedsBdp;
}

inline RouteClass preprocess_route(const Route& route, const Instance& inst) {
    const auto lengths = route.edge_lengths(inst);
    return preprocess_route(lengths, EnergyModel::of(inst));
}

namespace detail {

inline std::vector<std::uint64_t> prune_pairwise(std::vector<std::uint64_t> masks) {
    std::sort(masks.begin(), masks.end(), [](std::uint64_t a, std::uint64_t b) {
        const int ca = std::popcount(a), cb = std::popcount(b);
        return ca != cb ? ca < cb : a < b;
    });
    masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
    std::vector<std::uint64_t> kept;
    for (std::uint64_t s : masks) {
        bool dominated = false;
        for (std::uint64_t q : kept) {
            if ((q & s) == q) {
                dominated = true;
                break;
            }
        }
        if (!dominated) kept.push_back(s);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

// Subset-sum sweep: has_subset[S] = some marked T with T subset of S.
inline std::vector<std::uint64_t> prune_sos(const std::vector<std::uint64_t>& masks, int width) {
    const std::size_t size = std::size_t{1} << width;
    std::vector<std::uint8_t> marked(size, 0);
    for (std::uint64_t s : masks) marked[s] = 1;
    std::vector<std::uint8_t> has_subset = marked;
    for (int b = 0; b < width; ++b) {
        const std::uint64_t bit = std::uint64_t{1} << b;
        for (std::size_t s = 0; s < size; ++s)
            if ((s & bit) != 0 && has_subset[s ^ bit]) has_subset[s] = 1;
    }
    std::vector<std::uint64_t> kept;
    for (std::size_t s = 0; s < size; ++s) {
        if (!marked[s]) continue;
        bool minimal = true;
        for (int b = 0; b < width && minimal; ++b) {
            const std::uint64_t bit = std::uint64_t{1} << b;
            if ((s & bit) != 0 && has_subset[s ^ bit]) minimal = false;
        }
        if (minimal) kept.push_back(s);
    }
    return kept;
}

inline std::vector<std::uint64_t> prune_masks(std::vector<std::uint64_t> masks, int width) {
    if (masks.size() > 256 && width <= 24) return prune_sos(masks, width);
    return prune_pairwise(std::move(masks));
}

enum : std::int8_t { kInfeasible = -1, kActive = 0, kTerminal = 1 };

inline std::int8_t mark(double g, double remaining) {
    if (g < -kTolerance) return kInfeasible;
    if (g >= remaining - kTolerance) return kTerminal;
    return kActive;
}

// One table of 2^m entries, overwritten edge by edge. At edge k only states
// whose bits lie below k can be active; the charging child S|bit is written
// before the parent S is overwritten by its no-charging value.
inline std::vector<std::uint64_t> bdp_rolling(std::span<const double> lengths, const EnergyModel& em) {
    const int m = static_cast<int>(lengths.size());
    const std::size_t size = std::size_t{1} << m;
    const auto r = suffix_requirements(lengths, em);
    std::vector<double> g(size, 0.0);
    std::vector<std::int8_t> v(size, kInfeasible);
    g[0] = em.capacity;
    v[0] = kActive;
    for (int k = 0; k < m; ++k) {
        const double cost = em.consumption * lengths[static_cast<std::size_t>(k)];
        const double gain = em.transfer * lengths[static_cast<std::size_t>(k)];
        const std::size_t bit = std::size_t{1} << k;
        const double need = r[static_cast<std::size_t>(k)];
        for (std::size_t s = 0; s < bit; ++s) {
            if (v[s] != kActive) continue;
            const std::size_t child = s | bit;
            g[child] = std::min((g[s] - cost) + gain, em.capacity);
            v[child] = mark(g[child], need);
            g[s] = g[s] - cost;
            v[s] = mark(g[s], need);
        }
    }
    std::vector<std::uint64_t> terminal;
    for (std::size_t s = 0; s < size; ++s)
        if (v[s] == kTerminal) terminal.push_back(s);
    return terminal;
}

// Reference layout: one layer of 2^m entries per edge.
inline std::vector<std::uint64_t> bdp_full_table(std::span<const double> lengths, const EnergyModel& em) {
    const int m = static_cast<int>(lengths.size());
    const std::size_t size = std::size_t{1} << m;
    const auto r = suffix_requirements(lengths, em);
    std::vector<std::vector<double>> f(static_cast<std::size_t>(m) + 1, std::vector<double>(size, 0.0));
    std::vector<std::vector<std::int8_t>> v(static_cast<std::size_t>(m) + 1, std::vector<std::int8_t>(size, kInfeasible));
    f[0][0] = em.capacity;
    v[0][0] = kActive;
    std::vector<std::uint64_t> terminal;
    for (int k = 0; k < m; ++k) {
        const auto layer = static_cast<std::size_t>(k);
        const double cost = em.consumption * lengths[layer];
        const double gain = em.transfer * lengths[layer];
        const std::size_t bit = std::size_t{1} << k;
        for (std::size_t s = 0; s < size; ++s) {
            if (v[layer][s] != kActive) continue;
            f[layer + 1][s | bit] = std::min((f[layer][s] - cost) + gain, em.capacity);
            v[layer + 1][s | bit] = mark(f[layer + 1][s | bit], r[layer]);
            f[layer + 1][s] = f[layer][s] - cost;
            v[layer + 1][s] = mark(f[layer + 1][s], r[layer]);
        }
        for (std::size_t s = 0; s < size; ++s)
            if (v[layer + 1][s] == kTerminal) terminal.push_back(s);
    }
    return terminal;
}

inline BdpResult finalize(const std::vector<std::uint64_t>& masks, std::span<const double> lengths, const EnergyModel& em) {
    const int m = static_cast<int>(lengths.size());
    BdpResult out;
    for (std::uint64_t s : masks) {
        ChargePattern p(m, s);
        const auto trace = energy_profile(lengths, p, em);
        out.patterns.push_back({p, trace.back()});
    }
    out.classification = out.patterns.empty() ? BdpClass::Infeasible : BdpClass::Enumerated;
    return out;
}

// Charge on an edge whenever the battery at its tail cannot finish the route uncharged.
inline BdpResult greedy_pattern(std::span<const double> lengths, const EnergyModel& em) {
    const int m = static_cast<int>(lengths.size());
    if (m > ChargePattern::kMaxWidth) throw StructuralError("route has more edges than a charge pattern can encode");
    const auto r = suffix_requirements(lengths, em);
    ChargePattern p(m);
    double b = em.capacity;
    for (int k = 0; k < m; ++k) {
        const double c = lengths[static_cast<std::size_t>(k)];
        const double cost = em.consumption * c;
        if (b < cost + r[static_cast<std::size_t>(k)] - kTolerance) {
            p.set(k);
            b = std::min((b - cost) + em.transfer * c, em.capacity);
        } else {
            b -= cost;
        }
    }
    BdpResult out;
    out.fallback = true;
    const auto trace = energy_profile(lengths, p, em);
    if (never_negative(trace)) {
        out.classification = BdpClass::Enumerated;
        out.patterns.push_back({p, trace.back()});
    }
    return out;
}

} // namespace detail

/// Removes strict supersets and duplicates; output is in increasing bitmask order.
inline std::vector<ChargePattern> prune_supersets(const std::vector<ChargePattern>& patterns) {
    if (patterns.empty()) return {};
    const int width = patterns.front().width();
    std::vector<std::uint64_t> masks;
    masks.reserve(patterns.size());
    for (const auto& p : patterns) {
        if (p.width() != width) throw StructuralError("prune_supersets: mixed pattern widths");
        masks.push_back(p.bits());
    }
    std::vector<ChargePattern> out;
    for (std::uint64_t s : detail::prune_masks(std::move(masks), width)) out.emplace_back(width, s);
    return out;
}

/// Minimal feasible charging patterns for one route.
inline BdpResult enumerate_patterns(std::span<const double> lengths, const EnergyModel& em, const BdpOptions& opts = {}) {
    const int m = static_cast<int>(lengths.size());
    switch (preprocess_route(lengths, em)) {
        case RouteClass::TriviallyFeasibleNoCharge: {
            BdpResult out;
            out.classification = BdpClass::TriviallyFeasibleNoCharge;
            const ChargePattern none(m);
            out.patterns.push_back({none, energy_profile(lengths, none, em).back()});
            return out;
        }
        case RouteClass::Infeasible:
            return BdpResult{};
        case RouteClass::NeedsBdp:
            break;
    }
    if (m > opts.max_edges || m > 30) return detail::greedy_pattern(lengths, em);
    auto terminal = opts.table == TableMode::Rolling ? detail::bdp_rolling(lengths, em) : detail::bdp_full_table(lengths, em);
    return detail::finalize(detail::prune_masks(std::move(terminal), m), lengths, em);
}

inline BdpResult enumerate_patterns(const Route& route, const Instance& inst, const BdpOptions& opts = {}) {
    const auto lengths = route.edge_lengths(inst);
    return enumerate_patterns(lengths, EnergyModel::of(inst), opts);
}

/// Exhaustive replay of all 2^m patterns followed by superset pruning.
/// Exponential; used by the exact solver on short routes.
inline BdpResult brute_force_patterns(std::span<const double> lengths, const EnergyModel& em) {
    const int m = static_cast<int>(lengths.size());
    if (m > 24) throw LimitExceeded("brute-force pattern enumeration limited to 24 edges");
    std::vector<std::uint64_t> feasible;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << m); ++s) {
        if (never_negative(energy_profile(lengths, ChargePattern(m, s), em))) feasible.push_back(s);
    }
    auto out = detail::finalize(detail::prune_masks(std::move(feasible), m), lengths, em);
    if (out.patterns.size() == 1 && out.patterns.front().pattern.none())
        out.classification = BdpClass::TriviallyFeasibleNoCharge;
    return out;
}

/// `<bitstring> <final_battery>` per retained pattern.
inline std::string format_patterns(const BdpResult& result) {
    std::string out;
    for (const auto& p : result.patterns) {
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p.final_battery);
        out += p.pattern.to_string();
        out += ' ';
        out.append(buf, ec == std::errc{} ? end : buf);
        out += '\n';
    }
    return out;
}

} // namespace wmc
