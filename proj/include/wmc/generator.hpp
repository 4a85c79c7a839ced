#pragma once

#include <cstdint>
#include <string>

#include "wmc/errors.hpp"
#include "wmc/instance.hpp"
#include "wmc/rng.hpp"

namespace wmc {

struct GeneratorParams {
    int dist_min = 100;
    int dist_max = 1000;
    int demand_min = 1;
    int demand_max = 3;

    double P = 2000.0;
    double B = 6000.0;
    double Q = 10.0;
    double rho_t = 1.0;
    double rho_e = 1000.0;
    double gamma_factor = 2.0;  // gamma = gamma_factor * rho_t
    double rho_c_factor = 2.0;  // rho_c = rho_c_factor * rho_e
    int max_mtev = -1;          // -1: n
    int max_mct = -1;           // -1: n
};

/// Random symmetric instance. Distances are integers drawn pair by pair in
/// row-major order of the upper triangle over nodes 0..n; node n+1 copies
/// node 0. Demands follow, customer 1 first. phi equals rho_t.
inline Instance generate_instance(int n, std::uint64_t seed, const GeneratorParams& params = {}) {
    if (n < 1) throw StructuralError("generate: n must be >= 1");
    if (params.dist_min < 0 || params.dist_max < params.dist_min || params.demand_min < 1 ||
        params.demand_max < params.demand_min)
        throw StructuralError("generate: bad ranges");
    Rng rng(seed);
    Instance inst;
    inst.name = "gen_n" + std::to_string(n) + "_s" + std::to_string(seed);
    inst.n = n;
    const int N = n + 2;
    inst.dist.assign(static_cast<std::size_t>(N) * static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i <= n; ++i) {
        for (int j = i + 1; j <= n; ++j) {
            const double d = static_cast<double>(rng.uniform_int(params.dist_min, params.dist_max));
            inst.c(i, j) = d;
            inst.c(j, i) = d;
        }
    }
    for (int j = 1; j <= n; ++j) {
        inst.c(inst.sink(), j) = inst.c(0, j);
        inst.c(j, inst.sink()) = inst.c(0, j);
    }
    for (int i = 0; i < n; ++i) inst.demand.push_back(static_cast<int>(rng.uniform_int(params.demand_min, params.demand_max)));

    inst.P = params.P;
    inst.B = params.B;
    inst.Q = params.Q;
    inst.rho_t = params.rho_t;
    inst.phi = params.rho_t;
    inst.gamma = params.gamma_factor * params.rho_t;
    inst.rho_e = params.rho_e;
    inst.rho_c = params.rho_c_factor * params.rho_e;
    inst.max_mtev = params.max_mtev < 0 ? n : params.max_mtev;
    inst.max_mct = params.max_mct < 0 ? n : params.max_mct;
    return inst;
}

} // namespace wmc
