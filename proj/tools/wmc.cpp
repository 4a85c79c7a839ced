#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wmc/wmc.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kInfeasible = 2;
constexpr int kBudget = 3;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw wmc::StructuralError("bad number in list: " + item);
        }
    }
    return out;
}

void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") std::cout << text;
    else wmc::write_text(path, text);
}

std::string summary_line(const wmc::Solution& sol) {
    return "E=" + std::to_string(sol.used_mtevs()) + " C=" + std::to_string(sol.used_mcts()) +
           " cost=" + wmc::format_number(sol.total_cost);
}

wmc::lns::LnsConfig base_config(const std::string& path, std::optional<int> iters, std::optional<double> limit) {
    wmc::lns::LnsConfig cfg = path.empty() ? wmc::lns::LnsConfig{} : wmc::lns::load_config(path);
    if (iters) cfg.iterations = *iters;
    if (limit) cfg.time_limit = *limit;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"WMC-EVRP solver suite"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a random instance");
    int gen_n = 5;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    wmc::GeneratorParams gp;
    gen->add_option("--n", gen_n, "customers")->required();
    gen->add_option("--seed", gen_seed, "seed");
    gen->add_option("--out", gen_out, "output JSON (stdout if omitted)");
    gen->add_option("--P", gp.P, "MTEV battery capacity");
    gen->add_option("--B", gp.B, "MCT battery capacity");
    gen->add_option("--Q", gp.Q, "MTEV load capacity");
    gen->add_option("--rho-e", gp.rho_e, "cost per MTEV");
    gen->add_option("--dist-min", gp.dist_min);
    gen->add_option("--dist-max", gp.dist_max);

    // solve
    auto* solve = app.add_subcommand("solve", "run the LNS solver on one instance");
    std::string solve_instance, solve_out, solve_config, solve_log, solve_plan;
    std::uint64_t solve_seed = 1;
    std::optional<int> solve_iters;
    std::optional<double> solve_limit;
    solve->add_option("--instance", solve_instance)->required();
    solve->add_option("--seed", solve_seed);
    solve->add_option("--iters", solve_iters, "iteration budget");
    solve->add_option("--time-limit", solve_limit, "wall-clock cap in seconds");
    solve->add_option("--config", solve_config, "JSON config");
    solve->add_option("--out", solve_out, "solution JSON (stdout if omitted)");
    solve->add_option("--log", solve_log, "per-iteration CSV log");
    solve->add_option("--plan", solve_plan, "coordination plan JSON");

    // oracle
    auto* oracle = app.add_subcommand("oracle", "exact solve of a tiny instance");
    std::string oracle_instance, oracle_out;
    bool certify = false;
    wmc::OracleConfig ocfg;
    oracle->add_option("--instance", oracle_instance)->required();
    oracle->add_option("--out", oracle_out);
    oracle->add_flag("--certify", certify, "print enumeration counts");
    oracle->add_option("--max-customers", ocfg.max_customers);
    oracle->add_option("--max-mtev", ocfg.max_mtev);
    oracle->add_option("--max-mct", ocfg.max_mct);
    oracle->add_option("--node-budget", ocfg.node_budget);

    // bench
    auto* bench = app.add_subcommand("bench", "multi-run benchmark over a directory of instances");
    std::string bench_dir, bench_ref, bench_out, bench_config, bench_paper;
    wmc::BenchmarkOptions bopts;
    std::optional<int> bench_iters;
    std::optional<double> bench_limit;
    bench->add_option("--dir", bench_dir);
    bench->add_option("--paper-data", bench_paper, "directory of published instances (reference.csv used if present)");
    bench->add_option("--runs", bopts.runs);
    bench->add_option("--ref", bench_ref, "CSV of instance,reference");
    bench->add_option("--out", bench_out);
    bench->add_option("--seed", bopts.seed);
    bench->add_option("--workers", bopts.workers);
    bench->add_option("--iters", bench_iters);
    bench->add_option("--time-limit", bench_limit);
    bench->add_option("--config", bench_config);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "parameter sweep over P or rho_c");
    std::string sweep_param, sweep_values, sweep_dir, sweep_out, sweep_cells, sweep_config;
    wmc::BenchmarkOptions sopts;
    int sweep_runs = 10;
    std::optional<int> sweep_iters;
    std::optional<double> sweep_limit;
    sweep->add_option("--param", sweep_param)->required()->check(CLI::IsMember({"P", "rho_c"}));
    sweep->add_option("--values", sweep_values, "comma-separated increasing values")->required();
    sweep->add_option("--dir", sweep_dir)->required();
    sweep->add_option("--out", sweep_out, "summary CSV (value,W_best,E,C)");
    sweep->add_option("--cells", sweep_cells, "per-instance CSV");
    sweep->add_option("--runs", sweep_runs);
    sweep->add_option("--seed", sopts.seed);
    sweep->add_option("--workers", sopts.workers);
    sweep->add_option("--iters", sweep_iters);
    sweep->add_option("--time-limit", sweep_limit);
    sweep->add_option("--config", sweep_config);

    // bdp
    auto* bdp = app.add_subcommand("bdp", "print the minimal charging patterns of one route");
    std::string bdp_instance, bdp_route;
    bdp->add_option("--instance", bdp_instance)->required();
    bdp->add_option("--route", bdp_route, "comma-separated customers")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            const auto inst = wmc::generate_instance(gen_n, gen_seed, gp);
            emit(gen_out, wmc::to_json(inst).dump(1) + "\n");
            return kOk;
        }
        if (*solve) {
            const auto inst = wmc::load_instance(solve_instance);
            for (const auto& w : wmc::validate(inst)) std::cerr << "warning: " << w << '\n';
            const auto cfg = base_config(solve_config, solve_iters, solve_limit);
            wmc::Rng rng(solve_seed);
            const auto res = wmc::lns::run(inst, cfg, rng);
            emit(solve_out, wmc::to_json(res.best).dump(1) + "\n");
            if (!solve_log.empty()) wmc::write_text(solve_log, wmc::lns::log_csv(res.log));
            if (!solve_plan.empty()) {
                const auto routes = wmc::lns::to_routes(res.best_candidate.routes, inst);
                wmc::write_text(solve_plan, wmc::plan_to_json(res.best_candidate.plan, routes).dump(1) + "\n");
            }
            std::cerr << summary_line(res.best) << " iterations=" << res.iterations << '\n';
            if (!res.report.pass()) {
                std::cerr << res.report.to_string();
                return kInfeasible;
            }
            return kOk;
        }
        if (*oracle) {
            const auto inst = wmc::load_instance(oracle_instance);
            const auto res = wmc::solve_exact(inst, ocfg);
            if (certify) {
                std::cerr << "routings=" << res.routings << " evaluated=" << res.evaluated
                          << " combinations=" << res.combinations << " nodes=" << res.nodes
                          << " certified=" << (res.certified ? "true" : "false") << '\n';
            }
            if (!res.feasible) {
                std::cerr << "infeasible\n";
                return kInfeasible;
            }
            emit(oracle_out, wmc::to_json(res.solution).dump(1) + "\n");
            std::cerr << summary_line(res.solution) << '\n';
            return kOk;
        }
        if (*bench) {
            if (bench_dir.empty() == bench_paper.empty()) throw wmc::StructuralError("bench: give exactly one of --dir, --paper-data");
            const std::string dir = bench_dir.empty() ? bench_paper : bench_dir;
            bopts.config = base_config(bench_config, bench_iters, bench_limit);
            if (!bench_ref.empty()) bopts.references = wmc::load_references(bench_ref);
            else if (!bench_paper.empty() && std::filesystem::exists(dir + "/reference.csv"))
                bopts.references = wmc::load_references(dir + "/reference.csv");
            const auto results = wmc::run_benchmark(wmc::load_instance_dir(dir), bopts);
            emit(bench_out, wmc::benchmark_csv(results));
            bool any_ok = false;
            for (const auto& r : results) any_ok = any_ok || r.row.completed > 0;
            return any_ok ? kOk : kInfeasible;
        }
        if (*sweep) {
            wmc::SweepSpec spec;
            spec.param = wmc::parse_sweep_param(sweep_param);
            spec.values = parse_list(sweep_values);
            spec.instances = wmc::load_instance_dir(sweep_dir);
            spec.runs = sweep_runs;
            sopts.config = base_config(sweep_config, sweep_iters, sweep_limit);
            const auto res = wmc::run_sweep(spec, sopts);
            emit(sweep_out, wmc::sweep_summary_csv(res));
            if (!sweep_cells.empty()) wmc::write_text(sweep_cells, wmc::sweep_cells_csv(res));
            return kOk;
        }
        if (*bdp) {
            const auto inst = wmc::load_instance(bdp_instance);
            std::vector<int> customers;
            for (double v : parse_list(bdp_route)) customers.push_back(static_cast<int>(v));
            const auto route = wmc::make_route(inst, customers);
            const auto res = wmc::enumerate_patterns(route, inst);
            if (res.fallback) std::cerr << "note: greedy fallback pattern (route too long for full enumeration)\n";
            std::cout << wmc::format_patterns(res);
            return res.feasible() ? kOk : kInfeasible;
        }
    } catch (const wmc::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const wmc::LimitExceeded& e) {
        std::cerr << "budget exhausted: " << e.what() << '\n';
        return kBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}
