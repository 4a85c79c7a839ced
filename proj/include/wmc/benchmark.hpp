#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "wmc/coordination.hpp"
#include "wmc/errors.hpp"
#include "wmc/instance.hpp"
#include "wmc/lns.hpp"
#include "wmc/model.hpp"
#include "wmc/rng.hpp"
#include "wmc/solution.hpp"

namespace wmc {

struct BenchmarkRow {
    std::string instance;
    double w_best = std::numeric_limits<double>::quiet_NaN();
    double w_avg = std::numeric_limits<double>::quiet_NaN();
    int E = 0;
    int C = 0;
    double runtime = 0.0;  // mean seconds per run
    std::optional<double> gap;  // percent
    int runs = 0;
    int completed = 0;
    std::string status = "ok";
};

/// A row together with the best run's solution and the checks it passed.
struct BenchmarkResult {
    BenchmarkRow row;
    Solution best;
    std::vector<Route> routes;
    CoordinationPlan plan;
    FeasibilityReport report;
};

struct BenchmarkOptions {
    int runs = 10;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0: hardware concurrency
    lns::LnsConfig config;
    std::map<std::string, double> references;
};

inline double gap_percent(double w_best, double reference) { return (w_best - reference) / reference * 100.0; }

inline std::string benchmark_header() { return "instance,W_best,W_avg,E,C,runtime_s,gap_pct,status"; }

inline std::string to_csv(const BenchmarkRow& r) {
    std::string s = r.instance + ',' + format_number(r.w_best) + ',' + format_number(r.w_avg) + ',' +
                    std::to_string(r.E) + ',' + std::to_string(r.C) + ',' + format_number(r.runtime) + ',';
    if (r.gap) s += format_number(*r.gap);
    s += ',' + r.status;
    return s;
}

inline std::string benchmark_csv(const std::vector<BenchmarkResult>& results) {
    std::string out = benchmark_header() + '\n';
    for (const auto& r : results) out += to_csv(r.row) + '\n';
    return out;
}

/// Reads `instance,reference` lines; a header line is skipped.
inline std::map<std::string, double> load_references(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open reference file: " + path);
    std::map<std::string, double> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw StructuralError("reference file: expected instance,reference");
        const std::string name = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            out[name] = v;
        } catch (const std::exception&) {
            if (out.empty() && name == "instance") continue;
            throw StructuralError("reference file: bad value for " + name);
        }
    }
    return out;
}

inline std::vector<Instance> load_instance_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw StructuralError("not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") paths.push_back(e.path().string());
    }
    std::sort(paths.begin(), paths.end());
    std::vector<Instance> out;
    for (const auto& p : paths) out.push_back(load_instance(p));
    return out;
}

namespace detail {

struct RunOutcome {
    bool ok = false;
    bool infeasible = false;
    std::string error;
    double cost = 0.0;
    double seconds = 0.0;
    Solution solution;
    std::vector<Route> routes;
    CoordinationPlan plan;
};

template <class Job>
void parallel_for(std::size_t count, unsigned workers, Job&& job) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) job(i);
    };
    if (workers <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

inline RunOutcome one_run(const Instance& inst, const lns::LnsConfig& cfg, std::uint64_t seed, int run) {
    RunOutcome out;
    try {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(run));
        auto res = lns::run(inst, cfg, rng);
        out.ok = true;
        out.cost = res.best_cost;
        out.seconds = res.seconds;
        out.routes = lns::to_routes(res.best_candidate.routes, inst);
        out.plan = std::move(res.best_candidate.plan);
        out.solution = std::move(res.best);
    } catch (const InfeasibleError& e) {
        out.infeasible = true;
        out.error = e.what();
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

} // namespace detail

/// Independent seeded LNS runs per instance, spread over a worker pool.
/// Run k of every instance draws from stream (seed, k), so results do not
/// depend on scheduling.
inline std::vector<BenchmarkResult> run_benchmark(const std::vector<Instance>& instances, const BenchmarkOptions& opts) {
    if (opts.runs < 1) throw StructuralError("benchmark: runs must be >= 1");
    const std::size_t runs = static_cast<std::size_t>(opts.runs);
    std::vector<detail::RunOutcome> outcomes(instances.size() * runs);
    detail::parallel_for(outcomes.size(), opts.workers, [&](std::size_t job) {
        outcomes[job] = detail::one_run(instances[job / runs], opts.config, opts.seed, static_cast<int>(job % runs));
    });

    std::vector<BenchmarkResult> results;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& inst = instances[i];
        BenchmarkResult res;
        auto& row = res.row;
        row.instance = inst.name;
        row.runs = opts.runs;
        double sum = 0.0;
        double seconds = 0.0;
        int best = -1;
        bool infeasible = false;
        std::string error;
        for (std::size_t k = 0; k < runs; ++k) {
            const auto& o = outcomes[i * runs + k];
            if (!o.ok) {
                infeasible = infeasible || o.infeasible;
                if (error.empty()) error = o.error;
                continue;
            }
            ++row.completed;
            sum += o.cost;
            seconds += o.seconds;
            if (best < 0 || o.cost < outcomes[i * runs + static_cast<std::size_t>(best)].cost) best = static_cast<int>(k);
        }
        if (best < 0) {
            row.status = infeasible ? "infeasible" : "failed";
        } else {
            auto& o = outcomes[i * runs + static_cast<std::size_t>(best)];
            row.w_best = o.cost;
            row.w_avg = sum / row.completed;
            row.runtime = seconds / row.completed;
            row.E = o.solution.used_mtevs();
            row.C = o.solution.used_mcts();
            if (auto it = opts.references.find(inst.name); it != opts.references.end())
                row.gap = gap_percent(row.w_best, it->second);
            res.report = check_feasibility(o.solution, inst);
            res.report.merge(validate_sync(o.plan, o.routes, inst));
            if (!res.report.pass()) row.status = "violations";
            else if (row.completed < row.runs) row.status = "partial";
            res.best = std::move(o.solution);
            res.routes = std::move(o.routes);
            res.plan = std::move(o.plan);
        }
        if (row.status == "failed" || row.status == "partial") {
            std::string clean;
            for (char ch : error) clean += (ch == ',' || ch == '\n') ? ' ' : ch;
            row.status += ": " + clean;
        }
        results.push_back(std::move(res));
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const BenchmarkResult& a, const BenchmarkResult& b) { return a.row.instance < b.row.instance; });
    return results;
}

enum class SweepParam { P, RhoC };

inline SweepParam parse_sweep_param(const std::string& s) {
    if (s == "P") return SweepParam::P;
    if (s == "rho_c") return SweepParam::RhoC;
    throw StructuralError("sweep: parameter must be P or rho_c");
}

inline const char* sweep_param_name(SweepParam p) { return p == SweepParam::P ? "P" : "rho_c"; }

struct SweepSpec {
    SweepParam param = SweepParam::P;
    std::vector<double> values;
    std::vector<Instance> instances;
    int runs = 10;
};

struct SweepSummary {
    double value = 0.0;
    double w_best = 0.0;  // means over instances with a result
    double E = 0.0;
    double C = 0.0;
    int instances = 0;
};

struct SweepResult {
    SweepParam param = SweepParam::P;
    std::vector<std::pair<double, BenchmarkResult>> cells;
    std::vector<SweepSummary> summary;
};

inline void validate(const SweepSpec& spec) {
    if (spec.values.empty()) throw StructuralError("sweep: no values");
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        if (!(spec.values[i] > 0.0)) throw StructuralError("sweep: values must be positive");
        if (i > 0 && !(spec.values[i] > spec.values[i - 1])) throw StructuralError("sweep: values must strictly increase");
    }
    if (spec.instances.empty()) throw StructuralError("sweep: no instances");
}

inline Instance with_parameter(Instance inst, SweepParam param, double value) {
    if (param == SweepParam::P) inst.P = value;
    else inst.rho_c = value;
    return inst;
}

inline SweepResult run_sweep(const SweepSpec& spec, BenchmarkOptions opts) {
    validate(spec);
    opts.runs = spec.runs;
    SweepResult out;
    out.param = spec.param;
    for (double v : spec.values) {
        std::vector<Instance> cell;
        for (const auto& inst : spec.instances) cell.push_back(with_parameter(inst, spec.param, v));
        auto rows = run_benchmark(cell, opts);
        SweepSummary s;
        s.value = v;
        for (auto& r : rows) {
            if (r.row.completed > 0) {
                s.w_best += r.row.w_best;
                s.E += r.row.E;
                s.C += r.row.C;
                ++s.instances;
            }
            out.cells.emplace_back(v, std::move(r));
        }
        if (s.instances > 0) {
            s.w_best /= s.instances;
            s.E /= s.instances;
            s.C /= s.instances;
        }
        out.summary.push_back(s);
    }
    return out;
}

inline std::string sweep_cells_csv(const SweepResult& res) {
    std::string out = "param,value," + benchmark_header() + '\n';
    for (const auto& [v, r] : res.cells) out += std::string(sweep_param_name(res.param)) + ',' + format_number(v) + ',' + to_csv(r.row) + '\n';
    return out;
}

inline std::string sweep_summary_csv(const SweepResult& res) {
    std::string out = "value,W_best,E,C\n";
    for (const auto& s : res.summary)
        out += format_number(s.value) + ',' + format_number(s.w_best) + ',' + format_number(s.E) + ',' + format_number(s.C) + '\n';
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw StructuralError("cannot write file: " + path);
    out << text;
}

} // namespace wmc
