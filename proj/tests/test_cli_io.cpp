#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "test_support.hpp"

using namespace wmc;

namespace {

BenchmarkOptions quick_options(int runs, int iterations = 60) {
    BenchmarkOptions o;
    o.runs = runs;
    o.workers = 1;
    o.config.iterations = iterations;
    return o;
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("wmc_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST(Generator, OneCustomerIsThreeNodes) {
    const auto inst = generate_instance(1, 9);
    EXPECT_EQ(inst.node_count(), 3);
    EXPECT_EQ(inst.c(0, 1), inst.c(1, 2));
    EXPECT_EQ(inst.c(0, 2), 0.0);
}

TEST(Generator, SymmetricIntegersInRange) {
    const auto inst = generate_instance(15, 2);
    for (int i = 0; i < inst.node_count(); ++i) {
        for (int j = 0; j < inst.node_count(); ++j) {
            EXPECT_EQ(inst.c(i, j), inst.c(j, i));
            EXPECT_EQ(inst.c(i, j), std::floor(inst.c(i, j)));
            const bool depot_pair = (i == 0 || i == inst.sink()) && (j == 0 || j == inst.sink());
            if (i != j && !depot_pair) {
                EXPECT_GE(inst.c(i, j), 100);
                EXPECT_LE(inst.c(i, j), 1000);
            }
        }
    }
    for (int d : inst.demand) {
        EXPECT_GE(d, 1);
        EXPECT_LE(d, 3);
    }
}

TEST(Generator, DerivedCosts) {
    GeneratorParams gp;
    gp.rho_t = 1.5;
    gp.rho_e = 700;
    const auto j = to_json(generate_instance(4, 1, gp));
    const auto back = instance_from_json(j);
    EXPECT_DOUBLE_EQ(back.gamma, 2 * back.rho_t);
    EXPECT_DOUBLE_EQ(back.rho_c, 2 * back.rho_e);
    EXPECT_DOUBLE_EQ(back.phi, back.rho_t);
    EXPECT_EQ(back.max_mtev, 4);
}

TEST(Generator, SameSeedSameBytes) {
    EXPECT_EQ(to_json(generate_instance(12, 77)).dump(), to_json(generate_instance(12, 77)).dump());
    EXPECT_NE(to_json(generate_instance(12, 77)).dump(), to_json(generate_instance(12, 78)).dump());
}

TEST(Generator, RejectsBadInput) {
    EXPECT_THROW(generate_instance(0, 1), StructuralError);
    GeneratorParams gp;
    gp.dist_min = 500;
    gp.dist_max = 100;
    EXPECT_THROW(generate_instance(3, 1, gp), StructuralError);
}

TEST(InstanceIo, FileRoundTrip) {
    const auto dir = scratch("io");
    const auto inst = generate_instance(6, 3);
    save_instance(inst, (dir / "a.json").string());
    const auto back = load_instance((dir / "a.json").string());
    EXPECT_EQ(to_json(back).dump(), to_json(inst).dump());
    EXPECT_THROW(load_instance((dir / "missing.json").string()), StructuralError);
}

TEST(Benchmark, GapPercent) {
    EXPECT_NEAR(gap_percent(9224, 9259), -0.378, 0.001);
    EXPECT_DOUBLE_EQ(gap_percent(110, 100), 10.0);
}

TEST(Benchmark, SingleRunBestEqualsAverage) {
    const auto res = run_benchmark({generate_instance(6, 1)}, quick_options(1));
    ASSERT_EQ(res.size(), 1U);
    EXPECT_EQ(res[0].row.w_best, res[0].row.w_avg);
    EXPECT_EQ(res[0].row.status, "ok");
    EXPECT_TRUE(res[0].report.pass());
}

TEST(Benchmark, BestNotAboveAverage) {
    const auto res = run_benchmark({generate_instance(8, 2), generate_instance(7, 3)}, quick_options(4));
    for (const auto& r : res) {
        EXPECT_LE(r.row.w_best, r.row.w_avg + 1e-9);
        EXPECT_EQ(r.row.completed, 4);
        EXPECT_EQ(r.row.E, r.best.used_mtevs());
        EXPECT_EQ(r.row.C, r.best.used_mcts());
    }
}

TEST(Benchmark, RowsSortedByName) {
    auto a = generate_instance(5, 1), b = generate_instance(5, 2);
    a.name = "zeta";
    b.name = "alpha";
    const auto res = run_benchmark({a, b}, quick_options(1));
    EXPECT_EQ(res[0].row.instance, "alpha");
    EXPECT_EQ(res[1].row.instance, "zeta");
}

TEST(Benchmark, WorkerCountDoesNotChangeResults) {
    const std::vector<Instance> insts = {generate_instance(7, 4), generate_instance(6, 5)};
    auto one = quick_options(3);
    auto many = quick_options(3);
    many.workers = 4;
    const auto a = run_benchmark(insts, one), b = run_benchmark(insts, many);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].row.w_best, b[i].row.w_best);
        EXPECT_EQ(a[i].row.w_avg, b[i].row.w_avg);
    }
}

TEST(Benchmark, InfeasibleInstanceMarked) {
    auto inst = generate_instance(3, 1);
    inst.demand = {1, 20, 1};
    const auto res = run_benchmark({inst}, quick_options(2));
    EXPECT_EQ(res[0].row.status, "infeasible");
    EXPECT_EQ(res[0].row.completed, 0);
    const auto line = to_csv(res[0].row);
    EXPECT_NE(line.find("nan"), std::string::npos);
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "infeasible");
}

TEST(Benchmark, CsvHeaderAndGapColumn) {
    auto opts = quick_options(1);
    auto inst = generate_instance(5, 6);
    opts.references[inst.name] = 1000;
    const auto csv = benchmark_csv(run_benchmark({inst}, opts));
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "instance,W_best,W_avg,E,C,runtime_s,gap_pct,status");
    const auto res = run_benchmark({inst}, opts);
    ASSERT_TRUE(res[0].row.gap.has_value());
    EXPECT_DOUBLE_EQ(*res[0].row.gap, gap_percent(res[0].row.w_best, 1000));
}

TEST(Benchmark, ReferenceFile) {
    const auto dir = scratch("ref");
    std::ofstream(dir / "ref.csv") << "instance,reference\r\n4A,6173\n\n12C,9259.5\n";
    const auto refs = load_references((dir / "ref.csv").string());
    EXPECT_EQ(refs.size(), 2U);
    EXPECT_DOUBLE_EQ(refs.at("4A"), 6173);
    EXPECT_DOUBLE_EQ(refs.at("12C"), 9259.5);
    std::ofstream(dir / "bad.csv") << "4A,lots\n";
    EXPECT_THROW(load_references((dir / "bad.csv").string()), StructuralError);
    EXPECT_THROW(load_references((dir / "none.csv").string()), StructuralError);
}

TEST(Benchmark, InstanceDirectoryIsSorted) {
    const auto dir = scratch("dir");
    save_instance(generate_instance(3, 2), (dir / "b.json").string());
    save_instance(generate_instance(4, 1), (dir / "a.json").string());
    std::ofstream(dir / "notes.txt") << "ignored\n";
    const auto insts = load_instance_dir(dir.string());
    ASSERT_EQ(insts.size(), 2U);
    EXPECT_EQ(insts[0].n, 4);
    EXPECT_THROW(load_instance_dir((dir / "nope").string()), StructuralError);
}

TEST(Sweep, SingleValueMatchesBenchmark) {
    const auto inst = generate_instance(6, 11);
    SweepSpec spec;
    spec.param = SweepParam::P;
    spec.values = {inst.P};
    spec.instances = {inst};
    spec.runs = 2;
    const auto sw = run_sweep(spec, quick_options(99));
    const auto bench = run_benchmark({inst}, quick_options(2));
    ASSERT_EQ(sw.cells.size(), 1U);
    EXPECT_EQ(sw.cells[0].second.row.w_best, bench[0].row.w_best);
    EXPECT_EQ(sw.summary[0].w_best, bench[0].row.w_best);
    EXPECT_EQ(sw.summary[0].instances, 1);
}

TEST(Sweep, ValidationErrors) {
    SweepSpec spec;
    spec.instances = {generate_instance(3, 1)};
    EXPECT_THROW(validate(spec), StructuralError);
    spec.values = {10, 5};
    EXPECT_THROW(validate(spec), StructuralError);
    spec.values = {0, 5};
    EXPECT_THROW(validate(spec), StructuralError);
    spec.values = {5, 5};
    EXPECT_THROW(validate(spec), StructuralError);
    spec.values = {5};
    spec.instances.clear();
    EXPECT_THROW(validate(spec), StructuralError);
    EXPECT_THROW(parse_sweep_param("Q"), StructuralError);
}

TEST(Sweep, ParameterIsApplied) {
    const auto inst = generate_instance(4, 1);
    EXPECT_EQ(with_parameter(inst, SweepParam::P, 123).P, 123);
    EXPECT_EQ(with_parameter(inst, SweepParam::RhoC, 77).rho_c, 77);
    EXPECT_EQ(with_parameter(inst, SweepParam::RhoC, 77).P, inst.P);
}

TEST(Sweep, CsvShapes) {
    SweepSpec spec;
    spec.param = SweepParam::RhoC;
    spec.values = {100, 5000};
    spec.instances = {generate_instance(5, 1), generate_instance(5, 2)};
    spec.runs = 1;
    const auto res = run_sweep(spec, quick_options(1));
    const auto summary = sweep_summary_csv(res);
    const auto cells = sweep_cells_csv(res);
    EXPECT_EQ(summary.substr(0, summary.find('\n')), "value,W_best,E,C");
    EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 3);
    EXPECT_EQ(cells.substr(0, cells.find('\n')), "param,value,instance,W_best,W_avg,E,C,runtime_s,gap_pct,status");
    EXPECT_EQ(std::count(cells.begin(), cells.end(), '\n'), 5);
    EXPECT_NE(cells.find("\nrho_c,5000,"), std::string::npos);
}

TEST(Sweep, FailedCellsLeftOutOfSummary) {
    auto bad = generate_instance(3, 1);
    bad.name = "bad";
    bad.demand = {1, 20, 1};
    SweepSpec spec;
    spec.values = {2000};
    spec.instances = {generate_instance(4, 1), bad};
    spec.runs = 1;
    const auto res = run_sweep(spec, quick_options(1));
    EXPECT_EQ(res.summary[0].instances, 1);
    EXPECT_EQ(res.cells[0].second.row.status, "infeasible");
}

TEST(Format, ShortestNumbers) {
    EXPECT_EQ(format_number(6173), "6173");
    EXPECT_EQ(format_number(0.5), "0.5");
    EXPECT_EQ(format_number(-0.378), "-0.378");
}
