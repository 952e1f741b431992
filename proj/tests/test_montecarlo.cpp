#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "settle/enumerate.hpp"
#include "settle/io.hpp"
#include "settle/montecarlo.hpp"

using namespace settle;

namespace {

struct EnvGuard {
    std::string name;
    EnvGuard(const char* n, const char* value) : name(n) { ::setenv(n, value, 1); }
    ~EnvGuard() { ::unsetenv(name.c_str()); }
};

DensityStats run(uint64_t m, uint64_t n, uint64_t runs, uint64_t seed, unsigned workers = 1) {
    SimulationPlan plan;
    plan.dims = Dims(m, n);
    plan.runs = runs;
    plan.master_seed = seed;
    plan.workers = workers;
    return run_batch(plan);
}

std::string stats_bytes(const DensityStats& s) {
    std::ostringstream out;
    write_stats_json(out, s, "");
    return out.str();
}

} // namespace

TEST_CASE("single-row batches are deterministic full fills") {
    DensityStats s = run(1, 100, 10, 4711);
    CHECK(s.mean_density == 1.0);
    CHECK(s.std_error == 0.0);
    CHECK(s.p5 == 1.0);
    CHECK(s.p95 == 1.0);
    CHECK(s.histogram == std::map<uint64_t, uint64_t>{{100, 10}});
    CHECK(s.min_occupancy() == 100);
    CHECK(s.max_occupancy() == 100);
}

TEST_CASE("run_batch validates its plan") {
    CHECK_THROWS_AS(run(3, 3, 0, 1), ContractError);
    EnvGuard guard("SETTLE_RUN_CELL_LIMIT", "100");
    CHECK_THROWS_AS(run(11, 10, 1, 1), ResourceError);
    CHECK_NOTHROW(run(10, 10, 1, 1));
}

TEST_CASE("worker count never changes the result") {
    DensityStats base = run(5, 7, 200, 99, 1);
    std::string want = stats_bytes(base);
    for (unsigned workers : {2u, 4u, 8u}) {
        DensityStats s = run(5, 7, 200, 99, workers);
        CHECK(stats_bytes(s) == want);
    }
}

TEST_CASE("histogram support stays inside the enumerated occupancy range") {
    for (Dims dims : {Dims(3, 3), Dims(5, 6)}) {
        EnumerationResult r = enumerate_maximal(dims, EnumMethod::Backtrack);
        DensityStats s = run(dims.m, dims.n, 2000, 2024);
        CHECK(s.min_occupancy() >= r.min_occupancy());
        CHECK(s.max_occupancy() <= r.max_occupancy());
    }
}

TEST_CASE("standard error scales like one over sqrt(runs)") {
    // Doubling runs should shrink the stderr by about 1/sqrt(2) on average.
    double ratio_sum = 0;
    for (uint64_t rep = 0; rep < 10; ++rep) {
        DensityStats narrow = run(4, 4, 1500, derive_seed(1000, rep));
        DensityStats wide = run(4, 4, 3000, derive_seed(2000, rep));
        ratio_sum += wide.std_error / narrow.std_error;
    }
    double avg = ratio_sum / 10.0;
    CHECK(avg == Catch::Approx(1.0 / std::sqrt(2.0)).margin(0.1));
}

TEST_CASE("nearest-rank percentiles from the histogram") {
    // ten samples: occupancies 1,1,1,2,2,2,3,3,3,3 on a 10-cell grid
    std::map<uint64_t, uint64_t> hist{{1, 3}, {2, 3}, {3, 4}};
    CHECK(detail::percentile_nearest_rank(hist, 10, 10, 5) == 0.1);   // rank 1
    CHECK(detail::percentile_nearest_rank(hist, 10, 10, 50) == 0.2);  // rank 5
    CHECK(detail::percentile_nearest_rank(hist, 10, 10, 95) == 0.3);  // rank 10
    CHECK(detail::percentile_nearest_rank(hist, 10, 10, 100) == 0.3);
}

TEST_CASE("mean and stderr come exactly from the histogram") {
    // two runs at occupancy 2, two at occupancy 4, grid of 8 cells
    std::map<uint64_t, uint64_t> hist{{2, 2}, {4, 2}};
    DensityStats s = detail::stats_from_histogram(Dims(2, 4), 4, 7, hist);
    CHECK(s.mean_density == Catch::Approx(3.0 / 8.0));
    // sample sd of {2,2,4,4} is sqrt(4/3); stderr = sd/sqrt(4)/8
    CHECK(s.std_error == Catch::Approx(std::sqrt(4.0 / 3.0) / 2.0 / 8.0));
    CHECK(s.runs == 4);
    CHECK(s.master_seed == 7);
}

TEST_CASE("density table skips over-budget cells with explicit markers") {
    EnvGuard guard("SETTLE_TABLE_CELL_WORK", "500");
    DensityTable t = density_table({2, 10}, {2, 10}, 50, 11);
    CHECK_FALSE(t.at(0, 0).skipped); // 4 cells * 50 runs = 200
    CHECK(t.at(0, 1).skipped);       // 20 * 50 = 1000 > 500
    CHECK(t.at(1, 0).skipped);
    CHECK(t.at(1, 1).skipped);
    CHECK(t.at(0, 0).stats.runs == 50);
}

TEST_CASE("density table validates inputs") {
    CHECK_THROWS_AS(density_table({}, {2}, 10, 1), ContractError);
    CHECK_THROWS_AS(density_table({2}, {}, 10, 1), ContractError);
    CHECK_THROWS_AS(density_table({2}, {2}, 0, 1), ContractError);
}

TEST_CASE("single-row table cells have unit density") {
    DensityTable t = density_table({1}, {10, 100}, 20, 5);
    CHECK(t.at(0, 0).stats.mean_density == 1.0);
    CHECK(t.at(0, 1).stats.mean_density == 1.0);
    CHECK(t.at(0, 0).stats.std_error == 0.0);
}

TEST_CASE("cell seeding depends on the cell, not its table position") {
    DensityTable wide = density_table({3, 5}, {4}, 60, 31);
    DensityTable narrow = density_table({5}, {4}, 60, 31);
    CHECK(wide.at(1, 0).stats.histogram == narrow.at(0, 0).stats.histogram);
    CHECK(wide.at(1, 0).stats.mean_density == narrow.at(0, 0).stats.mean_density);
    // and it matches a direct batch with the derived seed
    DensityStats direct = run(5, 4, 60, cell_seed(31, Dims(5, 4)));
    CHECK(direct.histogram == narrow.at(0, 0).stats.histogram);
}

TEST_CASE("monotonicity report flags only significant increases") {
    DensityTable t;
    t.ms = {5, 10};
    t.ns = {5, 10};
    t.runs = 100;
    auto cell = [](uint64_t m, uint64_t n, double mean, double se) {
        TableCell c;
        c.dims = Dims(m, n);
        c.stats.dims = c.dims;
        c.stats.mean_density = mean;
        c.stats.std_error = se;
        return c;
    };
    // row-major over ms x ns; a clear increase from (5,5) to (5,10)
    t.cells = {cell(5, 5, 0.70, 0.001), cell(5, 10, 0.75, 0.001),
               cell(10, 5, 0.69, 0.001), cell(10, 10, 0.66, 0.001)};
    MonotonicityReport rep = monotonicity_report(t);
    CHECK(rep.comparisons == 4);
    CHECK(rep.violations == 1);
    CHECK_FALSE(rep.holds);
    bool found = false;
    for (const auto& e : rep.entries)
        if (e.significant_increase) {
            found = true;
            CHECK(e.from == Dims(5, 5));
            CHECK(e.to == Dims(5, 10));
            CHECK(e.delta == Catch::Approx(0.05));
        }
    CHECK(found);

    // an increase inside the noise band is not a violation
    t.cells = {cell(5, 5, 0.70, 0.03), cell(5, 10, 0.75, 0.03),
               cell(10, 5, 0.69, 0.03), cell(10, 10, 0.66, 0.03)};
    CHECK(monotonicity_report(t).holds);

    // skipped cells drop their comparisons instead of faking numbers
    t.cells[1].skipped = true;
    MonotonicityReport rep3 = monotonicity_report(t);
    CHECK(rep3.comparisons == 2);
}

TEST_CASE("monotonicity report needs a real table") {
    DensityTable t = density_table({2}, {2, 3}, 10, 1);
    CHECK_THROWS_AS(monotonicity_report(t), ContractError);
}

TEST_CASE("equal-dims cells give zero deltas") {
    DensityTable t = density_table({2, 2}, {3, 3}, 50, 17);
    MonotonicityReport rep = monotonicity_report(t);
    CHECK(rep.holds);
    for (const auto& e : rep.entries) CHECK(e.delta == 0.0);
}

TEST_CASE("percentile band sweep walks the varying dimension") {
    auto points = percentile_band_sweep(FixedSide::M, 1, {5, 10}, 30, 77);
    REQUIRE(points.size() == 2);
    CHECK(points[0].dims == Dims(1, 5));
    CHECK(points[1].dims == Dims(1, 10));
    for (const auto& s : points) {
        CHECK(s.mean_density == 1.0);
        CHECK(s.p5 == 1.0);
        CHECK(s.p95 == 1.0);
    }
    auto cols = percentile_band_sweep(FixedSide::N, 4, {3}, 30, 77);
    CHECK(cols[0].dims == Dims(3, 4));
    CHECK_THROWS_AS(percentile_band_sweep(FixedSide::M, 3, {}, 10, 1), ContractError);
}

TEST_CASE("stats CSV carries full-precision values and the seed") {
    DensityStats s = run(3, 3, 100, 2718);
    std::ostringstream out;
    write_stats_csv(out, s, "");
    std::string text = out.str();
    CHECK(text.find("# prng=") != std::string::npos);
    CHECK(text.find("master_seed=2718") != std::string::npos);
    CHECK(text.find("m,n,runs,seed,mean,stderr,p5,p95") != std::string::npos);
    std::ostringstream again;
    write_stats_csv(again, run(3, 3, 100, 2718), "");
    CHECK(again.str() == text); // reproducible bytes without a timestamp
}

TEST_CASE("table CSV marks skipped cells") {
    EnvGuard guard("SETTLE_TABLE_CELL_WORK", "500");
    DensityTable t = density_table({2, 10}, {2, 10}, 50, 11);
    std::ostringstream out;
    write_table_csv(out, t, "");
    std::string text = out.str();
    CHECK(text.find("m,n,mean,stderr,skipped") != std::string::npos);
    CHECK(text.find("10,10,,,1") != std::string::npos);
}
