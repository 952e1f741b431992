#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "settle/builder.hpp"
#include "settle/common.hpp"
#include "settle/grid.hpp"
#include "settle/rng.hpp"

namespace settle {

struct SimulationPlan {
    Dims dims;
    uint64_t runs = 1;
    uint64_t master_seed = 0;
    unsigned workers = 1;  // advisory; results do not depend on it
};

// Batch summary. Everything is derived from the integer occupancy
// histogram, so two batches with equal histograms serialize identically —
// the worker-count independence guarantee rests on this.
struct DensityStats {
    Dims dims;
    uint64_t runs = 0;
    uint64_t master_seed = 0;
    std::map<uint64_t, uint64_t> histogram;  // occupancy -> run count
    double mean_density = 0.0;
    double std_error = 0.0;  // sample stddev of per-run density / sqrt(runs)
    double p5 = 0.0;         // nearest-rank percentiles of per-run density
    double p95 = 0.0;

    uint64_t min_occupancy() const { return histogram.begin()->first; }
    uint64_t max_occupancy() const { return histogram.rbegin()->first; }
};

namespace detail {

// Nearest-rank percentile over the histogram: the value at the
// ceil(pct/100 * runs)-th smallest run.
inline double percentile_nearest_rank(const std::map<uint64_t, uint64_t>& hist, uint64_t runs,
                                      uint64_t cells, uint64_t pct) {
    uint64_t rank = (pct * runs + 99) / 100;
    if (rank == 0) rank = 1;
    uint64_t seen = 0;
    for (const auto& [k, c] : hist) {
        seen += c;
        if (seen >= rank) return static_cast<double>(k) / static_cast<double>(cells);
    }
    return static_cast<double>(hist.rbegin()->first) / static_cast<double>(cells);
}

inline DensityStats stats_from_histogram(Dims dims, uint64_t runs, uint64_t master_seed,
                                         std::map<uint64_t, uint64_t> hist) {
    DensityStats stats;
    stats.dims = dims;
    stats.runs = runs;
    stats.master_seed = master_seed;
    stats.histogram = std::move(hist);

    const uint64_t cells = dims.cells();
    unsigned __int128 s1 = 0, s2 = 0;  // sums of k and k^2, exact
    for (const auto& [k, c] : stats.histogram) {
        s1 += static_cast<unsigned __int128>(k) * c;
        s2 += static_cast<unsigned __int128>(k) * k * c;
    }
    stats.mean_density = static_cast<double>(s1) /
                         (static_cast<double>(runs) * static_cast<double>(cells));
    if (runs >= 2) {
        // runs * sum(k^2) - (sum k)^2 >= 0 by Cauchy-Schwarz
        unsigned __int128 spread = static_cast<unsigned __int128>(runs) * s2 - s1 * s1;
        stats.std_error =
            std::sqrt(static_cast<double>(spread) /
                      (static_cast<double>(runs) * static_cast<double>(runs) *
                       static_cast<double>(runs - 1))) /
            static_cast<double>(cells);
    }
    stats.p5 = percentile_nearest_rank(stats.histogram, runs, cells, 5);
    stats.p95 = percentile_nearest_rank(stats.histogram, runs, cells, 95);
    return stats;
}

} // namespace detail

// Monte Carlo batch: settlements at per-run seeds derive_seed(master, 0),
// ..., derive_seed(master, runs-1), reduced to density statistics.
// Deterministic in (dims, runs, master_seed) no matter how many workers.
inline DensityStats run_batch(const SimulationPlan& plan) {
    if (plan.runs == 0) throw ContractError("run_batch: runs must be >= 1");
    const uint64_t cells = plan.dims.cells();
    const uint64_t limit = detail::env_budget("SETTLE_RUN_CELL_LIMIT", 1ull << 31);
    if (cells > limit)
        throw ResourceError("run_batch: " + std::to_string(cells) +
                            " lots exceeds the per-run limit of " + std::to_string(limit) +
                            " (raise SETTLE_RUN_CELL_LIMIT to override)");

    unsigned workers = plan.workers == 0 ? 1 : plan.workers;
    if (workers > plan.runs) workers = static_cast<unsigned>(plan.runs);

    std::vector<std::map<uint64_t, uint64_t>> hists(workers);
    auto work = [&](unsigned w) {
        uint64_t lo = plan.runs * w / workers;
        uint64_t hi = plan.runs * (w + 1) / workers;
        auto& h = hists[w];
        for (uint64_t r = lo; r < hi; ++r) {
            Config c = detail::simulate_one_unchecked(plan.dims, derive_seed(plan.master_seed, r));
            ++h[c.occupancy()];
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
        for (unsigned w = 1; w < workers; ++w)
            for (const auto& [k, c] : hists[w]) hists[0][k] += c;
    }
    return detail::stats_from_histogram(plan.dims, plan.runs, plan.master_seed,
                                        std::move(hists[0]));
}

// Master seed for an (m, n) cell of a table or sweep: position-independent,
// so the same cell reproduces bit-identically whatever grid it sits in.
inline uint64_t cell_seed(uint64_t master_seed, Dims dims) {
    return derive_seed(derive_seed(master_seed, dims.m), dims.n);
}

struct TableCell {
    Dims dims;
    bool skipped = false;  // cell exceeded the work budget; never silently absent
    DensityStats stats;
};

struct DensityTable {
    std::vector<uint64_t> ms, ns;
    uint64_t runs = 0;
    uint64_t master_seed = 0;
    std::vector<TableCell> cells;  // row-major over ms x ns

    const TableCell& at(size_t mi, size_t ni) const { return cells[mi * ns.size() + ni]; }
};

// One batch per (m, n) pair. Cells whose work (lots x runs) exceeds the
// budget (default 2e9, override SETTLE_TABLE_CELL_WORK) are skipped with an
// explicit marker instead of erroring, so big tables degrade honestly.
inline DensityTable density_table(const std::vector<uint64_t>& ms, const std::vector<uint64_t>& ns,
                                  uint64_t runs, uint64_t master_seed, unsigned workers = 1) {
    if (ms.empty() || ns.empty()) throw ContractError("density_table: empty dimension list");
    if (runs == 0) throw ContractError("density_table: runs must be >= 1");
    const uint64_t work_budget = detail::env_budget("SETTLE_TABLE_CELL_WORK", 2000000000ull);
    const uint64_t cell_limit = detail::env_budget("SETTLE_RUN_CELL_LIMIT", 1ull << 31);

    DensityTable table;
    table.ms = ms;
    table.ns = ns;
    table.runs = runs;
    table.master_seed = master_seed;
    table.cells.reserve(ms.size() * ns.size());
    for (uint64_t m : ms)
        for (uint64_t n : ns) {
            TableCell cell;
            cell.dims = Dims(m, n);
            unsigned __int128 work =
                static_cast<unsigned __int128>(cell.dims.cells()) * runs;
            if (cell.dims.cells() > cell_limit || work > work_budget) {
                cell.skipped = true;
            } else {
                SimulationPlan plan;
                plan.dims = cell.dims;
                plan.runs = runs;
                plan.master_seed = cell_seed(master_seed, cell.dims);
                plan.workers = workers;
                cell.stats = run_batch(plan);
            }
            table.cells.push_back(std::move(cell));
        }
    return table;
}

enum class FixedSide { M, N };

// Mean and percentile band along one varying dimension, in plot order.
inline std::vector<DensityStats> percentile_band_sweep(FixedSide side, uint64_t fixed_value,
                                                       const std::vector<uint64_t>& varying,
                                                       uint64_t runs, uint64_t master_seed,
                                                       unsigned workers = 1) {
    if (varying.empty()) throw ContractError("percentile_band_sweep: empty sweep list");
    std::vector<DensityStats> out;
    out.reserve(varying.size());
    for (uint64_t v : varying) {
        SimulationPlan plan;
        plan.dims = side == FixedSide::M ? Dims(fixed_value, v) : Dims(v, fixed_value);
        plan.runs = runs;
        plan.master_seed = cell_seed(master_seed, plan.dims);
        plan.workers = workers;
        out.push_back(run_batch(plan));
    }
    return out;
}

// Adjacent-cell comparisons of a density table: are means decreasing along
// every row and every column? An increase larger than twice the combined
// standard error counts as a statistically significant violation.
struct MonotonicityEntry {
    Dims from, to;
    double delta = 0.0;        // mean(to) - mean(from); decreasing means <= 0
    double combined_se = 0.0;  // sqrt(se_from^2 + se_to^2)
    bool significant_increase = false;
};

struct MonotonicityReport {
    std::vector<MonotonicityEntry> entries;
    uint64_t comparisons = 0;
    uint64_t violations = 0;
    bool holds = true;
};

inline MonotonicityReport monotonicity_report(const DensityTable& table) {
    if (table.ms.size() < 2 || table.ns.size() < 2)
        throw ContractError("monotonicity_report: need at least a 2x2 table");
    MonotonicityReport rep;
    auto compare = [&](const TableCell& a, const TableCell& b) {
        if (a.skipped || b.skipped) return;  // nothing to compare
        MonotonicityEntry e;
        e.from = a.dims;
        e.to = b.dims;
        e.delta = b.stats.mean_density - a.stats.mean_density;
        e.combined_se = std::sqrt(a.stats.std_error * a.stats.std_error +
                                  b.stats.std_error * b.stats.std_error);
        e.significant_increase = e.delta > 2.0 * e.combined_se;
        ++rep.comparisons;
        if (e.significant_increase) ++rep.violations;
        rep.entries.push_back(e);
    };
    for (size_t mi = 0; mi < table.ms.size(); ++mi)
        for (size_t ni = 0; ni + 1 < table.ns.size(); ++ni)
            compare(table.at(mi, ni), table.at(mi, ni + 1));
    for (size_t ni = 0; ni < table.ns.size(); ++ni)
        for (size_t mi = 0; mi + 1 < table.ms.size(); ++mi)
            compare(table.at(mi, ni), table.at(mi + 1, ni));
    rep.holds = rep.violations == 0;
    return rep;
}

} // namespace settle
