#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "settle/common.hpp"
#include "settle/grid.hpp"
#include "settle/rng.hpp"

namespace settle {

// An order in which the settlers visit the lots: every lot of the grid
// exactly once. Validated on construction so downstream code can assume
// coverage.
class Permutation {
public:
    Permutation(Dims dims, std::vector<Lot> order) : dims_(dims), order_(std::move(order)) {
        const uint64_t cells = dims_.cells();
        if (order_.size() != cells)
            throw ContractError("Permutation: expected " + std::to_string(cells) +
                                " lots, got " + std::to_string(order_.size()));
        Config seen(dims_);
        for (const Lot& lot : order_) {
            uint64_t p = seen.flat(lot); // bounds-checked
            if (seen.test_flat(p))
                throw ContractError("Permutation: lot (" + std::to_string(lot.i) + "," +
                                    std::to_string(lot.j) + ") repeated");
            seen.set_flat(p);
        }
    }

    const Dims& dims() const { return dims_; }
    const std::vector<Lot>& order() const { return order_; }
    uint64_t size() const { return order_.size(); }
    const Lot& operator[](uint64_t k) const { return order_[k]; }

private:
    Dims dims_;
    std::vector<Lot> order_;
};

// Uniform random visiting order.
inline Permutation sample_permutation(Dims dims, Xoshiro256ss& rng) {
    std::vector<Lot> order;
    order.reserve(dims.cells());
    for (uint32_t i = 1; i <= dims.m; ++i)
        for (uint32_t j = 1; j <= dims.n; ++j) order.push_back(Lot{i, j});
    fisher_yates(order, rng);
    return Permutation(dims, std::move(order));
}

// Reflects the visiting order east-west along with the grid.
inline Permutation mirror_ew(const Permutation& perm) {
    std::vector<Lot> order = perm.order();
    const uint32_t n = perm.dims().n;
    for (Lot& lot : order) lot.j = n + 1 - lot.j;
    return Permutation(perm.dims(), std::move(order));
}

enum class BuildOutcome { Built, Rejected };

// Running state of one sequential settlement. Each lot may be attempted at
// most once; the built set stays permissible throughout.
class BuildState {
public:
    explicit BuildState(Dims dims) : built_(dims), attempted_(dims) {}

    const Config& config() const { return built_; }
    uint64_t step() const { return attempted_.occupancy(); }
    bool attempted(Lot lot) const { return attempted_.test(lot); }
    bool done() const { return step() == built_.dims().cells(); }

    friend BuildOutcome try_build(BuildState& state, Lot lot);

private:
    Config built_;
    Config attempted_;
};

// One settler arrives at `lot` and builds iff the configuration stays
// permissible; otherwise the lot is passed over for good.
inline BuildOutcome try_build(BuildState& state, Lot lot) {
    uint64_t p = state.built_.flat(lot);
    if (state.attempted_.test_flat(p))
        throw ContractError("try_build: lot (" + std::to_string(lot.i) + "," +
                            std::to_string(lot.j) + ") was already attempted");
    state.attempted_.set_flat(p);
    if (detail::can_build_flat(state.built_, p)) {
        state.built_.set_flat(p);
        return BuildOutcome::Built;
    }
    return BuildOutcome::Rejected;
}

struct TraceStep {
    Lot lot;
    BuildOutcome outcome;
    uint64_t occupancy_after;
};

struct BuildTrace {
    std::vector<TraceStep> steps;
    Config final;
};

// The settlement map: fold the whole visiting order through try_build.
// The result is always maximal — a rejected lot stays unbuildable because
// adding houses never unblocks anything.
inline Config build_from_permutation(const Permutation& perm) {
    BuildState state(perm.dims());
    for (const Lot& lot : perm.order()) try_build(state, lot);
    return state.config();
}

inline BuildTrace trace_build(const Permutation& perm) {
    BuildState state(perm.dims());
    BuildTrace trace;
    trace.steps.reserve(perm.size());
    for (const Lot& lot : perm.order()) {
        BuildOutcome out = try_build(state, lot);
        trace.steps.push_back(TraceStep{lot, out, state.config().occupancy()});
    }
    trace.final = state.config();
    return trace;
}

namespace detail {

// Largest grid for which the visiting order is materialized as a shuffled
// index array (2^25 cells = 128 MiB of u32). Above this, memory stays
// within bounds by sampling the order incrementally instead.
inline constexpr uint64_t kShuffleCellLimit = 1ull << 25;

inline void attempt_flat(Config& built, uint64_t p) {
    if (can_build_flat(built, p)) built.set_flat(p);
}

// Pre-sampled shuffle path: generate the full visiting order up front.
inline Config simulate_one_array(Dims dims, Xoshiro256ss& rng) {
    const uint64_t cells = dims.cells();
    std::vector<uint32_t> order(cells);
    for (uint64_t p = 0; p < cells; ++p) order[p] = static_cast<uint32_t>(p);
    fisher_yates(order, rng);
    Config built(dims);
    for (uint32_t p : order) attempt_flat(built, p);
    return built;
}

// Incremental path for very large grids: draw the next unvisited lot by
// rejection against a visited bitset, and once few lots remain, collect
// them and consume in shuffled order. Each step picks uniformly among the
// unvisited lots, so the overall order is exactly a uniform permutation,
// at O(mn) bits of memory and O(mn) expected draws.
inline Config simulate_one_residual(Dims dims, Xoshiro256ss& rng) {
    const uint64_t cells = dims.cells();
    std::vector<uint64_t> visited((cells + 63) / 64, 0);
    Config built(dims);

    const uint64_t tail_size = std::max<uint64_t>(64, cells / 64);
    uint64_t remaining = cells;
    while (remaining > tail_size) {
        uint64_t p;
        do {
            p = rng.below(cells);
        } while ((visited[p >> 6] >> (p & 63)) & 1);
        visited[p >> 6] |= 1ULL << (p & 63);
        --remaining;
        attempt_flat(built, p);
    }

    std::vector<uint64_t> tail;
    tail.reserve(remaining);
    for (uint64_t p = 0; p < cells; ++p)
        if (!((visited[p >> 6] >> (p & 63)) & 1)) tail.push_back(p);
    while (!tail.empty()) {
        uint64_t r = rng.below(tail.size());
        uint64_t p = tail[r];
        tail[r] = tail.back();
        tail.pop_back();
        attempt_flat(built, p);
    }
    return built;
}

inline Config simulate_one_unchecked(Dims dims, uint64_t seed) {
    Xoshiro256ss rng(seed);
    return dims.cells() <= kShuffleCellLimit ? simulate_one_array(dims, rng)
                                             : simulate_one_residual(dims, rng);
}

} // namespace detail

// One full settlement on a uniformly random visiting order, reproducible
// from the seed alone. Refuses grids beyond the per-run cell budget
// (default 2^31 lots, override via SETTLE_RUN_CELL_LIMIT).
inline Config simulate_one(Dims dims, uint64_t seed) {
    const uint64_t limit = detail::env_budget("SETTLE_RUN_CELL_LIMIT", 1ull << 31);
    if (dims.cells() > limit)
        throw ResourceError("simulate_one: " + std::to_string(dims.cells()) +
                            " lots exceeds the per-run limit of " + std::to_string(limit) +
                            " (raise SETTLE_RUN_CELL_LIMIT to override)");
    return detail::simulate_one_unchecked(dims, seed);
}

// Permutation file: first line "m n", then one "i j" lot per line in
// visiting order, mn lines total.
inline void write_permutation(std::ostream& os, const Permutation& perm) {
    os << perm.dims().m << " " << perm.dims().n << "\n";
    for (const Lot& lot : perm.order()) os << lot.i << " " << lot.j << "\n";
}

inline Permutation parse_permutation(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw ContractError("permutation file: missing header line");
    uint64_t m = 0, n = 0;
    {
        std::istringstream hs(header);
        if (!(hs >> m >> n)) throw ContractError("permutation file: header must be \"m n\"");
        std::string rest;
        if (hs >> rest) throw ContractError("permutation file: trailing tokens in header");
    }
    Dims dims(m, n);
    std::vector<Lot> order;
    order.reserve(dims.cells());
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        uint64_t i = 0, j = 0;
        if (!(ls >> i >> j))
            throw ContractError("permutation file: expected \"i j\", got \"" + line + "\"");
        std::string rest;
        if (ls >> rest) throw ContractError("permutation file: trailing tokens in \"" + line + "\"");
        if (i < 1 || i > dims.m || j < 1 || j > dims.n)
            throw ContractError("permutation file: lot (" + std::to_string(i) + "," +
                                std::to_string(j) + ") outside the grid");
        order.push_back(Lot{static_cast<uint32_t>(i), static_cast<uint32_t>(j)});
    }
    return Permutation(dims, std::move(order)); // validates count and repeats
}

inline Permutation parse_permutation(const std::string& text) {
    std::istringstream is(text);
    return parse_permutation(is);
}

} // namespace settle
