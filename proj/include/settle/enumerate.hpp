#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "settle/builder.hpp"
#include "settle/common.hpp"
#include "settle/grid.hpp"
#include "settle/rational.hpp"

namespace settle {

namespace detail {

// Stable output order for enumeration and census listings: densest configs
// first, ties broken by the packed rendering ('#' sorts before '.').
inline bool canonical_less(const Config& a, const Config& b) {
    if (a.occupancy() != b.occupancy()) return a.occupancy() > b.occupancy();
    return packed_string(a) < packed_string(b);
}

inline uint64_t factorial_u64(uint32_t k) {
    if (k > 20) throw ResourceError("factorial of " + std::to_string(k) + " exceeds 64 bits");
    uint64_t f = 1;
    for (uint32_t i = 2; i <= k; ++i) f *= i;
    return f;
}

// Precomputed per-lot bit masks for grids of at most 63 cells, so the hot
// loops of subset enumeration and the permutation census run on single
// words instead of Config objects.
//
//   block[p]  — bits of the west/east/south neighbors when all three exist
//               (a house at p is blocked iff block[p] != 0 and all bits set);
//   forbid[p] — up to four submasks; building at empty p is allowed iff
//               none of them is fully contained in the current mask. One
//               mask is block[p] itself (the new house would be blocked),
//               the others say an existing west/east/north neighbor would
//               become blocked once p fills its gap.
struct LotMasks {
    Dims dims;
    uint32_t cells;
    std::vector<uint64_t> block;
    std::vector<std::array<uint64_t, 4>> forbid;
    std::vector<uint32_t> nforbid;

    explicit LotMasks(Dims d) : dims(d), cells(static_cast<uint32_t>(d.cells())) {
        if (d.cells() > 63) throw ResourceError("mask tables support at most 63 cells");
        const uint32_t m = d.m, n = d.n;
        block.assign(cells, 0);
        for (uint32_t p = 0; p < cells; ++p) {
            uint32_t i = p / n, j = p % n;
            if (j > 0 && j + 1 < n && i + 1 < m)
                block[p] = (1ull << (p - 1)) | (1ull << (p + 1)) | (1ull << (p + n));
        }
        forbid.assign(cells, {});
        nforbid.assign(cells, 0);
        for (uint32_t p = 0; p < cells; ++p) {
            uint32_t i = p / n, j = p % n;
            auto add = [&](uint64_t f) { forbid[p][nforbid[p]++] = f; };
            if (block[p]) add(block[p]);
            // neighbors whose block set contains p: west, east, north
            const uint64_t bit_p = 1ull << p;
            if (j > 0 && block[p - 1]) add((1ull << (p - 1)) | (block[p - 1] & ~bit_p));
            if (j + 1 < n && block[p + 1]) add((1ull << (p + 1)) | (block[p + 1] & ~bit_p));
            if (i > 0 && block[p - n]) add((1ull << (p - n)) | (block[p - n] & ~bit_p));
        }
    }

    bool can_build(uint64_t mask, uint32_t p) const {
        const auto& f = forbid[p];
        for (uint32_t t = 0; t < nforbid[p]; ++t)
            if ((mask & f[t]) == f[t]) return false;
        return true;
    }

    bool is_permissible(uint64_t mask) const {
        for (uint64_t s = mask; s; s &= s - 1) {
            uint32_t p = static_cast<uint32_t>(__builtin_ctzll(s));
            if (block[p] && (mask & block[p]) == block[p]) return false;
        }
        return true;
    }

    bool is_maximal(uint64_t mask) const {
        if (!is_permissible(mask)) return false;
        const uint64_t full = (1ull << cells) - 1;
        for (uint64_t e = full & ~mask; e; e &= e - 1)
            if (can_build(mask, static_cast<uint32_t>(__builtin_ctzll(e)))) return false;
        return true;
    }
};

inline Config config_from_mask(Dims dims, uint64_t mask) {
    Config c(dims);
    for (uint64_t s = mask; s; s &= s - 1)
        c.set_flat(static_cast<uint64_t>(__builtin_ctzll(s)));
    return c;
}

inline std::vector<uint64_t> enumerate_subset(Dims dims) {
    LotMasks masks(dims);
    std::vector<uint64_t> out;
    const uint64_t top = 1ull << dims.cells();
    for (uint64_t mask = 0; mask < top; ++mask)
        if (masks.is_maximal(mask)) out.push_back(mask);
    return out;
}

// Row-by-row backtracking. A house is blocked by its own row (west+east)
// plus the row below; buildability at a lot involves its row and the rows
// directly above and below. So permissibility is a constraint on adjacent
// row pairs, and once rows i-1, i, i+1 are fixed, row i's lots can be
// settled for good: prune any branch where row i-1 keeps a buildable empty
// lot, since later rows cannot change that.
inline std::vector<uint64_t> enumerate_backtrack(Dims dims) {
    const uint32_t m = dims.m, n = dims.n;
    const uint64_t full = (1ull << n) - 1;
    const uint64_t interior = n >= 2 ? (full & ~1ull & ~(1ull << (n - 1))) : 0;

    // bit j set: a house at (row, j) is blocked as soon as below[j] is built
    auto trip = [&](uint64_t row) { return row & (row << 1) & (row >> 1) & interior; };

    // does `cur` have an empty lot that could still take a house?
    auto extendable = [&](uint64_t above, uint64_t cur, uint64_t below, bool has_above,
                          bool has_below) {
        uint64_t rejected = 0;
        if (has_below) {
            rejected |= (cur << 1) & (cur >> 1) & below & interior;  // new house blocked
            rejected |= (cur << 1) & (cur << 2) & (below << 1);      // west neighbor blocked
            rejected |= (cur >> 1) & (cur >> 2) & (below >> 1);      // east neighbor blocked
        }
        if (has_above) rejected |= above & (above << 1) & (above >> 1) & interior;
        return (full & ~cur & ~rejected) != 0;
    };

    std::vector<uint64_t> out;
    std::vector<uint64_t> rows(m, 0);
    auto rec = [&](auto&& self, uint32_t i) -> void {
        if (i == m) {
            uint64_t above = m >= 2 ? rows[m - 2] : 0;
            if (!extendable(above, rows[m - 1], 0, m >= 2, false)) {
                uint64_t mask = 0;
                for (uint32_t r = 0; r < m; ++r) mask |= rows[r] << (r * n);
                out.push_back(mask);
            }
            return;
        }
        for (uint64_t cur = 0; cur <= full; ++cur) {
            if (i >= 1) {
                if (trip(rows[i - 1]) & cur) continue;  // row i-1 house loses its sun
                uint64_t above = i >= 2 ? rows[i - 2] : 0;
                if (extendable(above, rows[i - 1], cur, i >= 2, true)) continue;
            }
            rows[i] = cur;
            self(self, i + 1);
        }
    };
    rec(rec, 0);
    return out;
}

} // namespace detail

enum class EnumMethod { Auto, Subset, Backtrack };

struct EnumerationResult {
    Dims dims;
    std::vector<Config> configs;  // canonical order, duplicate-free
    std::map<uint64_t, uint64_t> occupancy_spectrum;

    uint64_t max_occupancy() const {
        if (occupancy_spectrum.empty()) throw ContractError("empty enumeration");
        return occupancy_spectrum.rbegin()->first;
    }
    uint64_t min_occupancy() const {
        if (occupancy_spectrum.empty()) throw ContractError("empty enumeration");
        return occupancy_spectrum.begin()->first;
    }
};

// Exact list of every maximal configuration. `Subset` sweeps all 2^(mn)
// occupancy masks against the maximality predicate (the oracle); `Backtrack`
// prunes row by row and reaches larger grids. `Auto` picks by size.
inline EnumerationResult enumerate_maximal(Dims dims, EnumMethod method = EnumMethod::Auto) {
    const uint64_t cells = dims.cells();
    if (method == EnumMethod::Auto)
        method = cells <= 22 ? EnumMethod::Subset : EnumMethod::Backtrack;

    std::vector<uint64_t> masks;
    if (method == EnumMethod::Subset) {
        const uint64_t limit = detail::env_budget("SETTLE_SUBSET_CELL_LIMIT", 30);
        if (cells > limit)
            throw ResourceError("subset enumeration on " + std::to_string(cells) +
                                " cells exceeds the limit of " + std::to_string(limit) +
                                " (raise SETTLE_SUBSET_CELL_LIMIT or use backtrack)");
        masks = detail::enumerate_subset(dims);
    } else {
        const uint64_t limit = detail::env_budget("SETTLE_BACKTRACK_CELL_LIMIT", 40);
        if (cells > limit)
            throw ResourceError("backtracking enumeration on " + std::to_string(cells) +
                                " cells exceeds the limit of " + std::to_string(limit) +
                                " (raise SETTLE_BACKTRACK_CELL_LIMIT)");
        if (cells > 63) throw ResourceError("backtracking enumeration supports at most 63 cells");
        masks = detail::enumerate_backtrack(dims);
    }

    EnumerationResult result;
    result.dims = dims;
    result.configs.reserve(masks.size());
    for (uint64_t mask : masks) result.configs.push_back(detail::config_from_mask(dims, mask));
    std::sort(result.configs.begin(), result.configs.end(), detail::canonical_less);
    for (const Config& c : result.configs) ++result.occupancy_spectrum[c.occupancy()];
    return result;
}

// Exact probability law of an occupancy count, as reduced rationals.
struct OccupancyDistribution {
    enum class Kind { UniformModel, SequentialModel, Empirical };

    Dims dims;
    Kind kind = Kind::UniformModel;
    std::vector<std::pair<uint64_t, Rational>> pmf;  // ascending occupancy

    Rational probability(uint64_t k) const {
        for (const auto& [key, p] : pmf)
            if (key == k) return p;
        return Rational(0, 1);
    }

    Rational total() const {
        Rational t(0, 1);
        for (const auto& [k, p] : pmf) t = t + p;
        return t;
    }

    // E[occupancy] and E[occupancy/(mn)], exact.
    Rational expectation_occupancy() const {
        Rational acc(0, 1);
        for (const auto& [k, p] : pmf) acc = acc + Rational(k, 1) * p;
        return acc;
    }
    Rational expectation_density() const {
        return expectation_occupancy() * Rational(1, dims.cells());
    }

    friend bool operator==(const OccupancyDistribution& a, const OccupancyDistribution& b) {
        if (a.dims != b.dims || a.pmf.size() != b.pmf.size()) return false;
        for (size_t t = 0; t < a.pmf.size(); ++t)
            if (a.pmf[t].first != b.pmf[t].first || a.pmf[t].second != b.pmf[t].second)
                return false;
        return true;
    }
    friend bool operator!=(const OccupancyDistribution& a, const OccupancyDistribution& b) {
        return !(a == b);
    }
};

namespace detail {

inline OccupancyDistribution pmf_from_counts(Dims dims, OccupancyDistribution::Kind kind,
                                             const std::map<uint64_t, uint64_t>& counts,
                                             uint64_t total) {
    OccupancyDistribution dist;
    dist.dims = dims;
    dist.kind = kind;
    for (const auto& [k, c] : counts) dist.pmf.emplace_back(k, Rational(c, total));
    return dist;
}

} // namespace detail

// Law of the occupancy of a uniformly random maximal configuration.
inline OccupancyDistribution xu_distribution(const EnumerationResult& enumeration) {
    return detail::pmf_from_counts(enumeration.dims, OccupancyDistribution::Kind::UniformModel,
                                   enumeration.occupancy_spectrum, enumeration.configs.size());
}

inline OccupancyDistribution xu_distribution(Dims dims, EnumMethod method = EnumMethod::Auto) {
    return xu_distribution(enumerate_maximal(dims, method));
}

// Empirical law from a Monte Carlo occupancy histogram.
inline OccupancyDistribution empirical_distribution(Dims dims,
                                                    const std::map<uint64_t, uint64_t>& histogram) {
    uint64_t total = 0;
    for (const auto& [k, c] : histogram) total += c;
    if (total == 0) throw ContractError("empirical_distribution: empty histogram");
    return detail::pmf_from_counts(dims, OccupancyDistribution::Kind::Empirical, histogram, total);
}

struct CensusEntry {
    Config config;
    uint64_t count;
};

// For every maximal configuration, the number of visiting orders the
// settlement map sends to it. Counts sum to (mn)!.
struct PreimageCensus {
    Dims dims;
    std::vector<CensusEntry> entries;  // canonical config order
    uint64_t total = 0;

    uint64_t count_of(const Config& config) const {
        for (const auto& e : entries)
            if (e.config == config) return e.count;
        return 0;
    }
};

namespace detail {

// Unranking in the factorial number system: the rank-th permutation of
// {0, ..., cells-1} in lexicographic order.
inline std::vector<uint8_t> unrank_permutation(uint64_t rank, uint32_t cells) {
    std::vector<uint8_t> remaining(cells);
    for (uint32_t t = 0; t < cells; ++t) remaining[t] = static_cast<uint8_t>(t);
    std::vector<uint8_t> perm;
    perm.reserve(cells);
    for (uint32_t t = 0; t < cells; ++t) {
        uint64_t f = factorial_u64(cells - 1 - t);
        uint64_t d = rank / f;
        rank %= f;
        perm.push_back(remaining[d]);
        remaining.erase(remaining.begin() + static_cast<ptrdiff_t>(d));
    }
    return perm;
}

// Streams lexicographic ranks [lo, hi) through the settlement fold,
// accumulating final-configuration counts into `hist` (dense, indexed by
// occupancy mask). Successor steps touch only a suffix of the permutation,
// so the fold keeps per-prefix partial states and recomputes from the
// pivot: amortized O(1) lots per permutation.
inline void census_range(const LotMasks& masks, uint64_t lo, uint64_t hi,
                         std::vector<uint64_t>& hist) {
    if (lo >= hi) return;
    const uint32_t cells = masks.cells;
    std::vector<uint8_t> a = unrank_permutation(lo, cells);
    std::vector<uint64_t> state(cells + 1, 0);
    auto refold = [&](uint32_t from) {
        for (uint32_t r = from; r < cells; ++r) {
            uint64_t cfg = state[r];
            uint8_t p = a[r];
            state[r + 1] = masks.can_build(cfg, p) ? (cfg | (1ull << p)) : cfg;
        }
    };
    refold(0);
    for (uint64_t it = lo; it < hi; ++it) {
        ++hist[state[cells]];
        if (it + 1 == hi) break;
        // lexicographic successor; exists because it+1 < (cells)!
        uint32_t k = cells - 2;
        while (a[k] >= a[k + 1]) --k;
        uint32_t j = cells - 1;
        while (a[j] <= a[k]) --j;
        std::swap(a[k], a[j]);
        std::reverse(a.begin() + k + 1, a.end());
        refold(k);
    }
}

} // namespace detail

// Exact preimage census of the settlement map by streaming all (mn)!
// permutations. Constant memory per step; the permutation space may be
// sharded into contiguous rank ranges across workers, and the merged
// result is independent of the shard count.
inline PreimageCensus count_preimages(Dims dims, unsigned workers = 1) {
    const uint64_t cells = dims.cells();
    const uint64_t limit = detail::env_budget("SETTLE_CENSUS_CELL_LIMIT", 12);
    if (cells > limit)
        throw ResourceError("census on " + std::to_string(cells) +
                            " cells exceeds the limit of " + std::to_string(limit) +
                            " (raise SETTLE_CENSUS_CELL_LIMIT)");
    const uint64_t total = detail::factorial_u64(static_cast<uint32_t>(cells));  // caps at 20

    detail::LotMasks masks(dims);
    if (workers == 0) workers = 1;
    if (workers > total) workers = static_cast<unsigned>(total);

    std::vector<std::vector<uint64_t>> hists(workers,
                                             std::vector<uint64_t>(1ull << cells, 0));
    if (workers == 1) {
        detail::census_range(masks, 0, total, hists[0]);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            uint64_t lo = static_cast<uint64_t>(
                static_cast<unsigned __int128>(total) * w / workers);
            uint64_t hi = static_cast<uint64_t>(
                static_cast<unsigned __int128>(total) * (w + 1) / workers);
            pool.emplace_back(
                [&, lo, hi, w] { detail::census_range(masks, lo, hi, hists[w]); });
        }
        for (auto& t : pool) t.join();
        for (unsigned w = 1; w < workers; ++w)
            for (uint64_t mask = 0; mask < (1ull << cells); ++mask)
                hists[0][mask] += hists[w][mask];
    }

    PreimageCensus census;
    census.dims = dims;
    uint64_t sum = 0;
    for (uint64_t mask = 0; mask < (1ull << cells); ++mask)
        if (hists[0][mask]) {
            census.entries.push_back(
                CensusEntry{detail::config_from_mask(dims, mask), hists[0][mask]});
            sum += hists[0][mask];
        }
    std::sort(census.entries.begin(), census.entries.end(),
              [](const CensusEntry& a, const CensusEntry& b) {
                  return detail::canonical_less(a.config, b.config);
              });
    census.total = sum;
    return census;
}

// Law of the occupancy of a settlement built on a uniformly random visiting
// order: pushforward of the census.
inline OccupancyDistribution xs_distribution_exact(const PreimageCensus& census) {
    std::map<uint64_t, uint64_t> by_occupancy;
    for (const auto& e : census.entries) by_occupancy[e.config.occupancy()] += e.count;
    return detail::pmf_from_counts(census.dims, OccupancyDistribution::Kind::SequentialModel,
                                   by_occupancy, census.total);
}

inline OccupancyDistribution xs_distribution_exact(Dims dims, unsigned workers = 1) {
    return xs_distribution_exact(count_preimages(dims, workers));
}

// Does the census favor the efficient configurations? Checks whether every
// configuration with the largest preimage count attains the maximum
// occupancy over all maximal configurations, and every one with the
// smallest count attains the minimum.
struct Conjecture1Report {
    Dims dims;
    uint64_t max_count = 0, min_count = 0;        // census extremes
    uint64_t max_occupancy = 0, min_occupancy = 0;  // over all maximal configs
    std::vector<Config> max_census_configs, min_census_configs;
    bool max_are_efficient = false;
    bool min_are_inefficient = false;
    bool holds = false;
};

inline Conjecture1Report conjecture1_report(const PreimageCensus& census) {
    if (census.entries.empty()) throw ContractError("conjecture1_report: empty census");
    Conjecture1Report rep;
    rep.dims = census.dims;
    rep.max_count = 0;
    rep.min_count = UINT64_MAX;
    rep.max_occupancy = 0;
    rep.min_occupancy = UINT64_MAX;
    for (const auto& e : census.entries) {
        rep.max_count = std::max(rep.max_count, e.count);
        rep.min_count = std::min(rep.min_count, e.count);
        rep.max_occupancy = std::max(rep.max_occupancy, e.config.occupancy());
        rep.min_occupancy = std::min(rep.min_occupancy, e.config.occupancy());
    }
    rep.max_are_efficient = true;
    rep.min_are_inefficient = true;
    for (const auto& e : census.entries) {
        if (e.count == rep.max_count) {
            rep.max_census_configs.push_back(e.config);
            if (e.config.occupancy() != rep.max_occupancy) rep.max_are_efficient = false;
        }
        if (e.count == rep.min_count) {
            rep.min_census_configs.push_back(e.config);
            if (e.config.occupancy() != rep.min_occupancy) rep.min_are_inefficient = false;
        }
    }
    rep.holds = rep.max_are_efficient && rep.min_are_inefficient;
    return rep;
}

inline Conjecture1Report conjecture1_report(Dims dims, unsigned workers = 1) {
    return conjecture1_report(count_preimages(dims, workers));
}

} // namespace settle
