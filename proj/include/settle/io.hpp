#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "settle/common.hpp"
#include "settle/enumerate.hpp"
#include "settle/grid.hpp"
#include "settle/montecarlo.hpp"

// CSV and JSON emission. CSV starts with '#' provenance comments; JSON
// carries the same fields inline. Formatting is fixed so equal results
// serialize byte-identically (the timestamp, when given, is the only
// invocation-dependent field).

namespace settle {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

inline std::string full(double v) { return fmt("%.17g", v); }

inline void csv_preamble(std::ostream& os, Dims dims, const std::string& timestamp) {
    os << "# version=" << kVersion << "\n";
    os << "# m=" << dims.m << " n=" << dims.n << "\n";
    if (!timestamp.empty()) os << "# generated=" << timestamp << "\n";
}

inline void csv_seeded_preamble(std::ostream& os, Dims dims, uint64_t runs, uint64_t seed,
                                const std::string& timestamp) {
    os << "# version=" << kVersion << "\n";
    os << "# prng=" << kPrngId << "\n";
    os << "# m=" << dims.m << " n=" << dims.n << " runs=" << runs << " master_seed=" << seed
       << "\n";
    if (!timestamp.empty()) os << "# generated=" << timestamp << "\n";
}

inline const char* kind_string(OccupancyDistribution::Kind kind) {
    switch (kind) {
        case OccupancyDistribution::Kind::UniformModel: return "uniform-model";
        case OccupancyDistribution::Kind::SequentialModel: return "sequential-model";
        default: return "empirical";
    }
}

inline ordered_json dims_json(Dims dims) { return ordered_json{{"m", dims.m}, {"n", dims.n}}; }

inline ordered_json histogram_json(const std::map<uint64_t, uint64_t>& hist) {
    ordered_json arr = ordered_json::array();
    for (const auto& [k, c] : hist) arr.push_back(ordered_json::array({k, c}));
    return arr;
}

inline ordered_json stats_body_json(const DensityStats& s) {
    ordered_json j;
    j["m"] = s.dims.m;
    j["n"] = s.dims.n;
    j["runs"] = s.runs;
    j["master_seed"] = s.master_seed;
    j["mean_density"] = s.mean_density;
    j["std_error"] = s.std_error;
    j["p5"] = s.p5;
    j["p95"] = s.p95;
    j["histogram"] = histogram_json(s.histogram);
    return j;
}

inline void json_provenance(ordered_json& j, const std::string& timestamp) {
    j["version"] = kVersion;
    j["prng"] = kPrngId;
    if (!timestamp.empty()) j["generated"] = timestamp;
}

} // namespace detail

// --- enumeration ---------------------------------------------------------

inline void write_enumeration_csv(std::ostream& os, const EnumerationResult& r,
                                  const std::string& timestamp = "") {
    detail::csv_preamble(os, r.dims, timestamp);
    os << "occupancy,config\n";
    for (const Config& c : r.configs) os << c.occupancy() << "," << packed_string(c) << "\n";
}

inline void write_enumeration_json(std::ostream& os, const EnumerationResult& r,
                                   const std::string& timestamp = "") {
    ordered_json j;
    j["version"] = kVersion;
    if (!timestamp.empty()) j["generated"] = timestamp;
    j["dims"] = detail::dims_json(r.dims);
    j["count"] = r.configs.size();
    j["spectrum"] = detail::histogram_json(r.occupancy_spectrum);
    ordered_json arr = ordered_json::array();
    for (const Config& c : r.configs)
        arr.push_back(ordered_json{{"occupancy", c.occupancy()}, {"config", packed_string(c)}});
    j["configs"] = arr;
    os << j.dump(2) << "\n";
}

// --- census ---------------------------------------------------------------

inline void write_census_csv(std::ostream& os, const PreimageCensus& census,
                             const std::string& timestamp = "") {
    detail::csv_preamble(os, census.dims, timestamp);
    os << "config,count\n";
    for (const CensusEntry& e : census.entries)
        os << packed_string(e.config) << "," << e.count << "\n";
}

inline void write_census_json(std::ostream& os, const PreimageCensus& census,
                              const std::string& timestamp = "") {
    ordered_json j;
    j["version"] = kVersion;
    if (!timestamp.empty()) j["generated"] = timestamp;
    j["dims"] = detail::dims_json(census.dims);
    j["total"] = census.total;
    ordered_json arr = ordered_json::array();
    for (const CensusEntry& e : census.entries)
        arr.push_back(ordered_json{{"config", packed_string(e.config)},
                                   {"occupancy", e.config.occupancy()},
                                   {"count", e.count}});
    j["counts"] = arr;
    os << j.dump(2) << "\n";
}

// --- occupancy pmf ----------------------------------------------------------

inline void write_pmf_csv(std::ostream& os, const OccupancyDistribution& dist,
                          const std::string& timestamp = "") {
    detail::csv_preamble(os, dist.dims, timestamp);
    os << "# kind=" << detail::kind_string(dist.kind) << "\n";
    os << "k,numerator,denominator\n";
    for (const auto& [k, p] : dist.pmf) os << k << "," << p.num() << "," << p.den() << "\n";
}

inline void write_pmf_json(std::ostream& os, const OccupancyDistribution& dist,
                           const std::string& timestamp = "") {
    ordered_json j;
    j["version"] = kVersion;
    if (!timestamp.empty()) j["generated"] = timestamp;
    j["dims"] = detail::dims_json(dist.dims);
    j["kind"] = detail::kind_string(dist.kind);
    ordered_json arr = ordered_json::array();
    for (const auto& [k, p] : dist.pmf)
        arr.push_back(ordered_json{
            {"k", k}, {"numerator", p.num()}, {"denominator", p.den()}, {"value", p.to_double()}});
    j["pmf"] = arr;
    os << j.dump(2) << "\n";
}

// --- simulation stats -------------------------------------------------------

inline void write_histogram_csv(std::ostream& os, const DensityStats& s,
                                const std::string& timestamp = "") {
    detail::csv_seeded_preamble(os, s.dims, s.runs, s.master_seed, timestamp);
    os << "occupancy,count\n";
    for (const auto& [k, c] : s.histogram) os << k << "," << c << "\n";
}

inline void write_stats_csv(std::ostream& os, const DensityStats& s,
                            const std::string& timestamp = "") {
    detail::csv_seeded_preamble(os, s.dims, s.runs, s.master_seed, timestamp);
    os << "m,n,runs,seed,mean,stderr,p5,p95\n";
    os << s.dims.m << "," << s.dims.n << "," << s.runs << "," << s.master_seed << ","
       << detail::full(s.mean_density) << "," << detail::full(s.std_error) << ","
       << detail::full(s.p5) << "," << detail::full(s.p95) << "\n";
}

inline void write_stats_json(std::ostream& os, const DensityStats& s,
                             const std::string& timestamp = "") {
    ordered_json j = detail::stats_body_json(s);
    detail::json_provenance(j, timestamp);
    os << j.dump(2) << "\n";
}

// --- density table ----------------------------------------------------------

// Means to 3 decimals in the CSV (table convention); full precision in JSON.
inline void write_table_csv(std::ostream& os, const DensityTable& table,
                            const std::string& timestamp = "") {
    os << "# version=" << kVersion << "\n";
    os << "# prng=" << kPrngId << "\n";
    os << "# runs=" << table.runs << " master_seed=" << table.master_seed << "\n";
    if (!timestamp.empty()) os << "# generated=" << timestamp << "\n";
    os << "m,n,mean,stderr,skipped\n";
    for (const TableCell& cell : table.cells) {
        os << cell.dims.m << "," << cell.dims.n << ",";
        if (cell.skipped)
            os << ",,1\n";
        else
            os << detail::fmt("%.3f", cell.stats.mean_density) << ","
               << detail::fmt("%.6f", cell.stats.std_error) << ",0\n";
    }
}

inline void write_table_json(std::ostream& os, const DensityTable& table,
                             const std::string& timestamp = "") {
    ordered_json j;
    detail::json_provenance(j, timestamp);
    j["runs"] = table.runs;
    j["master_seed"] = table.master_seed;
    j["ms"] = table.ms;
    j["ns"] = table.ns;
    ordered_json arr = ordered_json::array();
    for (const TableCell& cell : table.cells) {
        ordered_json c;
        c["m"] = cell.dims.m;
        c["n"] = cell.dims.n;
        c["skipped"] = cell.skipped;
        if (!cell.skipped) {
            c["mean_density"] = cell.stats.mean_density;
            c["std_error"] = cell.stats.std_error;
            c["p5"] = cell.stats.p5;
            c["p95"] = cell.stats.p95;
            c["cell_seed"] = cell.stats.master_seed;
        }
        arr.push_back(c);
    }
    j["cells"] = arr;
    os << j.dump(2) << "\n";
}

// --- percentile band sweep ---------------------------------------------------

inline void write_sweep_csv(std::ostream& os, const std::vector<DensityStats>& points,
                            uint64_t master_seed, const std::string& timestamp = "") {
    os << "# version=" << kVersion << "\n";
    os << "# prng=" << kPrngId << "\n";
    os << "# master_seed=" << master_seed << "\n";
    if (!timestamp.empty()) os << "# generated=" << timestamp << "\n";
    os << "m,n,runs,seed,mean,stderr,p5,p95\n";
    for (const DensityStats& s : points)
        os << s.dims.m << "," << s.dims.n << "," << s.runs << "," << s.master_seed << ","
           << detail::full(s.mean_density) << "," << detail::full(s.std_error) << ","
           << detail::full(s.p5) << "," << detail::full(s.p95) << "\n";
}

inline void write_sweep_json(std::ostream& os, const std::vector<DensityStats>& points,
                             uint64_t master_seed, const std::string& timestamp = "") {
    ordered_json j;
    detail::json_provenance(j, timestamp);
    j["master_seed"] = master_seed;
    ordered_json arr = ordered_json::array();
    for (const DensityStats& s : points) arr.push_back(detail::stats_body_json(s));
    j["points"] = arr;
    os << j.dump(2) << "\n";
}

// --- conjecture reports -------------------------------------------------------

inline void write_conjecture1_text(std::ostream& os, const Conjecture1Report& rep) {
    os << "grid " << rep.dims.m << "x" << rep.dims.n << ": occupancy range [" << rep.min_occupancy
       << ", " << rep.max_occupancy << "]\n";
    os << "most-preimaged configs (count " << rep.max_count << "):\n";
    for (const Config& c : rep.max_census_configs)
        os << "  " << packed_string(c) << "  occupancy " << c.occupancy() << "\n";
    os << "  all efficient (max occupancy): " << (rep.max_are_efficient ? "yes" : "NO") << "\n";
    os << "least-preimaged configs (count " << rep.min_count << "):\n";
    for (const Config& c : rep.min_census_configs)
        os << "  " << packed_string(c) << "  occupancy " << c.occupancy() << "\n";
    os << "  all inefficient (min occupancy): " << (rep.min_are_inefficient ? "yes" : "NO")
       << "\n";
    os << "conjecture " << (rep.holds ? "holds" : "VIOLATED") << " at this size\n";
}

inline void write_monotonicity_text(std::ostream& os, const MonotonicityReport& rep) {
    for (const MonotonicityEntry& e : rep.entries) {
        os << e.from.m << "x" << e.from.n << " -> " << e.to.m << "x" << e.to.n
           << ": delta=" << detail::fmt("%+.5f", e.delta)
           << " combined_se=" << detail::fmt("%.5f", e.combined_se)
           << (e.significant_increase ? "  SIGNIFICANT INCREASE" : "") << "\n";
    }
    os << rep.comparisons << " comparisons, " << rep.violations << " significant increases: "
       << (rep.holds ? "no violation of monotone decrease" : "MONOTONICITY VIOLATED") << "\n";
}

} // namespace settle
