#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "settle/builder.hpp"
#include "settle/enumerate.hpp"
#include "settle/io.hpp"

using namespace settle;

namespace {

// Scoped environment override for budget tests.
struct EnvGuard {
    std::string name;
    EnvGuard(const char* n, const char* value) : name(n) { ::setenv(n, value, 1); }
    ~EnvGuard() { ::unsetenv(name.c_str()); }
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string golden_path(const char* name) {
    return std::string(SETTLE_TEST_DATA_DIR) + "/" + name;
}

std::vector<std::string> packed_list(const EnumerationResult& r) {
    std::vector<std::string> out;
    out.reserve(r.configs.size());
    for (const Config& c : r.configs) out.push_back(packed_string(c));
    return out;
}

} // namespace

TEST_CASE("3x3 maximal configurations, exhaustively known") {
    EnumerationResult r = enumerate_maximal(Dims(3, 3));
    const std::vector<std::string> want = {
        "###/#.#/###",
        "##./###/#.#", "##./##./###", "##./.##/###",
        "#.#/###/#.#", "#.#/##./###", "#.#/.##/###",
        ".##/###/#.#", ".##/##./###", ".##/.##/###",
    };
    CHECK(packed_list(r) == want);
    CHECK(r.occupancy_spectrum == std::map<uint64_t, uint64_t>{{7, 9}, {8, 1}});
    CHECK(r.max_occupancy() == 8);
    CHECK(r.min_occupancy() == 7);
    for (const Config& c : r.configs) CHECK(is_maximal(c));
}

TEST_CASE("maximal counts are direction-sensitive") {
    EnumerationResult r34 = enumerate_maximal(Dims(3, 4));
    CHECK(r34.configs.size() == 19);
    CHECK(r34.occupancy_spectrum == std::map<uint64_t, uint64_t>{{8, 4}, {9, 8}, {10, 7}});

    EnumerationResult r43 = enumerate_maximal(Dims(4, 3));
    CHECK(r43.configs.size() == 25);
    CHECK(r43.occupancy_spectrum == std::map<uint64_t, uint64_t>{{9, 18}, {10, 7}});
}

TEST_CASE("degenerate grids have a single full maximal configuration") {
    EnumerationResult r = enumerate_maximal(Dims(1, 4));
    REQUIRE(r.configs.size() == 1);
    CHECK(r.configs[0].occupancy() == 4);
    EnumerationResult r2 = enumerate_maximal(Dims(2, 2));
    REQUIRE(r2.configs.size() == 1);
    CHECK(r2.configs[0].occupancy() == 4);
}

TEST_CASE("subset sweep and row backtracking enumerate identically") {
    for (uint32_t m = 1; m <= 16; ++m)
        for (uint32_t n = 1; m * n <= 16; ++n) {
            EnumerationResult a = enumerate_maximal(Dims(m, n), EnumMethod::Subset);
            EnumerationResult b = enumerate_maximal(Dims(m, n), EnumMethod::Backtrack);
            INFO("dims " << m << "x" << n);
            CHECK(packed_list(a) == packed_list(b));
            CHECK(a.occupancy_spectrum == b.occupancy_spectrum);
        }
}

TEST_CASE("uniform-model law on 3x3") {
    OccupancyDistribution xu = xu_distribution(Dims(3, 3));
    CHECK(xu.kind == OccupancyDistribution::Kind::UniformModel);
    CHECK(xu.probability(7) == Rational(9, 10));
    CHECK(xu.probability(8) == Rational(1, 10));
    CHECK(xu.probability(6) == Rational(0, 1));
    CHECK(xu.total() == Rational(1, 1));
}

TEST_CASE("preimage census of the 3x3 map") {
    PreimageCensus census = count_preimages(Dims(3, 3));
    CHECK(census.total == 362880); // 9!
    REQUIRE(census.entries.size() == 10);

    EnumerationResult r = enumerate_maximal(Dims(3, 3));
    uint64_t sum = 0;
    for (size_t t = 0; t < census.entries.size(); ++t) {
        CHECK(census.entries[t].config == r.configs[t]); // same canonical order
        sum += census.entries[t].count;
    }
    CHECK(sum == census.total);

    Config ring = config_from_packed(Dims(3, 3), "###/#.#/###");
    CHECK(census.count_of(ring) == 129600);
    for (const auto& e : census.entries)
        if (e.config != ring) CHECK(e.count == 25920);
}

TEST_CASE("tiny censuses by hand") {
    PreimageCensus c12 = count_preimages(Dims(1, 2));
    REQUIRE(c12.entries.size() == 1);
    CHECK(c12.entries[0].count == 2);
    CHECK(c12.total == 2);

    PreimageCensus c22 = count_preimages(Dims(2, 2));
    REQUIRE(c22.entries.size() == 1);
    CHECK(c22.entries[0].count == 24);

    PreimageCensus c23 = count_preimages(Dims(2, 3));
    CHECK(c23.total == 720);
}

TEST_CASE("census worker shards merge exactly") {
    PreimageCensus base = count_preimages(Dims(2, 3), 1);
    for (unsigned workers : {3u, 4u}) {
        PreimageCensus sharded = count_preimages(Dims(2, 3), workers);
        REQUIRE(sharded.entries.size() == base.entries.size());
        for (size_t t = 0; t < base.entries.size(); ++t) {
            CHECK(sharded.entries[t].config == base.entries[t].config);
            CHECK(sharded.entries[t].count == base.entries[t].count);
        }
        CHECK(sharded.total == base.total);
    }
}

TEST_CASE("census is closed under the east-west mirror") {
    for (Dims dims : {Dims(2, 3), Dims(3, 3)}) {
        PreimageCensus census = count_preimages(dims);
        for (const auto& e : census.entries)
            CHECK(census.count_of(mirror_ew(e.config)) == e.count);
    }
}

TEST_CASE("sequential-model law on 3x3 differs from the uniform one") {
    OccupancyDistribution xs = xs_distribution_exact(Dims(3, 3));
    CHECK(xs.kind == OccupancyDistribution::Kind::SequentialModel);
    CHECK(xs.probability(7) == Rational(9, 14));
    CHECK(xs.probability(8) == Rational(5, 14));
    CHECK(xs.total() == Rational(1, 1));

    OccupancyDistribution xu = xu_distribution(Dims(3, 3));
    CHECK(xs != xu);
    CHECK(xs.probability(8) > xu.probability(8)); // map favors the dense ring

    CHECK(xs.expectation_occupancy() == Rational(103, 14));
    CHECK(xs.expectation_density() == Rational(103, 126));
}

TEST_CASE("sequential law on a single row is deterministic") {
    OccupancyDistribution xs = xs_distribution_exact(Dims(1, 3));
    REQUIRE(xs.pmf.size() == 1);
    CHECK(xs.probability(3) == Rational(1, 1));
}

TEST_CASE("simulation frequencies converge to the exact sequential law") {
    std::map<uint64_t, uint64_t> hist;
    const int runs = 20000;
    for (int r = 0; r < runs; ++r)
        ++hist[simulate_one(Dims(3, 3), derive_seed(300, static_cast<uint64_t>(r))).occupancy()];
    OccupancyDistribution emp = empirical_distribution(Dims(3, 3), hist);
    CHECK(emp.kind == OccupancyDistribution::Kind::Empirical);
    CHECK(emp.total() == Rational(1, 1));
    double p7 = emp.probability(7).to_double();
    // 9/14 with 4 sigma slack at 20000 runs
    CHECK(p7 == Catch::Approx(9.0 / 14.0).margin(4 * 0.0034));
}

TEST_CASE("census extremes on 3x3: efficient most likely, inefficient least") {
    Conjecture1Report rep = conjecture1_report(Dims(3, 3));
    CHECK(rep.holds);
    CHECK(rep.max_count == 129600);
    CHECK(rep.min_count == 25920);
    CHECK(rep.max_occupancy == 8);
    CHECK(rep.min_occupancy == 7);
    REQUIRE(rep.max_census_configs.size() == 1);
    CHECK(packed_string(rep.max_census_configs[0]) == "###/#.#/###");
    CHECK(rep.min_census_configs.size() == 9);
    CHECK(rep.max_are_efficient);
    CHECK(rep.min_are_inefficient);
}

TEST_CASE("order unranking is lexicographic") {
    std::vector<uint8_t> idx = {0, 1, 2, 3};
    uint64_t rank = 0;
    do {
        CHECK(detail::unrank_permutation(rank, 4) == idx);
        ++rank;
    } while (std::next_permutation(idx.begin(), idx.end()));
    CHECK(rank == 24);
}

TEST_CASE("factorials overflow past 20") {
    CHECK(detail::factorial_u64(0) == 1);
    CHECK(detail::factorial_u64(12) == 479001600);
    CHECK(detail::factorial_u64(20) == 2432902008176640000ull);
    CHECK_THROWS_AS(detail::factorial_u64(21), ResourceError);
}

TEST_CASE("cell budgets turn runaway requests into resource errors") {
    // census default budget is 12 cells
    CHECK_THROWS_AS(count_preimages(Dims(4, 4)), ResourceError);
    {
        EnvGuard guard("SETTLE_SUBSET_CELL_LIMIT", "4");
        CHECK_THROWS_AS(enumerate_maximal(Dims(3, 3), EnumMethod::Subset), ResourceError);
    }
    {
        EnvGuard guard("SETTLE_BACKTRACK_CELL_LIMIT", "4");
        CHECK_THROWS_AS(enumerate_maximal(Dims(3, 3), EnumMethod::Backtrack), ResourceError);
    }
    {
        EnvGuard guard("SETTLE_CENSUS_CELL_LIMIT", "20");
        // budget may never exceed what 64-bit factorials support
        CHECK_NOTHROW(count_preimages(Dims(2, 3)));
    }
    CHECK_NOTHROW(enumerate_maximal(Dims(3, 3), EnumMethod::Subset));
}

TEST_CASE("enumeration CSV snapshot") {
    EnumerationResult r = enumerate_maximal(Dims(3, 3));
    std::ostringstream out;
    write_enumeration_csv(out, r, "");
    CHECK(out.str() == slurp(golden_path("enum_3x3.csv")));
}

TEST_CASE("sequential-law CSV snapshot") {
    OccupancyDistribution xs = xs_distribution_exact(Dims(3, 3));
    std::ostringstream out;
    write_pmf_csv(out, xs, "");
    CHECK(out.str() == slurp(golden_path("xs_3x3.csv")));
}

TEST_CASE("JSON writers emit parseable documents with exact fractions") {
    OccupancyDistribution xs = xs_distribution_exact(Dims(3, 3));
    std::ostringstream out;
    write_pmf_json(out, xs, "");
    ordered_json doc = ordered_json::parse(out.str());
    CHECK(doc["kind"] == "sequential-model");
    CHECK(doc["dims"]["m"] == 3);
    CHECK(doc["dims"]["n"] == 3);
    REQUIRE(doc["pmf"].size() == 2);
    CHECK(doc["pmf"][0]["k"] == 7);
    CHECK(doc["pmf"][0]["numerator"] == 9);
    CHECK(doc["pmf"][0]["denominator"] == 14);
    CHECK(doc.contains("version"));
    CHECK_FALSE(doc.contains("generated")); // suppressed timestamp stays absent
}
