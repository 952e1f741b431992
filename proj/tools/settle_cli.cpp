// Command-line front end: simulation batches, exact enumeration and census,
// table/sweep reproduction, and plot-ready CSV emission.
//
// Exit codes: 0 success, 1 usage or contract violation, 2 resource budget.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "settle/io.hpp"

namespace {

std::string now_utc() {
    std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

uint64_t fresh_seed() {
    std::random_device rd;
    uint64_t s = (static_cast<uint64_t>(rd()) << 32) ^ rd();
    return settle::splitmix64(s ^ static_cast<uint64_t>(std::time(nullptr)));
}

// Writes to --out or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw settle::ContractError("cannot open output file: " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

struct Options {
    uint64_t m = 0, n = 0;
    uint64_t runs = 0;
    uint64_t seed = 0;
    bool seeded = false;
    unsigned workers = 1;
    std::string format = "text";
    std::string out;
    std::string histogram_out;
    std::string method = "auto";
    std::string fixed = "m";
    uint64_t fixed_value = 0;
    std::vector<uint64_t> ms, ns, varying;
    bool no_timestamp = false;
};

std::string stamp(const Options& opt) { return opt.no_timestamp ? "" : now_utc(); }

uint64_t ensure_seed(Options& opt) {
    if (!opt.seeded) {
        opt.seed = fresh_seed();
        std::cerr << "master_seed=" << opt.seed << " (generated; pass --seed to reproduce)\n";
    }
    return opt.seed;
}

settle::EnumMethod parse_method(const std::string& name) {
    if (name == "subset") return settle::EnumMethod::Subset;
    if (name == "backtrack") return settle::EnumMethod::Backtrack;
    return settle::EnumMethod::Auto;
}

void print_stats_text(std::ostream& os, const settle::DensityStats& s) {
    os << "m=" << s.dims.m << " n=" << s.dims.n << " runs=" << s.runs
       << " master_seed=" << s.master_seed << "\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "mean density = %.6f (std error = %.6f)\n", s.mean_density,
                  s.std_error);
    os << buf;
    std::snprintf(buf, sizeof(buf), "p5 = %.6f  p95 = %.6f\n", s.p5, s.p95);
    os << buf;
    os << "histogram:";
    for (const auto& [k, c] : s.histogram) os << " " << k << ":" << c;
    os << "\n";
}

int run_simulate(Options& opt) {
    settle::SimulationPlan plan;
    plan.dims = settle::Dims(opt.m, opt.n);
    plan.runs = opt.runs ? opt.runs : 1000;
    plan.master_seed = ensure_seed(opt);
    plan.workers = opt.workers;
    settle::DensityStats stats = settle::run_batch(plan);
    Sink sink(opt.out);
    if (opt.format == "csv")
        settle::write_stats_csv(sink.os(), stats, stamp(opt));
    else if (opt.format == "json")
        settle::write_stats_json(sink.os(), stats, stamp(opt));
    else
        print_stats_text(sink.os(), stats);
    if (!opt.histogram_out.empty()) {
        Sink hsink(opt.histogram_out);
        settle::write_histogram_csv(hsink.os(), stats, stamp(opt));
    }
    return 0;
}

int run_enumerate(Options& opt) {
    auto result = settle::enumerate_maximal(settle::Dims(opt.m, opt.n), parse_method(opt.method));
    Sink sink(opt.out);
    if (opt.format == "csv") {
        settle::write_enumeration_csv(sink.os(), result, stamp(opt));
    } else if (opt.format == "json") {
        settle::write_enumeration_json(sink.os(), result, stamp(opt));
    } else {
        sink.os() << result.configs.size() << " maximal configurations on " << opt.m << "x"
                  << opt.n << "\n";
        for (const settle::Config& c : result.configs)
            sink.os() << c.occupancy() << " " << settle::packed_string(c) << "\n";
        sink.os() << "spectrum:";
        for (const auto& [k, c] : result.occupancy_spectrum) sink.os() << " " << k << ":" << c;
        sink.os() << "\n";
    }
    return 0;
}

int run_census(Options& opt) {
    auto census = settle::count_preimages(settle::Dims(opt.m, opt.n), opt.workers);
    Sink sink(opt.out);
    if (opt.format == "csv") {
        settle::write_census_csv(sink.os(), census, stamp(opt));
    } else if (opt.format == "json") {
        settle::write_census_json(sink.os(), census, stamp(opt));
    } else {
        for (const auto& e : census.entries)
            sink.os() << settle::packed_string(e.config) << " " << e.count << "\n";
        sink.os() << "total " << census.total << " permutations over " << census.entries.size()
                  << " maximal configurations\n";
    }
    return 0;
}

void print_pmf_text(std::ostream& os, const settle::OccupancyDistribution& dist) {
    for (const auto& [k, p] : dist.pmf) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " (%.6f)\n", p.to_double());
        os << k << " -> " << p.str() << buf;
    }
}

int run_xu(Options& opt) {
    auto dist = settle::xu_distribution(settle::Dims(opt.m, opt.n), parse_method(opt.method));
    Sink sink(opt.out);
    if (opt.format == "csv")
        settle::write_pmf_csv(sink.os(), dist, stamp(opt));
    else if (opt.format == "json")
        settle::write_pmf_json(sink.os(), dist, stamp(opt));
    else
        print_pmf_text(sink.os(), dist);
    return 0;
}

int run_xs_exact(Options& opt) {
    auto dist = settle::xs_distribution_exact(settle::Dims(opt.m, opt.n), opt.workers);
    Sink sink(opt.out);
    if (opt.format == "csv")
        settle::write_pmf_csv(sink.os(), dist, stamp(opt));
    else if (opt.format == "json")
        settle::write_pmf_json(sink.os(), dist, stamp(opt));
    else
        print_pmf_text(sink.os(), dist);
    return 0;
}

int run_table(Options& opt) {
    uint64_t runs = opt.runs ? opt.runs : 100;
    auto table = settle::density_table(opt.ms, opt.ns, runs, ensure_seed(opt), opt.workers);
    Sink sink(opt.out);
    if (opt.format == "json")
        settle::write_table_json(sink.os(), table, stamp(opt));
    else
        settle::write_table_csv(sink.os(), table, stamp(opt));
    return 0;
}

int run_sweep(Options& opt) {
    uint64_t runs = opt.runs ? opt.runs : 2000;
    auto side = opt.fixed == "n" ? settle::FixedSide::N : settle::FixedSide::M;
    uint64_t seed = ensure_seed(opt);
    auto points =
        settle::percentile_band_sweep(side, opt.fixed_value, opt.varying, runs, seed, opt.workers);
    Sink sink(opt.out);
    if (opt.format == "json")
        settle::write_sweep_json(sink.os(), points, seed, stamp(opt));
    else
        settle::write_sweep_csv(sink.os(), points, seed, stamp(opt));
    return 0;
}

int run_render(Options& opt) {
    settle::Config config = settle::simulate_one(settle::Dims(opt.m, opt.n), ensure_seed(opt));
    Sink sink(opt.out);
    settle::write_config(sink.os(), config);
    return 0;
}

int run_check_conjectures(Options& opt) {
    Sink sink(opt.out);
    if (!opt.ms.empty() || !opt.ns.empty()) {
        // statistical mode: monotone decrease of table means
        uint64_t runs = opt.runs ? opt.runs : 100;
        auto table = settle::density_table(opt.ms, opt.ns, runs, ensure_seed(opt), opt.workers);
        auto rep = settle::monotonicity_report(table);
        settle::write_monotonicity_text(sink.os(), rep);
    } else {
        // exact mode: census extremes vs efficient/inefficient configs
        auto rep = settle::conjecture1_report(settle::Dims(opt.m, opt.n), opt.workers);
        settle::write_conjecture1_text(sink.os(), rep);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"settlement-density toolkit: sequential random building on a grid"};
    app.require_subcommand(1);

    Options opt;
    auto add_common = [&](CLI::App* cmd, bool dims_required) {
        if (dims_required) {
            cmd->add_option("--m", opt.m, "grid rows")->required()->check(CLI::PositiveNumber);
            cmd->add_option("--n", opt.n, "grid columns")->required()->check(CLI::PositiveNumber);
        }
        cmd->add_option("--out", opt.out, "output file (default stdout)");
        cmd->add_flag("--no-timestamp", opt.no_timestamp,
                      "omit the generated-at field for byte-reproducible output");
        return cmd;
    };
    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", opt.seed, "master seed (generated and printed if omitted)")
            ->each([&](const std::string&) { opt.seeded = true; });
        cmd->add_option("--workers", opt.workers, "worker threads (results never depend on this)")
            ->check(CLI::PositiveNumber);
    };
    auto add_format = [&](CLI::App* cmd, const std::string& choices) {
        cmd->add_option("--format", opt.format, "output format: " + choices)
            ->check(CLI::IsMember({"text", "csv", "json"}));
        return cmd;
    };

    CLI::App* simulate = add_common(app.add_subcommand("simulate", "Monte Carlo density batch"), true);
    add_seed(simulate);
    add_format(simulate, "text|csv|json");
    simulate->add_option("--runs", opt.runs, "number of runs (default 1000)")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--histogram-out", opt.histogram_out,
                         "also write the occupancy histogram CSV here");

    CLI::App* enumerate =
        add_common(app.add_subcommand("enumerate", "list all maximal configurations"), true);
    add_format(enumerate, "text|csv|json");
    enumerate->add_option("--method", opt.method, "auto|subset|backtrack")
        ->check(CLI::IsMember({"auto", "subset", "backtrack"}));

    CLI::App* census = add_common(
        app.add_subcommand("census", "permutation preimage counts of every maximal configuration"),
        true);
    add_seed(census);
    add_format(census, "text|csv|json");

    CLI::App* xu = add_common(
        app.add_subcommand("xu", "exact occupancy law of a uniform maximal configuration"), true);
    add_format(xu, "text|csv|json");
    xu->add_option("--method", opt.method, "auto|subset|backtrack")
        ->check(CLI::IsMember({"auto", "subset", "backtrack"}));

    CLI::App* xs = add_common(
        app.add_subcommand("xs-exact", "exact occupancy law of the sequential model"), true);
    add_seed(xs);
    add_format(xs, "text|csv|json");

    CLI::App* table =
        add_common(app.add_subcommand("table", "mean-density table over m and n lists"), false);
    add_seed(table);
    add_format(table, "csv|json");
    table->add_option("--ms", opt.ms, "comma-separated m values")->required()->delimiter(',');
    table->add_option("--ns", opt.ns, "comma-separated n values")->required()->delimiter(',');
    table->add_option("--runs", opt.runs, "runs per cell (default 100)")
        ->check(CLI::PositiveNumber);

    CLI::App* sweep = add_common(
        app.add_subcommand("sweep", "mean and 5th/95th percentile band along one dimension"),
        false);
    add_seed(sweep);
    add_format(sweep, "csv|json");
    sweep->add_option("--fixed", opt.fixed, "which side stays fixed: m|n")
        ->required()
        ->check(CLI::IsMember({"m", "n"}));
    sweep->add_option("--fixed-value", opt.fixed_value, "value of the fixed side")
        ->required()
        ->check(CLI::PositiveNumber);
    sweep->add_option("--varying", opt.varying, "comma-separated values of the other side")
        ->required()
        ->delimiter(',');
    sweep->add_option("--runs", opt.runs, "runs per point (default 2000)")
        ->check(CLI::PositiveNumber);

    CLI::App* render = add_common(
        app.add_subcommand("render", "one seeded settlement as a parseable text grid"), true);
    add_seed(render);

    CLI::App* check = app.add_subcommand(
        "check-conjectures", "exact census-extremes check (--m/--n) or statistical "
                             "monotone-decrease check (--ms/--ns)");
    check->add_option("--m", opt.m, "grid rows (exact mode)")->check(CLI::PositiveNumber);
    check->add_option("--n", opt.n, "grid columns (exact mode)")->check(CLI::PositiveNumber);
    check->add_option("--ms", opt.ms, "m values (statistical mode)")->delimiter(',');
    check->add_option("--ns", opt.ns, "n values (statistical mode)")->delimiter(',');
    check->add_option("--runs", opt.runs, "runs per cell (statistical mode, default 100)")
        ->check(CLI::PositiveNumber);
    check->add_option("--out", opt.out, "output file (default stdout)");
    add_seed(check);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (simulate->parsed()) return run_simulate(opt);
        if (enumerate->parsed()) return run_enumerate(opt);
        if (census->parsed()) return run_census(opt);
        if (xu->parsed()) return run_xu(opt);
        if (xs->parsed()) return run_xs_exact(opt);
        if (table->parsed()) return run_table(opt);
        if (sweep->parsed()) return run_sweep(opt);
        if (render->parsed()) return run_render(opt);
        if (check->parsed()) {
            if (opt.ms.empty() && opt.ns.empty() && (opt.m == 0 || opt.n == 0))
                throw settle::ContractError(
                    "check-conjectures needs --m/--n (exact) or --ms/--ns (statistical)");
            return run_check_conjectures(opt);
        }
    } catch (const settle::ResourceError& e) {
        std::cerr << "resource budget exceeded: " << e.what() << "\n";
        return 2;
    } catch (const settle::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
