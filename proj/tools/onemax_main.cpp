#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli_support.hpp"
#include "onemax/onemax.h"

namespace {

using cli::Selection;

struct CommonOpts {
    std::string algo;
    std::string mode;
    int n = 0;
    std::string p_min_text;
    std::string static_text;
    std::string tie_break = "min";
    double tail_eps = 1e-15;
    int grid_points = 64;
    double refine_tol = 1e-10;
    std::string out;
    std::string cache_dir;
    bool no_cache = false;
};

void add_selection_flags(CLI::App* cmd, CommonOpts& o, bool with_n) {
    cmd->add_option("--algo", o.algo, "Algorithm: rls, ea or ea-res")->required();
    cmd->add_option("--mode", o.mode, "Mode: drift, opt, static or back")->required();
    if (with_n)
        cmd->add_option("--n", o.n, "Problem dimension")->required()->check(CLI::PositiveNumber);
    cmd->add_option("--p-min", o.p_min_text,
                    "Rate lower bound for ea-res: 0, 1/2n, 1/n or a real literal");
    cmd->add_option("--static-value", o.static_text,
                    "Static strength or rate: opt, 1/n, 1/2n or a literal (default: 1 for rls, "
                    "opt otherwise)");
    cmd->add_option("--tie-break", o.tie_break, "Strength tie break: min or max")
        ->check(CLI::IsMember({"min", "max"}));
    cmd->add_option("--tail-eps", o.tail_eps, "Binomial weight truncation (default 1e-15)");
    cmd->add_option("--grid-points", o.grid_points, "Rate optimizer grid size (default 64)");
    cmd->add_option("--refine-tol", o.refine_tol, "Rate optimizer tolerance (default 1e-10)");
    cmd->add_option("--out", o.out, "Output path (or stem for multi-file commands)");
    cmd->add_option("--cache-dir", o.cache_dir,
                    "Cache directory (default $ONEMAX_CACHE_DIR, then ./cache)");
    cmd->add_flag("--no-cache", o.no_cache, "Do not read or write the result cache");
}

Selection make_selection(const CommonOpts& o, int n) {
    cli::algo_id(o.algo);
    cli::mode_id(o.mode);
    Selection s;
    s.algo = o.algo;
    s.mode = o.mode;
    s.n = n;
    if (!o.p_min_text.empty()) {
        if (o.algo != "ea-res") throw cli::UsageError("--p-min applies to --algo ea-res only");
        s.p_min = cli::parse_p_min(o.p_min_text, n);
    }
    if (o.mode == "static") {
        const std::string text =
            o.static_text.empty() ? (o.algo == "rls" ? "1" : "opt") : o.static_text;
        s.static_value = cli::parse_static_value(text, o.algo, n);
    } else if (!o.static_text.empty()) {
        throw cli::UsageError("--static-value requires --mode static");
    }
    if (o.mode == "back" && o.algo != "ea")
        throw cli::UsageError("--mode back is defined for --algo ea only");
    s.tie_break = o.tie_break;
    s.tail_epsilon = o.tail_eps;
    s.grid_points = o.grid_points;
    s.refine_tolerance = o.refine_tol;
    return s;
}

std::string strip_csv(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".csv")
        return path.substr(0, path.size() - 4);
    return path;
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

void run_policy(const CommonOpts& o) {
    const Selection s = make_selection(o, o.n);
    const cli::CacheConfig cache{cli::resolve_cache_dir(o.cache_dir), !o.no_cache, true};
    const cli::Build b = cli::obtain_build(s, cache);
    const std::string csv =
        o.out.empty() ? "policy_" + s.algo + "_" + s.mode + "_n" + std::to_string(s.n) + ".csv"
                      : o.out;
    cli::write_policy_csv(csv, b.values);
    cli::write_policy_sidecar(csv, s, b);
}

struct RuntimeOpts {
    CommonOpts common;
    std::string dims;
    bool normalize = false;
    bool gradient = false;
    bool per_level = false;
    bool no_compute = false;
};

void run_runtime(const RuntimeOpts& r) {
    std::vector<int> dims;
    if (r.common.n > 0) dims.push_back(r.common.n);
    for (int n : cli::parse_dims(r.dims)) dims.push_back(n);
    if (dims.empty()) throw cli::UsageError("provide --dims (or --n)");

    const cli::CacheConfig cache{cli::resolve_cache_dir(r.common.cache_dir), !r.common.no_cache,
                                 !r.no_compute};
    const std::string out = r.common.out.empty()
                                ? "runtime_" + r.common.algo + "_" + r.common.mode + ".csv"
                                : r.common.out;
    const std::string stem = strip_csv(out);

    std::ofstream summary = open_csv(out);
    summary << "algorithm,mode,p_min,n,expected_time,normalized_time\n";
    for (int n : dims) {
        const Selection s = make_selection(r.common, n);
        const cli::Build b = cli::obtain_build(s, cache);
        summary << s.algo << ',' << s.mode << ',' << cli::format_double(s.p_min) << ',' << n << ','
                << cli::format_double(b.total) << ',';
        if (r.normalize && n >= 2)
            summary << cli::format_double(b.total / (n * std::log(static_cast<double>(n))));
        summary << '\n';

        if (r.per_level || r.gradient) {
            const std::string lpath = stem + "_n" + std::to_string(n) + "_levels.csv";
            std::ofstream levels = open_csv(lpath);
            levels << (r.gradient ? "level,remaining_time,gradient" : "level,remaining_time")
                   << '\n';
            for (int l = 0; l <= n; ++l) {
                levels << l << ',' << cli::format_double(b.times[static_cast<size_t>(l)]);
                if (r.gradient) {
                    levels << ',';
                    if (l >= 1)
                        levels << cli::format_double(b.times[static_cast<size_t>(l)] -
                                                     b.times[static_cast<size_t>(l) - 1]);
                }
                levels << '\n';
            }
            std::printf("wrote %s\n", lpath.c_str());
        }
    }
    std::printf("wrote %s\n", out.c_str());
}

struct SimulateOpts {
    CommonOpts common;
    int runs = 0;
    uint64_t seed = 1;
    uint64_t budget_cap = 0;
    std::string budgets;
    std::string targets;
    bool raw = false;
};

void run_simulate(const SimulateOpts& m) {
    if (m.runs < 1) throw cli::UsageError("--runs must be >= 1");
    const Selection s = make_selection(m.common, m.common.n);

    // Simulation always computes the policy through the library so the
    // sampling setup matches the requested tolerances exactly.
    cli::PolicyHandle pol;
    cli::compute_policy_handle(s, pol);
    cli::RunsHandle runs;
    cli::check(om_simulate(pol.ptr, m.runs, m.seed, m.budget_cap, &runs.ptr), "simulation");

    std::vector<uint64_t> budgets = cli::parse_budgets(m.budgets);
    std::vector<int> targets = cli::parse_targets(m.targets, s.n);
    if (budgets.empty() && targets.empty()) targets.push_back(s.n);

    const std::string stem =
        m.common.out.empty()
            ? "simulate_" + s.algo + "_" + s.mode + "_n" + std::to_string(s.n)
            : strip_csv(m.common.out);
    const bool both = !budgets.empty() && !targets.empty();

    if (!budgets.empty()) {
        const std::string path = both ? stem + "_budgets.csv" : stem + ".csv";
        std::ofstream out = open_csv(path);
        out << "point,mean,std,count\n";
        for (uint64_t b : budgets) {
            double mean = 0.0, stddev = 0.0;
            uint64_t count = 0;
            cli::check(om_runs_budget_stats(runs.ptr, b, &mean, &stddev, &count),
                       "fixed-budget statistics");
            out << b << ',' << cli::format_double(mean) << ',' << cli::format_double(stddev) << ','
                << count << '\n';
        }
        std::printf("wrote %s\n", path.c_str());
    }
    if (!targets.empty()) {
        const std::string path = both ? stem + "_targets.csv" : stem + ".csv";
        std::ofstream out = open_csv(path);
        out << "point,mean,std,count,censored\n";
        for (int t : targets) {
            double mean = 0.0, stddev = 0.0;
            uint64_t count = 0, censored = 0;
            cli::check(om_runs_target_stats(runs.ptr, t, &mean, &stddev, &count, &censored),
                       "fixed-target statistics");
            out << t << ',' << cli::format_double(mean) << ',' << cli::format_double(stddev) << ','
                << count << ',' << censored << '\n';
        }
        std::printf("wrote %s\n", path.c_str());
    }
    if (m.raw) {
        const std::string path = stem + "_raw.csv";
        std::ofstream out = open_csv(path);
        out << "run,seed,evals,fitness\n";
        int count = 0;
        cli::check(om_runs_count(runs.ptr, &count), "run count");
        for (int r = 0; r < count; ++r) {
            uint64_t seed = 0;
            cli::check(om_runs_seed(runs.ptr, r, &seed), "run seed");
            int events = 0;
            cli::check(om_runs_event_count(runs.ptr, r, &events), "event count");
            for (int e = 0; e < events; ++e) {
                uint64_t evals = 0;
                int fitness = 0;
                cli::check(om_runs_event(runs.ptr, r, e, &evals, &fitness), "event");
                out << r << ',' << seed << ',' << evals << ',' << fitness << '\n';
            }
        }
        std::printf("wrote %s\n", path.c_str());
    }
}

struct TableOpts {
    std::string dims;
    std::string algos = "@all";
    std::string out = "table.csv";
    std::string cache_dir;
    bool no_cache = false;
    bool no_compute = false;
};

void run_table(const TableOpts& t) {
    const std::vector<int> dims = cli::parse_dims(t.dims);
    if (dims.empty()) throw cli::UsageError("--dims must list at least one dimension");

    std::vector<std::string> ids;
    if (t.algos == "@all") {
        ids = cli::all_variants();
    } else {
        std::string item;
        std::istringstream in(t.algos);
        while (std::getline(in, item, ','))
            if (!item.empty()) ids.push_back(item);
        for (const std::string& id : ids) cli::variant_selection(id, dims.front());  // validate
    }

    const cli::CacheConfig cache{cli::resolve_cache_dir(t.cache_dir), !t.no_cache, !t.no_compute};
    std::ofstream out = open_csv(t.out);
    out << "variant";
    for (int n : dims) out << ',' << n;
    out << '\n';
    int blanks = 0;
    for (const std::string& id : ids) {
        out << id;
        for (int n : dims) {
            out << ',';
            try {
                const cli::Build b = cli::obtain_build(cli::variant_selection(id, n), cache);
                out << cli::format_double(b.total);
            } catch (const cli::CacheMissError&) {
                ++blanks;  // cache-only run: leave the cell empty
            }
        }
        out << '\n';
    }
    if (blanks > 0)
        std::fprintf(stderr, "warning: %d cell(s) left blank, no cached policy and --no-compute is set\n",
                     blanks);
    std::printf("wrote %s\n", t.out.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fitness-dependent mutation policies, expected optimization times and "
                 "simulations for OneMax"};
    app.require_subcommand(1);

    CommonOpts policy_opts;
    CLI::App* policy = app.add_subcommand("policy", "Compute a per-level mutation policy");
    add_selection_flags(policy, policy_opts, true);
    policy->callback([&] { run_policy(policy_opts); });

    RuntimeOpts runtime_opts;
    CLI::App* runtime =
        app.add_subcommand("runtime", "Expected optimization times for one or more dimensions");
    add_selection_flags(runtime, runtime_opts.common, false);
    runtime->add_option("--n", runtime_opts.common.n, "Single problem dimension")
        ->check(CLI::PositiveNumber);
    runtime->add_option("--dims", runtime_opts.dims, "Comma-separated problem dimensions");
    runtime->add_flag("--normalize", runtime_opts.normalize,
                      "Fill the normalized_time column (expected time / n ln n)");
    runtime->add_flag("--gradient", runtime_opts.gradient,
                      "Per-level files include time(l) - time(l-1)");
    runtime->add_flag("--per-level", runtime_opts.per_level,
                      "Write a level,remaining_time file per dimension");
    runtime->add_flag("--no-compute", runtime_opts.no_compute,
                      "Serve results from the cache only; fail on a miss");
    runtime->callback([&] { run_runtime(runtime_opts); });

    SimulateOpts sim_opts;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo runs of a policy");
    add_selection_flags(simulate, sim_opts.common, true);
    simulate->add_option("--runs", sim_opts.runs, "Number of independent runs")->required();
    simulate->add_option("--seed", sim_opts.seed, "Master seed (default 1)");
    simulate->add_option("--budget-cap", sim_opts.budget_cap,
                         "Evaluation cap per run (default: 100 n ln n)");
    simulate->add_option("--budgets", sim_opts.budgets,
                         "Comma-separated budgets for best-fitness statistics");
    simulate->add_option("--targets", sim_opts.targets,
                         "Comma-separated target fitnesses for hitting-time statistics");
    simulate->add_flag("--raw", sim_opts.raw, "Also write every improvement event");
    simulate->callback([&] { run_simulate(sim_opts); });

    TableOpts table_opts;
    CLI::App* table =
        app.add_subcommand("table", "Wide expected-time table: variants x dimensions");
    table->add_option("--dims", table_opts.dims, "Comma-separated problem dimensions")->required();
    table->add_option("--algos", table_opts.algos,
                      "Comma-separated variant ids (default: all known variants)");
    table->add_option("--out", table_opts.out, "Output path (default table.csv)");
    table->add_option("--cache-dir", table_opts.cache_dir, "Cache directory");
    table->add_flag("--no-cache", table_opts.no_cache, "Do not read or write the result cache");
    table->add_flag("--no-compute", table_opts.no_compute,
                    "Serve results from the cache only; fail on a miss");
    table->callback([&] { run_table(table_opts); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const cli::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
