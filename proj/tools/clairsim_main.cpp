// clairsim: seed-driven simulator and analysis toolkit for distributed
// training I/O. Subcommands: simulate, compare, analyze, sweep, presets,
// dump-config.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "clairsim/analysis.hpp"
#include "clairsim/config.hpp"
#include "clairsim/simulator.hpp"

namespace fs = std::filesystem;
using namespace clairsim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitInternal = 4;

struct CommonArgs {
    std::string preset;
    std::string config_path;
    std::string policy = "nopfs";
    uint64_t seed = 1;
    int epochs = -1;
    int per_worker_batch = -1;
    bool no_drop_last = false;
    double scale = 1.0;
    bool heuristic = false;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool with_policy = true) {
    cmd->add_option("--preset", a.preset, "scenario preset name (see `presets`)");
    cmd->add_option("--config", a.config_path, "run config JSON file");
    if (with_policy) cmd->add_option("--policy", a.policy, "I/O policy");
    cmd->add_option("--seed", a.seed, "shuffle seed");
    cmd->add_option("--epochs", a.epochs, "number of epochs");
    cmd->add_option("--batch", a.per_worker_batch, "per-worker batch size");
    cmd->add_flag("--no-drop-last", a.no_drop_last, "keep the final short batch");
    cmd->add_option("--scale", a.scale, "desk-scale factor for dataset and capacities");
    cmd->add_flag("--heuristic-mode", a.heuristic, "emulate the remote-availability heuristic");
    cmd->add_option("--out", a.out_dir, "output directory (default $CLAIRSIM_OUT or .)");
}

RunConfig resolve_run(const CommonArgs& a, bool need_policy = true) {
    RunConfig run;
    if (!a.config_path.empty()) {
        run = load_run_config_file(a.config_path);
    } else if (!a.preset.empty()) {
        Scenario sc;
        try {
            sc = make_scenario(a.preset);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        run = run_config_from_scenario(sc);
    } else {
        throw ConfigError("either --preset or --config is required");
    }
    if (need_policy) {
        const auto kind = policy_from_name(a.policy);
        if (!kind) throw ConfigError("unknown policy '" + a.policy + "'");
        run.policy.kind = *kind;
    }
    run.policy.heuristic_mode = run.policy.heuristic_mode || a.heuristic;
    run.seed.value = a.seed;
    if (a.epochs > 0) run.epochs = static_cast<uint32_t>(a.epochs);
    if (a.per_worker_batch > 0) run.per_worker_batch = static_cast<uint32_t>(a.per_worker_batch);
    if (a.no_drop_last) run.drop_last = false;
    run.scale = a.scale;
    // normalize through the loader so validation and scaling happen once
    return load_run_config(dump_run_config(run));
}

fs::path output_dir(const CommonArgs& a) {
    if (!a.out_dir.empty()) return a.out_dir;
    if (const char* env = std::getenv("CLAIRSIM_OUT")) return env;
    return ".";
}

json result_summary(const SimResult& r, const RunConfig& run) {
    json doc;
    doc["policy"] = policy_name(run.policy.kind);
    doc["preset"] = run.preset;
    doc["seed"] = run.seed.value;
    doc["epochs"] = run.epochs;
    doc["total_time_s"] = r.total_time_s;
    doc["perfect_bound_s"] = r.perfect_bound_s;
    doc["stall_time_s"] = r.stall_time_s;
    doc["worker_total_s"] = r.worker_total_s;
    doc["worker_stall_s"] = r.worker_stall_s;
    doc["order_modified"] = r.order_modified;
    doc["coverage"] = r.coverage;
    doc["false_positive_remote_requests"] = r.false_positive_remote;
    doc["max_staging_occupancy_mb"] = r.max_staging_occupancy_mb;
    json demand;
    for (const auto& [loc, stat] : r.demand) {
        demand[loc] = {{"fetch_time_s", stat.fetch_s}, {"bytes_mb", stat.bytes_mb}};
    }
    doc["demand_fetch"] = std::move(demand);
    json fill;
    for (const auto& [loc, stat] : r.fill)
        fill[loc] = {{"fetch_time_s", stat.fetch_s}, {"bytes_mb", stat.bytes_mb}};
    doc["cache_fill"] = std::move(fill);
    json epoch_stats = json::array();
    for (const auto& e : r.epochs)
        epoch_stats.push_back({{"time_s", e.time_s},
                               {"stall_s", e.stall_s},
                               {"pfs_demand_bytes_mb", e.pfs_demand_bytes_mb}});
    doc["epoch_stats"] = std::move(epoch_stats);
    if (!r.warnings.empty()) doc["warnings"] = r.warnings;
    return doc;
}

void write_batches_csv(const fs::path& path, const SimResult& r) {
    std::ofstream out(path);
    out << "batch_index,worker,seconds";
    for (const auto& key : r.location_keys) out << "," << key << "_bytes_mb";
    out << "\n";
    for (size_t w = 0; w < r.per_batch_s.size(); ++w) {
        for (size_t b = 0; b < r.per_batch_s[w].size(); ++b) {
            out << b << "," << w << "," << r.per_batch_s[w][b];
            for (double v : r.per_batch_bytes_mb[w][b]) out << "," << v;
            out << "\n";
        }
    }
}

int cmd_simulate(const CommonArgs& a) {
    const RunConfig run = resolve_run(a);
    const auto dataset = run.make_dataset();
    const auto streams = build_access_streams(run.seed, static_cast<uint32_t>(run.dataset_samples),
                                              run.partition());
    SimOptions opt;
    opt.heuristic_mode = run.policy.heuristic_mode;
    const SimResult result = simulate(run.system, dataset, streams, run.policy, opt);
    for (const auto& warning : result.warnings) std::cerr << "warning: " << warning << "\n";

    const fs::path dir = output_dir(a);
    fs::create_directories(dir);
    const json summary = result_summary(result, run);
    std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";
    write_batches_csv(dir / "batches.csv", result);
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_compare(const CommonArgs& a, const std::string& policies_arg) {
    RunConfig base = resolve_run(a, false);
    std::vector<PolicyKind> kinds;
    if (policies_arg.empty() || policies_arg == "all") {
        kinds = all_policies();
    } else {
        std::stringstream ss(policies_arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto k = policy_from_name(tok);
            if (!k) throw ConfigError("unknown policy '" + tok + "'");
            kinds.push_back(*k);
        }
    }
    const auto dataset = base.make_dataset();
    const auto streams = build_access_streams(
        base.seed, static_cast<uint32_t>(base.dataset_samples), base.partition());

    std::ostringstream csv;
    csv << "policy,location,fetch_time_s,fraction,total_time_s,stall_time_s,bytes_mb\n";
    for (PolicyKind kind : kinds) {
        base.policy.kind = kind;
        SimOptions opt;
        opt.heuristic_mode = base.policy.heuristic_mode;
        std::string error;
        try {
            const SimResult r = simulate(base.system, dataset, streams, base.policy, opt);
            double fetch_total = 0;
            for (const auto& [loc, stat] : r.demand) fetch_total += stat.fetch_s;
            for (const auto& loc : r.location_keys) {
                const auto& stat = r.demand.at(loc);
                csv << policy_name(kind) << "," << loc << "," << stat.fetch_s << ","
                    << (fetch_total > 0 ? stat.fetch_s / fetch_total : 0.0) << ","
                    << r.total_time_s << "," << r.stall_time_s << "," << stat.bytes_mb << "\n";
            }
        } catch (const PolicyInfeasibleError& e) {
            csv << policy_name(kind) << ",infeasible,,,,,\n";
            std::cerr << policy_name(kind) << ": " << e.what() << "\n";
        }
    }
    const fs::path dir = output_dir(a);
    fs::create_directories(dir);
    std::ofstream(dir / "compare.csv") << csv.str();
    std::cout << csv.str();
    return kExitOk;
}

struct AnalyzeArgs {
    uint32_t workers = 16;
    uint32_t epochs = 90;
    uint64_t samples = 1'281'167;
    double delta = 0.8;
    uint64_t seed = 1;
    bool monte_carlo = false;
    std::string out_dir;
};

int cmd_analyze(const AnalyzeArgs& a) {
    AccessDistributionParams params{a.workers, a.epochs, a.samples, a.delta};
    json doc;
    doc["workers"] = a.workers;
    doc["epochs"] = a.epochs;
    doc["samples"] = a.samples;
    doc["delta"] = a.delta;
    doc["hot_count_threshold"] = hot_count_threshold(a.workers, a.epochs, a.delta);
    doc["prob_exceeds"] = prob_exceeds(params);
    doc["expected_hot_samples"] = expected_hot_samples(params);
    if (a.workers > 1) {
        const auto b = lemma1_bounds(a.workers, a.epochs, std::min<double>(a.delta, a.workers - 1));
        doc["lemma1"] = {{"high_threshold", b.high_threshold},
                         {"counterpart_low_bound", b.counterpart_low_bound},
                         {"low_threshold", b.low_threshold},
                         {"counterpart_high_bound", b.counterpart_high_bound}};
    }
    fs::path dir = a.out_dir.empty() ? fs::path(".") : fs::path(a.out_dir);
    fs::create_directories(dir);
    if (a.monte_carlo) {
        const auto hist = monte_carlo_histogram(Seed{a.seed}, a.workers, a.epochs,
                                                static_cast<uint32_t>(a.samples));
        doc["monte_carlo"] = {
            {"seed", a.seed},
            {"mean_count", hist.mean_count()},
            {"hot_samples", hist.count_at_least(hot_count_threshold(a.workers, a.epochs, a.delta))}};
        std::ofstream csv(dir / "histogram.csv");
        csv << "count,samples\n";
        for (size_t c = 0; c < hist.buckets.size(); ++c) csv << c << "," << hist.buckets[c] << "\n";
    }
    std::ofstream(dir / "analyze.json") << doc.dump(2) << "\n";
    std::cout << doc.dump(2) << "\n";
    return kExitOk;
}

int cmd_sweep(const CommonArgs& a, const std::string& grid_path, unsigned jobs) {
    const RunConfig run = resolve_run(a);
    std::ifstream in(grid_path);
    if (!in) throw ConfigError("cannot open grid file '" + grid_path + "'");
    json gj;
    try {
        gj = json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid grid JSON: ") + e.what());
    }
    SweepGrid grid;
    for (const auto& axis : gj.at("axes")) {
        SweepAxis ax;
        ax.param = axis.at("param").get<std::string>();
        for (const auto& v : axis.at("values"))
            ax.values.push_back(ax.param == "compute_multiplier"
                                    ? v.get<double>()
                                    : parse_mb(v, "axis " + ax.param));
        grid.axes.push_back(std::move(ax));
    }
    try {
        grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }

    const auto dataset = run.make_dataset();
    const auto streams = build_access_streams(run.seed, static_cast<uint32_t>(run.dataset_samples),
                                              run.partition());
    SimOptions opt;
    opt.heuristic_mode = run.policy.heuristic_mode;
    const auto cells = sweep(run.system, dataset, streams, run.policy, grid, jobs, opt);

    std::ostringstream csv;
    for (const auto& ax : grid.axes) csv << ax.param << ",";
    csv << "total_time_s,stall_time_s,pfs_demand_bytes_mb,error\n";
    for (const auto& cell : cells) {
        for (const auto& [_, v] : cell.coords) csv << v << ",";
        if (cell.result) {
            double pfs_bytes = cell.result->demand.at("pfs").bytes_mb;
            csv << cell.result->total_time_s << "," << cell.result->stall_time_s << ","
                << pfs_bytes << ",\n";
        } else {
            csv << ",,,\"" << cell.error << "\"\n";
        }
    }
    const fs::path dir = output_dir(a);
    fs::create_directories(dir);
    std::ofstream(dir / "sweep.csv") << csv.str();
    std::cout << csv.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clairvoyant training-I/O simulator"};
    app.require_subcommand(1);

    CommonArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "run one policy on one configuration");
    add_common(sim, sim_args);

    CommonArgs cmp_args;
    std::string cmp_policies;
    auto* cmp = app.add_subcommand("compare", "compare policies (stacked-bar data)");
    add_common(cmp, cmp_args, false);
    cmp->add_option("--policies", cmp_policies, "comma-separated policies (default: all)");

    AnalyzeArgs an_args;
    auto* an = app.add_subcommand("analyze", "access-frequency distribution analysis");
    an->add_option("--workers", an_args.workers, "N");
    an->add_option("--epochs", an_args.epochs, "E");
    an->add_option("--samples", an_args.samples, "F");
    an->add_option("--delta", an_args.delta, "excess factor");
    an->add_option("--seed", an_args.seed, "stream seed for Monte Carlo");
    an->add_flag("--monte-carlo", an_args.monte_carlo, "histogram a real generated stream");
    an->add_option("--out", an_args.out_dir, "output directory");

    CommonArgs sweep_args;
    std::string grid_path;
    unsigned jobs = 1;
    auto* sw = app.add_subcommand("sweep", "simulate across a config grid");
    add_common(sw, sweep_args);
    sw->add_option("--grid", grid_path, "grid JSON file")->required();
    sw->add_option("--jobs", jobs, "parallel sweep workers");

    auto* pr = app.add_subcommand("presets", "list scenario presets");

    CommonArgs dump_args;
    auto* dc = app.add_subcommand("dump-config", "print the normalized run config");
    add_common(dc, dump_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_args);
        if (cmp->parsed()) return cmd_compare(cmp_args, cmp_policies);
        if (an->parsed()) return cmd_analyze(an_args);
        if (sw->parsed()) return cmd_sweep(sweep_args, grid_path, jobs);
        if (pr->parsed()) {
            for (const auto& name : scenario_names()) {
                const Scenario sc = make_scenario(name);
                const double total =
                    sc.total_target_mb ? *sc.total_target_mb
                                       : sc.mean_mb * static_cast<double>(sc.samples);
                std::cout << name << ": F=" << sc.samples << " mean=" << sc.mean_mb
                          << " MB sigma=" << sc.sigma_mb << " MB S=" << total
                          << " MB workers=" << sc.system.workers
                          << " batch/worker=" << sc.per_worker_batch << "\n";
            }
            return kExitOk;
        }
        if (dc->parsed()) {
            std::cout << dump_run_config(resolve_run(dump_args)).dump(2) << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const PolicyInfeasibleError& e) {
        std::cerr << "infeasible policy: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitConfig;
}
