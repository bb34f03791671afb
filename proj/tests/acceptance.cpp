// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Always compiled with checks on.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clairsim/analysis.hpp"
#include "clairsim/config.hpp"
#include "clairsim/rng.hpp"
#include "clairsim/scenarios.hpp"
#include "clairsim/simulator.hpp"

using namespace clairsim;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;
std::vector<std::string> g_notes;

#define ACC_CHECK(cond, msg)                                            \
    do {                                                                \
        if (!(cond)) {                                                  \
            ++local_failures;                                           \
            g_notes.push_back(std::string("      check failed: ") + msg); \
        }                                                               \
    } while (0)

void report(const char* id, const char* title, int local_failures, double seconds) {
    const bool ok = local_failures == 0;
    if (!ok) g_failures += local_failures;
    std::printf("[%s] %s: %s (%.1fs)\n", ok ? "PASS" : "FAIL", id, title, seconds);
    for (const auto& note : g_notes) std::printf("%s\n", note.c_str());
    g_notes.clear();
}

struct Timer {
    Clock::time_point start = Clock::now();
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start).count();
    }
};

json summary_digest(const SimResult& r) {
    json doc;
    doc["total"] = r.total_time_s;
    doc["stall"] = r.stall_time_s;
    doc["workers"] = r.worker_total_s;
    for (const auto& [loc, stat] : r.demand)
        doc["demand"][loc] = {stat.fetch_s, stat.bytes_mb};
    for (const auto& [loc, stat] : r.fill) doc["fill"][loc] = {stat.fetch_s, stat.bytes_mb};
    doc["fp"] = r.false_positive_remote;
    doc["occupancy"] = r.max_staging_occupancy_mb;
    return doc;
}

double total_pfs_bytes(const SimResult& r) {
    double bytes = r.demand.at("pfs").bytes_mb;
    const auto it = r.fill.find("pfs");
    if (it != r.fill.end()) bytes += it->second.bytes_mb;
    return bytes;
}

// ---------------------------------------------------------------------------
// Criterion 1: binomial expectation and Monte Carlo agreement (N=16, E=90,
// F=1,281,167, delta=0.8): analytic ~31,635; real-stream count within 5%.
void criterion_1() {
    Timer timer;
    int local_failures = 0;
    const AccessDistributionParams params{16, 90, 1'281'167, 0.8};
    const double expected = expected_hot_samples(params);
    ACC_CHECK(std::abs(expected - 31635.0) < 1.0,
              "analytic expectation " + std::to_string(expected) + " != ~31635");
    ACC_CHECK(std::abs(expected - 31634.685810763236) < 1e-6,
              "analytic expectation drifted from the frozen exact value");

    const auto hist = monte_carlo_histogram(Seed{1}, 16, 90, 1'281'167);
    const uint64_t hot = hist.count_at_least(hot_count_threshold(16, 90, 0.8));
    ACC_CHECK(std::abs(static_cast<double>(hot) - expected) / expected < 0.05,
              "monte carlo count " + std::to_string(hot) + " not within 5% of " +
                  std::to_string(expected));
    ACC_CHECK(hist.total_samples() == params.samples, "histogram does not cover the dataset");
    report("C1", "binomial expectation + Monte Carlo", local_failures, timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 2: Lemma-1 counterpart bounds never violated across >= 50 seeds,
// N in {2,4,16}, E in {4,10,90}, F in {1e3,1e4}.
void criterion_2() {
    Timer timer;
    int local_failures = 0;
    uint64_t checked = 0;
    for (uint32_t N : {2u, 4u, 16u}) {
        for (uint32_t E : {4u, 10u, 90u}) {
            for (uint32_t F : {1000u, 10000u}) {
                for (uint64_t seed = 0; seed < 50; ++seed) {
                    PartitionSpec part{N, N, E, false};
                    const auto counts = all_access_counts(Seed{seed}, F, part);
                    for (double delta : {0.2, 0.4, 0.6, 0.8, 1.0}) {
                        if (delta > N - 1) continue;
                        const auto b = lemma1_bounds(N, E, delta);
                        for (uint32_t k = 0; k < F; ++k) {
                            uint32_t hi = 0, lo = E;
                            for (uint32_t w = 0; w < N; ++w) {
                                hi = std::max(hi, counts[w][k]);
                                lo = std::min(lo, counts[w][k]);
                            }
                            ++checked;
                            if (hi >= b.high_threshold) {
                                uint32_t others = E + 1;
                                bool skipped = false;
                                for (uint32_t w = 0; w < N; ++w) {
                                    if (!skipped && counts[w][k] == hi) {
                                        skipped = true;
                                        continue;
                                    }
                                    others = std::min(others, counts[w][k]);
                                }
                                if (others > b.counterpart_low_bound) {
                                    ACC_CHECK(false, "upper counterpart bound violated");
                                    return report("C2", "Lemma 1 property suite", local_failures,
                                                  timer.seconds());
                                }
                            }
                            if (static_cast<int64_t>(lo) <= b.low_threshold) {
                                uint32_t others = 0;
                                bool skipped = false;
                                for (uint32_t w = 0; w < N; ++w) {
                                    if (!skipped && counts[w][k] == lo) {
                                        skipped = true;
                                        continue;
                                    }
                                    others = std::max(others, counts[w][k]);
                                }
                                if (others < b.counterpart_high_bound) {
                                    ACC_CHECK(false, "lower counterpart bound violated");
                                    return report("C2", "Lemma 1 property suite", local_failures,
                                                  timer.seconds());
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    ACC_CHECK(checked > 0, "no samples checked");
    report("C2", "Lemma 1 property suite", local_failures, timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 3: engine equals an independent straight-line recurrence
// evaluation on 100 random single-storage-class instances (N<=2, F<=8, E<=2).
void criterion_3() {
    Timer timer;
    int local_failures = 0;
    CounterRng rng(20240601);
    int ran = 0;
    while (ran < 100) {
        const uint32_t N = 1 + static_cast<uint32_t>(rng.bounded(2));
        const uint32_t F = N + static_cast<uint32_t>(rng.bounded(9 - N));
        const uint32_t E = 1 + static_cast<uint32_t>(rng.bounded(2));
        const uint32_t B = N * (1 + static_cast<uint32_t>(rng.bounded(4)));
        if (B > F) continue;
        ++ran;
        const double c = 1 + static_cast<double>(rng.bounded(2000));
        const double beta = 1 + static_cast<double>(rng.bounded(2000));
        const double pfs1 = 1 + static_cast<double>(rng.bounded(1000));
        const double pfsN = pfs1 + static_cast<double>(rng.bounded(1000));
        const uint32_t p0 = 1 + static_cast<uint32_t>(rng.bounded(8));
        const double w0 = 1 + static_cast<double>(rng.bounded(5000));
        const bool drop_last = rng.bounded(2) == 0;

        std::vector<double> sizes(F);
        for (auto& s : sizes) s = 0.1 + static_cast<double>(rng.bounded(100)) / 10.0;
        const auto dataset = DatasetModel::from_sizes(sizes);

        SystemConfig cfg;
        cfg.workers = N;
        cfg.compute_mbps = c;
        cfg.preprocess_mbps = beta;
        cfg.interconnect_mbps = 1000;
        cfg.pfs_curve = N > 1 ? ThroughputCurve({{1, pfs1}, {2, pfsN}})
                              : ThroughputCurve({{1, pfs1}});
        cfg.storage = {StorageClassSpec{"staging", 1e9,
                                        ThroughputCurve({{static_cast<double>(p0), w0}}),
                                        ThroughputCurve({{static_cast<double>(p0), w0}}), p0}};

        PartitionSpec part{N, B, E, drop_last};
        const auto streams = build_access_streams(Seed{rng.next()}, F, part);
        SimOptions opt;
        opt.record_consumption_times = true;
        const auto r = simulate(cfg, dataset, streams, PolicySpec{PolicyKind::Nopfs}, opt);

        for (uint32_t w = 0; w < N; ++w) {
            double cum = 0, t_prev = 0, s_prev = 0;
            for (size_t f = 0; f < streams[w].entries.size(); ++f) {
                const double s = sizes[streams[w].entries[f]];
                uint32_t gamma = 0;
                for (uint32_t o = 0; o < N; ++o)
                    if (f < streams[o].entries.size()) ++gamma;
                cum += s / (cfg.pfs_curve.at(gamma) / gamma) + std::max(s / beta, s * p0 / w0);
                const double avail = cum / p0;
                const double t_here = std::max(avail, f == 0 ? 0.0 : t_prev + s_prev / c);
                const double got = r.consumption_times_s[w][f];
                if (std::abs(got - t_here) > 1e-9 * std::max(1.0, std::abs(t_here))) {
                    ACC_CHECK(false, "t mismatch: engine " + std::to_string(got) + " oracle " +
                                         std::to_string(t_here));
                    return report("C3", "recurrence oracle", local_failures, timer.seconds());
                }
                t_prev = t_here;
                s_prev = s;
            }
        }
    }
    report("C3", "recurrence oracle (100 random instances)", local_failures, timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 4: Scenario 1 (MNIST). Naive is 1.5x-2.0x the best policy; every
// other policy within 10% of Perfect.
void criterion_4() {
    Timer timer;
    int local_failures = 0;
    const Scenario sc = make_scenario("mnist");
    const auto dataset = sc.make_dataset(1);
    PartitionSpec part{sc.system.workers, sc.global_batch(), 5, true};
    const auto streams = build_access_streams(Seed{1}, static_cast<uint32_t>(sc.samples), part);

    double perfect = 0, naive = 0, best = 1e300;
    for (PolicyKind kind : all_policies()) {
        const auto r = simulate(sc.system, dataset, streams, PolicySpec{kind});
        if (kind == PolicyKind::Perfect) perfect = r.total_time_s;
        if (kind == PolicyKind::Naive)
            naive = r.total_time_s;
        else
            best = std::min(best, r.total_time_s);
        if (kind != PolicyKind::Naive && kind != PolicyKind::Perfect) {
            ACC_CHECK(r.total_time_s <= 1.10 * (perfect > 0 ? perfect : r.total_time_s),
                      std::string(policy_name(kind)) + " more than 10% over Perfect");
        }
        ACC_CHECK(r.max_staging_occupancy_mb <= sc.system.staging().capacity_mb + 1e-9,
                  "staging occupancy exceeded d0");
    }
    const double ratio = naive / best;
    ACC_CHECK(ratio >= 1.5 && ratio <= 2.0,
              "naive/best ratio " + std::to_string(ratio) + " outside [1.5, 2.0]");
    report("C4", "Scenario 1 (MNIST) policy ordering", local_failures, timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 5: Scenario 2 (ImageNet-1k desk-scaled 1/100). NoPFS within 10%
// of Perfect, strictly below StagingBuffer and Naive, and fewer PFS bytes.
void criterion_5() {
    Timer timer;
    int local_failures = 0;
    Scenario sc = make_scenario("imagenet1k");
    scale_scenario(sc, 0.01);
    const auto dataset = sc.make_dataset(1);
    PartitionSpec part{sc.system.workers, sc.global_batch(), 5, true};
    const auto streams = build_access_streams(Seed{1}, static_cast<uint32_t>(sc.samples), part);

    const auto perfect = simulate(sc.system, dataset, streams, PolicySpec{PolicyKind::Perfect});
    const auto nopfs = simulate(sc.system, dataset, streams, PolicySpec{PolicyKind::Nopfs});
    const auto staging =
        simulate(sc.system, dataset, streams, PolicySpec{PolicyKind::StagingBuffer});
    const auto naive = simulate(sc.system, dataset, streams, PolicySpec{PolicyKind::Naive});

    ACC_CHECK(nopfs.total_time_s <= 1.10 * perfect.total_time_s, "NoPFS >10% over Perfect");
    ACC_CHECK(nopfs.total_time_s < staging.total_time_s, "NoPFS not strictly below StagingBuffer");
    ACC_CHECK(nopfs.total_time_s < naive.total_time_s, "NoPFS not strictly below Naive");
    ACC_CHECK(staging.total_time_s < naive.total_time_s, "ordering StagingBuffer < Naive broken");
    ACC_CHECK(total_pfs_bytes(nopfs) < total_pfs_bytes(staging),
              "NoPFS PFS bytes not strictly below StagingBuffer");
    // StagingBuffer reads every consumed byte from the PFS, every epoch
    double consumed = 0;
    for (const auto& st : streams)
        for (uint32_t k : st.entries) consumed += dataset.sizes_mb[k];
    ACC_CHECK(std::abs(staging.demand.at("pfs").bytes_mb - consumed) < 1e-6 * consumed,
              "StagingBuffer did not read everything from the PFS");
    report("C5", "Scenario 2 (ImageNet-1k/100) ordering", local_failures, timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 6: Scenario 3 (ImageNet-22k, full size). LBANN kinds are
// infeasible (library error + CLI exit 3); ParallelStaging and DeepIO report
// coverage < 1 or a modified order.
void criterion_6() {
    Timer timer;
    int local_failures = 0;
    const Scenario sc = make_scenario("imagenet22k");
    const auto dataset = sc.make_dataset(1);
    PartitionSpec part{sc.system.workers, sc.global_batch(), 2, true};
    const auto streams = build_access_streams(Seed{1}, static_cast<uint32_t>(sc.samples), part);

    for (PolicyKind kind : {PolicyKind::LbannDynamic, PolicyKind::LbannPreload}) {
        bool threw = false;
        try {
            build_policy({kind}, streams, sc.system, dataset);
        } catch (const PolicyInfeasibleError&) {
            threw = true;
        }
        ACC_CHECK(threw, std::string(policy_name(kind)) + " did not report infeasibility");
    }

#ifdef CLAIRSIM_CLI_PATH
    {
        const std::string cmd = std::string(CLAIRSIM_CLI_PATH) +
                                " simulate --preset imagenet22k --policy lbann-dynamic"
                                " --epochs 1 --out /tmp/clairsim_acceptance >/dev/null 2>&1";
        const int rc = std::system(cmd.c_str());
        ACC_CHECK(WIFEXITED(rc) && WEXITSTATUS(rc) == 3,
                  "CLI exit code for infeasible lbann-dynamic was not 3");
    }
#endif

    const auto parallel =
        simulate(sc.system, dataset, streams, PolicySpec{PolicyKind::ParallelStaging});
    ACC_CHECK(parallel.coverage < 1.0 || parallel.order_modified,
              "parallel-staging neither partial-coverage nor order-modified");
    const auto deepio =
        simulate(sc.system, dataset, streams, PolicySpec{PolicyKind::DeepIOOptimistic});
    ACC_CHECK(deepio.coverage < 1.0 || deepio.order_modified,
              "deepio-optimistic neither partial-coverage nor order-modified");
    report("C6", "Scenario 3 (ImageNet-22k) infeasibility", local_failures, timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 7: environment sweep on ImageNet-22k desk-scaled 1/100 with 5x
// compute/preprocess, NoPFS policy.
void criterion_7() {
    Timer timer;
    int local_failures = 0;
    Scenario sc = make_scenario("imagenet22k");
    scale_scenario(sc, 0.01);
    sc.system.compute_mbps *= 5;
    sc.system.preprocess_mbps *= 5;
    const auto dataset = sc.make_dataset(1);
    PartitionSpec part{sc.system.workers, sc.global_batch(), 5, true};
    const auto streams = build_access_streams(Seed{1}, static_cast<uint32_t>(sc.samples), part);

    // (a) staging-buffer-only configuration: runtimes equal within 1%
    {
        SystemConfig staging_only = sc.system;
        staging_only.storage.resize(1);
        SweepGrid grid;
        grid.axes.push_back({"staging_mb", {10, 20, 40, 50}});
        const auto cells =
            sweep(staging_only, dataset, streams, PolicySpec{PolicyKind::Nopfs}, grid, 4);
        double lo = 1e300, hi = 0;
        for (const auto& cell : cells) {
            ACC_CHECK(cell.error.empty(), "staging-only sweep point failed: " + cell.error);
            if (!cell.result) continue;
            lo = std::min(lo, cell.result->total_time_s);
            hi = std::max(hi, cell.result->total_time_s);
        }
        ACC_CHECK((hi - lo) / lo <= 0.01, "staging-only runtimes differ by more than 1%");
    }

    // (b)+(c) RAM x SSD surface
    {
        const std::vector<double> ram = {320, 640, 1280, 2560, 5120};
        const std::vector<double> ssd = {1280, 2560, 5120, 10240};
        SweepGrid grid;
        grid.axes.push_back({"ram_mb", ram});
        grid.axes.push_back({"ssd_mb", ssd});
        const auto cells = sweep(sc.system, dataset, streams, PolicySpec{PolicyKind::Nopfs}, grid,
                                 4);
        const auto total_at = [&](size_t ri, size_t si) {
            return cells[ri * ssd.size() + si].result->total_time_s;
        };
        for (const auto& cell : cells)
            ACC_CHECK(cell.error.empty() && cell.result.has_value(), "sweep point failed");
        if (local_failures == 0) {
            for (size_t ri = 0; ri < ram.size(); ++ri)
                for (size_t si = 1; si < ssd.size(); ++si)
                    ACC_CHECK(total_at(ri, si) <= total_at(ri, si - 1) + 1e-9,
                              "total time increases along the SSD axis");
            for (size_t si = 0; si < ssd.size(); ++si)
                for (size_t ri = 1; ri < ram.size(); ++ri)
                    ACC_CHECK(total_at(ri, si) <= total_at(ri - 1, si) + 1e-9,
                              "total time increases along the RAM axis");
            double lo = 1e300, hi = 0;
            for (size_t si = 0; si < ssd.size(); ++si) {
                lo = std::min(lo, total_at(ram.size() - 1, si));
                hi = std::max(hi, total_at(ram.size() - 1, si));
            }
            ACC_CHECK((hi - lo) / lo <= 0.05, "SSD axis varies more than 5% at max RAM");
        }
    }
    report("C7", "environment sweep surface", local_failures, timer.seconds());
}

// ---------------------------------------------------------------------------
// Criterion 8: determinism and cross-cutting invariants on the corpus above.
void criterion_8() {
    Timer timer;
    int local_failures = 0;

    // byte-identical reruns: analysis
    {
        const AccessDistributionParams params{16, 90, 1'281'167, 0.8};
        const double a = expected_hot_samples(params);
        const double b = expected_hot_samples(params);
        ACC_CHECK(std::memcmp(&a, &b, sizeof a) == 0, "analysis rerun differs");
        const auto h1 = monte_carlo_histogram(Seed{2}, 4, 10, 20000);
        const auto h2 = monte_carlo_histogram(Seed{2}, 4, 10, 20000);
        ACC_CHECK(h1.buckets == h2.buckets, "monte carlo rerun differs");
    }

#ifdef CLAIRSIM_CLI_PATH
    // whole-tool determinism: the same command writes byte-identical files
    {
        const std::string base = std::string(CLAIRSIM_CLI_PATH) +
                                 " simulate --preset mnist --policy nopfs --seed 9 --epochs 3";
        for (const char* dir : {"/tmp/clairsim_det_a", "/tmp/clairsim_det_b"}) {
            const std::string cmd = base + " --out " + dir + " >/dev/null 2>&1";
            ACC_CHECK(std::system(cmd.c_str()) == 0, "determinism CLI run failed");
        }
        const int diff = std::system(
            "cmp -s /tmp/clairsim_det_a/summary.json /tmp/clairsim_det_b/summary.json && "
            "cmp -s /tmp/clairsim_det_a/batches.csv /tmp/clairsim_det_b/batches.csv");
        ACC_CHECK(WIFEXITED(diff) && WEXITSTATUS(diff) == 0,
                  "CLI reruns produced different output files");
    }
#endif

    // byte-identical reruns + invariants: simulations on both scenario scales
    for (const char* name : {"mnist", "imagenet1k"}) {
        Scenario sc = make_scenario(name);
        if (std::string(name) == "imagenet1k") scale_scenario(sc, 0.01);
        const auto dataset = sc.make_dataset(1);
        PartitionSpec part{sc.system.workers, sc.global_batch(), 3, true};
        const auto streams =
            build_access_streams(Seed{1}, static_cast<uint32_t>(sc.samples), part);
        double perfect_total = 0;
        for (PolicyKind kind : {PolicyKind::Perfect, PolicyKind::Naive, PolicyKind::StagingBuffer,
                                PolicyKind::Nopfs, PolicyKind::LocalityAware,
                                PolicyKind::DeepIOOrdered}) {
            const auto r1 = simulate(sc.system, dataset, streams, PolicySpec{kind});
            const auto r2 = simulate(sc.system, dataset, streams, PolicySpec{kind});
            ACC_CHECK(summary_digest(r1).dump() == summary_digest(r2).dump(),
                      std::string(policy_name(kind)) + " rerun differs");
            if (kind == PolicyKind::Perfect) perfect_total = r1.total_time_s;
            ACC_CHECK(r1.total_time_s >= perfect_total - 1e-9,
                      std::string(policy_name(kind)) + " beat the Perfect policy");
            ACC_CHECK(r1.max_staging_occupancy_mb <= sc.system.staging().capacity_mb + 1e-9,
                      "staging occupancy exceeded d0");
            // conservation: demand bytes equal consumed bytes
            if (!r1.order_modified && kind != PolicyKind::Perfect) {
                double consumed = 0;
                for (const auto& st : streams)
                    for (uint32_t k : st.entries) consumed += dataset.sizes_mb[k];
                double fetched = 0;
                for (const auto& [loc, stat] : r1.demand) fetched += stat.bytes_mb;
                ACC_CHECK(std::abs(fetched - consumed) <= 1e-6 * consumed,
                          std::string(policy_name(kind)) + " location bytes do not sum");
            }
        }
    }
    report("C8", "determinism + invariants", local_failures, timer.seconds());
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures > 0) {
        std::printf("ACCEPTANCE: %d check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE: all criteria passed\n");
    return 0;
}
