#include "clairsim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <limits>
#include <stdexcept>

namespace clairsim {

namespace {

constexpr uint32_t kNoWorker = std::numeric_limits<uint32_t>::max();

struct WorkerRun {
    const AccessStream* stream = nullptr;
    uint64_t len = 0;

    std::vector<double> t;  // consumption instants
    double w_prev = 0;      // staging pipeline clock
    double phase = 0;

    // staging buffer occupancy window (drop after consume)
    uint64_t q = 0;
    double window_mb = 0;

    double stall = 0;

    // bookkeeping positions
    uint32_t epoch = 0;
    uint64_t batch = 0;

    // Per-class fill pipeline, processed in prefetch order as simulated time
    // advances. A sample the worker has already consumed is not re-fetched
    // from the PFS; it only pays the class write.
    struct Fill {
        const std::vector<uint32_t>* list = nullptr;
        uint32_t storage_class = 0;
        std::vector<double> completion;  // committed completion times
        double clock = 0;
    };
    std::vector<Fill> fills;

    // samples this worker has already consumed (write-through: a consumed
    // sample assigned to a local class is cached from that moment on)
    std::vector<uint8_t> consumed;
};

// Progress of every worker's fill pipelines as seen at one observer's clock;
// cursors advance monotonically with the observer's time.
struct ProgressView {
    PrefetchProgress progress;  // [holder][class-1] completed counts

    void advance(const std::vector<WorkerRun>& runs, double now) {
        for (size_t w = 0; w < runs.size(); ++w) {
            for (size_t j = 0; j < runs[w].fills.size(); ++j) {
                const auto& done = runs[w].fills[j].completion;
                auto& c = progress.completed[w][j];
                while (c < done.size() && done[c] <= now) ++c;
            }
        }
    }
};

struct Candidate {
    bool valid = false;
    FetchSource src;
    double unit_time = 0;  // seconds per MB
};

}  // namespace

SimResult simulate(const SystemConfig& cfg, const DatasetModel& dataset,
                   const std::vector<AccessStream>& streams, const BuiltPolicy& policy,
                   const SimOptions& options) {
    cfg.validate();
    if (streams.size() != cfg.workers)
        throw std::invalid_argument("stream count does not match worker count");
    const auto& active = policy.active_streams(streams);
    const uint32_t N = cfg.workers;
    const uint32_t J = cfg.cache_class_count();
    const auto& sizes = dataset.sizes_mb;
    const double c = cfg.compute_mbps;
    const double p0 = cfg.staging().prefetch_threads;
    const double d0 = cfg.staging().capacity_mb;
    const bool stages = !policy.no_reads && !policy.synchronous_demand;
    if (stages && dataset.max_size_mb() > d0)
        throw std::invalid_argument("staging buffer smaller than the largest sample");

    SimResult res;
    res.order_modified = policy.order_modified;
    res.coverage = policy.coverage;
    res.warnings = policy.warnings;
    res.location_keys.push_back("pfs");
    res.location_keys.push_back("remote");
    for (uint32_t j = 1; j <= J; ++j) res.location_keys.push_back(cfg.storage[j].name);
    for (const auto& key : res.location_keys) res.demand[key];
    res.fill["pfs"];
    const auto loc_index = [&](const FetchSource& s) -> size_t {
        switch (s.kind) {
            case FetchSource::Kind::Pfs: return 0;
            case FetchSource::Kind::Remote: return 1;
            case FetchSource::Kind::Local: return 1 + s.storage_class;
        }
        return 0;
    };

    // ---- fill pipelines -----------------------------------------------------
    std::vector<WorkerRun> runs(N);
    for (uint32_t w = 0; w < N; ++w) {
        auto& r = runs[w];
        r.stream = &active[w];
        r.len = active[w].entries.size();
        r.t.resize(r.len);
        r.phase = policy.phase_offset_s[w];
        r.w_prev = r.phase;
        if (policy.allow_local && !policy.first_touch_dynamic)
            r.consumed.assign(dataset.samples, 0);
        if (!policy.assignment.class_lists.empty()) {
            r.fills.resize(J);
            for (uint32_t j = 1; j <= J; ++j) {
                auto& f = r.fills[j - 1];
                f.list = &policy.assignment.class_lists[w][j - 1];
                f.storage_class = j;
                if (policy.prestaged) {
                    // the staging phase copies the whole assignment up front
                    f.completion.reserve(f.list->size());
                    for (uint32_t k : *f.list) {
                        f.clock += fill_step_duration(sizes[k], cfg, j);
                        f.completion.push_back(f.clock);
                        res.fill["pfs"].bytes_mb += sizes[k];
                        res.fill["pfs"].fetch_s += fetch_time_pfs(sizes[k], cfg, N);
                    }
                }
            }
        }
        res.per_batch_s.emplace_back();
        res.per_batch_bytes_mb.emplace_back();
    }

    // Commits fill completions up to wall time tau for one worker. Samples
    // the demand path already consumed skip the PFS fetch.
    const auto advance_fills = [&](uint32_t w, double tau) {
        auto& r = runs[w];
        for (auto& f : r.fills) {
            while (f.completion.size() < f.list->size()) {
                const uint32_t k = (*f.list)[f.completion.size()];
                const bool in_memory = !r.consumed.empty() && r.consumed[k] != 0;
                const auto& sc = cfg.storage[f.storage_class];
                const double dur =
                    in_memory ? (sizes[k] / sc.write_share()) / sc.prefetch_threads
                              : fill_step_duration(sizes[k], cfg, f.storage_class);
                if (f.clock + dur > tau) break;
                f.clock += dur;
                f.completion.push_back(f.clock);
                if (!in_memory) {
                    res.fill["pfs"].bytes_mb += sizes[k];
                    res.fill["pfs"].fetch_s += fetch_time_pfs(sizes[k], cfg, N);
                }
            }
        }
    };

    // Progress views: one per observer (each worker sees all pipelines at its
    // own clock).
    std::vector<ProgressView> views(N);
    for (auto& v : views)
        v.progress.completed.assign(N, std::vector<uint64_t>(J, 0));

    const uint64_t max_len = [&] {
        uint64_t m = 0;
        for (const auto& r : runs) m = std::max(m, r.len);
        return m;
    }();

    std::vector<EpochStat> epochs;
    std::vector<std::vector<double>> epoch_end_t(N);  // per worker, per epoch
    std::vector<double> batch_anchor(N);
    std::vector<std::vector<double>> batch_loc(N, std::vector<double>(res.location_keys.size(), 0));
    for (uint32_t w = 0; w < N; ++w) batch_anchor[w] = runs[w].phase;

    std::vector<Candidate> cands(N);
    std::vector<uint8_t> forced(N, 0);

    // Availability of sample k for worker w under LBANN first-touch caching:
    // the epoch-0 consumer owns it once it has consumed it.
    const auto lbann_candidate = [&](uint32_t w, uint32_t k, uint64_t step) -> Candidate {
        Candidate cand;
        const uint32_t o = policy.owner[k];
        if (o == kNoWorker || !policy.owner_cached[k]) return cand;
        const uint64_t fi = policy.owner_first_index[k];
        if (o == w) {
            if (fi >= step) return cand;  // first touch not consumed yet
            cand = {true, {FetchSource::Kind::Local, w, 1}, fetch_time_local(1.0, cfg, 1)};
        } else {
            if (fi >= step || runs[o].t[fi] > runs[w].w_prev) return cand;
            cand = {true, {FetchSource::Kind::Remote, o, 1}, fetch_time_remote(1.0, cfg, 1)};
        }
        return cand;
    };

    // ---- lockstep demand loop ---------------------------------------------
    for (uint64_t step = 0; step < max_len; ++step) {
        // Advance every fill pipeline to the step frontier so observers at
        // any worker's clock see committed completions.
        double frontier = 0;
        for (uint32_t w = 0; w < N; ++w)
            if (step < runs[w].len) frontier = std::max(frontier, runs[w].w_prev);
        for (uint32_t w = 0; w < N; ++w) advance_fills(w, frontier);

        // Phase A: candidate non-PFS source per active worker, at its own clock.
        for (uint32_t w = 0; w < N; ++w) {
            auto& r = runs[w];
            cands[w].valid = false;
            forced[w] = 0;
            if (step >= r.len || policy.no_reads) continue;
            const uint32_t k = r.stream->entries[step];
            if (policy.first_touch_dynamic) {
                cands[w] = lbann_candidate(w, k, step);
            } else if (policy.allow_local || policy.allow_remote) {
                views[w].advance(runs, r.w_prev);
                auto best = best_cached_source(k, w, policy.assignment, views[w].progress, cfg,
                                               policy.allow_local, policy.allow_remote,
                                               options.heuristic_mode);
                // Write-through: a locally assigned sample this worker already
                // consumed is cached even if its fill pipeline lags behind.
                if (policy.allow_local && (!best || best->first.kind != FetchSource::Kind::Local) &&
                    r.consumed[k]) {
                    for (const auto& h : policy.assignment.holders_of(k)) {
                        if (h.worker != w) continue;
                        const FetchSource src{FetchSource::Kind::Local, w, h.storage_class};
                        const double t = fetch_source_time(src, 1.0, cfg, 1);
                        if (!best || t <= best->second) best = {{src, t}};
                    }
                }
                if (best) cands[w] = {true, best->first, best->second};
            }
            forced[w] = !cands[w].valid;
        }

        // Phase B: choose, charge, advance clocks.
        for (uint32_t w = 0; w < N; ++w) {
            auto& r = runs[w];
            if (step >= r.len) continue;
            const uint32_t k = r.stream->entries[step];
            const double s = sizes[k];
            const double consumer_ready =
                (step == 0) ? r.phase
                            : r.t[step - 1] + sizes[r.stream->entries[step - 1]] / c;

            double w_now = 0;
            FetchSource chosen{FetchSource::Kind::Pfs, 0, 0};
            double fetch_s = 0;
            double attempt_s = 0;
            if (!policy.no_reads) {
                // gamma: this worker plus every other worker whose current
                // staging prefetch is pinned to the PFS. Background fills are
                // charged at worst-case contention for themselves but do not
                // count as extra PFS clients here.
                uint32_t gamma = 1;
                for (uint32_t o = 0; o < N; ++o) {
                    if (o == w || step >= runs[o].len) continue;
                    if (policy.counts_as_prefetcher && forced[o]) ++gamma;
                }
                const double pfs_unit = fetch_time_pfs(1.0, cfg, gamma);
                if (cands[w].valid && cands[w].unit_time <= pfs_unit) {
                    chosen = cands[w].src;
                    fetch_s = cands[w].unit_time * s;
                    if (options.heuristic_mode && chosen.kind == FetchSource::Kind::Remote) {
                        // verify against the holder's true progress
                        bool truly = false;
                        for (const auto& h : policy.assignment.holders_of(k)) {
                            if (h.worker == chosen.worker && h.storage_class == chosen.storage_class)
                                truly = remote_available(h, views[w].progress, w, false);
                        }
                        if (!truly) {
                            ++res.false_positive_remote;
                            attempt_s = fetch_s;  // wasted request
                            const FetchSource retry = choose_source(
                                k, w, policy.assignment, views[w].progress, gamma, cfg,
                                policy.allow_local, policy.allow_remote, false);
                            chosen = retry;
                            fetch_s = fetch_source_time(retry, s, cfg, gamma);
                        }
                    }
                } else {
                    chosen = {FetchSource::Kind::Pfs, 0, 0};
                    fetch_s = pfs_unit * s;
                }
            }
            const double read_s = attempt_s + fetch_s + (policy.no_reads ? 0 : write_time(s, cfg));

            if (policy.no_reads) {
                w_now = 0;
            } else if (policy.synchronous_demand) {
                w_now = consumer_ready + read_s;
            } else {
                double base = std::max(r.w_prev, r.phase);
                // staging buffer room (drop after consume)
                while (r.window_mb + s > d0 && r.q < step) {
                    base = std::max(base, r.t[r.q]);
                    r.window_mb -= sizes[r.stream->entries[r.q]];
                    ++r.q;
                }
                // non-clairvoyant loaders rebuild their pipeline each epoch
                if (!policy.clairvoyant_staging && step > 0 &&
                    step == r.stream->epoch_offsets[r.epoch])
                    base = std::max(base, consumer_ready);
                w_now = base + read_s / p0;
                r.window_mb += s;
                res.max_staging_occupancy_mb = std::max(res.max_staging_occupancy_mb, r.window_mb);
            }

            const double t_now = std::max(w_now, consumer_ready);
            const double stall = std::max(0.0, w_now - consumer_ready);
            r.t[step] = t_now;
            r.w_prev = policy.no_reads ? 0 : w_now;
            r.stall += stall;

            // accounting
            if (!policy.no_reads) {
                const size_t li = loc_index(chosen);
                auto& stat = res.demand[res.location_keys[li]];
                stat.fetch_s += fetch_s;
                stat.bytes_mb += s;
                batch_loc[w][li] += s;
                if (attempt_s > 0) res.demand["remote"].fetch_s += attempt_s;
                if (chosen.kind == FetchSource::Kind::Pfs) {
                    while (epochs.size() <= r.epoch) epochs.emplace_back();
                    epochs[r.epoch].pfs_demand_bytes_mb += s;
                }
            }
            while (epochs.size() <= r.epoch) epochs.emplace_back();
            epochs[r.epoch].stall_s += stall;

            // batch / epoch boundaries (a repeated offset marks an empty batch)
            const uint64_t next = step + 1;
            while (r.batch + 1 < r.stream->batch_offsets.size() &&
                   r.stream->batch_offsets[r.batch + 1] == next) {
                res.per_batch_s[w].push_back(t_now - batch_anchor[w]);
                res.per_batch_bytes_mb[w].push_back(batch_loc[w]);
                std::fill(batch_loc[w].begin(), batch_loc[w].end(), 0.0);
                batch_anchor[w] = t_now;
                ++r.batch;
            }
            while (r.epoch + 1 < r.stream->epoch_offsets.size() &&
                   r.stream->epoch_offsets[r.epoch + 1] == next) {
                epoch_end_t[w].push_back(t_now + s / c);
                ++r.epoch;
            }
            if (!r.consumed.empty()) r.consumed[k] = 1;
        }
    }

    // ---- totals -------------------------------------------------------------
    res.worker_total_s.resize(N);
    res.worker_stall_s.resize(N);
    for (uint32_t w = 0; w < N; ++w) {
        const auto& r = runs[w];
        double total = r.phase;
        double bound = r.phase;
        if (r.len > 0) {
            total = r.t[r.len - 1] + sizes[r.stream->entries[r.len - 1]] / c;
            double compute = 0;
            for (uint32_t k : r.stream->entries) compute += sizes[k] / c;
            bound = compute;
        }
        res.worker_total_s[w] = total;
        res.worker_stall_s[w] = r.stall;
        res.total_time_s = std::max(res.total_time_s, total);
        res.perfect_bound_s = std::max(res.perfect_bound_s, bound);
        res.stall_time_s += r.stall;
    }
    // epoch wall times: max over workers of per-epoch end-to-end durations
    const size_t epoch_count = epochs.size();
    for (size_t e = 0; e < epoch_count; ++e) {
        double t_max = 0;
        for (uint32_t w = 0; w < N; ++w) {
            if (e >= epoch_end_t[w].size()) continue;
            const double begin = (e == 0) ? runs[w].phase : epoch_end_t[w][e - 1];
            t_max = std::max(t_max, epoch_end_t[w][e] - begin);
        }
        epochs[e].time_s = t_max;
    }
    res.epochs = std::move(epochs);
    if (options.record_consumption_times) {
        res.consumption_times_s.resize(N);
        for (uint32_t w = 0; w < N; ++w) res.consumption_times_s[w] = runs[w].t;
    }
    return res;
}

SimResult simulate(const SystemConfig& cfg, const DatasetModel& dataset,
                   const std::vector<AccessStream>& streams, const PolicySpec& spec,
                   const SimOptions& options) {
    SimOptions opt = options;
    opt.heuristic_mode = opt.heuristic_mode || spec.heuristic_mode;
    return simulate(cfg, dataset, streams, build_policy(spec, streams, cfg, dataset), opt);
}

// ---- sweep ------------------------------------------------------------------

uint64_t SweepGrid::point_count() const {
    uint64_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

void SweepGrid::validate() const {
    if (axes.empty()) throw std::invalid_argument("sweep grid has no axes");
    for (const auto& a : axes) {
        if (a.values.empty())
            throw std::invalid_argument("sweep axis '" + a.param + "' has no values");
        if (a.param != "staging_mb" && a.param != "ram_mb" && a.param != "ssd_mb" &&
            a.param != "compute_multiplier")
            throw std::invalid_argument("unknown sweep parameter '" + a.param + "'");
    }
}

SystemConfig apply_override(const SystemConfig& base, const std::string& param, double value) {
    SystemConfig cfg = base;
    if (param == "compute_multiplier") {
        cfg.compute_mbps *= value;
        cfg.preprocess_mbps *= value;
        return cfg;
    }
    uint32_t idx;
    if (param == "staging_mb")
        idx = 0;
    else if (param == "ram_mb")
        idx = 1;
    else if (param == "ssd_mb")
        idx = 2;
    else
        throw std::invalid_argument("unknown sweep parameter '" + param + "'");
    if (idx >= cfg.storage.size())
        throw std::invalid_argument("configuration has no storage class for '" + param + "'");
    cfg.storage[idx].capacity_mb = value;
    return cfg;
}

std::vector<SweepCell> sweep(const SystemConfig& base, const DatasetModel& dataset,
                             const std::vector<AccessStream>& streams, const PolicySpec& spec,
                             const SweepGrid& grid, unsigned jobs, const SimOptions& options) {
    grid.validate();
    const uint64_t total = grid.point_count();
    std::vector<SweepCell> cells(total);
    for (uint64_t idx = 0; idx < total; ++idx) {
        uint64_t rem = idx;
        for (auto it = grid.axes.rbegin(); it != grid.axes.rend(); ++it) {
            cells[idx].coords.emplace_back(it->param, it->values[rem % it->values.size()]);
            rem /= it->values.size();
        }
        std::reverse(cells[idx].coords.begin(), cells[idx].coords.end());
    }

    const auto run_cell = [&](SweepCell& cell) {
        try {
            SystemConfig cfg = base;
            for (const auto& [param, value] : cell.coords) cfg = apply_override(cfg, param, value);
            cell.result = simulate(cfg, dataset, streams, spec, options);
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    };

    if (jobs <= 1) {
        for (auto& cell : cells) run_cell(cell);
        return cells;
    }
    std::atomic<uint64_t> next{0};
    std::vector<std::future<void>> pool;
    const unsigned n_threads = std::min<uint64_t>(jobs, total);
    for (unsigned i = 0; i < n_threads; ++i) {
        pool.push_back(std::async(std::launch::async, [&] {
            for (uint64_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1))
                run_cell(cells[idx]);
        }));
    }
    for (auto& f : pool) f.get();
    return cells;
}

}  // namespace clairsim
