#include "clairsim/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace clairsim {

namespace {

constexpr uint64_t kNoIndex = std::numeric_limits<uint64_t>::max();
constexpr uint32_t kNoWorker = std::numeric_limits<uint32_t>::max();

// Position of each sample's first occurrence in a stream (kNoIndex if absent).
std::vector<uint64_t> first_access_positions(const AccessStream& stream, uint64_t samples) {
    std::vector<uint64_t> pos(samples, kNoIndex);
    for (uint64_t i = 0; i < stream.entries.size(); ++i) {
        const uint32_t k = stream.entries[i];
        if (pos[k] == kNoIndex) pos[k] = i;
    }
    return pos;
}

uint32_t batches_per_epoch(const AccessStream& stream) {
    return (static_cast<uint32_t>(stream.batch_offsets.size()) - 1) / stream.epoch_count();
}

// Orders a class prefetch list by the worker's first-access position;
// never-accessed samples go last in index order.
void order_by_first_access(std::vector<uint32_t>& list, const std::vector<uint64_t>& first_pos) {
    std::stable_sort(list.begin(), list.end(), [&](uint32_t a, uint32_t b) {
        if (first_pos[a] != first_pos[b]) return first_pos[a] < first_pos[b];
        return a < b;
    });
}

// First-fit of `candidates` (already in desired priority order) into cache
// classes `lo..hi` by remaining byte capacity.
void pack_first_fit(const std::vector<uint32_t>& candidates, const DatasetModel& dataset,
                    const SystemConfig& cfg, uint32_t lo, uint32_t hi,
                    std::vector<std::vector<uint32_t>>& class_lists) {
    std::vector<double> remaining;
    for (uint32_t j = 1; j < cfg.storage.size(); ++j) remaining.push_back(cfg.storage[j].capacity_mb);
    for (uint32_t k : candidates) {
        const double s = dataset.sizes_mb[k];
        for (uint32_t j = lo; j <= hi; ++j) {
            if (s <= remaining[j - 1]) {
                remaining[j - 1] -= s;
                class_lists[j - 1].push_back(k);
                break;
            }
        }
    }
}

// Global consumption order of one epoch, reassembled from the per-worker
// batch slices (batch h = worker 0's slice, then worker 1's, ...).
std::vector<uint32_t> epoch_global_order(const std::vector<AccessStream>& streams,
                                         uint32_t epoch) {
    std::vector<uint32_t> order;
    const uint32_t bpe = batches_per_epoch(streams[0]);
    for (uint32_t h = 0; h < bpe; ++h) {
        for (const auto& st : streams) {
            const uint64_t b = st.batch_offsets[static_cast<uint64_t>(epoch) * bpe + h];
            const uint64_t e = st.batch_offsets[static_cast<uint64_t>(epoch) * bpe + h + 1];
            order.insert(order.end(), st.entries.begin() + b, st.entries.begin() + e);
        }
    }
    return order;
}

double total_fill_time(const std::vector<uint32_t>& list, uint32_t storage_class,
                       const SystemConfig& cfg, const DatasetModel& dataset) {
    double t = 0;
    for (uint32_t k : list)
        t += fill_step_duration(dataset.sizes_mb[k], cfg, storage_class);
    return t;
}

void require_lbann_feasible(const SystemConfig& cfg, const DatasetModel& dataset) {
    if (cfg.cache_class_count() < 1)
        throw PolicyInfeasibleError("lbann data store needs an in-memory cache class");
    const double aggregate_ram = cfg.workers * cfg.storage[1].capacity_mb;
    if (dataset.total_mb > aggregate_ram)
        throw PolicyInfeasibleError(
            "dataset (" + std::to_string(dataset.total_mb) +
            " MB) exceeds aggregate worker memory (" + std::to_string(aggregate_ram) +
            " MB); the in-memory data store cannot hold it");
}

}  // namespace

const char* policy_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Perfect: return "perfect";
        case PolicyKind::Naive: return "naive";
        case PolicyKind::StagingBuffer: return "staging-buffer";
        case PolicyKind::DeepIOOrdered: return "deepio-ordered";
        case PolicyKind::DeepIOOptimistic: return "deepio-optimistic";
        case PolicyKind::ParallelStaging: return "parallel-staging";
        case PolicyKind::LbannDynamic: return "lbann-dynamic";
        case PolicyKind::LbannPreload: return "lbann-preload";
        case PolicyKind::LocalityAware: return "locality-aware";
        case PolicyKind::Nopfs: return "nopfs";
    }
    return "?";
}

std::vector<PolicyKind> all_policies() {
    return {PolicyKind::Perfect,         PolicyKind::Naive,
            PolicyKind::StagingBuffer,   PolicyKind::DeepIOOrdered,
            PolicyKind::DeepIOOptimistic, PolicyKind::ParallelStaging,
            PolicyKind::LbannDynamic,    PolicyKind::LbannPreload,
            PolicyKind::LocalityAware,   PolicyKind::Nopfs};
}

std::optional<PolicyKind> policy_from_name(const std::string& name) {
    for (PolicyKind k : all_policies())
        if (name == policy_name(k)) return k;
    return std::nullopt;
}

void CacheAssignment::build_index(uint64_t samples) {
    holder_offsets.assign(samples + 1, 0);
    holders.clear();
    for (uint32_t w = 0; w < class_lists.size(); ++w)
        for (const auto& list : class_lists[w])
            for (uint32_t k : list) ++holder_offsets[k + 1];
    std::partial_sum(holder_offsets.begin(), holder_offsets.end(), holder_offsets.begin());
    holders.resize(holder_offsets.back());
    std::vector<uint32_t> cursor(holder_offsets.begin(), holder_offsets.end() - 1);
    for (uint32_t w = 0; w < class_lists.size(); ++w) {
        for (uint32_t j = 0; j < class_lists[w].size(); ++j) {
            const auto& list = class_lists[w][j];
            for (uint32_t pos = 0; pos < list.size(); ++pos) {
                const uint32_t k = list[pos];
                holders[cursor[k]++] = Holder{w, j + 1, pos};
            }
        }
    }
}

CacheAssignment nopfs_assign_caches(const std::vector<FrequencyTable>& freqs,
                                    const SystemConfig& cfg, const DatasetModel& dataset,
                                    const std::vector<AccessStream>& streams) {
    const uint32_t N = cfg.workers;
    const uint32_t J = cfg.cache_class_count();
    CacheAssignment a;
    a.class_lists.assign(N, std::vector<std::vector<uint32_t>>(J));
    for (uint32_t w = 0; w < N && J > 0; ++w) {
        const auto first_pos = first_access_positions(streams[w], dataset.samples);
        const auto& counts = freqs[w].counts;
        std::vector<uint32_t> cand;
        for (uint32_t k = 0; k < dataset.samples; ++k)
            if (counts[k] > 0) cand.push_back(k);
        std::stable_sort(cand.begin(), cand.end(), [&](uint32_t x, uint32_t y) {
            if (counts[x] != counts[y]) return counts[x] > counts[y];
            return first_pos[x] < first_pos[y];
        });
        pack_first_fit(cand, dataset, cfg, 1, J, a.class_lists[w]);
        for (auto& list : a.class_lists[w]) order_by_first_access(list, first_pos);
    }
    a.build_index(dataset.samples);
    return a;
}

bool remote_available(const CacheAssignment::Holder& holder, const PrefetchProgress& progress,
                      uint32_t requester, bool heuristic) {
    const uint32_t observed = heuristic ? requester : holder.worker;
    return progress.completed[observed][holder.storage_class - 1] > holder.position;
}

double fetch_source_time(const FetchSource& src, double size_mb, const SystemConfig& cfg,
                         uint32_t gamma) {
    switch (src.kind) {
        case FetchSource::Kind::Local: return fetch_time_local(size_mb, cfg, src.storage_class);
        case FetchSource::Kind::Remote: return fetch_time_remote(size_mb, cfg, src.storage_class);
        case FetchSource::Kind::Pfs: return fetch_time_pfs(size_mb, cfg, gamma);
    }
    return 0;
}

std::optional<std::pair<FetchSource, double>> best_cached_source(
    uint32_t sample, uint32_t worker, const CacheAssignment& assignment,
    const PrefetchProgress& progress, const SystemConfig& cfg, bool allow_local,
    bool allow_remote, bool heuristic) {
    // All costs are linear in the sample size, so the argmin is evaluated at
    // unit size. Rank breaks ties: Local > Remote, then lowest worker id.
    std::optional<std::pair<FetchSource, double>> best;
    int best_rank = 2;
    uint32_t best_worker = kNoWorker;
    for (const auto& h : assignment.holders_of(sample)) {
        FetchSource cand;
        int rank;
        if (h.worker == worker) {
            if (!allow_local || progress.completed[worker][h.storage_class - 1] <= h.position)
                continue;
            cand = {FetchSource::Kind::Local, worker, h.storage_class};
            rank = 0;
        } else {
            if (!allow_remote || !remote_available(h, progress, worker, heuristic)) continue;
            cand = {FetchSource::Kind::Remote, h.worker, h.storage_class};
            rank = 1;
        }
        const double t = fetch_source_time(cand, 1.0, cfg, 1);
        if (!best || t < best->second ||
            (t == best->second &&
             (rank < best_rank || (rank == best_rank && h.worker < best_worker)))) {
            best = {cand, t};
            best_rank = rank;
            best_worker = h.worker;
        }
    }
    return best;
}

FetchSource choose_source(uint32_t sample, uint32_t worker, const CacheAssignment& assignment,
                          const PrefetchProgress& progress, uint32_t gamma,
                          const SystemConfig& cfg, bool allow_local, bool allow_remote,
                          bool heuristic) {
    const auto cached = best_cached_source(sample, worker, assignment, progress, cfg, allow_local,
                                           allow_remote, heuristic);
    // Cached sources win ties against the PFS.
    if (cached && cached->second <= fetch_time_pfs(1.0, cfg, gamma)) return cached->first;
    return FetchSource{FetchSource::Kind::Pfs, 0, 0};
}

FetchSource nopfs_choose_source(uint32_t sample, uint32_t worker,
                                const CacheAssignment& assignment,
                                const PrefetchProgress& progress, uint32_t gamma,
                                const SystemConfig& cfg, bool heuristic) {
    return choose_source(sample, worker, assignment, progress, gamma, cfg, true, true, heuristic);
}

double fill_step_duration(double size_mb, const SystemConfig& cfg, uint32_t storage_class) {
    const auto& sc = cfg.storage.at(storage_class);
    // Fills contend with every worker pulling its own cache set.
    const double fetch = fetch_time_pfs(size_mb, cfg, cfg.workers);
    return std::max(fetch, size_mb / sc.write_share()) / sc.prefetch_threads;
}

namespace {

// Round-robin shard (sample k belongs to worker k mod N), restricted to
// samples the worker actually touches when `accessed_only`, packed first-fit
// into cache classes lo..hi.
void shard_assignment(BuiltPolicy& p, const std::vector<AccessStream>& streams,
                      const SystemConfig& cfg, const DatasetModel& dataset, uint32_t hi_class,
                      bool accessed_only) {
    const uint32_t N = cfg.workers;
    p.assignment.class_lists.assign(N, std::vector<std::vector<uint32_t>>(cfg.cache_class_count()));
    for (uint32_t w = 0; w < N; ++w) {
        const auto first_pos = first_access_positions(streams[w], dataset.samples);
        std::vector<uint32_t> cand;
        for (uint64_t k = w; k < dataset.samples; k += N)
            if (!accessed_only || first_pos[k] != kNoIndex) cand.push_back(static_cast<uint32_t>(k));
        order_by_first_access(cand, first_pos);
        pack_first_fit(cand, dataset, cfg, 1, hi_class, p.assignment.class_lists[w]);
    }
    p.assignment.build_index(dataset.samples);
}

// Rebuilds batch offsets for a transformed per-epoch entry layout where every
// epoch keeps the original per-batch slice sizes.
void copy_batch_structure(BuiltPolicy& p, const std::vector<AccessStream>& streams) {
    for (uint32_t w = 0; w < streams.size(); ++w) {
        p.transformed[w].epoch_offsets = streams[w].epoch_offsets;
        p.transformed[w].batch_offsets = streams[w].batch_offsets;
    }
}

void transform_deepio_optimistic(BuiltPolicy& p, const std::vector<AccessStream>& streams,
                                 const DatasetModel& dataset) {
    const uint32_t N = static_cast<uint32_t>(streams.size());
    p.transformed.resize(N);
    for (uint32_t w = 0; w < N; ++w) {
        std::vector<uint8_t> cached(dataset.samples, 0);
        for (const auto& list : p.assignment.class_lists[w])
            for (uint32_t k : list) cached[k] = 1;
        auto& out = p.transformed[w];
        out.worker_id = w;
        out.entries.reserve(streams[w].entries.size());
        for (uint32_t e = 0; e < streams[w].epoch_count(); ++e) {
            const auto epoch = streams[w].epoch_entries(e);
            std::vector<uint32_t> sorted(epoch.begin(), epoch.end());
            std::stable_partition(sorted.begin(), sorted.end(),
                                  [&](uint32_t k) { return cached[k] != 0; });
            out.entries.insert(out.entries.end(), sorted.begin(), sorted.end());
        }
    }
    copy_batch_structure(p, streams);
    p.order_modified = true;
}

void transform_parallel_staging(BuiltPolicy& p, const std::vector<AccessStream>& streams,
                                const DatasetModel& dataset) {
    const uint32_t N = static_cast<uint32_t>(streams.size());
    const uint32_t E = streams[0].epoch_count();
    std::vector<std::vector<uint8_t>> cached(N, std::vector<uint8_t>(dataset.samples, 0));
    for (uint32_t w = 0; w < N; ++w)
        for (const auto& list : p.assignment.class_lists[w])
            for (uint32_t k : list) cached[w][k] = 1;

    p.transformed.resize(N);
    std::vector<uint64_t> batch_sizes(N);
    for (uint32_t w = 0; w < N; ++w) {
        p.transformed[w].worker_id = w;
        p.transformed[w].epoch_offsets.push_back(0);
        p.transformed[w].batch_offsets.push_back(0);
        batch_sizes[w] = std::max<uint64_t>(
            1, streams[w].batch_offsets[1] - streams[w].batch_offsets[0]);
    }
    uint64_t distinct_epoch0 = 0;
    for (uint32_t e = 0; e < E; ++e) {
        const auto order = epoch_global_order(streams, e);
        for (uint32_t w = 0; w < N; ++w) {
            auto& out = p.transformed[w];
            uint64_t in_batch = 0;
            for (uint32_t k : order) {
                if (!cached[w][k]) continue;
                out.entries.push_back(k);
                if (e == 0) ++distinct_epoch0;
                if (++in_batch == batch_sizes[w]) {
                    out.batch_offsets.push_back(out.entries.size());
                    in_batch = 0;
                }
            }
            if (in_batch > 0) out.batch_offsets.push_back(out.entries.size());
            out.epoch_offsets.push_back(out.entries.size());
        }
    }
    p.order_modified = true;
    p.coverage = static_cast<double>(distinct_epoch0) / static_cast<double>(dataset.samples);
    if (p.coverage < 1.0)
        p.warnings.push_back("parallel staging covers " + std::to_string(p.coverage) +
                             " of the dataset; the remainder is never consumed");
}

void transform_locality_aware(BuiltPolicy& p, const std::vector<AccessStream>& streams,
                              const DatasetModel& dataset) {
    const uint32_t N = static_cast<uint32_t>(streams.size());
    const uint32_t E = streams[0].epoch_count();
    const uint32_t bpe = batches_per_epoch(streams[0]);
    std::vector<uint32_t> owner(dataset.samples, kNoWorker);
    for (uint32_t w = 0; w < N; ++w)
        for (const auto& list : p.assignment.class_lists[w])
            for (uint32_t k : list) owner[k] = w;

    p.transformed.resize(N);
    for (uint32_t w = 0; w < N; ++w) {
        p.transformed[w].worker_id = w;
        p.transformed[w].epoch_offsets.push_back(0);
        p.transformed[w].batch_offsets.push_back(0);
    }
    std::vector<std::vector<uint32_t>> slot(N);
    for (uint32_t e = 0; e < E; ++e) {
        for (uint32_t h = 0; h < bpe; ++h) {
            std::vector<uint64_t> quota(N);
            std::vector<uint32_t> batch;
            for (uint32_t w = 0; w < N; ++w) {
                const uint64_t b = streams[w].batch_offsets[static_cast<uint64_t>(e) * bpe + h];
                const uint64_t en = streams[w].batch_offsets[static_cast<uint64_t>(e) * bpe + h + 1];
                quota[w] = en - b;
                batch.insert(batch.end(), streams[w].entries.begin() + b,
                             streams[w].entries.begin() + en);
            }
            for (auto& s : slot) s.clear();
            std::vector<uint32_t> leftover;
            for (uint32_t k : batch) {
                const uint32_t o = owner[k];
                if (o != kNoWorker && slot[o].size() < quota[o])
                    slot[o].push_back(k);
                else
                    leftover.push_back(k);
            }
            uint32_t w = 0;
            for (uint32_t k : leftover) {
                while (slot[w].size() >= quota[w]) ++w;
                slot[w].push_back(k);
            }
            for (uint32_t i = 0; i < N; ++i) {
                auto& out = p.transformed[i];
                out.entries.insert(out.entries.end(), slot[i].begin(), slot[i].end());
                out.batch_offsets.push_back(out.entries.size());
            }
        }
        for (auto& out : p.transformed) out.epoch_offsets.push_back(out.entries.size());
    }
    p.order_modified = true;

    // Prefetch order follows the transformed consumption order.
    for (uint32_t w = 0; w < N; ++w) {
        const auto first_pos = first_access_positions(p.transformed[w], dataset.samples);
        for (auto& list : p.assignment.class_lists[w]) order_by_first_access(list, first_pos);
    }
    p.assignment.build_index(dataset.samples);
}

void build_lbann_dynamic(BuiltPolicy& p, const std::vector<AccessStream>& streams,
                         const SystemConfig& cfg, const DatasetModel& dataset) {
    const uint32_t N = static_cast<uint32_t>(streams.size());
    p.owner.assign(dataset.samples, kNoWorker);
    p.owner_first_index.assign(dataset.samples, kNoIndex);
    p.owner_cached.assign(dataset.samples, 0);
    for (uint32_t w = 0; w < N; ++w) {
        double used = 0;
        const double cap = cfg.storage[1].capacity_mb;
        const auto epoch0 = streams[w].epoch_entries(0);
        for (uint64_t i = 0; i < epoch0.size(); ++i) {
            const uint32_t k = epoch0[i];
            p.owner[k] = w;
            p.owner_first_index[k] = i;
            if (used + dataset.sizes_mb[k] <= cap) {
                used += dataset.sizes_mb[k];
                p.owner_cached[k] = 1;
            }
        }
    }
    p.first_touch_dynamic = true;
}

}  // namespace

BuiltPolicy build_policy(const PolicySpec& spec, const std::vector<AccessStream>& streams,
                         const SystemConfig& cfg, const DatasetModel& dataset) {
    cfg.validate();
    if (streams.size() != cfg.workers)
        throw std::invalid_argument("stream count does not match worker count");
    BuiltPolicy p;
    p.kind = spec.kind;
    p.spec = spec;
    p.phase_offset_s.assign(cfg.workers, 0.0);

    switch (spec.kind) {
        case PolicyKind::Perfect:
            p.no_reads = true;
            p.counts_as_prefetcher = false;
            break;
        case PolicyKind::Naive:
            p.synchronous_demand = true;
            p.counts_as_prefetcher = false;
            break;
        case PolicyKind::StagingBuffer:
            break;
        case PolicyKind::Nopfs: {
            p.clairvoyant_staging = true;
            p.allow_local = p.allow_remote = true;
            std::vector<FrequencyTable> freqs;
            freqs.reserve(cfg.workers);
            for (const auto& st : streams)
                freqs.push_back(access_frequencies(st, static_cast<uint32_t>(dataset.samples), 0,
                                                   st.epoch_count()));
            p.assignment = nopfs_assign_caches(freqs, cfg, dataset, streams);
            break;
        }
        case PolicyKind::DeepIOOrdered:
            p.allow_local = true;
            shard_assignment(p, streams, cfg, dataset, std::min(1u, cfg.cache_class_count()),
                             true);
            break;
        case PolicyKind::DeepIOOptimistic:
            p.allow_local = true;
            shard_assignment(p, streams, cfg, dataset, std::min(1u, cfg.cache_class_count()),
                             true);
            transform_deepio_optimistic(p, streams, dataset);
            break;
        case PolicyKind::ParallelStaging: {
            p.allow_local = true;
            p.prestaged = true;
            shard_assignment(p, streams, cfg, dataset, cfg.cache_class_count(), false);
            transform_parallel_staging(p, streams, dataset);
            for (uint32_t w = 0; w < cfg.workers; ++w) {
                double phase = 0;
                for (uint32_t j = 1; j <= cfg.cache_class_count(); ++j)
                    phase += total_fill_time(p.assignment.class_lists[w][j - 1], j, cfg, dataset);
                p.phase_offset_s[w] = phase;
            }
            break;
        }
        case PolicyKind::LbannDynamic:
            require_lbann_feasible(cfg, dataset);
            p.allow_local = p.allow_remote = true;
            build_lbann_dynamic(p, streams, cfg, dataset);
            break;
        case PolicyKind::LbannPreload: {
            require_lbann_feasible(cfg, dataset);
            p.allow_local = p.allow_remote = true;
            p.prestaged = true;
            shard_assignment(p, streams, cfg, dataset, 1, false);
            for (uint32_t w = 0; w < cfg.workers; ++w)
                p.phase_offset_s[w] =
                    total_fill_time(p.assignment.class_lists[w][0], 1, cfg, dataset);
            break;
        }
        case PolicyKind::LocalityAware:
            p.allow_local = p.allow_remote = true;
            shard_assignment(p, streams, cfg, dataset, cfg.cache_class_count(), false);
            transform_locality_aware(p, streams, dataset);
            break;
    }
    return p;
}

}  // namespace clairsim
