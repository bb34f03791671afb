#ifndef CLAIRSIM_POLICIES_HPP
#define CLAIRSIM_POLICIES_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "clairsim/access.hpp"
#include "clairsim/perfmodel.hpp"

namespace clairsim {

enum class PolicyKind {
    Perfect,
    Naive,
    StagingBuffer,
    DeepIOOrdered,
    DeepIOOptimistic,
    ParallelStaging,
    LbannDynamic,
    LbannPreload,
    LocalityAware,
    Nopfs,
};

const char* policy_name(PolicyKind kind);
std::optional<PolicyKind> policy_from_name(const std::string& name);
std::vector<PolicyKind> all_policies();

struct PolicySpec {
    PolicyKind kind = PolicyKind::Nopfs;
    // Emulate the real system's remote-availability heuristic (the requester's
    // own prefetch progress stands in for the holder's) instead of exact
    // progress; false positives are counted in the result.
    bool heuristic_mode = false;
};

// Raised when a policy cannot run on the given configuration (e.g. the LBANN
// data store with a dataset larger than aggregate worker memory).
struct PolicyInfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Which samples each worker caches in which storage class, and the order the
// class prefetcher fills them (ascending first-access position).
struct CacheAssignment {
    struct Holder {
        uint32_t worker;
        uint32_t storage_class;  // 1-based cache class
        uint32_t position;       // index in that worker's class prefetch order
    };

    // [worker][class-1] -> prefetch-ordered sample list
    std::vector<std::vector<std::vector<uint32_t>>> class_lists;
    // CSR index: holders of sample k are holders[holder_offsets[k] .. k+1)
    std::vector<uint32_t> holder_offsets;
    std::vector<Holder> holders;

    bool empty() const { return holders.empty(); }
    std::span<const Holder> holders_of(uint32_t sample) const {
        if (holder_offsets.empty()) return {};
        return {holders.data() + holder_offsets[sample],
                holders.data() + holder_offsets[sample + 1]};
    }
    // Rebuilds the CSR index from class_lists.
    void build_index(uint64_t samples);
};

// Per-worker, per-class count of completed prefetches, in prefetch order.
struct PrefetchProgress {
    std::vector<std::vector<uint64_t>> completed;  // [worker][class-1]
};

struct FetchSource {
    enum class Kind { Pfs, Remote, Local };
    Kind kind = Kind::Pfs;
    uint32_t worker = 0;         // holder (Remote only)
    uint32_t storage_class = 0;  // 1-based (Remote/Local)
};

// Frequency-ranked cache packing: samples sorted by access count descending
// (ties by earliest first access) are placed greedily into class 1, then 2,
// and so on until the dataset is cached or local storage is full. Samples the
// worker never accesses are not assigned.
CacheAssignment nopfs_assign_caches(const std::vector<FrequencyTable>& freqs,
                                    const SystemConfig& cfg, const DatasetModel& dataset,
                                    const std::vector<AccessStream>& streams);

// Whether `holder` is believed to have its sample cached: exact mode compares
// the holder's own progress; heuristic mode substitutes the requester's.
bool remote_available(const CacheAssignment::Holder& holder, const PrefetchProgress& progress,
                      uint32_t requester, bool heuristic);

// Minimal-time fetch source among local storage (if prefetched), remote
// holders (if believed available), and the PFS with `gamma` readers.
// Ties break Local > Remote > PFS, then lowest holder worker id.
FetchSource nopfs_choose_source(uint32_t sample, uint32_t worker,
                                const CacheAssignment& assignment,
                                const PrefetchProgress& progress, uint32_t gamma,
                                const SystemConfig& cfg, bool heuristic = false);

// As nopfs_choose_source but with the candidate classes a policy permits.
FetchSource choose_source(uint32_t sample, uint32_t worker, const CacheAssignment& assignment,
                          const PrefetchProgress& progress, uint32_t gamma,
                          const SystemConfig& cfg, bool allow_local, bool allow_remote,
                          bool heuristic);

// Fastest cached source only (no PFS fallback); returns the source and its
// unit-size fetch time, or nullopt when nothing is cached and reachable.
std::optional<std::pair<FetchSource, double>> best_cached_source(
    uint32_t sample, uint32_t worker, const CacheAssignment& assignment,
    const PrefetchProgress& progress, const SystemConfig& cfg, bool allow_local,
    bool allow_remote, bool heuristic);

double fetch_source_time(const FetchSource& src, double size_mb, const SystemConfig& cfg,
                         uint32_t gamma);

// Duration of one background prefetch into a cache class: the PFS fetch at
// worst-case contention (gamma = N) or the class write, whichever dominates,
// spread over the class's prefetch threads.
double fill_step_duration(double size_mb, const SystemConfig& cfg, uint32_t storage_class);

// A policy instance ready for simulation.
struct BuiltPolicy {
    PolicyKind kind = PolicyKind::Nopfs;
    PolicySpec spec;

    CacheAssignment assignment;
    bool order_modified = false;
    double coverage = 1.0;

    // Engine behavior switches.
    bool clairvoyant_staging = false;  // prefetch across epoch boundaries (NoPFS)
    bool counts_as_prefetcher = true;  // Naive demand reads are not prefetches
    bool synchronous_demand = false;   // Naive: read serialized with compute
    bool no_reads = false;             // Perfect
    bool allow_local = false;
    bool allow_remote = false;

    // LBANN dynamic first-touch state (owner of each sample = its epoch-0
    // consumer; owner_cached reflects the per-worker RAM capacity cap).
    bool first_touch_dynamic = false;
    std::vector<uint32_t> owner;
    std::vector<uint64_t> owner_first_index;  // global index in owner's stream
    std::vector<uint8_t> owner_cached;

    // Time charged per worker before epoch 0 (staging phase / preload);
    // prestaged policies have their whole assignment cached at that point.
    std::vector<double> phase_offset_s;
    bool prestaged = false;

    // Transformed consumption order; empty means the original streams.
    std::vector<AccessStream> transformed;
    std::vector<std::string> warnings;

    const std::vector<AccessStream>& active_streams(
        const std::vector<AccessStream>& original) const {
        return transformed.empty() ? original : transformed;
    }
};

BuiltPolicy build_policy(const PolicySpec& spec, const std::vector<AccessStream>& streams,
                         const SystemConfig& cfg, const DatasetModel& dataset);

}  // namespace clairsim

#endif
