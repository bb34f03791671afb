#ifndef CLAIRSIM_SIMULATOR_HPP
#define CLAIRSIM_SIMULATOR_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clairsim/access.hpp"
#include "clairsim/perfmodel.hpp"
#include "clairsim/policies.hpp"

namespace clairsim {

struct LocationStat {
    double fetch_s = 0;
    double bytes_mb = 0;
};

struct EpochStat {
    double time_s = 0;                // max over workers
    double stall_s = 0;               // summed over workers
    double pfs_demand_bytes_mb = 0;   // demand-path PFS bytes
};

struct SimOptions {
    bool heuristic_mode = false;           // remote-availability proxy emulation
    bool record_consumption_times = false; // keep per-worker t_{i,f} sequences
};

struct SimResult {
    double total_time_s = 0;
    // No-stall bound for the work this run actually consumed: max_i sum s/c.
    double perfect_bound_s = 0;
    double stall_time_s = 0;
    std::vector<double> worker_total_s;
    std::vector<double> worker_stall_s;

    // Demand-path (staging prefetch) fetch breakdown by source location;
    // keys: "pfs", "remote", and the cache class names. Fill holds the
    // background cache-fill traffic (always PFS-sourced).
    std::map<std::string, LocationStat> demand;
    std::map<std::string, LocationStat> fill;

    std::vector<std::string> location_keys;            // column order for CSV
    std::vector<std::vector<double>> per_batch_s;      // [worker][batch]
    std::vector<std::vector<std::vector<double>>> per_batch_bytes_mb;  // [worker][batch][loc]
    std::vector<EpochStat> epochs;

    bool order_modified = false;
    double coverage = 1.0;
    uint64_t false_positive_remote = 0;
    double max_staging_occupancy_mb = 0;

    std::vector<std::vector<double>> consumption_times_s;  // when recorded
    std::vector<std::string> warnings;
};

// Evaluates the per-worker consumption recurrence
//   t_{i,f} = max(avail_i(f), t_{i,f-1} + s_{R_{f-1}}/c)
// under the given policy, with avail driven by a staging prefetch pipeline of
// p_0 load-balanced threads, background cache-fill pipelines per storage
// class, and PFS contention gamma counted per prefetch step. Deterministic:
// identical inputs produce bit-identical results.
SimResult simulate(const SystemConfig& cfg, const DatasetModel& dataset,
                   const std::vector<AccessStream>& streams, const BuiltPolicy& policy,
                   const SimOptions& options = {});

// Convenience: build_policy + simulate.
SimResult simulate(const SystemConfig& cfg, const DatasetModel& dataset,
                   const std::vector<AccessStream>& streams, const PolicySpec& spec,
                   const SimOptions& options = {});

// ---- Environment sweep ----------------------------------------------------

struct SweepAxis {
    std::string param;  // staging_mb | ram_mb | ssd_mb | compute_multiplier
    std::vector<double> values;
};

struct SweepGrid {
    std::vector<SweepAxis> axes;
    uint64_t point_count() const;
    void validate() const;  // non-empty cartesian product, known params
};

struct SweepCell {
    std::vector<std::pair<std::string, double>> coords;
    std::optional<SimResult> result;
    std::string error;  // non-empty when this point failed
};

// Applies a single override to a copy of the base configuration.
SystemConfig apply_override(const SystemConfig& base, const std::string& param, double value);

// Runs one simulation per grid point (policies rebuilt per point, since cache
// assignments depend on capacities). Points run in parallel across `jobs`
// threads; results are merged by grid index, so output order is stable.
std::vector<SweepCell> sweep(const SystemConfig& base, const DatasetModel& dataset,
                             const std::vector<AccessStream>& streams, const PolicySpec& spec,
                             const SweepGrid& grid, unsigned jobs = 1,
                             const SimOptions& options = {});

}  // namespace clairsim

#endif
