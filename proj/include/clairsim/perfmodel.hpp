#ifndef CLAIRSIM_PERFMODEL_HPP
#define CLAIRSIM_PERFMODEL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clairsim/rng.hpp"

// All quantities are normalized to MB and seconds (decimal SI: 1 GB = 1e3 MB,
// 1 KB = 1e-3 MB).

namespace clairsim {

// Measured throughput points (readers/threads -> MB/s). Piecewise linear
// between knots, clamped to the first/last value outside them: aggregate
// bandwidth saturates, so linear extrapolation would invent capacity.
class ThroughputCurve {
public:
    ThroughputCurve() = default;
    explicit ThroughputCurve(std::vector<std::pair<double, double>> points);

    double at(double x) const;
    const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

struct StorageClassSpec {
    std::string name;
    double capacity_mb = 0;
    ThroughputCurve read_curve;
    ThroughputCurve write_curve;
    uint32_t prefetch_threads = 1;  // p_j

    // Per-thread shares r_j(p_j)/p_j and w_j(p_j)/p_j.
    double read_share() const { return read_curve.at(prefetch_threads) / prefetch_threads; }
    double write_share() const { return write_curve.at(prefetch_threads) / prefetch_threads; }
};

struct SystemConfig {
    uint32_t workers = 1;          // N
    double compute_mbps = 1;       // c
    double preprocess_mbps = 1;    // beta
    double interconnect_mbps = 1;  // b_c
    ThroughputCurve pfs_curve;     // t(gamma)
    // storage[0] is the staging buffer; classes 1..J ordered fastest first.
    std::vector<StorageClassSpec> storage;

    const StorageClassSpec& staging() const { return storage.front(); }
    uint32_t cache_class_count() const { return static_cast<uint32_t>(storage.size()) - 1; }

    // Throws std::invalid_argument on violated invariants (positive rates,
    // p_0 >= 1, classes 1..J sorted by descending read share).
    void validate() const;
};

struct DatasetModel {
    uint64_t samples = 0;          // F
    std::vector<double> sizes_mb;  // s_k
    double total_mb = 0;           // S
    double mean_mb = 0;            // generation mu
    double sigma_mb = 0;           // generation sigma
    uint64_t seed = 0;

    static DatasetModel from_sizes(std::vector<double> sizes);

    // Normal(mu, sigma^2) draws, clamped below at min(max(1 KB, mu/100), mu)
    // so sizes stay positive without perturbing the sigma=0 case, then
    // rescaled multiplicatively to hit total_target_mb when given.
    static DatasetModel generate(uint64_t samples, double mean_mb, double sigma_mb,
                                 std::optional<double> total_target_mb, uint64_t seed,
                                 bool sigma_relative = false);

    double max_size_mb() const;
};

// max(s/beta, s/(w_0(p_0)/p_0)): preprocessing pipelined with the staging write.
double write_time(double size_mb, const SystemConfig& cfg);

// s / (t(gamma)/gamma), the per-reader PFS share with gamma concurrent readers.
double fetch_time_pfs(double size_mb, const SystemConfig& cfg, uint32_t gamma);

// s / min(b_c, r_j(p_j)/p_j) for a remote holder's class j (1-based).
double fetch_time_remote(double size_mb, const SystemConfig& cfg, uint32_t storage_class);

// s / (r_j(p_j)/p_j) for the local class j (1-based).
double fetch_time_local(double size_mb, const SystemConfig& cfg, uint32_t storage_class);

}  // namespace clairsim

#endif
