#include "clairsim/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace clairsim {

ThroughputCurve::ThroughputCurve(std::vector<std::pair<double, double>> points)
    : points_(std::move(points)) {
    if (points_.empty()) throw std::invalid_argument("throughput curve needs at least one point");
    for (size_t i = 0; i < points_.size(); ++i) {
        if (points_[i].second <= 0)
            throw std::invalid_argument("throughput values must be positive");
        if (i > 0 && points_[i].first <= points_[i - 1].first)
            throw std::invalid_argument("curve x values must be strictly increasing");
    }
}

double ThroughputCurve::at(double x) const {
    if (points_.empty()) throw std::logic_error("empty throughput curve");
    if (x <= points_.front().first) return points_.front().second;
    if (x >= points_.back().first) return points_.back().second;
    for (size_t i = 1; i < points_.size(); ++i) {
        if (x <= points_[i].first) {
            const auto& [x0, y0] = points_[i - 1];
            const auto& [x1, y1] = points_[i];
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    return points_.back().second;
}

void SystemConfig::validate() const {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (compute_mbps <= 0 || preprocess_mbps <= 0 || interconnect_mbps <= 0)
        throw std::invalid_argument("all rates must be positive");
    if (pfs_curve.points().empty()) throw std::invalid_argument("pfs curve is required");
    if (storage.empty()) throw std::invalid_argument("storage class 0 (staging buffer) required");
    for (const auto& sc : storage) {
        if (sc.capacity_mb <= 0)
            throw std::invalid_argument("storage class '" + sc.name + "' needs capacity > 0");
        if (sc.prefetch_threads < 1)
            throw std::invalid_argument("storage class '" + sc.name + "' needs threads >= 1");
        if (sc.read_curve.points().empty() || sc.write_curve.points().empty())
            throw std::invalid_argument("storage class '" + sc.name + "' needs read/write curves");
    }
    for (size_t j = 2; j < storage.size(); ++j) {
        if (storage[j].read_share() > storage[j - 1].read_share())
            throw std::invalid_argument(
                "storage classes must be ordered fastest to slowest by per-thread read share ('" +
                storage[j].name + "' is faster than '" + storage[j - 1].name + "')");
    }
}

DatasetModel DatasetModel::from_sizes(std::vector<double> sizes) {
    DatasetModel d;
    d.samples = sizes.size();
    d.sizes_mb = std::move(sizes);
    for (double s : d.sizes_mb) {
        if (s <= 0) throw std::invalid_argument("sample sizes must be positive");
        d.total_mb += s;
    }
    d.mean_mb = d.samples ? d.total_mb / static_cast<double>(d.samples) : 0;
    return d;
}

DatasetModel DatasetModel::generate(uint64_t samples, double mean_mb, double sigma_mb,
                                    std::optional<double> total_target_mb, uint64_t seed,
                                    bool sigma_relative) {
    if (samples < 1) throw std::invalid_argument("dataset must have at least one sample");
    if (mean_mb <= 0) throw std::invalid_argument("mean size must be positive");
    if (sigma_mb < 0) throw std::invalid_argument("sigma must be >= 0");
    const double sigma = sigma_relative ? sigma_mb * mean_mb : sigma_mb;
    const double floor_mb = std::min(std::max(1e-3, mean_mb / 100.0), mean_mb);

    DatasetModel d;
    d.samples = samples;
    d.mean_mb = mean_mb;
    d.sigma_mb = sigma;
    d.seed = seed;
    d.sizes_mb.resize(samples);
    CounterRng rng = CounterRng::for_stream(seed, kSizeTag);
    double sum = 0;
    for (auto& s : d.sizes_mb) {
        s = (sigma == 0) ? mean_mb : std::max(floor_mb, mean_mb + sigma * rng.normal());
        sum += s;
    }
    if (total_target_mb) {
        const double scale = *total_target_mb / sum;
        sum = 0;
        for (auto& s : d.sizes_mb) {
            s *= scale;
            sum += s;
        }
    }
    d.total_mb = sum;
    return d;
}

double DatasetModel::max_size_mb() const {
    return sizes_mb.empty() ? 0 : *std::max_element(sizes_mb.begin(), sizes_mb.end());
}

double write_time(double size_mb, const SystemConfig& cfg) {
    return std::max(size_mb / cfg.preprocess_mbps, size_mb / cfg.staging().write_share());
}

double fetch_time_pfs(double size_mb, const SystemConfig& cfg, uint32_t gamma) {
    if (gamma < 1) throw std::invalid_argument("PFS fetch requires gamma >= 1");
    return size_mb / (cfg.pfs_curve.at(gamma) / gamma);
}

double fetch_time_remote(double size_mb, const SystemConfig& cfg, uint32_t storage_class) {
    const auto& sc = cfg.storage.at(storage_class);
    return size_mb / std::min(cfg.interconnect_mbps, sc.read_share());
}

double fetch_time_local(double size_mb, const SystemConfig& cfg, uint32_t storage_class) {
    return size_mb / cfg.storage.at(storage_class).read_share();
}

}  // namespace clairsim
