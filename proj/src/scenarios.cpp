#include "clairsim/scenarios.hpp"

#include <cmath>
#include <stdexcept>

namespace clairsim {

namespace {

// Small-cluster system of the simulation study: N workers at c=64 MB/s,
// beta=200 MB/s, b_c=24 GB/s, 5 GB staging buffer (8 threads, 111 GB/s),
// 120 GB RAM (4 threads, 85 GB/s), 900 GB SSD (2 threads, 4 GB/s), and a
// Lassen-benchmarked PFS curve. Write curves mirror the read curves (only
// read rates were benchmarked).
SystemConfig reference_system(uint32_t workers) {
    SystemConfig cfg;
    cfg.workers = workers;
    cfg.compute_mbps = 64;
    cfg.preprocess_mbps = 200;
    cfg.interconnect_mbps = 24000;
    cfg.pfs_curve = ThroughputCurve({{1, 330}, {2, 730}, {4, 1540}, {8, 2870}});

    StorageClassSpec staging;
    staging.name = "staging";
    staging.capacity_mb = 5000;
    staging.prefetch_threads = 8;
    staging.read_curve = ThroughputCurve({{8, 111000}});
    staging.write_curve = staging.read_curve;

    StorageClassSpec ram;
    ram.name = "ram";
    ram.capacity_mb = 120000;
    ram.prefetch_threads = 4;
    ram.read_curve = ThroughputCurve({{4, 85000}});
    ram.write_curve = ram.read_curve;

    StorageClassSpec ssd;
    ssd.name = "ssd";
    ssd.capacity_mb = 900000;
    ssd.prefetch_threads = 2;
    ssd.read_curve = ThroughputCurve({{2, 4000}});
    ssd.write_curve = ssd.read_curve;

    cfg.storage = {staging, ram, ssd};
    return cfg;
}

}  // namespace

std::vector<std::string> scenario_names() {
    return {"mnist", "imagenet1k", "openimages", "imagenet22k", "cosmoflow", "cosmoflow512"};
}

Scenario make_scenario(const std::string& name) {
    Scenario sc;
    sc.name = name;
    sc.system = reference_system(4);
    sc.per_worker_batch = 32;
    if (name == "mnist") {
        sc.samples = 50'000;
        sc.mean_mb = 0.76e-3;
        sc.sigma_mb = 0;
        sc.total_target_mb = 40;
    } else if (name == "imagenet1k") {
        sc.samples = 1'281'167;
        sc.mean_mb = 0.1077;
        sc.sigma_mb = 0.1;
        sc.total_target_mb = 135'000;
    } else if (name == "openimages") {
        sc.samples = 1'743'042;
        sc.mean_mb = 0.2937;
        sc.sigma_mb = 0.2;
        sc.total_target_mb = 500'000;
    } else if (name == "imagenet22k") {
        sc.samples = 14'197'122;
        sc.mean_mb = 0.1077;
        sc.sigma_mb = 0.2;
        sc.total_target_mb = 1'500'000;
    } else if (name == "cosmoflow") {
        sc.samples = 262'144;
        sc.mean_mb = 17;
        sc.sigma_mb = 0;
        sc.per_worker_batch = 16;
    } else if (name == "cosmoflow512") {
        sc.system = reference_system(8);
        sc.samples = 10'000;
        sc.mean_mb = 1000;
        sc.sigma_mb = 0;
        sc.per_worker_batch = 1;
    } else {
        throw std::invalid_argument("unknown scenario '" + name + "'");
    }
    return sc;
}

DatasetModel Scenario::make_dataset(uint64_t size_seed) const {
    return DatasetModel::generate(samples, mean_mb, sigma_mb, total_target_mb, size_seed);
}

void scale_scenario(Scenario& sc, double factor) {
    if (factor <= 0 || factor > 1)
        throw std::invalid_argument("scale factor must lie in (0, 1]");
    sc.samples = std::max<uint64_t>(1, std::llround(static_cast<double>(sc.samples) * factor));
    if (sc.total_target_mb) *sc.total_target_mb *= factor;
    for (auto& storage : sc.system.storage) storage.capacity_mb *= factor;
}

}  // namespace clairsim
