#ifndef CLAIRSIM_SCENARIOS_HPP
#define CLAIRSIM_SCENARIOS_HPP

#include <optional>
#include <string>
#include <vector>

#include "clairsim/perfmodel.hpp"

namespace clairsim {

// A named system + dataset preset (Lassen-derived small-cluster system with
// representative datasets from MNIST up to CosmoFlow 512^3).
struct Scenario {
    std::string name;
    SystemConfig system;
    uint64_t samples = 0;  // F
    double mean_mb = 0;
    double sigma_mb = 0;
    std::optional<double> total_target_mb;
    uint32_t per_worker_batch = 32;

    uint32_t global_batch() const { return per_worker_batch * system.workers; }
    DatasetModel make_dataset(uint64_t size_seed) const;
};

std::vector<std::string> scenario_names();

// Throws std::invalid_argument for unknown names.
Scenario make_scenario(const std::string& name);

// Shrinks the dataset (F, S) and every storage capacity by `factor`,
// keeping all throughputs; for desk-scale experiments.
void scale_scenario(Scenario& sc, double factor);

}  // namespace clairsim

#endif
