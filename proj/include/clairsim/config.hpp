#ifndef CLAIRSIM_CONFIG_HPP
#define CLAIRSIM_CONFIG_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "clairsim/access.hpp"
#include "clairsim/perfmodel.hpp"
#include "clairsim/policies.hpp"
#include "clairsim/scenarios.hpp"

namespace clairsim {

using json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Size/rate parsing: plain numbers are MB (or MB/s); strings accept
// KB/MB/GB/TB suffixes with an optional "/s" (decimal SI units).
double parse_mb(const json& value, const std::string& context);

// Everything one run needs, fully validated before simulation starts.
struct RunConfig {
    static constexpr int kSchemaVersion = 1;

    std::string preset;  // scenario name, or empty when system/dataset inline
    SystemConfig system;
    uint64_t dataset_samples = 0;
    double dataset_mean_mb = 0;
    double dataset_sigma_mb = 0;
    bool sigma_relative = false;
    std::optional<double> dataset_total_mb;
    uint64_t size_seed = 1;

    PolicySpec policy;
    Seed seed{1};
    uint32_t epochs = 5;
    uint32_t per_worker_batch = 32;
    bool drop_last = true;
    double scale = 1.0;

    PartitionSpec partition() const;
    DatasetModel make_dataset() const;
};

RunConfig run_config_from_scenario(const Scenario& sc);

// JSON round-trip: load validates + normalizes (units become plain MB);
// dump of a loaded config re-loads to an identical RunConfig.
RunConfig load_run_config(const json& doc);
RunConfig load_run_config_file(const std::string& path);
json dump_run_config(const RunConfig& run);

}  // namespace clairsim

#endif
