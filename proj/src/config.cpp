#include "clairsim/config.hpp"

#include <cmath>
#include <fstream>

namespace clairsim {

namespace {

double unit_multiplier(std::string unit, const std::string& context) {
    if (unit.size() >= 2 && unit.substr(unit.size() - 2) == "/s")
        unit = unit.substr(0, unit.size() - 2);
    if (unit == "KB") return 1e-3;
    if (unit == "MB" || unit.empty()) return 1.0;
    if (unit == "GB") return 1e3;
    if (unit == "TB") return 1e6;
    throw ConfigError("unknown unit '" + unit + "' in " + context);
}

}  // namespace

double parse_mb(const json& value, const std::string& context) {
    if (value.is_number()) return value.get<double>();
    if (!value.is_string()) throw ConfigError(context + " must be a number (MB) or a string");
    const std::string text = value.get<std::string>();
    size_t pos = 0;
    double num;
    try {
        num = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("cannot parse '" + text + "' in " + context);
    }
    while (pos < text.size() && text[pos] == ' ') ++pos;
    return num * unit_multiplier(text.substr(pos), context);
}

PartitionSpec RunConfig::partition() const {
    PartitionSpec part;
    part.num_workers = system.workers;
    part.global_batch = per_worker_batch * system.workers;
    part.epochs = epochs;
    part.drop_last = drop_last;
    return part;
}

DatasetModel RunConfig::make_dataset() const {
    return DatasetModel::generate(dataset_samples, dataset_mean_mb, dataset_sigma_mb,
                                  dataset_total_mb, size_seed, sigma_relative);
}

RunConfig run_config_from_scenario(const Scenario& sc) {
    RunConfig run;
    run.preset = sc.name;
    run.system = sc.system;
    run.dataset_samples = sc.samples;
    run.dataset_mean_mb = sc.mean_mb;
    run.dataset_sigma_mb = sc.sigma_mb;
    run.dataset_total_mb = sc.total_target_mb;
    run.per_worker_batch = sc.per_worker_batch;
    return run;
}

namespace {

ThroughputCurve curve_from_json(const json& doc, const std::string& context) {
    if (!doc.is_array() || doc.empty())
        throw ConfigError(context + " must be a non-empty array of [x, MB/s] pairs");
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : doc) {
        if (!p.is_array() || p.size() != 2)
            throw ConfigError(context + " entries must be [x, MB/s] pairs");
        pts.emplace_back(p[0].get<double>(), parse_mb(p[1], context));
    }
    try {
        return ThroughputCurve(std::move(pts));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(context + ": " + e.what());
    }
}

json curve_to_json(const ThroughputCurve& curve) {
    json arr = json::array();
    for (const auto& [x, y] : curve.points()) arr.push_back(json::array({x, y}));
    return arr;
}

SystemConfig system_from_json(const json& doc) {
    SystemConfig cfg;
    cfg.workers = doc.at("workers").get<uint32_t>();
    cfg.compute_mbps = parse_mb(doc.at("compute"), "system.compute");
    cfg.preprocess_mbps = parse_mb(doc.at("preprocess"), "system.preprocess");
    cfg.interconnect_mbps = parse_mb(doc.at("interconnect"), "system.interconnect");
    cfg.pfs_curve = curve_from_json(doc.at("pfs_curve"), "system.pfs_curve");
    for (const auto& sj : doc.at("storage_classes")) {
        StorageClassSpec sc;
        sc.name = sj.at("name").get<std::string>();
        sc.capacity_mb = parse_mb(sj.at("capacity"), "storage." + sc.name + ".capacity");
        sc.prefetch_threads = sj.at("prefetch_threads").get<uint32_t>();
        sc.read_curve = curve_from_json(sj.at("read_curve"), "storage." + sc.name + ".read_curve");
        sc.write_curve = sj.contains("write_curve")
                             ? curve_from_json(sj.at("write_curve"),
                                               "storage." + sc.name + ".write_curve")
                             : sc.read_curve;
        cfg.storage.push_back(std::move(sc));
    }
    return cfg;
}

json system_to_json(const SystemConfig& cfg) {
    json doc;
    doc["workers"] = cfg.workers;
    doc["compute"] = cfg.compute_mbps;
    doc["preprocess"] = cfg.preprocess_mbps;
    doc["interconnect"] = cfg.interconnect_mbps;
    doc["pfs_curve"] = curve_to_json(cfg.pfs_curve);
    doc["storage_classes"] = json::array();
    for (const auto& sc : cfg.storage) {
        json sj;
        sj["name"] = sc.name;
        sj["capacity"] = sc.capacity_mb;
        sj["prefetch_threads"] = sc.prefetch_threads;
        sj["read_curve"] = curve_to_json(sc.read_curve);
        sj["write_curve"] = curve_to_json(sc.write_curve);
        doc["storage_classes"].push_back(std::move(sj));
    }
    return doc;
}

}  // namespace

RunConfig load_run_config(const json& doc) {
    if (doc.value("version", RunConfig::kSchemaVersion) != RunConfig::kSchemaVersion)
        throw ConfigError("unsupported config version");
    RunConfig run;
    if (doc.contains("preset")) {
        Scenario sc;
        try {
            sc = make_scenario(doc.at("preset").get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        run = run_config_from_scenario(sc);
    }
    if (doc.contains("system")) run.system = system_from_json(doc.at("system"));
    if (doc.contains("dataset")) {
        const auto& dj = doc.at("dataset");
        if (dj.contains("samples")) run.dataset_samples = dj.at("samples").get<uint64_t>();
        if (dj.contains("mean_size"))
            run.dataset_mean_mb = parse_mb(dj.at("mean_size"), "dataset.mean_size");
        if (dj.contains("sigma")) run.dataset_sigma_mb = parse_mb(dj.at("sigma"), "dataset.sigma");
        if (dj.contains("sigma_relative")) run.sigma_relative = dj.at("sigma_relative").get<bool>();
        if (dj.contains("total_size"))
            run.dataset_total_mb = parse_mb(dj.at("total_size"), "dataset.total_size");
        if (dj.contains("size_seed")) run.size_seed = dj.at("size_seed").get<uint64_t>();
    }
    if (doc.contains("run")) {
        const auto& rj = doc.at("run");
        if (rj.contains("policy")) {
            const auto name = rj.at("policy").get<std::string>();
            const auto kind = policy_from_name(name);
            if (!kind) throw ConfigError("unknown policy '" + name + "'");
            run.policy.kind = *kind;
        }
        if (rj.contains("heuristic_mode"))
            run.policy.heuristic_mode = rj.at("heuristic_mode").get<bool>();
        if (rj.contains("seed")) run.seed.value = rj.at("seed").get<uint64_t>();
        if (rj.contains("epochs")) run.epochs = rj.at("epochs").get<uint32_t>();
        if (rj.contains("per_worker_batch"))
            run.per_worker_batch = rj.at("per_worker_batch").get<uint32_t>();
        if (rj.contains("drop_last")) run.drop_last = rj.at("drop_last").get<bool>();
        if (rj.contains("scale")) run.scale = rj.at("scale").get<double>();
    }
    if (run.scale != 1.0) {
        if (run.scale <= 0 || run.scale > 1) throw ConfigError("scale must lie in (0, 1]");
        run.dataset_samples = std::max<uint64_t>(
            1, llround(static_cast<double>(run.dataset_samples) * run.scale));
        if (run.dataset_total_mb) *run.dataset_total_mb *= run.scale;
        for (auto& sc : run.system.storage) sc.capacity_mb *= run.scale;
        run.scale = 1.0;  // baked in; dumps stay normalized
    }

    if (run.dataset_samples == 0) throw ConfigError("dataset.samples is required");
    if (run.dataset_mean_mb <= 0) throw ConfigError("dataset.mean_size must be positive");
    try {
        run.system.validate();
        run.partition().validate(run.dataset_samples);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return run;
}

RunConfig load_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const std::exception& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
    return load_run_config(doc);
}

json dump_run_config(const RunConfig& run) {
    json doc;
    doc["version"] = RunConfig::kSchemaVersion;
    if (!run.preset.empty()) doc["preset"] = run.preset;
    doc["system"] = system_to_json(run.system);
    json dj;
    dj["samples"] = run.dataset_samples;
    dj["mean_size"] = run.dataset_mean_mb;
    dj["sigma"] = run.dataset_sigma_mb;
    dj["sigma_relative"] = run.sigma_relative;
    if (run.dataset_total_mb) dj["total_size"] = *run.dataset_total_mb;
    dj["size_seed"] = run.size_seed;
    doc["dataset"] = std::move(dj);
    json rj;
    rj["policy"] = policy_name(run.policy.kind);
    rj["heuristic_mode"] = run.policy.heuristic_mode;
    rj["seed"] = run.seed.value;
    rj["epochs"] = run.epochs;
    rj["per_worker_batch"] = run.per_worker_batch;
    rj["drop_last"] = run.drop_last;
    rj["scale"] = run.scale;
    doc["run"] = std::move(rj);
    return doc;
}

}  // namespace clairsim
