#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "clairsim/perfmodel.hpp"
#include "clairsim/scenarios.hpp"

using namespace clairsim;

TEST_SUITE_BEGIN("perfmodel");

namespace {

SystemConfig lassen() { return make_scenario("mnist").system; }

}  // namespace

TEST_CASE("curve construction rejects bad input") {
    CHECK_THROWS_AS(ThroughputCurve(std::vector<std::pair<double, double>>{}), std::invalid_argument);
    CHECK_THROWS_AS(ThroughputCurve({{1, 100}, {1, 200}}), std::invalid_argument);
    CHECK_THROWS_AS(ThroughputCurve({{1, 0}}), std::invalid_argument);
}

TEST_CASE("interpolation: exact knots, midpoints, clamped ends") {
    const ThroughputCurve t({{1, 330}, {2, 730}, {4, 1540}, {8, 2870}});
    CHECK(t.at(1) == 330);
    CHECK(t.at(2) == 730);
    CHECK(t.at(3) == doctest::Approx(1135));
    CHECK(t.at(16) == 2870);
    CHECK(t.at(0.5) == 330);
    // continuity near a knot
    CHECK(t.at(2.0001) == doctest::Approx(730).epsilon(1e-3));
}

TEST_CASE("write_time pipelines preprocessing and staging write") {
    SystemConfig cfg = lassen();
    cfg.preprocess_mbps = 200;
    cfg.storage[0].prefetch_threads = 1;
    cfg.storage[0].write_curve = ThroughputCurve({{1, 400}});
    CHECK(write_time(200, cfg) == doctest::Approx(1.0));
    // preprocessing instant: staging write dominates
    cfg.preprocess_mbps = 1e15;
    CHECK(write_time(200, cfg) == doctest::Approx(0.5));
    // linear in s
    cfg.preprocess_mbps = 200;
    CHECK(write_time(0.76e-3, cfg) == doctest::Approx(0.76e-3 / 200));
    CHECK(write_time(2 * 0.76e-3, cfg) == doctest::Approx(2 * 0.76e-3 / 200));
}

TEST_CASE("pfs fetch shares the curve among readers") {
    const SystemConfig cfg = lassen();
    CHECK(fetch_time_pfs(330, cfg, 1) == doctest::Approx(1.0));
    CHECK(fetch_time_pfs(385, cfg, 4) == doctest::Approx(1.0));  // t(4)/4 = 385
    CHECK_THROWS_AS(fetch_time_pfs(1, cfg, 0), std::invalid_argument);
}

TEST_CASE("remote fetch bottleneck selection") {
    SystemConfig cfg = lassen();
    // remote RAM: r_1(4)/4 = 21250 < b_c = 24000, storage-bound
    CHECK(fetch_time_remote(21250, cfg, 1) == doctest::Approx(1.0));
    // huge storage rate: network-bound
    cfg.storage[2].read_curve = ThroughputCurve({{2, 1e9}});
    CHECK(fetch_time_remote(24000, cfg, 2) == doctest::Approx(1.0));
    // direct evaluation
    cfg.interconnect_mbps = 1000;
    CHECK(fetch_time_remote(1, cfg, 2) == doctest::Approx(1e-3));
}

TEST_CASE("local fetch uses the per-thread share") {
    const SystemConfig cfg = lassen();
    // SSD: r_2(2)/2 = 2000 MB/s
    CHECK(fetch_time_local(2000, cfg, 2) == doctest::Approx(1.0));
    CHECK(fetch_time_local(1000, cfg, 2) == doctest::Approx(0.5));
}

TEST_CASE("read = fetch + write decomposition holds for every source") {
    const SystemConfig cfg = lassen();
    const double s = 0.3;
    for (double fetch : {fetch_time_pfs(s, cfg, 2), fetch_time_remote(s, cfg, 1),
                         fetch_time_local(s, cfg, 2)}) {
        const double read = fetch + write_time(s, cfg);
        CHECK(read > fetch);
        CHECK(read == doctest::Approx(fetch + write_time(s, cfg)));
    }
}

TEST_CASE("generate_sizes: sigma 0 is constant and exact") {
    const auto d = DatasetModel::generate(1000, 17.0, 0.0, std::nullopt, 5);
    CHECK(d.total_mb == doctest::Approx(17000.0).epsilon(1e-12));
    for (double s : d.sizes_mb) CHECK(s == 17.0);
}

TEST_CASE("generate_sizes: rescaling hits the target total") {
    const auto d = DatasetModel::generate(5000, 0.1077, 0.1, 540.0, 7);
    CHECK(d.total_mb == doctest::Approx(540.0).epsilon(1e-9));
    for (double s : d.sizes_mb) CHECK(s > 0);
}

TEST_CASE("generate_sizes: deterministic in the seed") {
    const auto a = DatasetModel::generate(100, 1.0, 0.5, std::nullopt, 9);
    const auto b = DatasetModel::generate(100, 1.0, 0.5, std::nullopt, 9);
    CHECK(a.sizes_mb == b.sizes_mb);
    const auto c = DatasetModel::generate(100, 1.0, 0.5, std::nullopt, 10);
    CHECK(a.sizes_mb != c.sizes_mb);
}

TEST_CASE("generate_sizes: floor keeps sizes positive under heavy sigma") {
    const auto d = DatasetModel::generate(2000, 0.1, 1.0, std::nullopt, 11);
    for (double s : d.sizes_mb) CHECK(s >= 0.001 - 1e-15);
}

TEST_CASE("generate_sizes: relative sigma") {
    const auto d = DatasetModel::generate(2000, 10.0, 0.1, std::nullopt, 12, true);
    CHECK(d.sigma_mb == doctest::Approx(1.0));
}

TEST_CASE("system validation") {
    SystemConfig cfg = lassen();
    CHECK_NOTHROW(cfg.validate());
    // class ordering: ssd faster than ram is rejected
    std::swap(cfg.storage[1], cfg.storage[2]);
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = lassen();
    cfg.storage[0].prefetch_threads = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = lassen();
    cfg.compute_mbps = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("scenario presets carry the reference values") {
    const Scenario s1 = make_scenario("mnist");
    CHECK(s1.samples == 50000);
    CHECK(*s1.total_target_mb == 40);
    CHECK(s1.system.compute_mbps == 64);
    CHECK(s1.system.preprocess_mbps == 200);
    CHECK(s1.system.interconnect_mbps == 24000);
    CHECK(s1.system.pfs_curve.at(1) == 330);
    CHECK(s1.system.pfs_curve.at(8) == 2870);
    CHECK(s1.system.storage[0].capacity_mb == 5000);
    CHECK(s1.system.storage[1].capacity_mb == 120000);
    CHECK(s1.system.storage[2].capacity_mb == 900000);
    CHECK(s1.system.storage[0].read_curve.at(8) == 111000);
    CHECK(s1.system.storage[1].read_curve.at(4) == 85000);
    CHECK(s1.system.storage[2].read_curve.at(2) == 4000);

    const Scenario s22k = make_scenario("imagenet22k");
    CHECK(s22k.samples == 14'197'122);
    CHECK(s22k.mean_mb == doctest::Approx(0.1077));
    CHECK(*s22k.total_target_mb == 1'500'000);

    const Scenario cf512 = make_scenario("cosmoflow512");
    CHECK(cf512.system.workers == 8);
    CHECK(cf512.per_worker_batch == 1);
    CHECK(!cf512.total_target_mb.has_value());
    CHECK(cf512.make_dataset(1).total_mb == doctest::Approx(10'000'000.0));

    CHECK_THROWS_AS(make_scenario("nope"), std::invalid_argument);
}

TEST_CASE("desk scaling shrinks dataset and capacities only") {
    Scenario sc = make_scenario("imagenet1k");
    scale_scenario(sc, 0.01);
    CHECK(sc.samples == 12812);
    CHECK(*sc.total_target_mb == doctest::Approx(1350.0));
    CHECK(sc.system.storage[0].capacity_mb == doctest::Approx(50.0));
    CHECK(sc.system.storage[1].capacity_mb == doctest::Approx(1200.0));
    CHECK(sc.system.compute_mbps == 64);  // throughputs untouched
    CHECK(sc.system.pfs_curve.at(4) == 1540);
}

TEST_SUITE_END();
