#include "clairsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace clairsim {

namespace {

// Snap near-integer floating values before floor/ceil so thresholds like
// 1.2 * 5 land on the intended integer.
constexpr double kIntegerSnap = 1e-9;

double snapped(double x) {
    const double r = std::round(x);
    return (std::abs(x - r) < kIntegerSnap) ? r : x;
}

void check(const AccessDistributionParams& p) {
    if (p.workers < 1 || p.epochs < 1) throw std::invalid_argument("N and E must be >= 1");
    if (p.delta < 0) throw std::invalid_argument("delta must be >= 0");
}

}  // namespace

uint32_t hot_count_threshold(uint32_t workers, uint32_t epochs, double delta) {
    const double mu = static_cast<double>(epochs) / workers;
    const double bound = snapped((1.0 + delta) * mu);
    return static_cast<uint32_t>(std::floor(bound)) + 1;
}

double prob_exceeds(const AccessDistributionParams& params) {
    check(params);
    const uint32_t E = params.epochs;
    const uint32_t k0 = hot_count_threshold(params.workers, E, params.delta);
    if (k0 > E) return 0.0;
    if (params.workers == 1) return 0.0;  // X = E deterministically, never > E

    const double logp = -std::log(static_cast<double>(params.workers));
    const double logq = std::log1p(-1.0 / params.workers);
    const double lgE = std::lgamma(static_cast<double>(E) + 1);

    // log-sum-exp over the tail terms
    std::vector<double> logterms;
    logterms.reserve(E - k0 + 1);
    double maxlt = -std::numeric_limits<double>::infinity();
    for (uint32_t k = k0; k <= E; ++k) {
        const double lt = lgE - std::lgamma(static_cast<double>(k) + 1) -
                          std::lgamma(static_cast<double>(E - k) + 1) + k * logp +
                          (E - k) * logq;
        logterms.push_back(lt);
        maxlt = std::max(maxlt, lt);
    }
    double sum = 0;
    for (double lt : logterms) sum += std::exp(lt - maxlt);
    return std::clamp(std::exp(maxlt + std::log(sum)), 0.0, 1.0);
}

double expected_hot_samples(const AccessDistributionParams& params) {
    if (params.samples == 0) return 0.0;
    return static_cast<double>(params.samples) * prob_exceeds(params);
}

uint64_t FrequencyHistogram::total_samples() const {
    uint64_t s = 0;
    for (uint64_t b : buckets) s += b;
    return s;
}

double FrequencyHistogram::mean_count() const {
    double weighted = 0;
    for (size_t c = 0; c < buckets.size(); ++c) weighted += static_cast<double>(c) * buckets[c];
    return weighted / static_cast<double>(total_samples());
}

uint64_t FrequencyHistogram::count_at_least(uint32_t threshold) const {
    uint64_t s = 0;
    for (size_t c = threshold; c < buckets.size(); ++c) s += buckets[c];
    return s;
}

FrequencyHistogram monte_carlo_histogram(Seed seed, uint32_t workers, uint32_t epochs,
                                         uint32_t samples) {
    PartitionSpec part;
    part.num_workers = workers;
    part.global_batch = workers;  // one sample per worker per iteration
    part.epochs = epochs;
    part.drop_last = false;
    const auto counts = worker_access_counts(seed, samples, part, 0);
    FrequencyHistogram hist;
    hist.buckets.assign(static_cast<size_t>(epochs) + 1, 0);
    for (uint32_t c : counts) ++hist.buckets[c];
    return hist;
}

Lemma1Bounds lemma1_bounds(uint32_t workers, uint32_t epochs, double delta) {
    if (workers <= 1) throw std::invalid_argument("lemma1_bounds requires N > 1");
    if (delta < 0 || delta > workers - 1)
        throw std::invalid_argument("delta must lie in [0, N-1]");
    const double n = workers;
    const double mu = epochs / n;
    Lemma1Bounds b;
    b.high_threshold =
        static_cast<uint32_t>(std::ceil(snapped((1.0 + delta) * mu)));
    b.counterpart_low_bound =
        static_cast<uint32_t>(std::ceil(snapped((n - 1 - delta) / (n - 1) * mu)));
    b.low_threshold = static_cast<int64_t>(std::floor(snapped((1.0 - delta) * mu)));
    b.counterpart_high_bound =
        static_cast<uint32_t>(std::floor(snapped((n - 1 + delta) / (n - 1) * mu)));
    return b;
}

}  // namespace clairsim
