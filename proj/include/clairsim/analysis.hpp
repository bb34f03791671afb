#ifndef CLAIRSIM_ANALYSIS_HPP
#define CLAIRSIM_ANALYSIS_HPP

#include <cstdint>
#include <vector>

#include "clairsim/access.hpp"

namespace clairsim {

// Parameters of the per-worker access-frequency distribution
// X ~ Binomial(E, 1/N) with mean mu = E/N.
struct AccessDistributionParams {
    uint32_t workers = 1;   // N
    uint32_t epochs = 1;    // E
    uint64_t samples = 1;   // F
    double delta = 0.0;     // excess factor, >= 0
};

// Smallest integer count that strictly exceeds (1+delta)*E/N.
uint32_t hot_count_threshold(uint32_t workers, uint32_t epochs, double delta);

// P(X > (1+delta)*mu): exact binomial tail, summed in log space so large E
// stays finite.
double prob_exceeds(const AccessDistributionParams& params);

// F * P(X > (1+delta)*mu).
double expected_hot_samples(const AccessDistributionParams& params);

// Histogram of one worker's access counts; bucket c holds the number of
// samples the worker touched exactly c times.
struct FrequencyHistogram {
    std::vector<uint64_t> buckets;  // size epochs+1

    uint64_t total_samples() const;
    double mean_count() const;
    // Number of samples with count >= threshold.
    uint64_t count_at_least(uint32_t threshold) const;
};

// Builds real streams via the access module (B = N, drop_last = false) and
// histograms worker 0's counts. This checks the binomial model against the
// actual without-replacement shuffle, not i.i.d. draws.
FrequencyHistogram monte_carlo_histogram(Seed seed, uint32_t workers, uint32_t epochs,
                                         uint32_t samples);

// If one worker's count reaches high_threshold, some other worker's count is
// at most counterpart_low_bound (and symmetrically from below). The low
// threshold is signed: for delta > 1 the lower premise is unsatisfiable.
struct Lemma1Bounds {
    uint32_t high_threshold;
    uint32_t counterpart_low_bound;
    int64_t low_threshold;
    uint32_t counterpart_high_bound;
};

Lemma1Bounds lemma1_bounds(uint32_t workers, uint32_t epochs, double delta);

}  // namespace clairsim

#endif
