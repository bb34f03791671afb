#ifndef CLAIRSIM_ACCESS_HPP
#define CLAIRSIM_ACCESS_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "clairsim/rng.hpp"

namespace clairsim {

// Seed granting clairvoyance: identical (seed, parameters) reproduce the
// exact shuffled access order, bit for bit.
struct Seed {
    uint64_t value = 0;
};

// How the shuffled index space is partitioned into per-worker batches.
struct PartitionSpec {
    uint32_t num_workers = 1;
    uint32_t global_batch = 1;  // summed over workers
    uint32_t epochs = 1;
    bool drop_last = true;

    // Throws std::invalid_argument when inconsistent with a dataset of
    // `samples` entries (N >= 1, B >= N, E >= 1, B <= F).
    void validate(uint64_t samples) const;
};

// One worker's clairvoyant reference string across all epochs, with the
// epoch and batch structure preserved as offsets into `entries`.
struct AccessStream {
    uint32_t worker_id = 0;
    std::vector<uint32_t> entries;
    std::vector<uint64_t> epoch_offsets;  // size epochs+1
    std::vector<uint64_t> batch_offsets;  // size total_batches+1

    uint32_t epoch_count() const { return static_cast<uint32_t>(epoch_offsets.size()) - 1; }
    std::span<const uint32_t> epoch_entries(uint32_t epoch) const {
        return {entries.data() + epoch_offsets[epoch],
                entries.data() + epoch_offsets[epoch + 1]};
    }
};

// Per-sample access counts of one worker over a range of epochs.
struct FrequencyTable {
    uint32_t worker_id = 0;
    std::vector<uint32_t> counts;  // indexed by sample, size F
};

// Contiguous balanced slice of a batch over N workers (worker i's half-open
// index range); the first batch_size % N workers receive one extra sample.
std::pair<uint64_t, uint64_t> batch_slice(uint64_t batch_size, uint32_t workers,
                                          uint32_t worker);

// Deterministic per-epoch permutation of [0, F). The epoch selects the PRNG
// stream position, so extending the epoch count never changes earlier epochs.
std::vector<uint32_t> epoch_permutation(Seed seed, uint32_t epoch, uint32_t samples);

// Full per-worker streams: epoch permutations cut into global batches, each
// batch split into contiguous per-worker slices (worker i takes slice i).
std::vector<AccessStream> build_access_streams(Seed seed, uint32_t samples,
                                               const PartitionSpec& part);

// counts[k] = occurrences of k in stream epochs [epoch_begin, epoch_end).
FrequencyTable access_frequencies(const AccessStream& stream, uint32_t samples,
                                  uint32_t epoch_begin, uint32_t epoch_end);

// Access counts of a single worker computed without materializing the other
// workers' streams (one permutation in memory at a time).
std::vector<uint32_t> worker_access_counts(Seed seed, uint32_t samples,
                                           const PartitionSpec& part, uint32_t worker);

// Per-worker access counts for all workers in one pass over the epoch
// permutations; counts[w][k] matches worker_access_counts(seed, ..., w)[k].
std::vector<std::vector<uint32_t>> all_access_counts(Seed seed, uint32_t samples,
                                                     const PartitionSpec& part);

}  // namespace clairsim

#endif
