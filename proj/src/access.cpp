#include "clairsim/access.hpp"

#include <stdexcept>
#include <string>

namespace clairsim {

namespace {

constexpr uint64_t kEpochPositionShift = 34;  // room for ~2^33 draws per epoch

// Walks one epoch's permutation batch by batch, invoking fn(worker, span)
// for each worker slice in worker order.
template <typename Fn>
void for_each_worker_slice(const std::vector<uint32_t>& perm, const PartitionSpec& part, Fn&& fn) {
    const uint64_t F = perm.size();
    const uint64_t B = part.global_batch;
    const uint64_t full_batches = F / B;
    const uint64_t tail = part.drop_last ? 0 : F % B;
    for (uint64_t h = 0; h < full_batches + (tail > 0 ? 1 : 0); ++h) {
        const uint64_t batch_begin = h * B;
        const uint64_t batch_size = (h < full_batches) ? B : tail;
        for (uint32_t w = 0; w < part.num_workers; ++w) {
            const auto [sb, se] = batch_slice(batch_size, part.num_workers, w);
            fn(w, std::span<const uint32_t>(perm.data() + batch_begin + sb,
                                            perm.data() + batch_begin + se));
        }
    }
}

}  // namespace

std::pair<uint64_t, uint64_t> batch_slice(uint64_t batch_size, uint32_t workers,
                                          uint32_t worker) {
    const uint64_t base = batch_size / workers;
    const uint64_t extra = batch_size % workers;
    const uint64_t begin = worker * base + std::min<uint64_t>(worker, extra);
    return {begin, begin + base + (worker < extra ? 1 : 0)};
}

void PartitionSpec::validate(uint64_t samples) const {
    if (samples < 1) throw std::invalid_argument("dataset must have at least one sample");
    if (num_workers < 1) throw std::invalid_argument("num_workers must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (global_batch < num_workers)
        throw std::invalid_argument("global batch must be >= num_workers");
    if (global_batch > samples)
        throw std::invalid_argument("global batch " + std::to_string(global_batch) +
                                    " exceeds dataset size " + std::to_string(samples));
}

std::vector<uint32_t> epoch_permutation(Seed seed, uint32_t epoch, uint32_t samples) {
    if (samples < 1) throw std::invalid_argument("permutation needs samples >= 1");
    CounterRng rng = CounterRng::for_stream(seed.value, kPermutationTag,
                                            static_cast<uint64_t>(epoch) << kEpochPositionShift);
    return shuffled_identity(samples, rng);
}

std::vector<AccessStream> build_access_streams(Seed seed, uint32_t samples,
                                               const PartitionSpec& part) {
    part.validate(samples);
    std::vector<AccessStream> streams(part.num_workers);
    for (uint32_t w = 0; w < part.num_workers; ++w) {
        streams[w].worker_id = w;
        streams[w].epoch_offsets.push_back(0);
        streams[w].batch_offsets.push_back(0);
    }
    for (uint32_t e = 0; e < part.epochs; ++e) {
        const auto perm = epoch_permutation(seed, e, samples);
        for_each_worker_slice(perm, part, [&](uint32_t w, std::span<const uint32_t> slice) {
            auto& st = streams[w];
            st.entries.insert(st.entries.end(), slice.begin(), slice.end());
            st.batch_offsets.push_back(st.entries.size());
        });
        for (auto& st : streams) st.epoch_offsets.push_back(st.entries.size());
    }
    return streams;
}

FrequencyTable access_frequencies(const AccessStream& stream, uint32_t samples,
                                  uint32_t epoch_begin, uint32_t epoch_end) {
    FrequencyTable table;
    table.worker_id = stream.worker_id;
    table.counts.assign(samples, 0);
    for (uint32_t e = epoch_begin; e < epoch_end && e < stream.epoch_count(); ++e)
        for (uint32_t k : stream.epoch_entries(e)) ++table.counts[k];
    return table;
}

std::vector<uint32_t> worker_access_counts(Seed seed, uint32_t samples,
                                           const PartitionSpec& part, uint32_t worker) {
    part.validate(samples);
    std::vector<uint32_t> counts(samples, 0);
    for (uint32_t e = 0; e < part.epochs; ++e) {
        const auto perm = epoch_permutation(seed, e, samples);
        for_each_worker_slice(perm, part, [&](uint32_t w, std::span<const uint32_t> slice) {
            if (w != worker) return;
            for (uint32_t k : slice) ++counts[k];
        });
    }
    return counts;
}

std::vector<std::vector<uint32_t>> all_access_counts(Seed seed, uint32_t samples,
                                                     const PartitionSpec& part) {
    part.validate(samples);
    std::vector<std::vector<uint32_t>> counts(part.num_workers,
                                              std::vector<uint32_t>(samples, 0));
    for (uint32_t e = 0; e < part.epochs; ++e) {
        const auto perm = epoch_permutation(seed, e, samples);
        for_each_worker_slice(perm, part, [&](uint32_t w, std::span<const uint32_t> slice) {
            for (uint32_t k : slice) ++counts[w][k];
        });
    }
    return counts;
}

}  // namespace clairsim
