#include "clairsim/rng.hpp"

#include <cmath>

namespace clairsim {

double CounterRng::normal() noexcept {
    // 53-bit mantissas; 1-u1 keeps the log argument in (0, 1].
    const double u1 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(next() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * M_PI * u2);
}

std::vector<uint32_t> shuffled_identity(uint32_t count, CounterRng& rng) {
    std::vector<uint32_t> a(count);
    std::iota(a.begin(), a.end(), 0u);
    if (count < 2) return a;
    for (uint32_t i = count - 1; i > 0; --i) {
        const auto j = static_cast<uint32_t>(rng.bounded(static_cast<uint64_t>(i) + 1));
        std::swap(a[i], a[j]);
    }
    return a;
}

}  // namespace clairsim
