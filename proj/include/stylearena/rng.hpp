#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace stylearena {

/// Seeded generator with platform-independent draws.
///
/// std::mt19937_64 is fully specified by the standard, but the standard
/// distributions are not, so uniform/normal/integer draws are derived here
/// from raw 64-bit outputs. Identical seeds give identical streams on every
/// conforming implementation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (second value cached).
    double normal();

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    bool coin() { return (engine_() >> 63) != 0; }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view bytes);

/// Derived seed = splitmix64(master ^ fnv1a64(name)).
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view name);

/// Master seed plus name-based derivation of per-test streams, so results do
/// not depend on the order in which tests execute.
struct RngPolicy {
    std::uint64_t master_seed = 0;

    std::uint64_t seed_for(std::string_view name) const { return derive_seed(master_seed, name); }
    Rng stream(std::string_view name) const { return Rng(seed_for(name)); }
};

}  // namespace stylearena
