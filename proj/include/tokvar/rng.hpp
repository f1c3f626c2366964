#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace tokvar {

// splitmix64 finalizer step. Used to mix seed components so that nearby
// inputs land far apart in seed space.
std::uint64_t splitmix64(std::uint64_t x);

// FNV-1a 64-bit over raw bytes. Stable across platforms and toolkit versions;
// used for manifest digests, backend-url identity, and keying the mock
// backend on prompt text.
std::uint64_t fnv1a64(std::string_view bytes);

// Mixes an ordered list of components into one sub-seed via splitmix64
// chaining. mix_seed({a, b}) != mix_seed({b, a}) in general.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

// Deterministic random stream: the standard-mandated mt19937_64 engine with
// hand-rolled value transforms, so sequences do not depend on the standard
// library's distribution implementations.
class DeterministicRng {
  public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1) with 53-bit resolution
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform index in [0, bound); bound must be positive
    std::size_t next_index(std::size_t bound) {
        return static_cast<std::size_t>(next_u64() % bound);
    }

    // standard normal deviate (Box-Muller)
    double next_gaussian();

  private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace tokvar
