// rng.hpp: counter-based random streams for reproducible parallel Monte Carlo

#pragma once

#include <array>
#include <cstdint>

namespace iontrap {

// Philox4x32-10 bijection (Salmon et al., "Parallel random numbers: as easy
// as 1, 2, 3", SC 2011). Stateless: output depends only on (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key);
};

// Standard normal variates addressed by (seed, stream, index). Any draw can be
// recomputed in isolation, so results cannot depend on how streams are
// distributed over threads.
class NormalStream {
  public:
    NormalStream(std::uint64_t seed, std::uint64_t stream);

    // Two independent N(0, 1) variates from one Philox block (Box-Muller).
    std::array<double, 2> normal_pair(std::uint64_t index) const;
    double normal(std::uint64_t index) const { return normal_pair(index)[0]; }

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform(std::uint64_t index) const;

  private:
    Philox4x32::Key key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;

    Philox4x32::Counter block(std::uint64_t index) const;
};

} // namespace iontrap
