#pragma once

#include <cmath>
#include <cstdint>

namespace saconc {

// Counter-seeded xoshiro256++ stream. Each Monte Carlo path derives its own
// stream from (master_seed, path_index), so results do not depend on how
// paths are scheduled across workers, and any single path is reproducible in
// isolation. We avoid std:: distributions on purpose: their output is
// implementation-defined, which would break byte-identical reports.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // SplitMix64 expansion of the seed into the 256-bit state.
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
  }

  // Derived per-stream seed; Rng(stream_seed(m, i)) == stream(m, i).
  static std::uint64_t stream_seed(std::uint64_t master_seed,
                                   std::uint64_t stream_id) {
    std::uint64_t x = master_seed;
    std::uint64_t a = splitmix64(x);
    x ^= 0x632be59bd9b4e019ULL + stream_id * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(x);
    return a ^ (b * 0xd1342543de82ef95ULL + stream_id);
  }

  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(stream_seed(master_seed, stream_id));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on (0,1): strictly positive so it is safe inside logs.
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via the Marsaglia polar method (deterministic given the
  // stream; one spare value cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, r2;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      r2 = u * u + v * v;
    } while (r2 >= 1.0 || r2 == 0.0);
    const double f = std::sqrt(-2.0 * std::log(r2) / r2);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace saconc
