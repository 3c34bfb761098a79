#ifndef EVOTEXT_RNG_HPP
#define EVOTEXT_RNG_HPP

#include <cstdint>
#include <initializer_list>

namespace evotext {

// Small deterministic PRNG (splitmix64). Every randomized operator takes
// one of these by reference, and the engine derives an independent stream
// per (generation, sub-population, operator, member) so results do not
// depend on evaluation order or worker count.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, n). Rejection sampling keeps it exactly uniform.
  std::uint64_t index(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  bool coin() { return (next() >> 63) != 0; }

private:
  std::uint64_t state_;
};

// Mixes a root seed with stream tags into a child seed.
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = root ^ 0xa0761d6478bd642fULL;
  for (std::uint64_t p : parts) {
    h ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    Rng mix(h);
    h = mix.next();
  }
  return h;
}

// Stream tags for the engine's per-operator derivations.
namespace stream {
constexpr std::uint64_t kInit = 0x11;
constexpr std::uint64_t kMutation = 0x22;
constexpr std::uint64_t kTournament = 0x33;
constexpr std::uint64_t kCrossover = 0x44;
constexpr std::uint64_t kSentence = 0x55;
} // namespace stream

} // namespace evotext

#endif
