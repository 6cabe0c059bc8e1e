#include "fbmvar/rng.hpp"

#include <array>
#include <bit>

namespace fbmvar {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  std::uint64_t state = x;
  return splitmix64(state);
}

SeedSpec SeedSpec::for_role(std::uint64_t role_tag) const noexcept {
  // xor with a constant then the splitmix64 finalizer: both bijective.
  return {mix64(master_seed ^ (role_tag * 0xD1B54A32D192ED03ULL)), stream_id};
}

namespace {

// SeedSequence-shaped adapter that writes the documented state words.
class StateWords {
 public:
  using result_type = std::uint32_t;

  explicit StateWords(const SeedSpec& seed) : seed_(seed) {}

  template <class It>
  void generate(It first, It last) const {
    std::uint64_t sm = seed_.master_seed ^ std::rotl(seed_.stream_id, 32);
    std::size_t word = 0;
    for (It it = first; it != last; ++word) {
      std::uint64_t v = 0;
      switch (word) {
        case 1: v = seed_.master_seed; break;
        case 2: v = seed_.stream_id; break;
        default: v = splitmix64(sm); break;
      }
      *it++ = static_cast<std::uint32_t>(v);
      if (it == last) break;
      *it++ = static_cast<std::uint32_t>(v >> 32);
    }
  }

 private:
  SeedSpec seed_;
};

}  // namespace

Engine make_engine(const SeedSpec& seed) {
  StateWords words(seed);
  return Engine(words);
}

}  // namespace fbmvar
