#pragma once

#include <cstdint>
#include <random>

namespace fbmvar {

/// Identifies one independent random stream.
///
/// Derivation of the engine state from (master_seed, stream_id): the 312
/// state words of std::mt19937_64 are filled as
///   x[0]     = splitmix64 output #0
///   x[1]     = master_seed
///   x[2]     = stream_id
///   x[3..]   = further splitmix64 outputs
/// where the splitmix64 sequence starts from master_seed ^ rotl(stream_id, 32).
/// Words 1 and 2 are copied verbatim, so distinct pairs give distinct states.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  /// Same stream index under a master seed re-keyed by `role`. For a fixed
  /// role the map master_seed -> re-keyed seed is a bijection.
  SeedSpec for_role(std::uint64_t role) const noexcept;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/// Fixed role tags so independent components of one replicate never share a stream.
namespace role {
inline constexpr std::uint64_t path = 1;
inline constexpr std::uint64_t walk = 2;
inline constexpr std::uint64_t limit_noise = 3;
inline constexpr std::uint64_t oracle = 4;
inline constexpr std::uint64_t auxiliary = 5;
}  // namespace role

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t& state) noexcept;
std::uint64_t mix64(std::uint64_t x) noexcept;

Engine make_engine(const SeedSpec& seed);

}  // namespace fbmvar
