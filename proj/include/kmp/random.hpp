#pragma once

#include <cstdint>

namespace kmp {

// Every random stream in the library is derived from one user seed. Each
// subsystem gets its own independent stream so that, e.g., changing the
// train/test split does not perturb GMM initialisation.
enum class Stream : std::uint64_t {
  gmm = 1,
  synthetic = 2,
  split = 3,
  folds = 4,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

}  // namespace kmp
