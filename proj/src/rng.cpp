#include "lbmgraph/rng.hpp"

namespace lbm {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag) {
  return mix64(mix64(parent) ^ mix64(tag + 0x632BE59BD9B4E019ull));
}

std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = parent;
  for (std::uint64_t t : tags) s = derive_seed(s, t);
  return s;
}

}  // namespace lbm
