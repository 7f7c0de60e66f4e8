#include "cifboot/rng.hpp"

namespace cifboot {

Rng::Rng(std::uint64_t seed) noexcept {
  std::uint64_t state = seed;
  for (auto& word : s_) {
    state += 0x9E3779B97F4A7C15ULL;
    word = mix64(state);
  }
}

std::uint64_t Rng::below(std::uint64_t bound) noexcept {
  __extension__ using u128 = unsigned __int128;
  // Lemire's nearly divisionless method.
  auto product = static_cast<u128>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<u128>((*this)()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(master ^ 0x6A09E667F3BCC909ULL);
  for (const auto part : path) {
    h = mix64(h ^ mix64(part + 0x9E3779B97F4A7C15ULL));
  }
  return h;
}

}  // namespace cifboot
