#include <cmath>
#include <numbers>

#include "spslab/core.hpp"

namespace spslab {
namespace {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RandomSource make_rng(std::uint64_t seed) { return RandomSource(mix64(seed + kGolden)); }

RandomSource RandomSource::split(std::string_view label) const {
  return RandomSource(mix64(key_ ^ mix64(fnv1a(label))));
}

RandomSource RandomSource::split(std::uint64_t index) const {
  return RandomSource(mix64(key_ ^ mix64(index * kGolden + 0x632be59bd9b4e019ULL)));
}

std::uint64_t RandomSource::next_u64() {
  const std::uint64_t c = counter_++;
  return mix64(key_ ^ mix64(c * kGolden + 1));
}

double RandomSource::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t RandomSource::uniform_index(std::uint64_t n) {
  if (n == 0) throw ContractError("uniform_index: n must be positive");
  // reject the low residue class so every index is equally likely
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double RandomSource::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec RandomSource::normal_vector(Index n) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal();
  return v;
}

std::uint64_t RandomSource::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw ContractError("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean > 500.0) {
    const double draw = std::round(mean + std::sqrt(mean) * normal());
    return draw < 0.0 ? 0 : static_cast<std::uint64_t>(draw);
  }
  // inversion by sequential search
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf && k < 100000) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
    if (p == 0.0 && cdf < u) break;
  }
  return k;
}

BatchSample sample_batch(RandomSource& rng, Index n, Index batch_size) {
  if (n <= 0) throw ContractError("sample_batch: n must be positive");
  if (batch_size <= 0) throw ContractError("sample_batch: batch_size must be positive");
  if (batch_size > n) throw ContractError("sample_batch: batch_size exceeds n");
  BatchSample b;
  b.indices.resize(static_cast<std::size_t>(batch_size));
  for (auto& idx : b.indices) idx = static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
  return b;
}

}  // namespace spslab
