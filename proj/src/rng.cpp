#include "contab/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace contab {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double poisson_inversion(Rng& rng, double rate) {
  const double u = rng.uniform();
  double p = std::exp(-rate);
  double cdf = p;
  std::uint64_t k = 0;
  while (u > cdf && k < 1000) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
  }
  return static_cast<double>(k);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return splitmix64(splitmix64(root) ^ fnv1a(label));
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label, std::uint64_t index) {
  return splitmix64(derive_seed(root, label) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  const double u1 = uniform_positive();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double rate) {
  if (!(rate > 0.0)) return 0;
  constexpr double kChunk = 30.0;
  double total = 0.0;
  while (rate > kChunk) {
    total += poisson_inversion(*this, kChunk);
    rate -= kChunk;
  }
  total += poisson_inversion(*this, rate);
  return static_cast<std::uint64_t>(total);
}

}  // namespace contab
