#include "fjsec/rng.hpp"

#include <cmath>

namespace fjsec {

namespace {

// SplitMix64 finalizer; decorrelates consecutive seeds.
uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

uint64_t mix_seed(uint64_t master, uint64_t tag, uint64_t index) {
  uint64_t s = master;
  uint64_t a = splitmix64(s);
  s ^= tag * 0xd1342543de82ef95ull;
  uint64_t b = splitmix64(s);
  s ^= index * 0xaf251af3b0f025b5ull;
  uint64_t c = splitmix64(s);
  return a ^ (b + 0x9e3779b97f4a7c15ull) ^ (c << 1);
}

Rng::Rng(uint64_t seed) : eng_(seed) {}

Rng Rng::stream(uint64_t master, StreamKind kind, uint64_t index) {
  return Rng(mix_seed(master, static_cast<uint64_t>(kind), index));
}

double Rng::uniform() {
  // 53-bit mantissa fill, [0, 1)
  return (eng_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double Rng::gaussian(double mean, double var) {
  return mean + std::sqrt(var) * gaussian();
}

std::complex<double> Rng::cgaussian(double var) {
  const double s = std::sqrt(var / 2.0);
  return {s * gaussian(), s * gaussian()};
}

uint64_t Rng::integer(uint64_t n) {
  if (n == 0) return 0;
  // modulo-rejection to keep the draw unbiased
  const uint64_t limit = n * (UINT64_MAX / n);
  uint64_t x = eng_();
  while (x >= limit) x = eng_();
  return x % n;
}

}  // namespace fjsec
