#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace fjsec {

// Stream purposes keep independent draw categories on independent substreams,
// so e.g. adding noise draws never shifts the channel ensemble.
enum class StreamKind : uint64_t {
  Channel = 1,
  Eavesdropper = 2,
  CsiError = 3,
  Noise = 4,
  Jamming = 5,
  Message = 6,
  Init = 7,
  Shuffle = 8,
  Generic = 9,
};

uint64_t mix_seed(uint64_t master, uint64_t tag, uint64_t index);

// Deterministic random stream. Streams derived from the same (master, tag,
// index) triple are bit-identical across runs; distinct triples are
// statistically independent. Normal variates use an explicit Box-Muller so
// the byte stream does not depend on the C++ runtime's distribution choices.
class Rng {
 public:
  explicit Rng(uint64_t seed);
  static Rng stream(uint64_t master, StreamKind kind, uint64_t index = 0);

  double uniform();                       // [0, 1)
  double gaussian();                      // N(0, 1)
  double gaussian(double mean, double var);
  std::complex<double> cgaussian(double var);  // CN(0, var), var split re/im
  uint64_t integer(uint64_t n);           // uniform on [0, n)

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fjsec
