#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace oussm {

/// Portable seeded generator. Bits come from std::mt19937_64, whose output
/// sequence is fixed by the standard; uniforms and normals are derived here
/// (53-bit mantissa fill, Marsaglia polar method) instead of through the
/// implementation-defined std::*_distribution, so streams agree across
/// platforms and standard libraries.
///
/// Independent streams for replicate r of an experiment seeded with s come
/// from Rng::stream(s, r), which seeds the engine with splitmix64(s ^ mix(r)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng stream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal();

  Eigen::VectorXd normal_vector(Eigen::Index n);

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace oussm
