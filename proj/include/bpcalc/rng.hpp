#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

namespace bpcalc {

/// Seeded generator whose output sequence is fully specified: mt19937_64 words,
/// 53-bit uniforms, and Box-Muller normals. std:: distributions are avoided
/// because their algorithms are implementation-defined.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/u53/box-muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// exp of a uniform on [log lo, log hi]; requires 0 < lo < hi.
  double log_uniform(double lo, double hi);
  double normal();
  std::complex<double> complex_normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// FNV-1a over raw bytes; used for seeds derived from config text and for
/// record digests.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace bpcalc
