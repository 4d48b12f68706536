#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vfcsim {

// ─────────────────────────────────────────────
// Errors
// ─────────────────────────────────────────────

/// Raised when a value violates a documented domain invariant. `field()`
/// names the offending input so callers can report it verbatim.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A wireless link was requested beyond the V2I range.
class OutOfRangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

namespace detail {

inline void require_finite(double v, const char* field) {
  if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
}

inline void require_fraction(double v, const char* field) {
  require_finite(v, field);
  if (v < 0.0 || v > 1.0) throw ValidationError(field, "must lie in [0,1], got " + std::to_string(v));
}

inline void require_non_negative(double v, const char* field) {
  require_finite(v, field);
  if (v < 0.0) throw ValidationError(field, "must be >= 0, got " + std::to_string(v));
}

inline void require_positive(double v, const char* field) {
  require_finite(v, field);
  if (v <= 0.0) throw ValidationError(field, "must be > 0, got " + std::to_string(v));
}

}  // namespace detail

// ─────────────────────────────────────────────
// Diagnostics
// ─────────────────────────────────────────────

/// Per-thread sink for non-fatal notes (degenerate denominators, empty
/// inputs). Bounded so long sweeps cannot grow it without limit.
namespace diag {

inline constexpr std::size_t kMaxNotes = 256;

inline std::vector<std::string>& sink() {
  thread_local std::vector<std::string> notes;
  return notes;
}

inline void note(std::string msg) {
  auto& s = sink();
  if (s.size() < kMaxNotes) s.push_back(std::move(msg));
}

inline std::vector<std::string> take_notes() {
  std::vector<std::string> out;
  out.swap(sink());
  return out;
}

}  // namespace diag

// ─────────────────────────────────────────────
// Random numbers
// ─────────────────────────────────────────────

/// SplitMix64 finalizer; used to derive independent stream seeds.
[[nodiscard]] constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

/// Seeded random stream. The engine is mt19937_64 (bit-exact across standard
/// libraries); the distributions are written out here because the standard
/// distribution objects are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  [[nodiscard]] std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53 random bits.
  [[nodiscard]] double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer on [0, n) without modulo bias.
  [[nodiscard]] std::uint64_t uniform_int(std::uint64_t n) {
    if (n == 0) throw ValidationError("n", "uniform_int needs n > 0");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  [[nodiscard]] bool bernoulli(double p) { return uniform01() < p; }

  [[nodiscard]] double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  /// Box-Muller; no cached second variate so the stream position depends only
  /// on the number of calls.
  [[nodiscard]] double normal(double mean, double stddev) {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
  }

  /// Normal variate resampled until it is >= floor.
  [[nodiscard]] double normal_at_least(double mean, double stddev, double floor) {
    for (int i = 0; i < 1000; ++i) {
      const double v = normal(mean, stddev);
      if (v >= floor) return v;
    }
    return floor;
  }

  /// Poisson count by inversion for small means, normal approximation above.
  [[nodiscard]] std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 60.0) {
      const double v = std::round(normal(mean, std::sqrt(mean)));
      return v < 0.0 ? 0 : static_cast<std::uint64_t>(v);
    }
    const double limit = std::exp(-mean);
    double prod = uniform01();
    std::uint64_t k = 0;
    while (prod > limit) {
      prod *= uniform01();
      ++k;
    }
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vfcsim
