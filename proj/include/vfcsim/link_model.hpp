#pragma once

#include <cmath>

#include "vfcsim/core.hpp"

namespace vfcsim {

/// Radio and wired link constants.
struct LinkParams {
  double v2i_bandwidth{2.0e7};  ///< Hz
  double tx_power{1000.0};      ///< mW
  double noise_power{-114.0};   ///< dBm, noise floor of the rate computation
  double awgn{-90.0};           ///< dBm, carried for reference only
  double path_loss_exp{3.0};
  double v2i_range{500.0};      ///< m
  double wired_rate{5.0e7};     ///< bits/s
  double cycles_per_bit{500.0};

  bool operator==(const LinkParams&) const = default;

  void validate() const {
    detail::require_positive(v2i_bandwidth, "link.v2i_bandwidth");
    detail::require_positive(tx_power, "link.tx_power");
    if (tx_power > 1000.0) throw ValidationError("link.tx_power", "exceeds 1000 mW maximum");
    detail::require_finite(noise_power, "link.noise_power");
    detail::require_finite(awgn, "link.awgn");
    detail::require_positive(path_loss_exp, "link.path_loss_exp");
    detail::require_positive(v2i_range, "link.v2i_range");
    detail::require_positive(wired_rate, "link.wired_rate");
    detail::require_positive(cycles_per_bit, "link.cycles_per_bit");
  }
};

struct Position {
  double x{0.0};
  double y{0.0};

  bool operator==(const Position&) const = default;
};

[[nodiscard]] inline double distance(Position a, Position b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

[[nodiscard]] inline double dbm_to_mw(double dbm) noexcept { return std::pow(10.0, dbm / 10.0); }

inline constexpr double kBitsPerMegabyte = 8.0e6;

[[nodiscard]] constexpr double megabytes_to_bits(double mb) noexcept { return mb * kBitsPerMegabyte; }

/// Shannon capacity B * log2(1 + S/N), bits/s.
[[nodiscard]] inline double shannon_rate(double bandwidth, double snr) {
  detail::require_positive(bandwidth, "bandwidth");
  detail::require_non_negative(snr, "snr");
  return bandwidth * std::log2(1.0 + snr);
}

/// Log-distance path loss against a 1 m reference; throws OutOfRangeError
/// beyond the V2I range.
[[nodiscard]] inline double snr_at_distance(const LinkParams& p, double dist) {
  detail::require_positive(dist, "distance");
  if (dist > p.v2i_range) throw OutOfRangeError("distance " + std::to_string(dist) + " m beyond V2I range");
  const double received = p.tx_power / std::pow(dist, p.path_loss_exp);
  return received / dbm_to_mw(p.noise_power);
}

/// V2I rate at `dist`; distances under 1 m use the reference distance.
[[nodiscard]] inline double v2i_rate(const LinkParams& p, double dist) {
  return shannon_rate(p.v2i_bandwidth, snr_at_distance(p, std::max(dist, 1.0)));
}

[[nodiscard]] inline double upload_time(double task_bits, double rate) {
  detail::require_non_negative(task_bits, "task_size");
  if (!(rate > 0.0)) throw ValidationError("rate", "link unusable (rate must be > 0)");
  return task_bits / rate;
}

[[nodiscard]] inline double processing_time(double task_bits, double cycles_per_bit, double cpu_freq) {
  detail::require_non_negative(task_bits, "task_size");
  detail::require_positive(cycles_per_bit, "cycles_per_bit");
  detail::require_positive(cpu_freq, "cpu_freq");
  return task_bits * cycles_per_bit / cpu_freq;
}

}  // namespace vfcsim
