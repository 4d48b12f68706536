#pragma once

#include <algorithm>
#include <cmath>
#include <span>

#include "vfcsim/core.hpp"

namespace vfcsim {

/// Weights of the composite reward and of its utilization / quality terms.
struct RewardWeights {
  double w1{0.3};  ///< wastage penalty
  double w2{0.3};  ///< utilization
  double w3{0.2};  ///< response time
  double w4{0.2};  ///< quality of service
  double w21{0.4};
  double w22{0.3};
  double w23{0.3};
  double w31{1.0 / 3.0};
  double w32{1.0 / 3.0};
  double w33{1.0 / 3.0};
  /// Latency below this is clamped; the inverse-latency term is scaled by it
  /// so that it lands in (0,1].
  double latency_floor{1e-3};

  bool operator==(const RewardWeights&) const = default;

  void validate() const {
    constexpr double kTol = 1e-9;
    for (double w : {w1, w2, w3, w4, w21, w22, w23, w31, w32, w33})
      detail::require_non_negative(w, "reward.weight");
    if (std::abs(w1 + w2 + w3 + w4 - 1.0) > kTol) throw ValidationError("reward.w1", "w1+w2+w3+w4 must equal 1");
    if (std::abs(w21 + w22 + w23 - 1.0) > kTol) throw ValidationError("reward.w21", "w21+w22+w23 must equal 1");
    if (std::abs(w31 + w32 + w33 - 1.0) > kTol) throw ValidationError("reward.w31", "w31+w32+w33 must equal 1");
    detail::require_positive(latency_floor, "reward.latency_floor");
  }
};

/// Allocated ("actual") versus required ("efficient") usage of one task, as
/// fractions of the hosting node's capacity.
struct WastageSample {
  double actual_cpu{0.0};
  double efficient_cpu{0.0};
  double actual_mem{0.0};
  double efficient_mem{0.0};
  double actual_bw{0.0};
  double efficient_bw{0.0};

  void validate() const {
    auto pair = [](double actual, double efficient, const char* field) {
      detail::require_fraction(actual, field);
      detail::require_fraction(efficient, field);
      if (efficient > actual) throw ValidationError(field, "allocation below requirement");
    };
    pair(actual_cpu, efficient_cpu, "cpu");
    pair(actual_mem, efficient_mem, "mem");
    pair(actual_bw, efficient_bw, "bw");
  }
};

struct UtilizationSample {
  double ncu{0.0};
  double nmu{0.0};
  double nnbu{0.0};
};

struct ResponseSample {
  double t_current{0.0};
  double t_max{1.0};
};

struct QualitySample {
  double latency{1.0};
  double throughput{0.0};
  double reliability{0.0};
  double quality_desired{0.9};
};

/// Mean per-resource over-allocation across `samples`, in [0,1].
[[nodiscard]] inline double resource_wastage(std::span<const WastageSample> samples) {
  if (samples.empty()) {
    diag::note("resource_wastage: empty sample list, wastage taken as 0");
    return 0.0;
  }
  double total = 0.0;
  for (const auto& s : samples) {
    s.validate();
    total += (s.actual_cpu - s.efficient_cpu) + (s.actual_mem - s.efficient_mem) + (s.actual_bw - s.efficient_bw);
  }
  return total / (3.0 * static_cast<double>(samples.size()));
}

[[nodiscard]] inline double resource_utilization(const UtilizationSample& s, const RewardWeights& w) {
  detail::require_fraction(s.ncu, "ncu");
  detail::require_fraction(s.nmu, "nmu");
  detail::require_fraction(s.nnbu, "nnbu");
  return w.w21 * s.ncu + w.w22 * s.nmu + w.w23 * s.nnbu;
}

/// Lower response time earns more; zero once the limit is reached.
[[nodiscard]] inline double response_time_reward(const ResponseSample& s) {
  detail::require_positive(s.t_max, "t_max");
  detail::require_non_negative(s.t_current, "t_current");
  return (s.t_max - std::min(s.t_current, s.t_max)) / s.t_max;
}

[[nodiscard]] inline double quality(const QualitySample& s, const RewardWeights& w) {
  detail::require_positive(s.latency, "latency");
  detail::require_fraction(s.throughput, "throughput");
  detail::require_fraction(s.reliability, "reliability");
  const double inverse_latency = w.latency_floor / std::max(s.latency, w.latency_floor);
  return w.w31 * inverse_latency + w.w32 * s.throughput + w.w33 * s.reliability;
}

/// exp(-(desired - achieved)), clamped at 1 when the target is exceeded.
[[nodiscard]] inline double qos_from_quality(double achieved, double desired) {
  return std::min(1.0, std::exp(-(desired - achieved)));
}

[[nodiscard]] inline double qos_reward(const QualitySample& s, const RewardWeights& w) {
  detail::require_finite(s.quality_desired, "quality_desired");
  return qos_from_quality(quality(s, w), s.quality_desired);
}

struct RewardComponents {
  double wastage{0.0};
  double utilization{0.0};
  double response{0.0};
  double qos{0.0};

  bool operator==(const RewardComponents&) const = default;
};

[[nodiscard]] inline double total_reward(double wastage, double utilization, double response, double qos,
                                         const RewardWeights& w) {
  detail::require_fraction(wastage, "wastage");
  detail::require_fraction(utilization, "utilization");
  detail::require_fraction(response, "response");
  detail::require_fraction(qos, "qos");
  return -w.w1 * wastage + w.w2 * utilization + w.w3 * response + w.w4 * qos;
}

[[nodiscard]] inline double total_reward(const RewardComponents& c, const RewardWeights& w) {
  return total_reward(c.wastage, c.utilization, c.response, c.qos, w);
}

/// Components charged to a task that was never serviced: full wastage and
/// nothing else, i.e. the bottom of the reward range.
inline constexpr RewardComponents kDropComponents{1.0, 0.0, 0.0, 0.0};

}  // namespace vfcsim
