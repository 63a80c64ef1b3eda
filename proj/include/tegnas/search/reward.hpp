#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "tegnas/indicators.hpp"

namespace tegnas::search {

using indicators::IndicatorReport;

/// Running-range normalized change of each indicator since the previous
/// observation, summed into one reward.
class RewardNormalizer {
 public:
  /// literal_signs: every term rewards an increase (ablation switch);
  /// otherwise kappa and MSE terms are negated so lower values are rewarded.
  explicit RewardNormalizer(bool literal_signs = false)
      : sign_{literal_signs ? 1.0 : -1.0, 1.0, literal_signs ? 1.0 : -1.0} {}

  struct Terms {
    double kappa = 0.0, regions = 0.0, mse = 0.0;
    double total() const { return kappa + regions + mse; }
  };

  Terms observe_terms(const IndicatorReport& r) {
    const std::array<double, 3> v{r.kappa, r.regions, r.mse};
    std::array<double, 3> out{};
    for (std::size_t i = 0; i < 3; ++i) {
      auto& s = state_[i];
      if (!s.seen) {
        s = {true, v[i], v[i], v[i]};
        continue;
      }
      s.max = std::max(s.max, v[i]);
      s.min = std::min(s.min, v[i]);
      const double range = s.max - s.min;
      if (range >= 1e-12) out[i] = std::clamp(sign_[i] * (v[i] - s.prev) / range, -1.0, 1.0);
      s.prev = v[i];
    }
    return {out[0], out[1], out[2]};
  }

  double observe(const IndicatorReport& r) { return observe_terms(r).total(); }

  bool literal_signs() const noexcept { return sign_[0] > 0.0; }

  friend bool operator==(const RewardNormalizer&, const RewardNormalizer&) = default;

 private:
  struct Track {
    bool seen = false;
    double prev = 0.0, max = 0.0, min = 0.0;
    friend bool operator==(const Track&, const Track&) = default;
  };
  std::array<double, 3> sign_;
  std::array<Track, 3> state_{};
};

enum class StopMetric { PolicyEntropy, PopulationDiversity, ArchParamEntropy };

/// Stops once the metric has failed to improve on its best value by a
/// relative margin `delta` for `patience` consecutive steps, or at `cap`.
class StopRule {
 public:
  StopRule(StopMetric metric, std::size_t cap, std::size_t patience = 50, double delta = 1e-3)
      : metric_(metric), cap_(cap), patience_(patience), delta_(delta) {
    if (patience_ < 1) throw Error(Errc::ConfigError, "patience must be at least 1");
    if (cap_ < 1) throw Error(Errc::ConfigError, "hard cap must be at least 1");
  }

  /// Record the metric after step t (t = 0 is the initial state). Returns
  /// true when the search should stop.
  bool observe(std::size_t t, double value) {
    if (!started_) {
      started_ = true;
      best_ = value;
      best_t_ = t;
    } else if (value < best_ - delta_ * std::abs(best_)) {
      best_ = value;
      best_t_ = t;
    }
    if (t >= cap_) {
      reason_ = "hard_cap";
      return true;
    }
    if (t - best_t_ >= patience_) {
      reason_ = "patience";
      return true;
    }
    return false;
  }

  StopMetric metric() const noexcept { return metric_; }
  std::size_t cap() const noexcept { return cap_; }
  std::size_t patience() const noexcept { return patience_; }
  const std::string& reason() const noexcept { return reason_; }

  friend bool operator==(const StopRule&, const StopRule&) = default;

 private:
  StopMetric metric_;
  std::size_t cap_;
  std::size_t patience_;
  double delta_;
  bool started_ = false;
  double best_ = 0.0;
  std::size_t best_t_ = 0;
  std::string reason_;
};

}  // namespace tegnas::search
