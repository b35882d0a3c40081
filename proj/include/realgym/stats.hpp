#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "realgym/core.hpp"
#include "realgym/errors.hpp"

namespace realgym {

struct StepRecord {
  double action = 0.0;
  double reward = 0.0;
  std::vector<double> components;  // aligned with EpisodeRecord::component_names
  std::uint64_t digest = 0;        // hash of the resulting observation
};

struct EpisodeRecord {
  std::uint64_t seed = 0;         // campaign seed
  std::size_t episode = 0;        // index within the seed
  std::uint64_t reset_seed = 0;   // seed passed to reset()
  std::vector<std::string> component_names;
  std::vector<StepRecord> steps;
  double total_return = 0.0;
  bool terminated = false;
  bool truncated = false;
};

// FNV-1a over the bit patterns of the observation.
inline std::uint64_t observation_digest(const Observation& obs) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double v : obs) {
    std::uint64_t bits = 0;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof v);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

// Linear-interpolation quantile of sorted data (the common "type 7").
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw UsageError("quantile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline constexpr double kZ95 = 1.959963984540054;

struct ReturnStats {
  std::vector<double> returns;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double ci95_half_width = 0.0;
  std::vector<double> trajectory_mean;        // mean cumulative reward per step
  std::vector<double> trajectory_half_width;  // 95% normal-approximation half-widths

  static ReturnStats from_returns(std::vector<double> returns) {
    if (returns.empty()) throw UsageError("return statistics need at least one episode");
    ReturnStats s;
    s.returns = std::move(returns);
    const auto n = static_cast<double>(s.returns.size());
    for (double r : s.returns) s.mean += r;
    s.mean /= n;
    if (s.returns.size() > 1) {
      double ss = 0.0;
      for (double r : s.returns) ss += (r - s.mean) * (r - s.mean);
      s.std = std::sqrt(ss / (n - 1.0));
    }
    s.ci95_half_width = kZ95 * s.std / std::sqrt(n);
    auto sorted = s.returns;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q3 = quantile_sorted(sorted, 0.75);
    return s;
  }

  /// Aggregates records in their given order. Shorter episodes (early
  /// termination) carry their final cumulative reward forward so every
  /// trajectory has the length of the longest episode.
  static ReturnStats from_records(const std::vector<EpisodeRecord>& records) {
    std::vector<double> returns;
    std::size_t horizon = 0;
    for (const auto& r : records) {
      returns.push_back(r.total_return);
      horizon = std::max(horizon, r.steps.size());
    }
    auto s = from_returns(std::move(returns));
    const auto n = static_cast<double>(records.size());
    std::vector<double> sum(horizon, 0.0), sum_sq(horizon, 0.0);
    for (const auto& r : records) {
      double cum = 0.0;
      for (std::size_t t = 0; t < horizon; ++t) {
        if (t < r.steps.size()) cum += r.steps[t].reward;
        sum[t] += cum;
        sum_sq[t] += cum * cum;
      }
    }
    s.trajectory_mean.resize(horizon);
    s.trajectory_half_width.resize(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const double m = sum[t] / n;
      s.trajectory_mean[t] = m;
      const double var = records.size() > 1 ? std::max(0.0, (sum_sq[t] - n * m * m) / (n - 1.0)) : 0.0;
      s.trajectory_half_width[t] = kZ95 * std::sqrt(var) / std::sqrt(n);
    }
    return s;
  }
};

struct WelchInterval {
  double difference;   // mean_a - mean_b
  double half_width;   // 95% two-sided
  double dof;
};

/// Welch's unequal-variance interval for the difference of two means.
inline WelchInterval welch_interval(const ReturnStats& a, const ReturnStats& b) {
  const auto na = static_cast<double>(a.returns.size());
  const auto nb = static_cast<double>(b.returns.size());
  const double va = a.std * a.std / na;
  const double vb = b.std * b.std / nb;
  const double diff = a.mean - b.mean;
  const double se2 = va + vb;
  if (se2 <= 0.0) return {diff, 0.0, std::numeric_limits<double>::infinity()};
  double dof = se2 * se2;
  const double denom = (na > 1 ? va * va / (na - 1.0) : 0.0) + (nb > 1 ? vb * vb / (nb - 1.0) : 0.0);
  dof = denom > 0.0 ? dof / denom : 1.0;
  const boost::math::students_t dist(std::max(dof, 1.0));
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  return {diff, t * std::sqrt(se2), dof};
}

}  // namespace realgym
