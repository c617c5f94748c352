#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "spinekit/error.hpp"

namespace spinekit {

/// Gaussian mixture sampled on a uniform grid. A kernel density estimate is
/// the special case of equal weights and one common bandwidth; the closed
/// form is kept so derivatives never come from finite differences.
class DensityCurve {
 public:
  static constexpr std::size_t kGridSize = 512;

  DensityCurve(std::vector<double> centers, std::vector<double> weights, double bandwidth, double grid_max)
      : centers_(std::move(centers)), weights_(std::move(weights)), bandwidth_(bandwidth) {
    if (centers_.size() != weights_.size() || centers_.empty()) {
      throw Error(ErrorKind::contract, "density centers and weights must be non-empty and aligned");
    }
    if (!(bandwidth_ > 0.0) || !(grid_max > 0.0)) {
      throw Error(ErrorKind::contract, "density bandwidth and grid extent must be positive");
    }
    grid_.resize(kGridSize);
    density_.resize(kGridSize);
    for (std::size_t i = 0; i < kGridSize; ++i) {
      grid_[i] = grid_max * static_cast<double>(i) / static_cast<double>(kGridSize - 1);
      density_[i] = value(grid_[i]);
    }
  }

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& density() const { return density_; }
  double bandwidth() const { return bandwidth_; }
  std::span<const double> centers() const { return centers_; }

  double value(double x) const { return sum(x, [](double) { return 1.0; }) / bandwidth_; }
  double first_derivative(double x) const {
    return sum(x, [](double u) { return -u; }) / (bandwidth_ * bandwidth_);
  }
  double second_derivative(double x) const {
    return sum(x, [](double u) { return u * u - 1.0; }) / (bandwidth_ * bandwidth_ * bandwidth_);
  }

  /// Trapezoidal integral of the sampled density.
  double integral() const {
    double s = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
      s += 0.5 * (density_[i] + density_[i - 1]) * (grid_[i] - grid_[i - 1]);
    }
    return s;
  }

 private:
  template <typename Factor>
  double sum(double x, Factor&& factor) const {
    static const double kNorm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    double s = 0.0;
    for (std::size_t i = 0; i < centers_.size(); ++i) {
      const double u = (x - centers_[i]) / bandwidth_;
      if (u * u > 80.0) continue;  // exp(-40) is below double resolution relative to the peak
      s += weights_[i] * kNorm * std::exp(-0.5 * u * u) * factor(u);
    }
    return s;
  }

  std::vector<double> centers_;
  std::vector<double> weights_;
  double bandwidth_;
  std::vector<double> grid_;
  std::vector<double> density_;
};

/// Linear-interpolated sample quantile (R type 7) of sorted data.
inline double sorted_quantile(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

/// Silverman's rule of thumb: 0.9 min(sd, IQR / 1.34) n^(-1/5).
inline double silverman_bandwidth(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

struct KdeSettings {
  /// Lower bound on the bandwidth; voxel-quantized distances need at least
  /// one voxel of smoothing or lattice shells show up as spurious modes.
  double min_bandwidth = 0.0;
  double bandwidth_scale = 1.0;
};

/// Gaussian KDE on [0, 1.05 max] with Silverman bandwidth.
inline DensityCurve estimate_density(std::span<const double> values, const KdeSettings& settings = {}) {
  if (values.size() < 10) {
    throw Error(ErrorKind::degenerate_distribution, "density estimation needs at least 10 samples");
  }
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  if (*mn == *mx) throw Error(ErrorKind::degenerate_distribution, "all distance samples are equal");
  const double h = std::max(settings.min_bandwidth, settings.bandwidth_scale * silverman_bandwidth(values));
  if (!(h > 0.0)) throw Error(ErrorKind::degenerate_distribution, "zero bandwidth");
  std::vector<double> w(values.size(), 1.0 / static_cast<double>(values.size()));
  return DensityCurve({values.begin(), values.end()}, std::move(w), h, 1.05 * *mx);
}

struct Thresholds {
  double t1 = 0.0;
  double t2 = 0.0;
  double t3 = 0.0;
};

struct ThresholdResult {
  Thresholds thresholds;
  /// Fewer than three density modes; t3 falls back to the last inflection.
  bool degraded = false;
  std::vector<double> modes;
  std::vector<double> inflections;
};

namespace detail {

// Bisection on a bracketed sign change of f.
template <typename F>
double refine_root(F&& f, double a, double b) {
  double fa = f(a);
  for (int it = 0; it < 100; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = f(m);
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Thresholds at the descending-flank inflection of the first three modes.
inline ThresholdResult find_thresholds(const DensityCurve& curve) {
  const auto& x = curve.grid();
  std::vector<double> d1(x.size()), d2(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    d1[i] = curve.first_derivative(x[i]);
    d2[i] = curve.second_derivative(x[i]);
  }
  ThresholdResult r;
  std::vector<bool> falling;  // f'' goes from negative to positive
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (d1[i - 1] > 0.0 && d1[i] <= 0.0) {
      r.modes.push_back(
          detail::refine_root([&](double t) { return curve.first_derivative(t); }, x[i - 1], x[i]));
    }
    if ((d2[i - 1] < 0.0) != (d2[i] < 0.0)) {
      r.inflections.push_back(
          detail::refine_root([&](double t) { return curve.second_derivative(t); }, x[i - 1], x[i]));
      falling.push_back(d2[i - 1] < 0.0);
    }
  }
  if (r.modes.size() < 2) {
    throw Error(ErrorKind::threshold_failure,
                "density has " + std::to_string(r.modes.size()) + " mode(s); at least two are required");
  }
  auto descending_after = [&](double mode) {
    for (std::size_t k = 0; k < r.inflections.size(); ++k) {
      if (falling[k] && r.inflections[k] > mode) return r.inflections[k];
    }
    throw Error(ErrorKind::threshold_failure, "mode without a descending inflection");
  };
  r.thresholds.t1 = descending_after(r.modes[0]);
  r.thresholds.t2 = descending_after(r.modes[1]);
  if (r.modes.size() >= 3) {
    r.thresholds.t3 = descending_after(r.modes[2]);
  } else {
    r.degraded = true;
    r.thresholds.t3 = r.inflections.back();
  }
  if (!(r.thresholds.t1 > 0.0 && r.thresholds.t1 < r.thresholds.t2)) {
    throw Error(ErrorKind::threshold_failure, "inflection thresholds are not increasing");
  }
  return r;
}

}  // namespace spinekit
