#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "ppwave/error.hpp"

namespace ppwave {

/**
 * Finite Fourier series
 *
 *   f(t) = a0 + sum_m a_m cos(2 pi m t / p) + b_m sin(2 pi m t / p)
 *
 * Smooth and p-periodic with exact derivatives of every order.
 */
class FourierSeries {
 public:
  using Mode = std::pair<double, double>;

  FourierSeries() = default;
  FourierSeries(double period, double a0, std::vector<Mode> modes = {})
      : period_(period), a0_(a0), modes_(std::move(modes)) {
    if (!(period_ > 0.0) || !std::isfinite(period_)) {
      throw Error(ErrorCode::InvalidArgument, "Fourier period must be a positive finite number");
    }
  }

  static FourierSeries constant(double value, double period = 1.0) {
    return FourierSeries(period, value);
  }

  double period() const { return period_; }
  double a0() const { return a0_; }
  const std::vector<Mode>& modes() const { return modes_; }

  bool nonconstant() const {
    for (const auto& [a, b] : modes_) {
      if (a != 0.0 || b != 0.0) return true;
    }
    return false;
  }

  /// k-th derivative at t (k = 0 is the value).
  double derivative(double t, int k) const {
    double acc = (k == 0) ? a0_ : 0.0;
    const double base = 2.0 * std::numbers::pi / period_;
    for (std::size_t idx = 0; idx < modes_.size(); ++idx) {
      const auto [a, b] = modes_[idx];
      if (a == 0.0 && b == 0.0) continue;
      const double w = base * static_cast<double>(idx + 1);
      const double phase = w * t + 0.5 * std::numbers::pi * static_cast<double>(k);
      acc += std::pow(w, k) * (a * std::cos(phase) + b * std::sin(phase));
    }
    return acc;
  }

  double operator()(double t) const { return derivative(t, 0); }

  /// Upper bound on |f| from the coefficients.
  double sup_bound() const {
    double acc = std::abs(a0_);
    for (const auto& [a, b] : modes_) acc += std::hypot(a, b);
    return acc;
  }

  bool operator==(const FourierSeries&) const = default;

 private:
  double period_ = 1.0;
  double a0_ = 0.0;
  std::vector<Mode> modes_;
};

}  // namespace ppwave
