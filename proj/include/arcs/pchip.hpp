#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace arcs {

/// Monotonicity-preserving piecewise cubic Hermite interpolant (Fritsch-Carlson
/// interior derivatives, three-point one-sided endpoint derivatives with
/// shape clamping). Two knots degrade to linear interpolation.
class Pchip {
 public:
  Pchip(std::span<const double> x, std::span<const double> y) : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    if (x_.size() != y_.size() || x_.size() < 2) throw std::invalid_argument("Pchip: need >= 2 matching knots");
    for (std::size_t i = 1; i < x_.size(); ++i)
      if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("Pchip: abscissae must be strictly increasing");
    compute_derivatives();
  }

  std::size_t size() const noexcept { return x_.size(); }
  double x_min() const noexcept { return x_.front(); }
  double x_max() const noexcept { return x_.back(); }
  const std::vector<double>& knots() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return y_; }
  const std::vector<double>& derivatives() const noexcept { return d_; }

  /// Evaluates at `t`; outside the knot range the end cubic is extrapolated.
  double operator()(double t) const noexcept {
    const std::size_t k = segment(t);
    const double h = x_[k + 1] - x_[k];
    const double s = (t - x_[k]) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1];
  }

  /// Exact integral over [a, b] (a <= b, both within the knot range),
  /// summed segment by segment from the cubic's antiderivative.
  double integrate(double a, double b) const {
    if (a > b) return -integrate(b, a);
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
      const double lo = std::max(a, x_[k]);
      const double hi = std::min(b, x_[k + 1]);
      if (hi <= lo) continue;
      total += segment_antiderivative(k, hi - x_[k]) - segment_antiderivative(k, lo - x_[k]);
    }
    return total;
  }

 private:
  std::size_t segment(double t) const noexcept {
    const auto it = std::upper_bound(x_.begin() + 1, x_.end() - 1, t);
    return static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  // Segment k in local coordinate u = t - x_k:
  //   p(u) = y_k + d_k u + c2 u^2 + c3 u^3
  double segment_antiderivative(std::size_t k, double u) const noexcept {
    const double h = x_[k + 1] - x_[k];
    const double delta = (y_[k + 1] - y_[k]) / h;
    const double c2 = (3 * delta - 2 * d_[k] - d_[k + 1]) / h;
    const double c3 = (d_[k] + d_[k + 1] - 2 * delta) / (h * h);
    return u * (y_[k] + u * (d_[k] / 2 + u * (c2 / 3 + u * c3 / 4)));
  }

  static double sign(double v) noexcept { return (v > 0) - (v < 0); }

  static double endpoint_derivative(double h0, double h1, double m0, double m1) noexcept {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (sign(d) != sign(m0)) {
      d = 0.0;
    } else if (sign(m0) != sign(m1) && std::abs(d) > 3 * std::abs(m0)) {
      d = 3 * m0;
    }
    return d;
  }

  void compute_derivatives() {
    const std::size_t n = x_.size();
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), m(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      m[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    if (n == 2) {
      d_[0] = d_[1] = m[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (m[k - 1] == 0.0 || m[k] == 0.0 || sign(m[k - 1]) != sign(m[k])) {
        d_[k] = 0.0;
      } else {
        const double w1 = 2 * h[k] + h[k - 1];
        const double w2 = h[k] + 2 * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
      }
    }
    d_[0] = endpoint_derivative(h[0], h[1], m[0], m[1]);
    d_[n - 1] = endpoint_derivative(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> d_;
};

}  // namespace arcs
