#pragma once
// Monotone cubic (Fritsch-Carlson) interpolation. Given strictly increasing
// knots and monotone data the interpolant is monotone; derivatives are
// continuous. Used for tabulated radial profiles and for inverting sampled
// flow maps.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctlab/core.hpp"

namespace ctlab {

class MonotoneCubic {
 public:
  MonotoneCubic() = default;

  // Hermite interpolation with caller-supplied tangents, clamped into the
  // Fritsch-Carlson monotonicity region. With exact tangents of a smooth
  // function the clamp never engages and the error improves to O(h^4).
  MonotoneCubic(Vec x, Vec y, Vec dy) : x_(std::move(x)), y_(std::move(y)), d_(std::move(dy)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n || d_.size() != n)
      throw std::invalid_argument("MonotoneCubic: need >= 2 knots with matching values/slopes");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw std::invalid_argument("MonotoneCubic: knots must be strictly increasing");
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double delta = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
      if (delta == 0.0) {
        d_[i] = d_[i + 1] = 0.0;
        continue;
      }
      for (std::size_t k : {i, i + 1}) {
        if (d_[k] * delta < 0.0)
          d_[k] = 0.0;
        else if (std::fabs(d_[k]) > 3.0 * std::fabs(delta))
          d_[k] = 3.0 * delta;
      }
    }
  }

  MonotoneCubic(Vec x, Vec y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n)
      throw std::invalid_argument("MonotoneCubic: need >= 2 knots with matching values");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1]))
        throw std::invalid_argument("MonotoneCubic: knots must be strictly increasing");

    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        d_[i] = 0.0;  // local extremum of the data: flat tangent keeps monotonicity
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
    d_[0] = endpoint_slope(h[0], n > 2 ? h[1] : h[0], delta[0], n > 2 ? delta[1] : delta[0]);
    d_[n - 1] = endpoint_slope(h[n - 2], n > 2 ? h[n - 3] : h[n - 2], delta[n - 2],
                               n > 2 ? delta[n - 3] : delta[n - 2]);
  }

  double eval(double x) const {
    const std::size_t i = cell(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    const double h10 = t3 - 2.0 * t2 + t;
    const double h01 = -2.0 * t3 + 3.0 * t2;
    const double h11 = t3 - t2;
    return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
  }

  double deriv(double x) const {
    const std::size_t i = cell(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double dh00 = (6.0 * t2 - 6.0 * t) / h;
    const double dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    const double dh01 = (-6.0 * t2 + 6.0 * t) / h;
    const double dh11 = 3.0 * t2 - 2.0 * t;
    return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
  }

  double front_x() const { return x_.front(); }
  double back_x() const { return x_.back(); }
  double front_y() const { return y_.front(); }
  double back_y() const { return y_.back(); }

 private:
  static double endpoint_slope(double h0, double h1, double d0, double d1) {
    // one-sided three-point estimate, clamped so monotone data stays monotone
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0)
      d = 0.0;
    else if (d0 * d1 <= 0.0 && std::fabs(d) > 3.0 * std::fabs(d0))
      d = 3.0 * d0;
    return d;
  }

  std::size_t cell(double x) const {
    if (!(x >= x_.front() && x <= x_.back()))
      throw std::out_of_range("MonotoneCubic: query outside knot range");
    std::size_t lo = 0, hi = x_.size() - 1;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (x_[mid] <= x ? lo : hi) = mid;
    }
    return lo;
  }

  Vec x_, y_, d_;
};

}  // namespace ctlab
