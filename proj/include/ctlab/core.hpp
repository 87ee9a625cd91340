#pragma once
// Shared basic types: vectors, intervals, boxes, small dense symmetric
// matrices with a Jacobi eigensolver, and a few hashing helpers.
//
// Everything here is dimension-agnostic but tuned for d <= 64 (the largest
// matrix we ever diagonalize is the Jacobi matrix of a quadrature rule).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ctlab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Default master seed for every randomized routine. Reports record the seed
// actually used, so two runs with the same config are byte-identical.
inline constexpr std::uint64_t kDefaultSeed = 0x00c0ffee2026ULL;

using Vec = std::vector<double>;

inline Vec vec1(double x) { return Vec{x}; }
inline Vec vec2(double x, double y) { return Vec{x, y}; }

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double dist2(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Intervals and boxes
// ---------------------------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return std::min(hi, std::max(lo, x)); }
};

struct Box {
  std::vector<Interval> ax;

  Box() = default;
  explicit Box(std::vector<Interval> a) : ax(std::move(a)) {}
  static Box cube(int d, double halfwidth) {
    Box b;
    b.ax.assign(static_cast<std::size_t>(d), Interval{-halfwidth, halfwidth});
    return b;
  }

  int dim() const { return static_cast<int>(ax.size()); }
  bool contains(const Vec& x) const {
    for (int i = 0; i < dim(); ++i)
      if (!ax[static_cast<std::size_t>(i)].contains(x[static_cast<std::size_t>(i)])) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Small dense matrices (row major, square)
// ---------------------------------------------------------------------------

struct Mat {
  int n = 0;
  std::vector<double> a;  // n*n, row major

  Mat() = default;
  explicit Mat(int n_) : n(n_), a(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_), 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

  static Mat identity(int n_) {
    Mat m(n_);
    for (int i = 0; i < n_; ++i) m(i, i) = 1.0;
    return m;
  }
  static Mat diag(const Vec& d) {
    Mat m(static_cast<int>(d.size()));
    for (int i = 0; i < m.n; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
    return m;
  }
};

inline Mat sym_part(const Mat& m) {
  Mat s(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

// Cyclic Jacobi diagonalization of a symmetric matrix. Robust and accurate
// for the small sizes used here; also powers the Golub-Welsch quadrature
// construction (n = 64). If evecs is non-null its columns hold the
// eigenvectors matching the returned eigenvalues (unsorted pairing kept).
inline Vec jacobi_eigen(Mat m, Mat* evecs = nullptr) {
  const int n = m.n;
  Mat v = Mat::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  Vec ev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = m(i, i);
  if (evecs) *evecs = v;
  return ev;
}

inline double min_eigenvalue_sym(const Mat& m) {
  Vec ev = jacobi_eigen(m);
  return *std::min_element(ev.begin(), ev.end());
}

inline double max_eigenvalue_sym(const Mat& m) {
  Vec ev = jacobi_eigen(m);
  return *std::max_element(ev.begin(), ev.end());
}

// Spectral norm of a general (not necessarily symmetric) matrix via A^T A.
inline double operator_norm(const Mat& m) {
  Mat g(m.n);
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j) {
      double s = 0.0;
      for (int k = 0; k < m.n; ++k) s += m(k, i) * m(k, j);
      g(i, j) = s;
    }
  return std::sqrt(std::max(0.0, max_eigenvalue_sym(g)));
}

// Norm of the positive part of a symmetric matrix: max(lambda_max, 0).
inline double positive_part_norm_sym(const Mat& m) {
  return std::max(0.0, max_eigenvalue_sym(m));
}

// ---------------------------------------------------------------------------
// Hashing (config digests for reports)
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace ctlab
