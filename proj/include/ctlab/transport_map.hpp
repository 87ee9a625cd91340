#pragma once
// Common interface for transport maps produced by the different solvers.
// Every map can be evaluated; jacobian / inverse / potential are optional
// capabilities advertised by non-null std::functions.

#include <functional>
#include <stdexcept>
#include <string>

#include "ctlab/core.hpp"

namespace ctlab {

enum class MapKind { monotone1d, radial, grid_barycentric, flow };

struct TransportMap {
  MapKind kind = MapKind::monotone1d;
  std::string name;
  int dim = 1;

  std::function<Vec(const Vec&)> forward;
  std::function<Mat(const Vec&)> jacobian;   // derivative matrix at x
  std::function<Vec(const Vec&)> inverse;
  std::function<double(const Vec&)> potential;  // convex Phi with map = grad Phi

  Vec operator()(const Vec& x) const { return forward(x); }

  double forward1(double x) const { return forward(Vec{x})[0]; }
  double derivative1(double x) const { return jacobian(Vec{x})(0, 0); }
  double inverse1(double y) const { return inverse(Vec{y})[0]; }

  bool has_jacobian() const { return static_cast<bool>(jacobian); }
  bool has_inverse() const { return static_cast<bool>(inverse); }
  bool has_potential() const { return static_cast<bool>(potential); }
};

}  // namespace ctlab
