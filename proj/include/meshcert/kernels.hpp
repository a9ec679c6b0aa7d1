#pragma once

#include <cstddef>
#include <string>

#include "meshcert/functionals.hpp"
#include "meshcert/geometry.hpp"

namespace meshcert {

// Radial kernel on R^d.  Two families:
//
//  * polyharmonic: phi(r) = scale_factor * r^(2m-d) * (log r when 2m-d is
//    even), the fundamental-solution normalization of the iterated
//    Laplacian; conditionally positive definite of order
//    k = floor(m - d/2) + 1.
//  * whittle_matern: phi(r) = scale_factor * r^nu K_nu(r), nu = m - d/2,
//    normalized so the native space is W_2^m(R^d) with Fourier weight
//    (1 + |omega|^2)^(-m); scale_factor = 2^(1-m) / Gamma(m).
//
// All evaluations are pure; a Kernel is an immutable value object.
struct Kernel {
  enum class Family { polyharmonic, whittle_matern };

  Family family = Family::polyharmonic;
  double m = 2.0;
  int d = 2;
  double scale_factor = 1.0;

  // Radial profile and its radial Laplacian / bi-Laplacian in d dimensions,
  // i.e. Delta_x phi(|x - y|) as a function of r = |x - y|.  r = 0 returns
  // the analytic limit.
  double phi(double r) const;
  double laplacian(double r) const;
  double bilaplacian(double r) const;

  // Delta needs 2m - d > 2 in both smoothness and boundedness at r = 0;
  // Delta_x Delta_y needs 2m - d > 4.
  bool supports_laplacian() const;
  bool supports_bilaplacian() const;

  // Polynomial exactness order k = floor(m - d/2) + 1 required of stencils
  // measured in this kernel's native space.
  std::size_t exactness_order() const;

  std::string spec_string() const;
};

Kernel ph_kernel(double m, int d);
Kernel wm_kernel(double m, int d);

// Parses "ph:m=<v>,d=<v>" or "wm:m=<v>,d=<v>".
Kernel parse_kernel_spec(const std::string& spec);

// lambda^x mu^y K(x, y) for the strong-form functionals: the anchors are the
// explicit x and y, so only the operators of lambda and mu matter.
double apply_functionals(const Kernel& K, Operator op_x, Operator op_y,
                         const Point& x, const Point& y);
double apply_functionals(const Kernel& K, const Functional& lambda,
                         const Functional& mu, const Point& x, const Point& y);

}  // namespace meshcert
