#include "meshcert/kernels.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "meshcert/error.hpp"

namespace meshcert {

namespace {

// Below this radius the analytic r -> 0 limits take over; distinct nodes are
// always separated by far more.
constexpr double kZeroRadius = 1e-13;

// r^mu K_|mu|(r); negative mu only ever appears multiplied by a compensating
// power of r in the Laplacian formulas.
double bessel_profile(double mu, double r) {
  return std::pow(r, mu) * boost::math::cyl_bessel_k(std::fabs(mu), r);
}

// lim_{r->0} r^mu K_mu(r) for mu > 0.
double bessel_profile_limit(double mu) {
  return std::pow(2.0, mu - 1.0) * std::tgamma(mu);
}

long beta_of(double m, int d) {
  const double beta = 2.0 * m - static_cast<double>(d);
  const long rounded = std::lround(beta);
  if (std::fabs(beta - static_cast<double>(rounded)) > 1e-9) {
    fail(errc::bad_input,
         "kernel smoothness m must be an integer or half-integer");
  }
  return rounded;
}

std::string format_parameter(double v) {
  char buf[32];
  if (v == std::floor(v)) {
    std::snprintf(buf, sizeof(buf), "%.0f", v);
  } else {
    std::snprintf(buf, sizeof(buf), "%g", v);
  }
  return buf;
}

}  // namespace

bool Kernel::supports_laplacian() const {
  return 2.0 * m - static_cast<double>(d) > 2.0;
}

bool Kernel::supports_bilaplacian() const {
  return 2.0 * m - static_cast<double>(d) > 4.0;
}

std::size_t Kernel::exactness_order() const {
  return static_cast<std::size_t>(
             std::floor(m - static_cast<double>(d) / 2.0)) +
         1;
}

std::string Kernel::spec_string() const {
  std::ostringstream out;
  out << (family == Family::polyharmonic ? "ph" : "wm")
      << ":m=" << format_parameter(m) << ",d=" << d;
  return out.str();
}

double Kernel::phi(double r) const {
  if (family == Family::polyharmonic) {
    const long beta = beta_of(m, d);
    if (r < kZeroRadius) return 0.0;
    const double power = std::pow(r, static_cast<double>(beta));
    if (beta % 2 == 0) return scale_factor * power * std::log(r);
    return scale_factor * power;
  }
  const double nu = m - static_cast<double>(d) / 2.0;
  if (r < kZeroRadius) return scale_factor * bessel_profile_limit(nu);
  return scale_factor * bessel_profile(nu, r);
}

double Kernel::laplacian(double r) const {
  if (!supports_laplacian()) {
    fail(errc::insufficient_smoothness,
         "kernel " + spec_string() + " does not admit the Laplacian (needs "
         "2m - d > 2)");
  }
  if (family == Family::polyharmonic) {
    const long beta = beta_of(m, d);
    const double a =
        static_cast<double>(beta) * static_cast<double>(beta + d - 2);
    if (r < kZeroRadius) return 0.0;
    const double power = std::pow(r, static_cast<double>(beta - 2));
    if (beta % 2 == 0) {
      const double b = static_cast<double>(2 * beta + d - 2);
      return scale_factor * power * (a * std::log(r) + b);
    }
    return scale_factor * a * power;
  }
  const double nu = m - static_cast<double>(d) / 2.0;
  const double dim = static_cast<double>(d);
  if (r < kZeroRadius) {
    return -dim * scale_factor * std::pow(2.0, nu - 2.0) * std::tgamma(nu - 1.0);
  }
  return scale_factor *
         (r * r * bessel_profile(nu - 2.0, r) - dim * bessel_profile(nu - 1.0, r));
}

double Kernel::bilaplacian(double r) const {
  if (!supports_bilaplacian()) {
    fail(errc::insufficient_smoothness,
         "kernel " + spec_string() + " does not admit Delta_x Delta_y (needs "
         "2m - d > 4)");
  }
  if (family == Family::polyharmonic) {
    const long beta = beta_of(m, d);
    const double a =
        static_cast<double>(beta) * static_cast<double>(beta + d - 2);
    const double lead =
        a * static_cast<double>(beta - 2) * static_cast<double>(beta + d - 4);
    if (r < kZeroRadius) return 0.0;
    const double power = std::pow(r, static_cast<double>(beta - 4));
    if (beta % 2 == 0) {
      const double b = static_cast<double>(2 * beta + d - 2);
      const double mixed = a * static_cast<double>(2 * beta + d - 6) +
                           b * static_cast<double>(beta - 2) *
                               static_cast<double>(beta + d - 4);
      return scale_factor * power * (lead * std::log(r) + mixed);
    }
    return scale_factor * lead * power;
  }
  const double nu = m - static_cast<double>(d) / 2.0;
  const double dim = static_cast<double>(d);
  if (r < kZeroRadius) {
    return dim * (dim + 2.0) * scale_factor * std::pow(2.0, nu - 3.0) *
           std::tgamma(nu - 2.0);
  }
  const double r2 = r * r;
  return scale_factor *
         (r2 * r2 * bessel_profile(nu - 4.0, r) -
          2.0 * (dim + 2.0) * r2 * bessel_profile(nu - 3.0, r) +
          dim * (dim + 2.0) * bessel_profile(nu - 2.0, r));
}

Kernel ph_kernel(double m, int d) {
  if (d < 1) fail(errc::bad_input, "ph_kernel: dimension must be positive");
  if (!(2.0 * m > static_cast<double>(d))) {
    fail(errc::invalid_smoothness, "ph_kernel: need 2m > d");
  }
  Kernel K;
  K.family = Kernel::Family::polyharmonic;
  K.m = m;
  K.d = d;
  const long beta = beta_of(m, d);
  const double dim = static_cast<double>(d);
  if (beta % 2 == 0) {
    const double sign = (1 + beta / 2) % 2 == 0 ? 1.0 : -1.0;
    K.scale_factor = sign / (std::pow(2.0, 2.0 * m - 1.0) *
                             std::pow(M_PI, dim / 2.0) * std::tgamma(m) *
                             std::tgamma(m - dim / 2.0 + 1.0));
  } else {
    const long half_up = (beta + 1) / 2;  // ceil(beta / 2)
    const double sign = half_up % 2 == 0 ? 1.0 : -1.0;
    K.scale_factor = sign * std::tgamma(m - dim / 2.0) /
                     (std::pow(2.0, 2.0 * m) * std::pow(M_PI, dim / 2.0) *
                      std::tgamma(m));
  }
  return K;
}

Kernel wm_kernel(double m, int d) {
  if (d < 1) fail(errc::bad_input, "wm_kernel: dimension must be positive");
  const double nu = m - static_cast<double>(d) / 2.0;
  if (!(nu > 0.0)) {
    fail(errc::invalid_smoothness, "wm_kernel: need m - d/2 > 0");
  }
  beta_of(m, d);  // validates that m is an integer or half-integer
  Kernel K;
  K.family = Kernel::Family::whittle_matern;
  K.m = m;
  K.d = d;
  K.scale_factor = std::pow(2.0, 1.0 - m) / std::tgamma(m);
  return K;
}

Kernel parse_kernel_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  if (colon == std::string::npos ||
      (family != "ph" && family != "wm")) {
    fail(errc::bad_input,
         "kernel spec '" + spec + "': expected ph:m=<v>,d=<v> or wm:m=<v>,d=<v>");
  }
  double m = 0.0;
  int d = 0;
  if (std::sscanf(spec.c_str() + colon + 1, "m=%lf,d=%d", &m, &d) != 2) {
    fail(errc::bad_input,
         "kernel spec '" + spec + "': expected ph:m=<v>,d=<v> or wm:m=<v>,d=<v>");
  }
  return family == "ph" ? ph_kernel(m, d) : wm_kernel(m, d);
}

double apply_functionals(const Kernel& K, Operator op_x, Operator op_y,
                         const Point& x, const Point& y) {
  const double r = std::hypot(x[0] - y[0], x[1] - y[1]);
  const int laplacians = (op_x == Operator::laplacian ? 1 : 0) +
                         (op_y == Operator::laplacian ? 1 : 0);
  switch (laplacians) {
    case 0:
      return K.phi(r);
    case 1:
      return K.laplacian(r);
    default:
      return K.bilaplacian(r);
  }
}

double apply_functionals(const Kernel& K, const Functional& lambda,
                         const Functional& mu, const Point& x,
                         const Point& y) {
  return apply_functionals(K, lambda.op, mu.op, x, y);
}

}  // namespace meshcert
