#include "meshcert/consistency.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "meshcert/error.hpp"
#include "meshcert/stencils.hpp"

namespace meshcert {

namespace {

constexpr double kExactnessGate = 1e-7;
constexpr double kGuardRelative = 1e-8;

struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double value) {
    const double y = value - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// The three-term expansion evaluated at the given geometry.  Negative totals
// within the guard clamp to zero; larger ones abort.
double expansion(const Kernel& K, Operator op, const Point& anchor,
                 const std::vector<Point>& points, const Vector& weights) {
  const double kappa = apply_functionals(K, op, op, anchor, anchor);

  KahanSum cross;
  for (std::size_t j = 0; j < points.size(); ++j) {
    cross.add(weights[j] *
              apply_functionals(K, op, Operator::identity, anchor, points[j]));
  }

  KahanSum gram;
  for (std::size_t j = 0; j < points.size(); ++j) {
    for (std::size_t l = 0; l < points.size(); ++l) {
      gram.add(weights[j] * weights[l] *
               apply_functionals(K, Operator::identity, Operator::identity,
                                 points[j], points[l]));
    }
  }

  const double total = kappa - 2.0 * cross.sum + gram.sum;
  if (total >= 0.0) return total;
  const double leading = std::max(
      {std::fabs(kappa), 2.0 * std::fabs(cross.sum), std::fabs(gram.sum)});
  if (-total <= kGuardRelative * leading) return 0.0;
  std::ostringstream msg;
  msg << "quadratic form came out " << total
      << ", beyond the cancellation guard (leading term " << leading
      << "); kernel or derivative defect";
  fail(errc::non_convergence, msg.str());
}

bool is_exact_interpolation(const Functional& lambda, const Stencil& s) {
  if (lambda.op != Operator::identity) return false;
  if (s.points.size() != 1 || s.weights.size() != 1) return false;
  return s.weights[0] == 1.0 && s.points[0][0] == lambda.anchor[0] &&
         s.points[0][1] == lambda.anchor[1];
}

}  // namespace

double quadratic_form(const Kernel& K, const Functional& lambda,
                      const Stencil& s) {
  if (s.points.size() != s.weights.size()) {
    fail(errc::dimension_mismatch,
         "quadratic_form: stencil has no bound support points");
  }
  if (lambda.op == Operator::laplacian && !K.supports_bilaplacian()) {
    fail(errc::insufficient_smoothness,
         "quadratic_form: " + K.spec_string() +
             " cannot carry the Laplacian in both arguments (needs 2m - d > "
             "4)");
  }
  if (is_exact_interpolation(lambda, s)) return 0.0;

  if (K.family == Kernel::Family::whittle_matern) {
    return expansion(K, lambda.op, lambda.anchor, s.points, s.weights);
  }

  // Polyharmonic: the native space is a seminorm space, so Q^2 is only
  // meaningful for stencils exact on its polynomial nullspace.
  const std::size_t k = K.exactness_order();
  const double defect = exactness_defect(s, k);
  if (defect > kExactnessGate) {
    std::ostringstream msg;
    msg << "stencil is not exact of order " << k
        << " (unit-scale defect " << defect
        << "); the polyharmonic quadratic form requires it";
    fail(errc::exactness_violated, msg.str());
  }

  const double p = static_cast<double>(operator_order(lambda.op));
  std::vector<Point> unit_points;
  Vector unit_weights = s.weights;
  double scale = 1.0;
  if (s.points.size() >= 2) {
    auto frame = normalize_to_unit(s.points, lambda.anchor);
    unit_points = std::move(frame.first);
    scale = frame.second;
  } else {
    unit_points.push_back({s.points[0][0] - lambda.anchor[0],
                           s.points[0][1] - lambda.anchor[1]});
  }
  for (auto& w : unit_weights) w /= std::pow(scale, p);

  const double q2_unit =
      expansion(K, lambda.op, {0.0, 0.0}, unit_points, unit_weights);
  const double q_exponent = K.m - static_cast<double>(K.d) / 2.0 - p;
  // Physical scale is 1/scale; Q^2 picks up that factor to the 2*exponent.
  return q2_unit * std::pow(scale, -2.0 * q_exponent);
}

ConsistencyVector consistency_vector(const Kernel& K,
                                     const std::vector<Stencil>& stencils) {
  ConsistencyVector out;
  out.kernel_spec = K.spec_string();
  out.values.reserve(stencils.size());
  for (const Stencil& s : stencils) {
    const double q2 = quadratic_form(K, s.functional, s);
    if (!std::isfinite(q2)) {
      fail(errc::non_convergence, "consistency value is not finite");
    }
    out.values.push_back(std::sqrt(q2));
  }
  return out;
}

double scaled_consistency(double q_unit, double h, double m, double d,
                          double p) {
  return q_unit * std::pow(h, m - d / 2.0 - p);
}

void write_consistency_field_csv(const NodeSet& nodes,
                                 const std::vector<std::size_t>& anchor_nodes,
                                 const Vector& c_values, std::ostream& out) {
  if (anchor_nodes.size() != c_values.size()) {
    fail(errc::dimension_mismatch,
         "consistency field: anchor/value count mismatch");
  }
  out << "node_index,x,y,c_value\n";
  char buf[128];
  for (std::size_t k = 0; k < anchor_nodes.size(); ++k) {
    const std::size_t i = anchor_nodes[k];
    if (i >= nodes.size()) {
      fail(errc::dimension_mismatch,
           "consistency field: anchor index out of range");
    }
    std::snprintf(buf, sizeof(buf), "%zu,%.8e,%.8e,%.8e\n", i,
                  nodes.points[i][0], nodes.points[i][1], c_values[k]);
    out << buf;
  }
}

}  // namespace meshcert
