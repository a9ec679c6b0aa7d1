#include "meshcert/stencils.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

#include "meshcert/error.hpp"
#include "meshcert/linalg.hpp"

namespace meshcert {

namespace {

// The constrained-minimization problem in the shifted, unit-normalized
// frame: anchor at the origin, mean pairwise node distance 1.  All subset
// solves share the precomputed kernel Gram and monomial blocks.
struct UnitProblem {
  Operator op = Operator::identity;
  std::size_t k = 1;
  std::vector<Point> nodes;  // unit frame
  DenseMatrix gram{0, 0};    // phi(|y_i - y_j|)
  DenseMatrix poly{0, 0};    // monomial values, one row per exponent
  Vector rhs_kernel;         // lambda^x K(x, y_j) at the origin
  Vector rhs_poly;           // lambda applied to the monomials
  double kappa = 0.0;        // lambda^x lambda^y K at coincident anchors
};

UnitProblem make_unit_problem(const Kernel& K, Operator op,
                              const std::vector<Point>& unit_nodes,
                              std::size_t k) {
  UnitProblem prob;
  prob.op = op;
  prob.k = k;
  prob.nodes = unit_nodes;
  const std::size_t n = unit_nodes.size();
  const auto exps = monomial_exponents(k);
  const std::size_t p = exps.size();
  const Point origin = {0.0, 0.0};

  prob.gram = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double value = apply_functionals(K, Operator::identity,
                                             Operator::identity,
                                             unit_nodes[i], unit_nodes[j]);
      prob.gram(i, j) = value;
      prob.gram(j, i) = value;
    }
  }

  prob.poly = DenseMatrix(p, n);
  prob.rhs_poly.resize(p);
  for (std::size_t a = 0; a < p; ++a) {
    prob.rhs_poly[a] = monomial_action(op, exps[a], 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      prob.poly(a, j) = monomial_value(exps[a], unit_nodes[j], origin, 1.0);
    }
  }

  prob.rhs_kernel.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    prob.rhs_kernel[j] =
        apply_functionals(K, op, Operator::identity, origin, unit_nodes[j]);
  }
  prob.kappa = apply_functionals(K, op, op, origin, origin);
  return prob;
}

// Does the exactness system restricted to `subset` admit any solution?
bool subset_admits_exactness(const UnitProblem& prob,
                             const std::vector<std::size_t>& subset) {
  const std::size_t p = prob.poly.rows();
  DenseMatrix sub(p, subset.size());
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t c = 0; c < subset.size(); ++c) {
      sub(a, c) = prob.poly(a, subset[c]);
    }
  }
  try {
    basic_solution(sub, prob.rhs_poly);
    return true;
  } catch (const error& e) {
    if (e.code() == errc::no_solution) return false;
    throw;
  }
}

[[noreturn]] void fail_not_unisolvent(const UnitProblem& prob,
                                      std::size_t subset_size) {
  const std::size_t p = prob.poly.rows();
  std::ostringstream msg;
  if (subset_size < p) {
    msg << "order-" << prob.k << " exactness needs up to " << p
        << " nodes; only " << subset_size << " offered";
    fail(errc::too_few_nodes, msg.str());
  }
  msg << subset_size << " nodes are not unisolvent for polynomials of degree "
      << prob.k - 1;
  fail(errc::geometry_degenerate, msg.str());
}

struct SaddleOutcome {
  Vector weights;  // unit-frame weights over the subset
  double q2 = 0.0;
};

// Solve the KKT system on a subset of the nodes.  A singular KKT matrix is
// legitimate whenever the polynomial block is rank-deficient (symmetric node
// configurations); the minimizing weights are still unique, so a
// rank-tolerant basic solution recovers them.
SaddleOutcome solve_subset(const UnitProblem& prob,
                           const std::vector<std::size_t>& subset) {
  if (!subset_admits_exactness(prob, subset)) {
    fail_not_unisolvent(prob, subset.size());
  }
  const std::size_t s = subset.size();
  const std::size_t p = prob.poly.rows();
  const std::size_t dim = s + p;

  DenseMatrix kkt(dim, dim);
  Vector rhs(dim, 0.0);
  for (std::size_t i = 0; i < s; ++i) {
    for (std::size_t j = 0; j < s; ++j) {
      kkt(i, j) = prob.gram(subset[i], subset[j]);
    }
    for (std::size_t a = 0; a < p; ++a) {
      kkt(i, s + a) = prob.poly(a, subset[i]);
      kkt(s + a, i) = prob.poly(a, subset[i]);
    }
    rhs[i] = prob.rhs_kernel[subset[i]];
  }
  for (std::size_t a = 0; a < p; ++a) rhs[s + a] = prob.rhs_poly[a];

  Vector solution;
  try {
    solution = LuFactorization::factor(kkt).solve(rhs);
  } catch (const error& lu_failure) {
    if (lu_failure.code() != errc::singular_matrix) throw;
    try {
      solution = basic_solution(kkt, rhs);
    } catch (const error& e) {
      if (e.code() != errc::no_solution) throw;
      fail(errc::geometry_degenerate,
           "saddle-point system is inconsistent; degenerate node geometry");
    }
  }

  SaddleOutcome out;
  out.weights.assign(solution.begin(), solution.begin() + s);

  // An ill-conditioned KKT matrix (nearly coincident nodes) can leave the
  // exactness residual orders of magnitude above roundoff even though the
  // subset is unisolvent.  Restoring the constraints with any solution of
  // poly * delta = residual moves the weights by O(residual), which keeps
  // the subset usable at negligible cost to the quadratic form.
  DenseMatrix sub(p, s);
  Vector defect(p, 0.0);
  double defect_norm = 0.0;
  double b_scale = 1.0;
  for (std::size_t a = 0; a < p; ++a) {
    double row = -prob.rhs_poly[a];
    for (std::size_t c = 0; c < s; ++c) {
      sub(a, c) = prob.poly(a, subset[c]);
      row += sub(a, c) * out.weights[c];
    }
    defect[a] = row;
    defect_norm = std::max(defect_norm, std::fabs(row));
    b_scale = std::max(b_scale, std::fabs(prob.rhs_poly[a]));
  }
  bool polished = false;
  if (defect_norm > 1e-11 * b_scale) {
    try {
      const Vector delta = basic_solution(sub, defect);
      for (std::size_t c = 0; c < s; ++c) out.weights[c] -= delta[c];
      polished = true;
    } catch (const error&) {
      // Leave the weights as solved; downstream exactness gates decide.
    }
  }

  double q2;
  if (polished) {
    // The dual shortcut below assumes stationarity, which the correction
    // breaks; use the primal value of the quadratic form instead.
    q2 = prob.kappa;
    for (std::size_t i = 0; i < s; ++i) {
      q2 -= 2.0 * out.weights[i] * prob.rhs_kernel[subset[i]];
    }
    for (std::size_t i = 0; i < s; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < s; ++j) {
        acc += prob.gram(subset[i], subset[j]) * out.weights[j];
      }
      q2 += out.weights[i] * acc;
    }
  } else {
    // Q^2 = kappa - a.v - beta.b; the multiplier ambiguity on singular
    // systems lies in ker(P^T), which b is orthogonal to, so the value is
    // well-defined.
    q2 = prob.kappa;
    for (std::size_t i = 0; i < s; ++i) {
      q2 -= out.weights[i] * prob.rhs_kernel[subset[i]];
    }
    for (std::size_t a = 0; a < p; ++a) {
      q2 -= solution[s + a] * prob.rhs_poly[a];
    }
  }
  out.q2 = std::max(q2, 0.0);
  return out;
}

std::size_t resolve_order(const Kernel& K, std::size_t k) {
  return k == 0 ? K.exactness_order() : k;
}

void require_operator_smoothness(const Kernel& K, Operator op) {
  if (op == Operator::laplacian && !K.supports_laplacian()) {
    fail(errc::insufficient_smoothness,
         "kernel " + K.spec_string() + " cannot carry the Laplacian");
  }
}

std::pair<std::vector<Point>, double> unit_frame(
    const std::vector<Point>& nodes, const Point& anchor) {
  if (nodes.size() < 2) {
    // A single node has no pairwise scale; treat it as already unit.
    std::vector<Point> shifted;
    for (const Point& x : nodes) {
      shifted.push_back({x[0] - anchor[0], x[1] - anchor[1]});
    }
    return {shifted, 1.0};
  }
  return normalize_to_unit(nodes, anchor);
}

Stencil finish_stencil(const Functional& lambda,
                       const std::vector<Point>& nodes,
                       const std::vector<std::size_t>& subset,
                       const Vector& unit_weights, double scale,
                       std::size_t k) {
  const double factor =
      std::pow(scale, static_cast<double>(operator_order(lambda.op)));
  Stencil s;
  s.functional = lambda;
  s.support = subset;
  s.weights.resize(subset.size());
  s.points.reserve(subset.size());
  for (std::size_t c = 0; c < subset.size(); ++c) {
    s.points.push_back(nodes[subset[c]]);
    s.weights[c] = factor * unit_weights[c];
  }
  s.h = 1.0 / scale;
  s.exactness = k;
  return s;
}

}  // namespace

Stencil five_point_star(double h) {
  if (!(h > 0.0)) fail(errc::invalid_spacing, "five_point_star: h must be positive");
  Stencil s;
  s.functional = {{0.0, 0.0}, Operator::laplacian};
  s.support = {0, 1, 2, 3, 4};
  s.points = {{h, 0.0}, {-h, 0.0}, {0.0, h}, {0.0, -h}, {0.0, 0.0}};
  const double w = 1.0 / (h * h);
  s.weights = {w, w, w, w, -4.0 * w};
  s.h = h;
  s.exactness = 4;
  return s;
}

Stencil optimal_weights(const Kernel& K, const Functional& lambda,
                        const std::vector<Point>& nodes, std::size_t k) {
  if (nodes.empty()) fail(errc::too_few_nodes, "optimal_weights: no nodes");
  require_operator_smoothness(K, lambda.op);
  k = resolve_order(K, k);

  const auto [unit_nodes, scale] = unit_frame(nodes, lambda.anchor);
  const UnitProblem prob = make_unit_problem(K, lambda.op, unit_nodes, k);
  std::vector<std::size_t> all(nodes.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const SaddleOutcome outcome = solve_subset(prob, all);
  return finish_stencil(lambda, nodes, all, outcome.weights, scale, k);
}

Stencil basic_exact_weights(const Functional& lambda,
                            const std::vector<Point>& nodes, std::size_t k) {
  if (nodes.empty()) fail(errc::too_few_nodes, "basic_exact_weights: no nodes");
  if (k < 1) fail(errc::bad_input, "basic_exact_weights: order must be >= 1");

  const auto [unit_nodes, scale] = unit_frame(nodes, lambda.anchor);
  const auto exps = monomial_exponents(k);
  const std::size_t p = exps.size();
  const std::size_t n = nodes.size();
  const Point origin = {0.0, 0.0};

  DenseMatrix poly(p, n);
  Vector rhs(p);
  for (std::size_t a = 0; a < p; ++a) {
    rhs[a] = monomial_action(lambda.op, exps[a], 1.0);
    for (std::size_t j = 0; j < n; ++j) {
      poly(a, j) = monomial_value(exps[a], unit_nodes[j], origin, 1.0);
    }
  }
  const Vector unit_weights = basic_solution(poly, rhs);

  std::vector<std::size_t> subset;
  Vector kept;
  for (std::size_t j = 0; j < n; ++j) {
    if (unit_weights[j] != 0.0) {
      subset.push_back(j);
      kept.push_back(unit_weights[j]);
    }
  }
  if (subset.empty()) {
    // All-zero solution (e.g. Laplacian with k = 1): keep the nearest node
    // with an explicit zero weight.
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      const double r = std::hypot(unit_nodes[j][0], unit_nodes[j][1]);
      if (r < best) {
        best = r;
        nearest = j;
      }
    }
    subset.push_back(nearest);
    kept.push_back(0.0);
  }
  return finish_stencil(lambda, nodes, subset, kept, scale, k);
}

Stencil greedy_weights(const Kernel& K, const Functional& lambda,
                       const std::vector<Point>& nodes, std::size_t n_max,
                       std::size_t k) {
  if (nodes.empty()) fail(errc::too_few_nodes, "greedy_weights: no nodes");
  if (n_max == 0) fail(errc::too_few_nodes, "greedy_weights: n_max is zero");
  require_operator_smoothness(K, lambda.op);
  k = resolve_order(K, k);
  n_max = std::min(n_max, nodes.size());
  constexpr double kStopThreshold = 0.05;

  const auto [unit_nodes, scale] = unit_frame(nodes, lambda.anchor);
  const UnitProblem prob = make_unit_problem(K, lambda.op, unit_nodes, k);

  // Candidate positions, nearest to the anchor first (the anchor sits at the
  // origin of the unit frame); ties resolve by position.
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double ra =
                         std::hypot(unit_nodes[a][0], unit_nodes[a][1]);
                     const double rb =
                         std::hypot(unit_nodes[b][0], unit_nodes[b][1]);
                     return ra < rb;
                   });

  // Seed: the smallest nearest-first prefix admitting order-k exactness.
  std::vector<std::size_t> current;
  bool seeded = false;
  for (std::size_t s = 1; s <= n_max; ++s) {
    current.assign(order.begin(), order.begin() + static_cast<long>(s));
    if (subset_admits_exactness(prob, current)) {
      seeded = true;
      break;
    }
  }
  if (!seeded) fail_not_unisolvent(prob, n_max);

  SaddleOutcome best = solve_subset(prob, current);
  while (current.size() < n_max) {
    std::optional<std::size_t> pick;
    SaddleOutcome pick_outcome;
    for (std::size_t cand : order) {
      if (std::find(current.begin(), current.end(), cand) != current.end()) {
        continue;
      }
      std::vector<std::size_t> trial = current;
      trial.push_back(cand);
      SaddleOutcome outcome;
      try {
        outcome = solve_subset(prob, trial);
      } catch (const error&) {
        // A candidate that breaks the solve numerically (for example a
        // near-duplicate of a node already selected) cannot help; skip it.
        continue;
      }
      if (!pick || outcome.q2 < pick_outcome.q2) {
        pick = cand;
        pick_outcome = outcome;
      }
    }
    if (!pick) break;
    if (best.q2 <= 0.0) break;
    if ((best.q2 - pick_outcome.q2) / best.q2 < kStopThreshold) break;
    current.push_back(*pick);
    best = pick_outcome;
  }

  // Keep the support in nearest-first order as grown; weights align with it.
  return finish_stencil(lambda, nodes, current, best.weights, scale, k);
}

Stencil rescale(const Stencil& unit_stencil, double h) {
  if (!(h > 0.0)) fail(errc::invalid_spacing, "rescale: h must be positive");
  if (std::fabs(unit_stencil.h - 1.0) > 1e-9) {
    fail(errc::bad_input, "rescale: stencil is not at unit scale");
  }
  Stencil s = unit_stencil;
  const double factor =
      std::pow(h, -static_cast<double>(operator_order(s.functional.op)));
  for (auto& w : s.weights) w *= factor;
  const Point& a = s.functional.anchor;
  for (auto& x : s.points) {
    x[0] = a[0] + h * (x[0] - a[0]);
    x[1] = a[1] + h * (x[1] - a[1]);
  }
  s.h = h;
  return s;
}

std::pair<std::vector<Point>, double> normalize_to_unit(
    const std::vector<Point>& nodes, const Point& anchor) {
  if (nodes.size() < 2) {
    fail(errc::too_few_nodes, "normalize_to_unit: need at least two nodes");
  }
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      total += std::hypot(nodes[i][0] - nodes[j][0],
                          nodes[i][1] - nodes[j][1]);
      ++pairs;
    }
  }
  const double mean = total / static_cast<double>(pairs);
  if (!(mean > 0.0)) {
    fail(errc::geometry_degenerate, "normalize_to_unit: coincident nodes");
  }
  const double scale = 1.0 / mean;
  std::vector<Point> unit;
  unit.reserve(nodes.size());
  for (const Point& x : nodes) {
    unit.push_back({scale * (x[0] - anchor[0]), scale * (x[1] - anchor[1])});
  }
  return {unit, scale};
}

MethodSpec parse_method_spec(const std::string& spec) {
  MethodSpec method;
  if (spec == "fivepoint") {
    method.kind = MethodSpec::Kind::fivepoint;
    return method;
  }
  const auto colon = spec.find(':');
  const std::string head =
      colon == std::string::npos ? spec : spec.substr(0, colon);
  unsigned long n = 0;
  if (colon == std::string::npos ||
      std::sscanf(spec.c_str() + colon + 1, "n=%lu", &n) != 1 || n == 0) {
    fail(errc::bad_input,
         "method spec '" + spec +
             "': expected fivepoint | optimal:n=<v> | basic:n=<v> | "
             "greedy:n=<v>");
  }
  if (head == "optimal") {
    method.kind = MethodSpec::Kind::optimal;
  } else if (head == "basic") {
    method.kind = MethodSpec::Kind::basic;
  } else if (head == "greedy") {
    method.kind = MethodSpec::Kind::greedy;
  } else {
    fail(errc::bad_input, "method spec '" + spec + "': unknown method");
  }
  method.neighbors = n;
  return method;
}

std::string method_spec_string(const MethodSpec& method) {
  switch (method.kind) {
    case MethodSpec::Kind::fivepoint:
      return "fivepoint";
    case MethodSpec::Kind::optimal:
      return "optimal:n=" + std::to_string(method.neighbors);
    case MethodSpec::Kind::basic:
      return "basic:n=" + std::to_string(method.neighbors);
    case MethodSpec::Kind::greedy:
      return "greedy:n=" + std::to_string(method.neighbors);
  }
  fail(errc::bad_input, "method_spec_string: unknown method");
}

}  // namespace meshcert
