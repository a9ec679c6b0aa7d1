#include "meshcert/functionals.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "meshcert/error.hpp"

namespace meshcert {

std::size_t operator_order(Operator op) {
  switch (op) {
    case Operator::identity:
      return 0;
    case Operator::laplacian:
      return 2;
  }
  fail(errc::bad_input, "operator_order: unknown operator");
}

std::string operator_name(Operator op) {
  switch (op) {
    case Operator::identity:
      return "identity";
    case Operator::laplacian:
      return "laplacian";
  }
  fail(errc::bad_input, "operator_name: unknown operator");
}

Operator parse_operator(const std::string& name) {
  if (name == "identity") return Operator::identity;
  if (name == "laplacian") return Operator::laplacian;
  fail(errc::bad_input, "unknown operator '" + name + "'");
}

double apply(const Stencil& s, const Vector& values) {
  if (s.support.size() != s.weights.size()) {
    fail(errc::dimension_mismatch, "apply: support/weight size mismatch");
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < s.support.size(); ++j) {
    if (s.support[j] >= values.size()) {
      std::ostringstream msg;
      msg << "apply: stencil references node " << s.support[j]
          << " but only " << values.size() << " values were given";
      fail(errc::dimension_mismatch, msg.str());
    }
    acc += s.weights[j] * values[s.support[j]];
  }
  return acc;
}

std::vector<std::array<std::size_t, 2>> monomial_exponents(std::size_t k) {
  std::vector<std::array<std::size_t, 2>> exps;
  exps.reserve(k * (k + 1) / 2);
  for (std::size_t deg = 0; deg < k; ++deg) {
    for (std::size_t b = 0; b <= deg; ++b) {
      exps.push_back({deg - b, b});
    }
  }
  return exps;
}

double monomial_value(const std::array<std::size_t, 2>& e, const Point& x,
                      const Point& anchor, double scale) {
  const double u = (x[0] - anchor[0]) / scale;
  const double v = (x[1] - anchor[1]) / scale;
  return std::pow(u, static_cast<double>(e[0])) *
         std::pow(v, static_cast<double>(e[1]));
}

double monomial_action(Operator op, const std::array<std::size_t, 2>& e,
                       double scale) {
  switch (op) {
    case Operator::identity:
      return (e[0] == 0 && e[1] == 0) ? 1.0 : 0.0;
    case Operator::laplacian:
      if ((e[0] == 2 && e[1] == 0) || (e[0] == 0 && e[1] == 2)) {
        return 2.0 / (scale * scale);
      }
      return 0.0;
  }
  fail(errc::bad_input, "monomial_action: unknown operator");
}

double exactness_defect(const Stencil& s, std::size_t k) {
  if (s.points.size() != s.weights.size()) {
    fail(errc::dimension_mismatch,
         "exactness_defect: stencil has no bound support points");
  }
  const Point& a = s.functional.anchor;
  double radius = 0.0;
  for (const Point& p : s.points) {
    radius = std::max(radius, std::hypot(p[0] - a[0], p[1] - a[1]));
  }
  if (radius == 0.0) radius = 1.0;

  double defect = 0.0;
  for (const auto& e : monomial_exponents(k)) {
    double approx = 0.0;
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      approx += s.weights[j] * monomial_value(e, s.points[j], a, radius);
    }
    const double exact = monomial_action(s.functional.op, e, radius);
    defect = std::max(defect, std::fabs(exact - approx));
  }
  return defect;
}

void bind_points(Stencil& s, const NodeSet& nodes) {
  s.points.clear();
  s.points.reserve(s.support.size());
  for (std::size_t idx : s.support) {
    if (idx >= nodes.size()) {
      std::ostringstream msg;
      msg << "bind_points: support index " << idx << " exceeds node count "
          << nodes.size();
      fail(errc::dimension_mismatch, msg.str());
    }
    s.points.push_back(nodes.points[idx]);
  }
}

void write_stencil_json(const Stencil& s, std::ostream& out) {
  nlohmann::json j;
  j["anchor"] = {s.functional.anchor[0], s.functional.anchor[1]};
  j["operator"] = operator_name(s.functional.op);
  j["support_indices"] = s.support;
  j["weights"] = s.weights;
  j["h"] = s.h;
  out << j.dump(2) << '\n';
}

Stencil read_stencil_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_input, std::string("stencil JSON: ") + e.what());
  }
  Stencil s;
  try {
    const auto anchor = j.at("anchor");
    if (!anchor.is_array() || anchor.size() != 2) {
      fail(errc::bad_input, "stencil JSON: anchor must be [x, y]");
    }
    s.functional.anchor = {anchor[0].get<double>(), anchor[1].get<double>()};
    s.functional.op = parse_operator(j.at("operator").get<std::string>());
    s.support = j.at("support_indices").get<std::vector<std::size_t>>();
    s.weights = j.at("weights").get<Vector>();
    s.h = j.at("h").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_input, std::string("stencil JSON: ") + e.what());
  }
  if (s.support.size() != s.weights.size()) {
    fail(errc::bad_input,
         "stencil JSON: support_indices and weights differ in length");
  }
  return s;
}

}  // namespace meshcert
