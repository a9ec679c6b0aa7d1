// Acceptance gates for the certification pipeline.  Prints exactly one
// PASS/FAIL line per criterion and exits nonzero if any gate fails.  Gates
// on randomized geometry use fixed seeds, so the run is deterministic.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "meshcert/certify.hpp"
#include "meshcert/consistency.hpp"
#include "meshcert/error.hpp"
#include "meshcert/functionals.hpp"
#include "meshcert/geometry.hpp"
#include "meshcert/kernels.hpp"
#include "meshcert/linalg.hpp"
#include "meshcert/stability.hpp"
#include "meshcert/stencils.hpp"

namespace {

using meshcert::DenseMatrix;
using meshcert::Functional;
using meshcert::Kernel;
using meshcert::LuFactorization;
using meshcert::MethodSpec;
using meshcert::NodeSet;
using meshcert::Operator;
using meshcert::Point;
using meshcert::Stencil;
using meshcert::StiffnessSystem;
using meshcert::Vector;

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

double rel_dev(double got, double want) {
  return std::fabs(got - want) / std::fabs(want);
}

// Accumulates gate failures for one criterion.
struct Gate {
  bool ok = true;
  std::string why;

  void require(bool cond, const std::string& label) {
    if (cond) return;
    ok = false;
    if (!why.empty()) why += "; ";
    why += label;
  }
};

int report(int number, const Gate& gate, const std::string& pass_note) {
  if (gate.ok) {
    std::printf("criterion %d: PASS — %s\n", number, pass_note.c_str());
    return 0;
  }
  std::printf("criterion %d: FAIL — %s\n", number, gate.why.c_str());
  return 1;
}

int report_exception(int number, const std::exception& e) {
  std::printf("criterion %d: FAIL — exception: %s\n", number, e.what());
  return 1;
}

constexpr double kLevels[4] = {0.5, 0.25, 0.125, 0.0625};
constexpr std::uint64_t kSeed = 20150814;

struct LevelData {
  double cs = 0.0;
  double cs_b = 0.0;
  double c_inf = 0.0;
  double avg_support = 0.0;
};

LevelData run_level(const NodeSet& nodes, const Kernel& K,
                    const MethodSpec& method, bool with_full,
                    bool with_split) {
  const StiffnessSystem sys = meshcert::assemble(nodes, K, method);
  const meshcert::ConsistencyVector c =
      meshcert::consistency_vector(K, sys.stencils);
  LevelData data;
  if (with_full) data.cs = meshcert::stability_condest(sys.A).value;
  if (with_split) {
    data.cs_b =
        meshcert::stability_condest(meshcert::dirichlet_split(sys).B).value;
  }
  data.c_inf = meshcert::norm_inf(c.values);
  double support = 0.0;
  std::size_t interior = 0;
  for (std::size_t i = 0; i < sys.stencils.size(); ++i) {
    if (sys.nodes.boundary[i]) continue;
    support += static_cast<double>(sys.stencils[i].points.size());
    ++interior;
  }
  data.avg_support =
      interior == 0 ? 0.0 : support / static_cast<double>(interior);
  return data;
}

// --- criteria 1 + 2: the five-point table for A and its Dirichlet block B.

int criteria_fivepoint() {
  int failures = 0;
  try {
    const auto t0 = clock_type::now();
    const Kernel wm42 = meshcert::wm_kernel(4, 2);
    const double want_cs[4] = {1.281250, 1.291131, 1.293783, 1.294459};
    const double want_c[4] = {0.099045, 0.051766, 0.026303, 0.013222};
    const double want_prod_b[4] = {0.027856, 0.015071, 0.007727, 0.003893};

    Gate full;
    Gate part;
    for (int i = 0; i < 4; ++i) {
      const LevelData d = run_level(meshcert::gen_grid(kLevels[i]), wm42,
                                    {MethodSpec::Kind::fivepoint, 0}, true,
                                    true);
      std::ostringstream at;
      at << "h=" << kLevels[i];
      full.require(std::fabs(d.cs - want_cs[i]) < 5e-7,
                   "C_S(A) printed digits at " + at.str());
      full.require(rel_dev(d.c_inf, want_c[i]) < 0.02,
                   "||c||_inf 2% at " + at.str());
      part.require(std::fabs(d.cs_b - (d.cs - 1.0)) < 5e-7,
                   "C_S(B) = C_S(A) - 1 at " + at.str());
      part.require(rel_dev(d.cs_b * d.c_inf, want_prod_b[i]) < 0.02,
                   "B product 2% at " + at.str());
    }
    const double secs = seconds_since(t0);
    full.require(secs < 60.0, "runtime under 60s");

    std::ostringstream note1;
    note1 << "C_S(A) exact to printed digits, ||c||_inf within 2%, "
          << std::fixed << secs << "s";
    failures += report(1, full, note1.str());
    failures += report(2, part,
                       "C_S(B) = C_S(A) - 1 to printed digits, products "
                       "within 2%");
  } catch (const std::exception& e) {
    failures += report_exception(1, e);
    failures += report_exception(2, e);
  }
  return failures;
}

// --- criterion 3: the sharp worst case at h = 0.0625, K = 2.

int criterion_worst_case() {
  try {
    const Kernel wm42 = meshcert::wm_kernel(4, 2);
    const StiffnessSystem sys =
        meshcert::assemble(meshcert::gen_grid(0.0625), wm42,
                           {MethodSpec::Kind::fivepoint, 0});
    const meshcert::WorstCase wc = meshcert::worst_case(sys, wm42, 2.0);

    Gate gate;
    gate.require(rel_dev(wc.error, 0.000226) < 0.01, "absolute error 1%");
    gate.require(rel_dev(wc.upper, 0.000679) < 0.01, "upper bound 1%");
    gate.require(rel_dev(wc.error / wc.u_star_native_norm, 0.0171) < 0.01,
                 "relative error 1%");
    gate.require(rel_dev(wc.upper / wc.u_star_native_norm, 0.0513) < 0.01,
                 "relative upper bound 1%");

    std::ostringstream note;
    note << "error " << wc.error << ", upper " << wc.upper
         << ", relative pair " << wc.error / wc.u_star_native_norm << " <= "
         << wc.upper / wc.u_star_native_norm;
    return report(3, gate, note.str());
  } catch (const std::exception& e) {
    return report_exception(3, e);
  }
}

// --- criterion 4: the near-corner experiment.

int criterion_corner() {
  try {
    const Kernel ph42 = meshcert::ph_kernel(4, 2);
    const Functional lap{{0.0, 0.0}, Operator::laplacian};

    const Stencil star = meshcert::five_point_star(1.0);
    const double q_star =
        std::sqrt(meshcert::quadratic_form(ph42, star.functional, star));

    auto box_value = [&](int box) {
      std::vector<Point> nodes;
      for (int j = -1; j <= box; ++j) {
        for (int i = -1; i <= box; ++i) {
          nodes.push_back({static_cast<double>(i), static_cast<double>(j)});
        }
      }
      const Stencil s = meshcert::optimal_weights(ph42, lap, nodes);
      return std::sqrt(meshcert::quadratic_form(ph42, lap, s));
    };
    const double q25 = box_value(3);
    const double q225 = box_value(13);

    Gate gate;
    gate.require(rel_dev(q_star, 0.08461) < 0.02, "five-point star value 2%");
    gate.require(rel_dev(q25, 0.07165) < 0.02, "25-node box value 2%");
    gate.require(rel_dev(q225, 0.070035) < 0.02, "225-node box value 2%");

    std::ostringstream note;
    note << "kernel ph:m=4,d=2 matches: star " << q_star << ", 25-node "
         << q25 << ", 225-node " << q225;
    return report(4, gate, note.str());
  } catch (const std::exception& e) {
    return report_exception(4, e);
  }
}

// --- criterion 5: perturbed-grid tables, property gates only.

int criterion_perturbed_tables() {
  try {
    const Kernel ph62 = meshcert::ph_kernel(6, 2);
    // These tables live one refinement deeper than the five-point ones and
    // report the stability constant of the interior Dirichlet block B.
    const double levels[4] = {0.25, 0.125, 0.0625, 0.03125};
    auto table = [&](const MethodSpec& method) {
      std::vector<LevelData> rows;
      for (double h : levels) {
        rows.push_back(run_level(meshcert::gen_perturbed_grid(h, h / 4.0, kSeed),
                                 ph62, method, false, true));
      }
      return rows;
    };

    const auto ph30 = table({MethodSpec::Kind::optimal, 30});
    const auto greedy30 = table({MethodSpec::Kind::greedy, 30});
    const auto ph25 = table({MethodSpec::Kind::optimal, 25});
    const auto basic25 = table({MethodSpec::Kind::basic, 25});

    Gate gate;
    for (const auto* rows : {&ph30, &greedy30}) {
      const char* name = rows == &ph30 ? "ph30" : "greedy30";
      for (int i = 2; i < 4; ++i) {
        const double ratio = (*rows)[i - 1].c_inf / (*rows)[i].c_inf;
        gate.require(ratio >= 4.0 && ratio <= 16.0,
                     std::string(name) + " refinement ratio in [4,16]");
      }
      for (int i = 1; i < 4; ++i) {
        gate.require((*rows)[i].cs_b >= 0.1 && (*rows)[i].cs_b <= 3.0,
                     std::string(name) + " C~_S in [0.1,3] for h <= 0.125");
      }
    }
    for (const LevelData& row : greedy30) {
      gate.require(row.avg_support >= 21.0 && row.avg_support <= 30.0,
                   "greedy average support in [21,30]");
    }
    bool spike = false;
    for (int i = 0; i < 4; ++i) {
      spike = spike || ph25[i].cs_b > 10.0 * ph30[i].cs_b ||
              basic25[i].cs_b > 10.0 * ph30[i].cs_b;
    }
    gate.require(spike, "a 25-neighbor level with C~_S > 10x ph30");

    std::ostringstream note;
    note << "ph30 ratios " << ph30[1].c_inf / ph30[2].c_inf << "/"
         << ph30[2].c_inf / ph30[3].c_inf << ", greedy30 ratios "
         << greedy30[1].c_inf / greedy30[2].c_inf << "/"
         << greedy30[2].c_inf / greedy30[3].c_inf << ", greedy support "
         << greedy30[3].avg_support << ", basic25 spike "
         << basic25[2].cs_b / ph30[2].cs_b << "x";
    return report(5, gate, note.str());
  } catch (const std::exception& e) {
    return report_exception(5, e);
  }
}

// --- criterion 6: the standalone invariant suites, in compact form.

double fd_laplacian(const std::function<double(const Point&)>& f,
                    const Point& x, double step) {
  return (f({x[0] + step, x[1]}) + f({x[0] - step, x[1]}) +
          f({x[0], x[1] + step}) + f({x[0], x[1] - step}) - 4.0 * f(x)) /
         (step * step);
}

void check_kernel_fd(const Kernel& K, bool second_level, Gate* gate) {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> box(-1.0, 1.0);
  std::uniform_real_distribution<double> radius(0.4, 2.2);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<std::pair<Point, Point>> pairs(40);
  for (auto& p : pairs) {
    p.first = {box(rng), box(rng)};
    const double r = radius(rng);
    const double t = angle(rng);
    p.second = {p.first[0] + r * std::cos(t), p.first[1] + r * std::sin(t)};
  }

  auto analytic = [&](double r) {
    return second_level ? K.bilaplacian(r) : K.laplacian(r);
  };
  double ref = 0.0;
  for (const auto& [x, y] : pairs) {
    ref = std::max(ref, std::fabs(analytic(std::hypot(x[0] - y[0],
                                                      x[1] - y[1]))));
  }
  double worst = 0.0;
  for (const auto& [x, y] : pairs) {
    auto base = [&](const Point& q) {
      const double r = std::hypot(q[0] - y[0], q[1] - y[1]);
      return second_level ? K.laplacian(r) : K.phi(r);
    };
    const double exact = analytic(std::hypot(x[0] - y[0], x[1] - y[1]));
    const double fd = fd_laplacian(base, x, 1e-4);
    worst = std::max(worst, std::fabs(exact - fd) /
                                std::max(std::fabs(exact), 0.01 * ref));
  }
  gate->require(worst <= 1e-5,
                K.spec_string() + (second_level ? " bilaplacian" : " laplacian") +
                    " finite differences to 1e-5");
}

DenseMatrix random_matrix(std::size_t rows, std::size_t cols,
                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseMatrix a(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = dist(rng);
  }
  return a;
}

double dense_inverse_one_norm(const DenseMatrix& a) {
  const LuFactorization lu = LuFactorization::factor(a);
  const std::size_t n = a.rows();
  double best = 0.0;
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    best = std::max(best, meshcert::norm1(lu.solve(e)));
    e[j] = 0.0;
  }
  return best;
}

int criterion_invariants() {
  try {
    Gate gate;

    // (a) + (c): exactness defects and Q^2 dominance on 50 random
    // perturbed-grid neighborhoods.
    {
      const Kernel ph62 = meshcert::ph_kernel(6, 2);
      std::mt19937_64 rng(kSeed);
      int instances = 0;
      std::uint64_t grid_seed = 1000;
      double worst_defect = 0.0;
      while (instances < 50) {
        NodeSet grid = meshcert::gen_perturbed_grid(0.125, 0.03125, grid_seed++);
        std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
        const std::size_t node = pick(rng);
        if (grid.boundary[node]) continue;
        ++instances;
        const Functional lambda{grid.points[node], Operator::laplacian};
        const auto idx =
            meshcert::nearest_neighbors(grid, grid.points[node], 25);
        std::vector<Point> cloud;
        for (std::size_t g : idx) cloud.push_back(grid.points[g]);

        const Stencil opt = meshcert::optimal_weights(ph62, lambda, cloud);
        const Stencil greedy = meshcert::greedy_weights(ph62, lambda, cloud, 25);
        const Stencil basic = meshcert::basic_exact_weights(lambda, cloud, 6);
        for (const Stencil* s : {&opt, &greedy, &basic}) {
          worst_defect =
              std::max(worst_defect, meshcert::exactness_defect(*s, 6));
        }
        const double q_opt = meshcert::quadratic_form(ph62, lambda, opt);
        const double q_greedy = meshcert::quadratic_form(ph62, lambda, greedy);
        const double q_basic = meshcert::quadratic_form(ph62, lambda, basic);
        gate.require(q_opt <= q_greedy * (1.0 + 1e-9) + 1e-14,
                     "dominance optimal <= greedy");
        gate.require(q_greedy <= q_basic * (1.0 + 1e-9) + 1e-14,
                     "dominance greedy <= basic");
      }
      gate.require(worst_defect <= 1e-9, "exactness defects <= 1e-9");
    }

    // (b) the exact scaling law across h in {2, 1, 0.5, 0.01}.
    {
      const Kernel ph62 = meshcert::ph_kernel(6, 2);
      NodeSet grid = meshcert::gen_perturbed_grid(0.25, 0.0625, 8);
      const Point anchor = grid.points[40];
      const auto idx = meshcert::nearest_neighbors(grid, anchor, 30);
      std::vector<Point> cloud;
      for (std::size_t g : idx) cloud.push_back(grid.points[g]);
      const Functional lambda{anchor, Operator::laplacian};
      Stencil unit = meshcert::optimal_weights(ph62, lambda, cloud);
      const double h_rec = unit.h;
      unit.h = 1.0;
      for (auto& p : unit.points) {
        p[0] = anchor[0] + (p[0] - anchor[0]) / h_rec;
        p[1] = anchor[1] + (p[1] - anchor[1]) / h_rec;
      }
      for (auto& w : unit.weights) w *= h_rec * h_rec;
      const double q_unit = meshcert::quadratic_form(ph62, lambda, unit);
      for (double h : {2.0, 1.0, 0.5, 0.01}) {
        const double q_h = meshcert::quadratic_form(
            ph62, lambda, meshcert::rescale(unit, h));
        gate.require(rel_dev(q_h, std::pow(h, 6.0) * q_unit) <= 1e-8,
                     "scaling law to 1e-8");
      }
    }

    // (d) kernel derivative actions against finite differences.
    for (const Kernel& K :
         {meshcert::ph_kernel(4, 2), meshcert::ph_kernel(6, 2),
          meshcert::wm_kernel(4, 2), meshcert::wm_kernel(3.5, 2)}) {
      check_kernel_fd(K, false, &gate);
      if (K.supports_bilaplacian()) check_kernel_fd(K, true, &gate);
    }

    // (e) Moore-Penrose identities of the SVD pseudoinverse.
    for (auto [rows, cols] :
         {std::pair<std::size_t, std::size_t>{8, 5}, {50, 30}}) {
      const DenseMatrix a = random_matrix(rows, cols, rows * 1000 + cols);
      const DenseMatrix ap = meshcert::pseudoinverse(a);
      const DenseMatrix aapa = a.multiply(ap).multiply(a);
      const DenseMatrix apaap = ap.multiply(a).multiply(ap);
      const DenseMatrix aap = a.multiply(ap);
      const DenseMatrix apa = ap.multiply(a);
      double defect = 0.0;
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          defect = std::max(defect, std::fabs(aapa(i, j) - a(i, j)));
        }
      }
      for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t j = 0; j < rows; ++j) {
          defect = std::max(defect, std::fabs(apaap(i, j) - ap(i, j)));
        }
      }
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < rows; ++j) {
          defect = std::max(defect, std::fabs(aap(i, j) - aap(j, i)));
        }
      }
      for (std::size_t i = 0; i < cols; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
          defect = std::max(defect, std::fabs(apa(i, j) - apa(j, i)));
        }
      }
      gate.require(defect <= 1e-8, "Moore-Penrose identities to 1e-8");
    }

    // (f) the 1-norm estimator never exceeds the dense oracle, up to n=200.
    {
      std::mt19937_64 rng(2024);
      std::uniform_real_distribution<double> dist(-1.0, 1.0);
      for (std::size_t n : {std::size_t{5}, std::size_t{23}, std::size_t{57},
                            std::size_t{101}, std::size_t{150},
                            std::size_t{200}}) {
        DenseMatrix a(n, n);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) a(i, j) = dist(rng);
          a(i, i) += 3.0;
        }
        const LuFactorization lu = LuFactorization::factor(a);
        const double est = meshcert::onenorm_estimate(
            [&](const Vector& b) { return lu.solve(b); },
            [&](const Vector& b) { return lu.solve_transposed(b); }, n);
        gate.require(est > 0.0 && est <= dense_inverse_one_norm(a) * (1.0 + 1e-10),
                     "onenorm_estimate <= dense oracle");
      }
    }

    return report(6, gate,
                  "exactness <= 1e-9, scaling law 1e-8, dominance on 50 "
                  "instances, kernel FD 1e-5, Moore-Penrose 1e-8, 1-norm "
                  "estimate bounded by oracle");
  } catch (const std::exception& e) {
    return report_exception(6, e);
  }
}

// --- criterion 7: the unit cross recovers the five-point star exactly.

int criterion_unit_cross() {
  try {
    const Kernel ph42 = meshcert::ph_kernel(4, 2);
    const std::vector<Point> cross = {
        {1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}, {0.0, 0.0}};
    const Stencil s = meshcert::optimal_weights(
        ph42, Functional{{0.0, 0.0}, Operator::laplacian}, cross);

    Gate gate;
    gate.require(s.points.size() == 5, "all five cross nodes used");
    double center = 0.0;
    double arms[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t arm_count = 0;
    for (std::size_t j = 0; j < s.points.size(); ++j) {
      if (s.points[j][0] == 0.0 && s.points[j][1] == 0.0) {
        center = s.weights[j];
      } else if (arm_count < 4) {
        arms[arm_count++] = s.weights[j];
      }
    }
    gate.require(std::fabs(center + 4.0) <= 1e-9, "center weight -4 to 1e-9");
    for (double w : arms) {
      gate.require(std::fabs(w - 1.0) <= 1e-9, "arm weight 1 to 1e-9");
    }
    return report(7, gate, "optimal ph(4,2) cross weights (1,1,1,1,-4) to 1e-9");
  } catch (const std::exception& e) {
    return report_exception(7, e);
  }
}

}  // namespace

int main() {
  int failures = 0;
  failures += criteria_fivepoint();
  failures += criterion_worst_case();
  failures += criterion_corner();
  failures += criterion_perturbed_tables();
  failures += criterion_invariants();
  failures += criterion_unit_cross();
  return failures == 0 ? 0 : 1;
}
