#include "meshcert/stability.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <iostream>
#include <sstream>
#include <thread>

#include "meshcert/error.hpp"

namespace meshcert {

namespace {

// Side length n of an (n+1) x (n+1) grid matching the node set, or 0 when
// the nodes are not the axis-aligned tensor grid in generation order.
std::size_t grid_side(const NodeSet& nodes) {
  const auto per_side = static_cast<std::size_t>(
      std::llround(std::sqrt(static_cast<double>(nodes.size()))));
  if (per_side < 2 || per_side * per_side != nodes.size()) return 0;
  const std::size_t n = per_side - 1;
  const double h = 2.0 / static_cast<double>(n);
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      const Point& p = nodes.points[j * per_side + i];
      if (std::fabs(p[0] - (-1.0 + static_cast<double>(i) * h)) > 1e-9 ||
          std::fabs(p[1] - (-1.0 + static_cast<double>(j) * h)) > 1e-9) {
        return 0;
      }
    }
  }
  return n;
}

Stencil identity_row(const NodeSet& nodes, std::size_t i) {
  Stencil s;
  s.functional = {nodes.points[i], Operator::identity};
  s.support = {i};
  s.points = {nodes.points[i]};
  s.weights = {1.0};
  s.h = 1.0;
  s.exactness = 0;
  return s;
}

Stencil five_point_row(const NodeSet& nodes, std::size_t node, std::size_t n) {
  const std::size_t per_side = n + 1;
  const double h = 2.0 / static_cast<double>(n);
  Stencil s;
  s.functional = {nodes.points[node], Operator::laplacian};
  s.support = {node + 1, node - 1, node + per_side, node - per_side, node};
  const double w = 1.0 / (h * h);
  s.weights = {w, w, w, w, -4.0 * w};
  s.h = h;
  s.exactness = 4;
  bind_points(s, nodes);
  return s;
}

Stencil neighborhood_row(const NodeSet& nodes, const Kernel& K,
                         const MethodSpec& method, std::size_t node) {
  const std::size_t n = std::min<std::size_t>(method.neighbors, nodes.size());
  const Functional lambda = {nodes.points[node], Operator::laplacian};
  const std::vector<std::size_t> idx =
      nearest_neighbors(nodes, nodes.points[node], n);
  std::vector<Point> local;
  local.reserve(idx.size());
  for (std::size_t g : idx) local.push_back(nodes.points[g]);

  Stencil s;
  switch (method.kind) {
    case MethodSpec::Kind::optimal:
      s = optimal_weights(K, lambda, local);
      break;
    case MethodSpec::Kind::basic:
      s = basic_exact_weights(lambda, local, K.exactness_order());
      break;
    case MethodSpec::Kind::greedy:
      s = greedy_weights(K, lambda, local, n);
      break;
    case MethodSpec::Kind::fivepoint:
      fail(errc::bad_input, "five-point rows are built by index arithmetic");
  }
  for (auto& pos : s.support) pos = idx[pos];
  return s;
}

}  // namespace

StiffnessSystem assemble(const NodeSet& nodes, const Kernel& K,
                         const MethodSpec& method, std::size_t threads) {
  if (nodes.size() == 0) fail(errc::too_few_nodes, "assemble: empty node set");

  StiffnessSystem sys;
  sys.nodes = nodes;
  sys.kernel_spec = K.spec_string();
  sys.method = method_spec_string(method);
  sys.stencils.resize(nodes.size());

  std::size_t side = 0;
  if (method.kind == MethodSpec::Kind::fivepoint && nodes.size() > 1) {
    side = grid_side(nodes);
    if (side == 0) {
      fail(errc::bad_input,
           "assemble: the fivepoint method requires the axis-aligned grid");
    }
  }

  auto build_row = [&](std::size_t i) {
    if (nodes.boundary[i] || nodes.size() == 1) {
      sys.stencils[i] = identity_row(nodes, i);
      return;
    }
    try {
      if (method.kind == MethodSpec::Kind::fivepoint) {
        sys.stencils[i] = five_point_row(nodes, i, side);
      } else {
        sys.stencils[i] = neighborhood_row(nodes, K, method, i);
      }
    } catch (const error& e) {
      std::ostringstream msg;
      msg << "node " << i << ": " << e.what();
      fail(e.code(), msg.str());
    }
  };

  if (threads <= 1 || nodes.size() < 2 * threads) {
    for (std::size_t i = 0; i < nodes.size(); ++i) build_row(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(threads);
    const std::size_t chunk = (nodes.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(nodes.size(), lo + chunk);
        try {
          for (std::size_t i = lo; i < hi; ++i) build_row(i);
        } catch (...) {
          failures[t] = std::current_exception();
        }
      });
    }
    for (auto& worker : pool) worker.join();
    for (const auto& failure : failures) {
      if (failure) std::rethrow_exception(failure);
    }
  }

  std::vector<SparseMatrix::Triplet> triplets;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Stencil& s = sys.stencils[i];
    for (std::size_t c = 0; c < s.support.size(); ++c) {
      triplets.emplace_back(i, s.support[c], s.weights[c]);
    }
  }
  sys.A = SparseMatrix::from_triplets(nodes.size(), nodes.size(),
                                      std::move(triplets));
  return sys;
}

StabilityEstimate stability_svd(const DenseMatrix& a) {
  const SvdResult decomposition = svd(a);
  const double sigma_max = decomposition.sigma.front();
  const double sigma_min = decomposition.sigma.back();
  if (!(sigma_min > 1e-12 * sigma_max)) {
    fail(errc::rank_deficient, "stability_svd: matrix is rank deficient");
  }
  StabilityEstimate est;
  est.value = 1.0 / sigma_min;
  est.method = "svd2";
  est.norm_p = "2";
  est.norm_q = "2";
  return est;
}

StabilityEstimate stability_pinv_inf(const DenseMatrix& a) {
  const DenseMatrix dagger = pseudoinverse(a);
  double worst = 0.0;
  for (std::size_t i = 0; i < dagger.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < dagger.cols(); ++j) {
      row += std::fabs(dagger(i, j));
    }
    worst = std::max(worst, row);
  }
  StabilityEstimate est;
  est.value = worst;
  est.method = "pinv_inf";
  return est;
}

StabilityEstimate stability_condest(const SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    std::cerr << "stability_condest: system is " << a.rows() << "x"
              << a.cols()
              << ", not square; falling back to the dense pseudoinverse "
                 "(slower)\n";
    return stability_pinv_inf(a.to_dense());
  }
  const LuFactorization lu = LuFactorization::factor(a.to_dense());
  const std::size_t n = a.rows();
  // ||A^{-1}||_inf = ||(A^T)^{-1}||_1, estimated through the transposed
  // solves; the ||A||_inf factors of the textbook condest cancel.
  const double value = onenorm_estimate(
      [&](const Vector& b) { return lu.solve_transposed(b); },
      [&](const Vector& b) { return lu.solve(b); }, n);
  StabilityEstimate est;
  est.value = value;
  est.method = "condest_inf";
  return est;
}

DirichletSplit dirichlet_split(const StiffnessSystem& system) {
  const NodeSet& nodes = system.nodes;
  DirichletSplit split;
  split.interior_nodes = nodes.interior_indices();
  split.boundary_nodes = nodes.boundary_indices();
  if (split.boundary_nodes.empty()) {
    fail(errc::nothing_to_split, "dirichlet_split: no boundary nodes");
  }
  if (split.interior_nodes.empty()) {
    fail(errc::nothing_to_split, "dirichlet_split: no interior nodes");
  }
  if (system.A.rows() != nodes.size() || system.A.cols() != nodes.size()) {
    fail(errc::dimension_mismatch,
         "dirichlet_split: system is not the square nodal layout");
  }

  std::vector<std::size_t> interior_pos(nodes.size(), nodes.size());
  std::vector<std::size_t> boundary_pos(nodes.size(), nodes.size());
  for (std::size_t p = 0; p < split.interior_nodes.size(); ++p) {
    interior_pos[split.interior_nodes[p]] = p;
  }
  for (std::size_t p = 0; p < split.boundary_nodes.size(); ++p) {
    boundary_pos[split.boundary_nodes[p]] = p;
  }

  // Boundary rows must be plain identity rows for the split to mean
  // B u_I = f_I - C g_B.
  for (std::size_t b : split.boundary_nodes) {
    const Stencil& s = system.stencils[b];
    if (s.support.size() != 1 || s.support[0] != b || s.weights[0] != 1.0) {
      fail(errc::bad_input,
           "dirichlet_split: boundary rows are not identity rows");
    }
  }

  std::vector<SparseMatrix::Triplet> b_entries;
  std::vector<SparseMatrix::Triplet> c_entries;
  for (std::size_t p = 0; p < split.interior_nodes.size(); ++p) {
    const std::size_t node = split.interior_nodes[p];
    const Stencil& s = system.stencils[node];
    for (std::size_t c = 0; c < s.support.size(); ++c) {
      const std::size_t col = s.support[c];
      if (nodes.boundary[col]) {
        c_entries.emplace_back(p, boundary_pos[col], s.weights[c]);
      } else {
        b_entries.emplace_back(p, interior_pos[col], s.weights[c]);
      }
    }
  }
  split.B = SparseMatrix::from_triplets(split.interior_nodes.size(),
                                        split.interior_nodes.size(),
                                        std::move(b_entries));
  split.C = SparseMatrix::from_triplets(split.interior_nodes.size(),
                                        split.boundary_nodes.size(),
                                        std::move(c_entries));
  return split;
}

}  // namespace meshcert
