#include "meshcert/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace meshcert {

namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr std::size_t kBruteForceLimit = 2000;

bool on_square_boundary(const Point& p) {
  return std::fabs(std::fabs(p[0]) - 1.0) <= kBoundaryTol ||
         std::fabs(std::fabs(p[1]) - 1.0) <= kBoundaryTol;
}

double sqr_dist(const Point& a, const Point& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy;
}

void check_no_duplicates(const NodeSet& nodes, const char* origin) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (sqr_dist(nodes.points[i], nodes.points[j]) <= 1e-10 * 1e-10) {
        std::ostringstream msg;
        msg << origin << ": nodes " << i << " and " << j
            << " closer than 1e-10";
        fail(errc::bad_input, msg.str());
      }
    }
  }
}

void append_shortest(std::string& line, double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  line.append(buf, res.ptr);
}

}  // namespace

std::size_t NodeSet::interior_count() const {
  std::size_t n = 0;
  for (bool b : boundary) n += !b;
  return n;
}

std::size_t NodeSet::boundary_count() const {
  return size() - interior_count();
}

std::vector<std::size_t> NodeSet::interior_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!boundary[i]) idx.push_back(i);
  }
  return idx;
}

std::vector<std::size_t> NodeSet::boundary_indices() const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < size(); ++i) {
    if (boundary[i]) idx.push_back(i);
  }
  return idx;
}

NodeSet gen_grid(double h) {
  if (!(h > 0.0)) fail(errc::invalid_spacing, "gen_grid: h must be positive");
  const double steps = 2.0 / h;
  const auto n = static_cast<std::size_t>(std::llround(steps));
  if (n < 1 || std::fabs(static_cast<double>(n) * h - 2.0) > 1e-9) {
    std::ostringstream msg;
    msg << "gen_grid: 2/h is not an integer (h = " << h << ")";
    fail(errc::invalid_spacing, msg.str());
  }

  NodeSet nodes;
  nodes.points.reserve((n + 1) * (n + 1));
  for (std::size_t j = 0; j <= n; ++j) {
    for (std::size_t i = 0; i <= n; ++i) {
      const double x = -1.0 + static_cast<double>(i) * h;
      const double y = -1.0 + static_cast<double>(j) * h;
      nodes.points.push_back({x, y});
      nodes.boundary.push_back(i == 0 || j == 0 || i == n || j == n);
    }
  }
  return nodes;
}

NodeSet gen_perturbed_grid(double h, double noise_amplitude,
                           std::uint64_t seed) {
  if (noise_amplitude < 0.0 || noise_amplitude >= h / 2.0) {
    fail(errc::bad_input,
         "gen_perturbed_grid: noise amplitude must lie in [0, h/2)");
  }
  NodeSet nodes = gen_grid(h);
  if (noise_amplitude == 0.0) return nodes;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-noise_amplitude,
                                                noise_amplitude);
  // Draw order is node-major, x before y, so runs are seed-reproducible.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes.boundary[i]) continue;
    nodes.points[i][0] += offset(rng);
    nodes.points[i][1] += offset(rng);
  }
  check_no_duplicates(nodes, "gen_perturbed_grid");
  return nodes;
}

NodeSet gen_chebyshev(std::size_t n_per_side, double noise_amplitude,
                      std::uint64_t seed) {
  if (n_per_side < 2) fail(errc::bad_input, "gen_chebyshev: need n >= 2");
  const std::size_t n = n_per_side;
  std::vector<double> coord(n);
  for (std::size_t k = 0; k < n; ++k) {
    coord[k] = std::cos(static_cast<double>(k) * M_PI /
                        static_cast<double>(n - 1));
  }
  // Endpoints are exactly +-1 up to rounding; snap them.
  coord[0] = 1.0;
  coord[n - 1] = -1.0;

  NodeSet nodes;
  nodes.points.reserve(n * n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> offset(-noise_amplitude,
                                                noise_amplitude);
  // Interior perturbations are clamped into the open square; near the edges
  // the Chebyshev spacing is smaller than typical noise levels, so without
  // the clamp nodes could cross the boundary.
  constexpr double kMargin = 1e-6;
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool bnd = i == 0 || j == 0 || i == n - 1 || j == n - 1;
      Point p = {coord[i], coord[j]};
      if (!bnd && noise_amplitude > 0.0) {
        p[0] = std::clamp(p[0] + offset(rng), -1.0 + kMargin, 1.0 - kMargin);
        p[1] = std::clamp(p[1] + offset(rng), -1.0 + kMargin, 1.0 - kMargin);
      }
      nodes.points.push_back(p);
      nodes.boundary.push_back(bnd);
    }
  }
  check_no_duplicates(nodes, "gen_chebyshev");
  return nodes;
}

namespace {

std::vector<std::size_t> nearest_brute_force(const NodeSet& nodes,
                                             const Point& center,
                                             std::size_t n) {
  std::vector<std::pair<double, std::size_t>> dist(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    dist[i] = {sqr_dist(nodes.points[i], center), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(n),
                    dist.end());  // pair order = distance, then index
  std::vector<std::size_t> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = dist[k].second;
  return out;
}

std::vector<std::size_t> nearest_bucketed(const NodeSet& nodes,
                                          const Point& center, std::size_t n) {
  // Uniform cells over the bounding box; ring expansion around the center
  // cell until the n-th nearest candidate provably beats every unvisited
  // cell.
  double lo_x = nodes.points[0][0], hi_x = lo_x;
  double lo_y = nodes.points[0][1], hi_y = lo_y;
  for (const Point& p : nodes.points) {
    lo_x = std::min(lo_x, p[0]);
    hi_x = std::max(hi_x, p[0]);
    lo_y = std::min(lo_y, p[1]);
    hi_y = std::max(hi_y, p[1]);
  }
  const auto side = static_cast<std::size_t>(
      std::max(1.0, std::floor(std::sqrt(static_cast<double>(nodes.size()) / 2.0))));
  const double cell_x = std::max((hi_x - lo_x) / static_cast<double>(side), 1e-12);
  const double cell_y = std::max((hi_y - lo_y) / static_cast<double>(side), 1e-12);

  auto cell_of = [&](const Point& p) -> std::pair<long, long> {
    auto cx = static_cast<long>((p[0] - lo_x) / cell_x);
    auto cy = static_cast<long>((p[1] - lo_y) / cell_y);
    cx = std::clamp(cx, 0L, static_cast<long>(side) - 1);
    cy = std::clamp(cy, 0L, static_cast<long>(side) - 1);
    return {cx, cy};
  };

  std::vector<std::vector<std::size_t>> buckets(side * side);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto [cx, cy] = cell_of(nodes.points[i]);
    buckets[static_cast<std::size_t>(cy) * side + static_cast<std::size_t>(cx)]
        .push_back(i);
  }

  const auto [ccx, ccy] = cell_of(center);
  std::vector<std::pair<double, std::size_t>> cand;
  const double min_cell = std::min(cell_x, cell_y);
  for (long ring = 0;; ++ring) {
    bool visited_any = false;
    for (long cy = ccy - ring; cy <= ccy + ring; ++cy) {
      if (cy < 0 || cy >= static_cast<long>(side)) continue;
      for (long cx = ccx - ring; cx <= ccx + ring; ++cx) {
        if (cx < 0 || cx >= static_cast<long>(side)) continue;
        if (std::max(std::labs(cx - ccx), std::labs(cy - ccy)) != ring) continue;
        visited_any = true;
        for (std::size_t i :
             buckets[static_cast<std::size_t>(cy) * side +
                     static_cast<std::size_t>(cx)]) {
          cand.emplace_back(sqr_dist(nodes.points[i], center), i);
        }
      }
    }
    if (cand.size() >= n) {
      std::nth_element(cand.begin(), cand.begin() + static_cast<long>(n) - 1,
                       cand.end());
      const double d_n = std::sqrt(cand[n - 1].first);
      // Any point in an unvisited cell is at least ring*min_cell away (the
      // next ring starts one full cell beyond the center cell's ring 0).
      if (d_n <= static_cast<double>(ring) * min_cell) break;
    }
    if (!visited_any && ring > static_cast<long>(side)) break;  // grid exhausted
  }

  std::sort(cand.begin(), cand.end());
  std::vector<std::size_t> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = cand[k].second;
  return out;
}

}  // namespace

std::vector<std::size_t> nearest_neighbors(const NodeSet& nodes,
                                           const Point& center,
                                           std::size_t n) {
  if (n > nodes.size()) {
    std::ostringstream msg;
    msg << "nearest_neighbors: requested " << n << " of " << nodes.size()
        << " nodes";
    fail(errc::too_few_nodes, msg.str());
  }
  if (n == 0) return {};
  if (nodes.size() <= kBruteForceLimit) {
    return nearest_brute_force(nodes, center, n);
  }
  return nearest_bucketed(nodes, center, n);
}

double fill_distance(const NodeSet& nodes) {
  if (nodes.size() == 0) fail(errc::too_few_nodes, "fill_distance: empty set");
  constexpr std::size_t kProbes = 200;
  double worst = 0.0;
  for (std::size_t j = 0; j < kProbes; ++j) {
    const double y = -1.0 + 2.0 * static_cast<double>(j) / (kProbes - 1);
    for (std::size_t i = 0; i < kProbes; ++i) {
      const double x = -1.0 + 2.0 * static_cast<double>(i) / (kProbes - 1);
      double best = std::numeric_limits<double>::infinity();
      for (const Point& p : nodes.points) {
        best = std::min(best, sqr_dist(p, {x, y}));
      }
      worst = std::max(worst, best);
    }
  }
  return std::sqrt(worst);
}

void write_nodes_csv(const NodeSet& nodes, std::ostream& out) {
  out << "x,y,is_boundary\n";
  std::string line;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    line.clear();
    append_shortest(line, nodes.points[i][0]);
    line.push_back(',');
    append_shortest(line, nodes.points[i][1]);
    line.push_back(',');
    line.push_back(nodes.boundary[i] ? '1' : '0');
    line.push_back('\n');
    out << line;
  }
}

NodeSet read_nodes_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) fail(errc::bad_input, "nodes CSV: empty file");
  // Tolerate a UTF-8 BOM and trailing carriage return in the header.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,y,is_boundary") {
    fail(errc::bad_input, "nodes CSV: expected header 'x,y,is_boundary'");
  }

  NodeSet nodes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string fx, fy, fb;
    if (!std::getline(row, fx, ',') || !std::getline(row, fy, ',') ||
        !std::getline(row, fb, ',')) {
      std::ostringstream msg;
      msg << "nodes CSV: malformed line " << line_no;
      fail(errc::bad_input, msg.str());
    }
    try {
      const double x = std::stod(fx);
      const double y = std::stod(fy);
      const bool b = fb == "1" || fb == "true";
      if (!b && fb != "0" && fb != "false") {
        throw std::invalid_argument("flag");
      }
      nodes.points.push_back({x, y});
      nodes.boundary.push_back(b);
    } catch (const std::exception&) {
      std::ostringstream msg;
      msg << "nodes CSV: malformed line " << line_no;
      fail(errc::bad_input, msg.str());
    }
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes.boundary[i] && !on_square_boundary(nodes.points[i])) {
      std::ostringstream msg;
      msg << "nodes CSV: node " << i << " flagged boundary but off the square";
      fail(errc::bad_input, msg.str());
    }
  }
  check_no_duplicates(nodes, "nodes CSV");
  return nodes;
}

}  // namespace meshcert
