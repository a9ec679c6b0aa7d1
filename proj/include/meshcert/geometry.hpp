#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "meshcert/error.hpp"

namespace meshcert {

using Point = std::array<double, 2>;

// Scattered nodes on the square [-1,1]^2 with interior/boundary tags.
// Immutable after construction; all queries are read-only.
struct NodeSet {
  std::vector<Point> points;
  std::vector<bool> boundary;
  int d = 2;

  std::size_t size() const noexcept { return points.size(); }
  std::size_t interior_count() const;
  std::size_t boundary_count() const;
  std::vector<std::size_t> interior_indices() const;
  std::vector<std::size_t> boundary_indices() const;
};

// Regular grid of spacing h covering [-1,1]^2; 2/h must be an integer.
NodeSet gen_grid(double h);

// Regular grid whose interior nodes get independent uniform offsets in
// [-noise_amplitude, +noise_amplitude] per coordinate; boundary unchanged.
// Deterministic for a fixed seed. Requires noise_amplitude < h/2.
NodeSet gen_perturbed_grid(double h, double noise_amplitude, std::uint64_t seed);

// Tensor grid of Chebyshev points cos(k*pi/(n-1)), k = 0..n-1 per axis.
// Interior nodes get uniform noise and are clamped back into the open square
// so boundary tagging stays valid.
NodeSet gen_chebyshev(std::size_t n_per_side, double noise_amplitude,
                      std::uint64_t seed);

// Indices of the n nodes nearest to center, ascending by Euclidean distance,
// ties broken by node index. Brute force below ~2000 nodes, grid-bucketed
// above.
std::vector<std::size_t> nearest_neighbors(const NodeSet& nodes,
                                           const Point& center, std::size_t n);

// Probe-lattice approximation (200x200 uniform samples on the square) of
// sup_x min_j |x - x_j|.
double fill_distance(const NodeSet& nodes);

// CSV with header `x,y,is_boundary`; floats as shortest round-trip decimals.
void write_nodes_csv(const NodeSet& nodes, std::ostream& out);
NodeSet read_nodes_csv(std::istream& in);

}  // namespace meshcert
