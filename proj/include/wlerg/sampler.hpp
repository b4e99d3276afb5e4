#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wlerg/kernel.hpp"

namespace wlerg {

// Packed bit mask over the N = n(n-1)/2 dyads of an n-vertex graph, indexed
// by the row-major upper-triangular linear index shared with LatentGraph.
class DyadMask {
 public:
  DyadMask() = default;
  explicit DyadMask(int n);

  int n() const { return n_; }
  std::size_t dyad_count() const { return count_; }
  bool test(std::size_t linear) const {
    return (bits_[linear >> 6] >> (linear & 63)) & 1;
  }
  void set(std::size_t linear);
  bool test_pair(int i, int j) const;

 private:
  int n_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint64_t> bits_;
};

// Latent positions U in (0,1)^n plus an undirected simple adjacency matrix
// stored as a packed upper-triangular bit array. Graphs loaded from edge
// lists carry no positions; operations that need U check has_positions().
class LatentGraph {
 public:
  LatentGraph() = default;
  explicit LatentGraph(int n);
  LatentGraph(int n, std::vector<double> positions);

  int n() const { return n_; }
  std::size_t dyad_count() const { return dyads_; }

  bool has_positions() const { return !u_.empty(); }
  double u(int i) const { return u_[i]; }
  const std::vector<double>& positions() const;

  bool edge(int i, int j) const;
  void set_edge(int i, int j, bool present);
  std::size_t edge_count() const;
  std::vector<int> degrees() const;

  static std::size_t dyad_index(int n, int i, int j);
  std::size_t dyad_index(int i, int j) const { return dyad_index(n_, i, j); }
  // Inverse of dyad_index.
  static std::pair<int, int> dyad_pair(int n, std::size_t linear);

  // Copy with the masked dyads forced to non-edges (strict-holdout view).
  LatentGraph masked_copy(const DyadMask& mask) const;

  // Edge-list export: "# n=<n>" line, then one "i j" pair per line,
  // 0-indexed, each undirected edge once.
  void save_edge_list(const std::string& path) const;
  // Loader symmetrizes, drops self-loops and duplicate lines; '#' comment
  // lines are ignored except that "# n=<count>" fixes the vertex count (the
  // n_hint argument does the same; isolated tail vertices are otherwise
  // unrecoverable from the pair list).
  static LatentGraph load_edge_list(const std::string& path, int n_hint = 0);

  void save_positions_csv(const std::string& path) const;
  static std::vector<double> load_positions_csv(const std::string& path);
  void set_positions(std::vector<double> u);

  // Takes ownership of a fully packed adjacency bit array (sampler use).
  void adopt_bits(std::vector<std::uint64_t> bits);

 private:
  int n_ = 0;
  std::size_t dyads_ = 0;
  std::vector<double> u_;
  std::vector<std::uint64_t> bits_;
};

using KernelFn = std::function<double(double, double)>;

// WL-ERG sampling: latent uniforms U_i i.i.d. on open (0,1), then
// conditionally independent Bernoulli(W(U_i,U_j)) edges. Per-dyad randomness
// is a pure function of (seed, i, j), so output is deterministic in the seed
// and independent of thread count.
LatentGraph sample_graph(const Graphon& g, int n, std::uint64_t seed, int threads = 1);
LatentGraph sample_graph(const KernelFn& w, int n, std::uint64_t seed, int threads = 1);
// Conditional resampling of edges with fixed latent positions.
LatentGraph sample_graph_with_positions(const KernelFn& w, std::vector<double> positions,
                                        std::uint64_t seed, int threads = 1);

// Sample retaining the edge uniforms: A_ij = 1{xi_ij <= W(U_i,U_j)} exactly.
struct CoupledSample {
  LatentGraph graph;
  std::vector<double> xi;  // upper-triangular, same linear indexing

  double xi_at(int i, int j) const;
};
CoupledSample sample_coupled(const Graphon& g, int n, std::uint64_t seed);

// Ordered empirical graphon: vertices sorted by increasing U (ties by index),
// cell (i,j) of the n x n output holds A_{pi(i),pi(j)}.
SquareMatrix empirical_step_graphon(const LatentGraph& lg);

}  // namespace wlerg
