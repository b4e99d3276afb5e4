#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wlerg/haar.hpp"
#include "wlerg/rng.hpp"

namespace wlerg {

// Sparse symmetric coefficient matrix S of a logistic wavelet kernel,
// together with the global logit offset c. One canonical orientation is
// stored per unordered index pair and mirrored on read, so symmetry holds by
// construction. The DC x DC coefficient is always folded into c and stored
// as zero (it is confounded with c).
//
// The scale band [jmin, jmax] tracks the hull of stored detail scales and
// widens automatically on insertion; DC-only kernels keep band [0,0].
class BandCoefficients {
 public:
  // Canonical key: flat indices with first <= second.
  using Key = std::pair<int, int>;

  BandCoefficients() = default;
  explicit BandCoefficients(double c) : c_(c) {}

  double c() const { return c_; }
  void set_c(double c) { c_ = c; }

  // Overwrites the coefficient of the unordered pair {a,b}; (DC,DC) routes
  // into c. Zero values erase the entry.
  void set(const WaveletIndex& a, const WaveletIndex& b, double value);
  // Adds to the existing coefficient (summation on collision).
  void add(const WaveletIndex& a, const WaveletIndex& b, double value);
  double get(const WaveletIndex& a, const WaveletIndex& b) const;

  int jmin() const { return jmin_; }
  int jmax() const { return jmax_; }
  // Explicit band widening, e.g. to declare head-room before tilting.
  void widen_band(int jmin, int jmax);

  std::size_t stored_entries() const { return entries_.size(); }
  const std::map<Key, double>& entries() const { return entries_; }

  // eta_{c,S}(x,y) = c + sum s_rs psi_r(x) psi_s(y) over the symmetric matrix.
  double logit_eval(double x, double y) const;

  // Number of nonzero entries of the full symmetric matrix, counted over
  // ordered pairs (r,s): diagonal entries count once, off-diagonal twice.
  std::size_t wavelet_complexity() const;

  // Sum over ordered pairs of s_rs^2 (off-diagonal entries counted twice).
  double coefficient_energy() const;

  // JSON object {c, band:[jmin,jmax], entries:[{j1,l1,j2,l2,value}]} with the
  // DC index written as j=-1,l=0.
  std::string to_json() const;
  static BandCoefficients from_json(const std::string& text);
  void save_json(const std::string& path) const;
  static BandCoefficients load_json(const std::string& path);

  friend bool operator==(const BandCoefficients&, const BandCoefficients&) = default;

 private:
  double c_ = 0.0;
  int jmin_ = 0;
  int jmax_ = 0;
  std::map<Key, double> entries_;
};

// Logistic wavelet graphon W(x,y) = sigma(c + f_S(x,y)), strictly inside
// (0,1) and symmetric in (x,y).
class Graphon {
 public:
  Graphon() = default;
  explicit Graphon(BandCoefficients coeffs) : coeffs_(std::move(coeffs)) {}

  const BandCoefficients& coeffs() const { return coeffs_; }
  BandCoefficients& coeffs() { return coeffs_; }

  double logit(double x, double y) const { return coeffs_.logit_eval(x, y); }
  double operator()(double x, double y) const;

 private:
  BandCoefficients coeffs_;
};

double logistic(double t);
double logit(double p);

// Constant-kernel Erdos-Renyi graphon with edge probability p.
BandCoefficients from_edge_probability(double p);

// Two-block kernel: c = (logit p_in + logit p_out)/2 on the offset and
// s_11 = (logit p_in - logit p_out)/2 on the first detail diagonal, so the
// four half-blocks reproduce p_in / p_out exactly.
BandCoefficients from_two_block(double p_in, double p_out);

// Dyadic stochastic block model with 2^J blocks: the resulting graphon is
// constant sigma(c + B(l,k)) on each block pair, where B holds the block
// logits. Realized by the forward 2D Haar transform of B.
BandCoefficients from_dyadic_sbm(int j_blocks, const SquareMatrix& block_logits, double c);

// Low-rank PSD kernel: S = sum_k g_k g_k^T over the given 1D coefficient
// vectors (logistic random dot product graph).
struct LowRankFactor {
  std::vector<std::pair<WaveletIndex, double>> loadings;
};
BandCoefficients from_low_rank(const std::vector<LowRankFactor>& factors);

// Adds tau to the diagonal pair (r,r) for every r in the index set:
// f = f0 + tau * sum_{r in R} psi_r (x) psi_r. Collisions sum.
BandCoefficients hierarchical_anomaly_kernel(const BandCoefficients& f0, double tau,
                                             const std::vector<WaveletIndex>& indices);

// Hierarchical kernel diagonal in the Haar basis: per scale j < depth, adds
// beta[j] to every diagonal pair (psi_{j,l}, psi_{j,l}). Within a scale-j
// parent block the logit then differs by 2*beta[j]*2^j between same-child and
// opposite-child pairs.
BandCoefficients hierarchical_kernel(double c, const std::vector<double>& beta_by_scale);

// Projects a symmetric K x K logit grid onto band coefficients: forward 2D
// Haar on the L2 scale, with the DC component folded into c. The grid must
// be symmetric to floating tolerance.
BandCoefficients project_logit_surface(const SquareMatrix& logit_grid, double sym_tol = 1e-9);

// Renders W on a K x K grid at dyadic cell midpoints.
SquareMatrix render_graphon(const Graphon& g, int grid_size);
// Same for the logit surface.
SquareMatrix render_logit(const BandCoefficients& coeffs, int grid_size);

// Gaussian law over a fixed ordered set of 2D wavelet index pairs: the
// coefficient vector of a weighted wavelet random graph kernel.
class CoefficientLaw {
 public:
  using IndexPair = std::pair<WaveletIndex, WaveletIndex>;

  CoefficientLaw(std::vector<IndexPair> indices, std::vector<double> mean,
                 std::vector<double> cov_diagonal);
  CoefficientLaw(std::vector<IndexPair> indices, std::vector<double> mean,
                 std::vector<std::vector<double>> cov);

  std::size_t dim() const { return indices_.size(); }
  const std::vector<IndexPair>& indices() const { return indices_; }
  const std::vector<double>& mean() const { return mean_; }
  const std::vector<std::vector<double>>& cov() const { return cov_; }

  // Law of the sum of independent draws; index sets must match exactly.
  CoefficientLaw convolve(const CoefficientLaw& other) const;

  // One coefficient draw (mean + Cholesky-factored noise).
  std::vector<double> sample(RngStream& rng) const;

  // Kernel S_theta for a concrete coefficient vector; (DC,DC) folds into c.
  BandCoefficients realize(const std::vector<double>& theta) const;

 private:
  std::vector<IndexPair> indices_;
  std::vector<double> mean_;
  std::vector<std::vector<double>> cov_;
};

CoefficientLaw convolve_laws(const CoefficientLaw& a, const CoefficientLaw& b);

}  // namespace wlerg
