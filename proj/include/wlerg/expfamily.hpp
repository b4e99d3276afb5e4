#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wlerg/kernel.hpp"
#include "wlerg/sampler.hpp"

namespace wlerg {

// Ordered list of 2D wavelet index pairs defining the interaction statistics
// S_rs. Symmetric-closed ((r,s) in I implies (s,r) in I) and excluding the
// (DC,DC) pair, which is confounded with the edge-count direction.
class StatisticIndexSet {
 public:
  using IndexPair = std::pair<WaveletIndex, WaveletIndex>;

  StatisticIndexSet() = default;
  // Closes the input symmetrically, deduplicates, and keeps a canonical
  // order (sorted by flat pair). Throws if (DC,DC) is requested.
  static StatisticIndexSet closure(const std::vector<IndexPair>& pairs);

  std::size_t size() const { return pairs_.size(); }
  const IndexPair& pair(std::size_t k) const { return pairs_[k]; }
  const std::vector<IndexPair>& pairs() const { return pairs_; }
  // Position of (a,b) in the ordered list; -1 if absent.
  int find(const WaveletIndex& a, const WaveletIndex& b) const;
  int max_scale() const;

  friend bool operator==(const StatisticIndexSet&, const StatisticIndexSet&) = default;

 private:
  std::vector<IndexPair> pairs_;
};

// Vector over the edge-count direction plus the index set I; used both for
// natural parameters theta = (c, s_rs) and canonical tilts lambda.
// Components over mirrored pairs are kept equal (symmetric tilts).
class TiltVector {
 public:
  TiltVector() = default;
  explicit TiltVector(StatisticIndexSet index_set, double dc = 0.0);

  double dc() const { return dc_; }
  void set_dc(double v) { dc_ = v; }
  const StatisticIndexSet& index_set() const { return index_set_; }

  double entry(std::size_t k) const { return values_[k]; }
  const std::vector<double>& entries() const { return values_; }
  // Sets the coefficient of the unordered pair {a,b} on both orientations.
  void set_symmetric(const WaveletIndex& a, const WaveletIndex& b, double v);

  std::size_t dim() const { return 1 + values_.size(); }
  Eigen::VectorXd to_vector() const;
  // Requires mirrored components equal up to round-off; symmetrizes exactly.
  static TiltVector from_vector(const StatisticIndexSet& index_set, const Eigen::VectorXd& v);

  TiltVector scaled(double factor) const;
  TiltVector plus(const TiltVector& other) const;

  double norm() const;

 private:
  StatisticIndexSet index_set_;
  double dc_ = 0.0;
  std::vector<double> values_;
};

// Exact sufficient statistics (S_00, S_rs...) of a graph with observed
// latent positions: S_00 is the edge count, S_rs sums psi_r(U_i) psi_s(U_j)
// over edges i<j.
std::vector<double> sufficient_statistics(const LatentGraph& lg, const StatisticIndexSet& I);

// Log-partition Psi_n(theta;U) = sum_{i<j} log(1 + exp(eta_theta(U_i,U_j))),
// computed with the overflow-safe softplus.
double log_partition(const TiltVector& theta, const std::vector<double>& positions);

// c*S_00 + sum s_rs S_rs - Psi_n.
double conditional_loglik(const LatentGraph& lg, const TiltVector& theta);

// Exact enumeration over all 2^(n(n-1)/2) graphs; n is capped at 5.
struct MaxentReport {
  double entropy = 0.0;
  double log_partition = 0.0;
  std::vector<double> moments;  // E_theta[T] = (E S_00, E S_rs...)
};
MaxentReport maxent_entropy_identity(const TiltVector& theta,
                                     const std::vector<double>& positions);

// Canonical tilt in kernel space: shifts the logit surface by
// g_lambda(x,y) = lambda_0 + sum lambda_rs psi_r(x) psi_s(y), summing
// coefficients so the output stays a band-limited graphon.
Graphon tilted_kernel(const Graphon& g0, const TiltVector& lambda);

// Limiting scaled log-mgf Lambda(lambda) = int log(1 - W + W e^{g_lambda})
// with exact midpoint quadrature on a dyadic grid, plus its gradient
// int q_lambda v and Hessian int q_lambda (1-q_lambda) v v^T, where
// v(x,y) = (1, (psi_r(x) psi_s(y))_I) and q_lambda = W e^g / (1 - W + W e^g).
struct MgfReport {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  double min_hessian_eigenvalue = 0.0;
  int grid_size = 0;

  std::string to_json() const;
};
MgfReport limiting_logmgf(const Graphon& g0, const TiltVector& lambda, int grid_size);

// Empirical counterpart on a finite latent sample:
// (1/N) sum_{i<j} log(1 - W + W e^{g_lambda})(U_i,U_j).
double conditional_logmgf(const Graphon& g0, const TiltVector& lambda,
                          const std::vector<double>& positions);

// Legendre transform I(t) = sup_lambda <lambda,t> - Lambda(lambda), solved by
// damped Newton on the strictly convex dual; throws when the target mean is
// outside the attainable region (Newton does not converge).
struct RateResult {
  double value = 0.0;
  TiltVector argmax;
  int iterations = 0;
};
RateResult rate_function(const Graphon& g0, const TiltVector& target_mean, int grid_size);

// Sampled stability diagnostics along the tilt path t -> tilted(g0, t*dir):
// edge density and triangle homomorphism density (mean +- sd over seeds) and
// the deterministic per-scale coefficient energy of the tilted kernel.
struct TiltPathRow {
  double t = 0.0;
  double edge_mean = 0.0, edge_sd = 0.0;
  double triangle_mean = 0.0, triangle_sd = 0.0;
  std::vector<double> energy;  // [dc, scale 0, scale 1, ...]
};
std::vector<TiltPathRow> tilt_path_diagnostics(const Graphon& g0, const TiltVector& direction,
                                               const std::vector<double>& ts, int n,
                                               const std::vector<std::uint64_t>& seeds);
void write_tilt_path_csv(const std::vector<TiltPathRow>& rows, const std::string& path);

}  // namespace wlerg
