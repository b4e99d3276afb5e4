#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wlerg/haar.hpp"
#include "wlerg/kernel.hpp"
#include "wlerg/sampler.hpp"

namespace wlerg {

// Resolution cap and base threshold of the hard-thresholding rule:
// J_n = max{j : 2^(2j) <= N/ln N} and tau_n = kappa*sqrt(ln N / N), natural
// logarithms throughout. N <= 1 degenerates to J_n = 0, tau_n = 0.
struct ThresholdPlan {
  int max_scale = 0;         // J_n
  double base_threshold = 0.0;  // tau_n
  double multiplier = 1.0;   // kappa
  std::size_t dyad_count = 0;

  // Keep rule: |theta| >= tau_n * 2^(j(lambda)) and j(lambda) <= J_n.
  double threshold_at(int scale) const;
};
ThresholdPlan threshold_plan(int n, double kappa);
ThresholdPlan threshold_plan_for_dyads(std::size_t n_dyads, double kappa);

// Empirical wavelet interaction coefficients of an observed-design sample:
// one L2-scale coefficient per tensor pair with both 1D scales <= max_scale,
// theta_hat = 2/(n(n-1)) sum_{i<j} A_ij * sym Psi(U_i,U_j), where sym
// averages the two orientations. Output is indexed by flat wavelet pairs
// (size 2^(max_scale+1)).
CoefficientGrid2D empirical_coefficients(const LatentGraph& lg, int max_scale);

// Hard thresholding: zeroes entries below the scale-corrected threshold and
// everything above J_n. The DC x DC coefficient carries the mean and is
// exempt.
CoefficientGrid2D threshold_coefficients(const CoefficientGrid2D& coeffs,
                                         const ThresholdPlan& plan);

// Probability-scale reconstruction: renders the surviving W-coefficients on
// a K x K grid and clips pointwise to [eps, 1-eps]. K = 0 picks the smallest
// grid resolving every stored scale.
SquareMatrix reconstruct_graphon(const CoefficientGrid2D& survivors, double clip_eps,
                                 int grid_size = 0);

enum class SeriationMethod { degree, fiedler };

// Vertex ordering for the unobserved-design pipeline. degree: ascending
// degree with ties by vertex id. fiedler: ascending second Laplacian
// eigenvector (deflated power iteration, sign fixed so its first coordinate
// is >= 0); on disconnected graphs, components are ordered by size
// (descending, ties by smallest id), each ordered internally, and the result
// is flagged.
std::vector<int> seriation(const LatentGraph& lg, SeriationMethod method,
                           bool* disconnected = nullptr);

// Pipeline steps 1-3: seriation, contiguous equal-size bins (remainder
// spread over the leading bins), and the Jeffreys-smoothed training-dyad
// histogram (e+0.5)/(m+1); empty cells inherit the smoothed global training
// density and are flagged.
struct OrderedHistogram {
  std::vector<int> ordering;   // position -> vertex
  std::vector<int> bin_of;     // vertex -> bin
  SquareMatrix probabilities;  // K x K smoothed cell probabilities
  std::size_t training_dyads = 0;
  std::size_t training_edges = 0;
  double global_density = 0.0;  // smoothed
  int empty_cells = 0;
  bool disconnected = false;
};
OrderedHistogram build_ordered_histogram(const LatentGraph& lg, SeriationMethod method, int bins,
                                         const DyadMask* holdout = nullptr);

// Full eight-step fit: histogram -> logit -> 2D Haar -> scale-corrected hard
// threshold (plan from the training dyad count) -> inverse -> logistic ->
// clip to [1e-6, 1-1e-6]. Thresholding is applied to L2-scale coefficients.
struct SurvivorEntry {
  int flat1 = 0;
  int flat2 = 0;
  int scale = 0;
  double value = 0.0;  // L2 scale
};
struct FitReport {
  SeriationMethod method = SeriationMethod::degree;
  int bins = 0;                  // K
  double kappa = 1.0;
  ThresholdPlan plan;
  std::vector<int> ordering;
  std::vector<int> bin_of;
  std::vector<SurvivorEntry> survivors;
  std::vector<int> survivors_by_scale;  // [dc-exempt excluded], index = scale
  SquareMatrix surface;          // fitted K x K probability surface
  double clip_lo = 1e-6;
  double clip_hi = 1.0 - 1e-6;
  std::size_t training_dyads = 0;
  double global_density = 0.0;
  int empty_cells = 0;
  bool disconnected = false;

  double predict(int i, int j) const { return surface(bin_of[i], bin_of[j]); }

  std::string to_json() const;
  void save_json(const std::string& path) const;
  // Surface CSV "row,col,p"; bit-exact reloadable.
  void save_surface_csv(const std::string& path) const;
  static SquareMatrix load_surface_csv(const std::string& path);
};
FitReport fit_pipeline(const LatentGraph& lg, SeriationMethod method, int bins, double kappa,
                       const DyadMask* holdout = nullptr);

// Logit-scale coefficients of the fitted surface: forward 2D Haar of
// logit(P), DC folded into c. Entries below the noise floor are dropped.
BandCoefficients recover_logit_coefficients(const FitReport& fit);

}  // namespace wlerg
