#pragma once

#include <string>
#include <vector>

#include "wlerg/estimator.hpp"
#include "wlerg/kernel.hpp"
#include "wlerg/sampler.hpp"

namespace wlerg {

// Coarse wavelet score T_i = sum_{j != i} A_ij psi_1(U_j) and the sign
// classifier, with sgn(0) = 0 read as abstention.
struct TwoBlockScore {
  double score = 0.0;
  int label = 0;  // +1 / -1 / 0
};
TwoBlockScore two_block_score(const LatentGraph& lg, int vertex);

// Scale-j signal-to-noise ratio (n / 2^(j+1)) * Delta^2 / (pbar (1 - pbar)).
double snr(int n, int scale, double p_in, double p_out);

// Per-vertex, per-scale signs: +1 when U_i lies in the left child of its
// scale-j parent block.
struct ScaleLabels {
  int depth = 0;
  std::vector<int8_t> labels;  // [vertex * depth + scale]

  int at(int vertex, int scale) const { return labels[static_cast<std::size_t>(vertex) * depth + scale]; }
};
ScaleLabels true_scale_labels(const std::vector<double>& positions, int depth);

// Wavelet-score classifier at every scale j < depth against the truth from
// the latent positions; abstentions count as errors. deltas supplies the
// signs sgn(Delta_j) of the per-scale probability gaps.
struct HierarchicalResult {
  ScaleLabels estimated;
  ScaleLabels truth;
  std::vector<double> error_rates;  // per scale
};
HierarchicalResult hierarchical_classify(const LatentGraph& lg, int depth,
                                         const std::vector<double>& deltas);

// Standardized block scan: T is the mean residual A - W0 over within-block
// dyads, Z = sqrt(N) * T, blocks with fewer than two vertices score zero.
struct ScanBlock {
  int j = 0;
  int l = 0;
  int m = 0;               // vertices in the block
  std::size_t dyads = 0;   // N = m(m-1)/2
  double t = 0.0;
  double z = 0.0;
  bool detected = false;
};
struct ScanReport {
  std::vector<ScanBlock> blocks;
  double z_max = 0.0;
  double threshold = 0.0;
  // Block indices sorted by |Z| descending, ties by (j,l).
  std::vector<int> ranking;
  // Vertex ids of each detected block, aligned with `detections`.
  std::vector<int> detections;
  std::vector<std::vector<int>> detection_vertices;

  bool any_detection() const { return !detections.empty(); }
  // Index into `blocks` of the top-ranked block (-1 when empty).
  int top_block() const { return ranking.empty() ? -1 : ranking.front(); }

  void save_csv(const std::string& path) const;
  std::string detections_json() const;
  void save_detections_json(const std::string& path) const;
};

// Default scanned scale range: expected block occupancy stays >= 4.
std::pair<int, int> default_scan_range(int n);

// Scan against a known baseline kernel, blocks from the observed latent
// positions. threshold = threshold_mult * sqrt(ln n).
ScanReport wavelet_scan(const LatentGraph& lg, const Graphon& w0, int j_lo, int j_hi,
                        double threshold_mult = 2.0);

// Scan against a fitted binned surface: a scale-j block is a contiguous run
// of 2^(log2 K - j) bins along the fit ordering, and residuals use the
// surface cell of each dyad. Requires 2^j <= K.
ScanReport residual_block_scan(const LatentGraph& lg, const FitReport& fit, int j_lo, int j_hi,
                               double threshold_mult = 2.0);

// Mean kernel values over same-child / opposite-child pairs inside scale-j
// parent blocks (quadrature); feeds the snr formula for kernels whose
// fine-scale structure varies within blocks.
std::pair<double, double> effective_scale_probabilities(const Graphon& g, int scale,
                                                        int grid_size);

}  // namespace wlerg
