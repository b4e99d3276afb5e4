#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wlerg/estimator.hpp"
#include "wlerg/sampler.hpp"

namespace wlerg {

// Strict dyad holdout: a uniform without-replacement sample of
// round(fraction * N) dyads drawn before fitting, deterministic in the seed.
struct HoldoutSplit {
  int n = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> test;  // sorted linear dyad indices
  DyadMask mask;
};
HoldoutSplit holdout_split(int n, double fraction, std::uint64_t seed);

// Held-out labels of the split, read from the full graph.
std::vector<std::uint8_t> test_labels(const LatentGraph& lg, const HoldoutSplit& split);

struct ReliabilityBin {
  double lo = 0.0, hi = 0.0;
  double mean_pred = 0.0, frac_pos = 0.0;
  std::size_t count = 0;
};

// Proper-scoring and calibration metrics over one prediction vector. The
// balanced logloss scores all positives plus an equal count of negatives
// sampled with the given seed; reliability and ECE share the same 20
// equal-width bins. Single-class label vectors get AUC = 0.5 with a flag.
struct MetricReport {
  double auc = 0.5;
  double logloss = 0.0;
  double mean_loglik = 0.0;  // = -logloss
  double brier = 0.0;
  double ece = 0.0;
  double ap = 0.0;
  double pos_logloss = 0.0;
  double balanced_logloss = 0.0;
  bool single_class = false;
  std::vector<ReliabilityBin> reliability;   // 20 bins
  std::vector<std::size_t> pred_histogram;   // counts in the same bins

  void save_reliability_csv(const std::string& path) const;
  void save_histogram_csv(const std::string& path) const;
};
MetricReport score_predictions(const std::vector<double>& preds,
                               const std::vector<std::uint8_t>& labels, std::uint64_t seed = 0);

// Pipeline steps 1-3 only: histogram predictions for the held-out dyads.
std::vector<double> baseline_histogram(const LatentGraph& lg, SeriationMethod method, int bins,
                                       const HoldoutSplit& split);

// Coarse-partition baseline: contiguous equal bins along the degree
// ordering, block-pair probabilities = smoothed training means.
std::vector<double> baseline_sbm(const LatentGraph& lg, int blocks, const HoldoutSplit& split);

// Wavelet-fit predictions for the held-out dyads.
std::vector<double> wl_predictions(const FitReport& fit, const HoldoutSplit& split);

// One evaluation row (Table-style CSV layout).
struct MethodScores {
  std::string method;
  double auc_mean = 0.0, auc_sd = 0.0;
  double loglik_mean = 0.0, loglik_sd = 0.0;
  double brier = 0.0, ece = 0.0, ap = 0.0;
  double pos_logloss = 0.0, balanced_logloss = 0.0;
};
void save_metrics_csv(const std::string& dataset, const std::vector<MethodScores>& rows,
                      const std::string& path);

// Full factorial K x kappa sweep of the WL fit with per-cell mean +- sd of
// the held-out scores across splits.
struct SweepCell {
  int bins = 0;
  double kappa = 0.0;
  double logloss_mean = 0.0, logloss_sd = 0.0;
  double auc_mean = 0.0, auc_sd = 0.0;
};
std::vector<SweepCell> robustness_sweep(const LatentGraph& lg, SeriationMethod method,
                                        const std::vector<int>& bin_sizes,
                                        const std::vector<double>& kappas,
                                        const std::vector<std::uint64_t>& split_seeds,
                                        double fraction);
void save_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path);

}  // namespace wlerg
