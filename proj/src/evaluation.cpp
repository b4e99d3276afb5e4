#include "wlerg/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "wlerg/rng.hpp"

namespace wlerg {

HoldoutSplit holdout_split(int n, double fraction, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("holdout_split: need n >= 2");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("holdout_split: fraction must be in (0,1)");
  }
  std::size_t n_dyads = static_cast<std::size_t>(n) * (n - 1) / 2;
  std::size_t k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_dyads)));
  if (k == 0) throw std::invalid_argument("holdout_split: fraction selects no dyads");
  if (k >= n_dyads) throw std::invalid_argument("holdout_split: fraction selects every dyad");

  // Floyd's without-replacement sampler: k draws, deterministic in the seed.
  RngStream rng(seed_from_label(seed, "holdout-split"));
  std::unordered_set<std::size_t> chosen;
  chosen.reserve(k * 2);
  for (std::size_t i = n_dyads - k; i < n_dyads; ++i) {
    std::size_t t = rng.next_below(i + 1);
    if (!chosen.insert(t).second) chosen.insert(i);
  }

  HoldoutSplit split;
  split.n = n;
  split.fraction = fraction;
  split.seed = seed;
  split.test.assign(chosen.begin(), chosen.end());
  std::sort(split.test.begin(), split.test.end());
  split.mask = DyadMask(n);
  for (std::size_t idx : split.test) split.mask.set(idx);
  return split;
}

std::vector<std::uint8_t> test_labels(const LatentGraph& lg, const HoldoutSplit& split) {
  if (lg.n() != split.n) throw std::invalid_argument("test_labels: graph/split size mismatch");
  std::vector<std::uint8_t> labels;
  labels.reserve(split.test.size());
  for (std::size_t idx : split.test) {
    auto [i, j] = LatentGraph::dyad_pair(split.n, idx);
    labels.push_back(lg.edge(i, j) ? 1 : 0);
  }
  return labels;
}

namespace {

constexpr int kBins = 20;

double safe_log(double p) { return std::log(std::max(p, 1e-300)); }

double mean_logloss(const std::vector<double>& preds, const std::vector<std::uint8_t>& labels) {
  double acc = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    acc -= labels[i] ? safe_log(preds[i]) : safe_log(1.0 - preds[i]);
  }
  return acc / static_cast<double>(preds.size());
}

// Mann-Whitney AUC with midrank tie handling.
double rank_auc(const std::vector<double>& preds, const std::vector<std::uint8_t>& labels,
                std::size_t n_pos, std::size_t n_neg) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&preds](std::size_t a, std::size_t b) { return preds[a] < preds[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && preds[order[j]] == preds[order[i]]) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) rank_sum_pos += midrank;
    }
    i = j;
  }
  double n_pos_d = static_cast<double>(n_pos);
  return (rank_sum_pos - n_pos_d * (n_pos_d + 1.0) / 2.0) /
         (n_pos_d * static_cast<double>(n_neg));
}

// Threshold-sweep average precision (tie-robust).
double average_precision(const std::vector<double>& preds,
                         const std::vector<std::uint8_t>& labels, std::size_t n_pos) {
  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&preds](std::size_t a, std::size_t b) { return preds[a] > preds[b]; });
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t cum_pos = 0, cum_total = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && preds[order[j]] == preds[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      ++cum_total;
      if (labels[order[k]]) ++cum_pos;
    }
    double recall = static_cast<double>(cum_pos) / static_cast<double>(n_pos);
    double precision = static_cast<double>(cum_pos) / static_cast<double>(cum_total);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

}  // namespace

MetricReport score_predictions(const std::vector<double>& preds,
                               const std::vector<std::uint8_t>& labels, std::uint64_t seed) {
  if (preds.size() != labels.size() || preds.empty()) {
    throw std::invalid_argument("score_predictions: predictions/labels mismatch");
  }
  MetricReport report;
  std::size_t n = preds.size();
  std::size_t n_pos = 0;
  for (std::uint8_t y : labels) n_pos += y;
  std::size_t n_neg = n - n_pos;

  report.logloss = mean_logloss(preds, labels);
  report.mean_loglik = -report.logloss;

  double brier = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = preds[i] - static_cast<double>(labels[i]);
    brier += d * d;
  }
  report.brier = brier / static_cast<double>(n);

  // Reliability table, prediction histogram and ECE share the same 20
  // equal-width bins; the final bin is closed at 1.
  report.reliability.assign(kBins, ReliabilityBin{});
  report.pred_histogram.assign(kBins, 0);
  std::vector<double> bin_pred(kBins, 0.0), bin_pos(kBins, 0.0);
  for (int b = 0; b < kBins; ++b) {
    report.reliability[b].lo = static_cast<double>(b) / kBins;
    report.reliability[b].hi = static_cast<double>(b + 1) / kBins;
  }
  for (std::size_t i = 0; i < n; ++i) {
    int b = std::min(static_cast<int>(preds[i] * kBins), kBins - 1);
    b = std::max(b, 0);
    ++report.pred_histogram[b];
    ++report.reliability[b].count;
    bin_pred[b] += preds[i];
    bin_pos[b] += labels[i];
  }
  double ece = 0.0;
  for (int b = 0; b < kBins; ++b) {
    auto& bin = report.reliability[b];
    if (bin.count == 0) continue;
    bin.mean_pred = bin_pred[b] / static_cast<double>(bin.count);
    bin.frac_pos = bin_pos[b] / static_cast<double>(bin.count);
    ece += (static_cast<double>(bin.count) / static_cast<double>(n)) *
           std::abs(bin.mean_pred - bin.frac_pos);
  }
  report.ece = ece;

  if (n_pos == 0 || n_neg == 0) {
    report.single_class = true;
    report.auc = 0.5;
    report.ap = n_pos > 0 ? 1.0 : 0.0;
  } else {
    report.auc = rank_auc(preds, labels, n_pos, n_neg);
    report.ap = average_precision(preds, labels, n_pos);
  }

  if (n_pos > 0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i]) acc -= safe_log(preds[i]);
    }
    report.pos_logloss = acc / static_cast<double>(n_pos);
  }

  // Balanced logloss: all positives plus an equal-count seeded negative
  // sample (all negatives when there are fewer than positives).
  if (n_pos > 0 && n_neg > 0) {
    std::vector<std::size_t> negatives;
    negatives.reserve(n_neg);
    for (std::size_t i = 0; i < n; ++i) {
      if (!labels[i]) negatives.push_back(i);
    }
    std::vector<std::size_t> sampled;
    if (n_neg <= n_pos) {
      sampled = negatives;
    } else {
      RngStream rng(seed_from_label(seed, "balanced-negatives"));
      // Partial Fisher-Yates over the negative pool.
      for (std::size_t k = 0; k < n_pos; ++k) {
        std::size_t swap_with = k + rng.next_below(n_neg - k);
        std::swap(negatives[k], negatives[swap_with]);
        sampled.push_back(negatives[k]);
      }
    }
    double acc = static_cast<double>(n_pos) * report.pos_logloss;
    for (std::size_t i : sampled) acc -= safe_log(1.0 - preds[i]);
    report.balanced_logloss = acc / static_cast<double>(n_pos + sampled.size());
  } else {
    report.balanced_logloss = report.logloss;
  }
  return report;
}

void MetricReport::save_reliability_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "bin_lo,bin_hi,mean_pred,frac_pos,count\n";
  char buf[160];
  for (const ReliabilityBin& bin : reliability) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%zu\n", bin.lo, bin.hi, bin.mean_pred,
                  bin.frac_pos, bin.count);
    out << buf;
  }
}

void MetricReport::save_histogram_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "bin_lo,bin_hi,count\n";
  char buf[96];
  for (std::size_t b = 0; b < pred_histogram.size(); ++b) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%zu\n", static_cast<double>(b) / kBins,
                  static_cast<double>(b + 1) / kBins, pred_histogram[b]);
    out << buf;
  }
}

namespace {

std::vector<double> histogram_predictions(const OrderedHistogram& hist,
                                          const HoldoutSplit& split) {
  std::vector<double> preds;
  preds.reserve(split.test.size());
  for (std::size_t idx : split.test) {
    auto [i, j] = LatentGraph::dyad_pair(split.n, idx);
    preds.push_back(hist.probabilities(hist.bin_of[i], hist.bin_of[j]));
  }
  return preds;
}

}  // namespace

std::vector<double> baseline_histogram(const LatentGraph& lg, SeriationMethod method, int bins,
                                       const HoldoutSplit& split) {
  OrderedHistogram hist = build_ordered_histogram(lg, method, bins, &split.mask);
  return histogram_predictions(hist, split);
}

std::vector<double> baseline_sbm(const LatentGraph& lg, int blocks, const HoldoutSplit& split) {
  if (blocks < 1) throw std::invalid_argument("baseline_sbm: need at least one block");
  OrderedHistogram hist =
      build_ordered_histogram(lg, SeriationMethod::degree, blocks, &split.mask);
  return histogram_predictions(hist, split);
}

std::vector<double> wl_predictions(const FitReport& fit, const HoldoutSplit& split) {
  std::vector<double> preds;
  preds.reserve(split.test.size());
  for (std::size_t idx : split.test) {
    auto [i, j] = LatentGraph::dyad_pair(split.n, idx);
    preds.push_back(fit.predict(i, j));
  }
  return preds;
}

void save_metrics_csv(const std::string& dataset, const std::vector<MethodScores>& rows,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "dataset,method,auc_mean,auc_sd,loglik_mean,loglik_sd,brier,ece,ap,pos_logloss,"
         "balanced_logloss\n";
  char buf[512];
  for (const MethodScores& row : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g,%.6g\n",
                  dataset.c_str(), row.method.c_str(), row.auc_mean, row.auc_sd, row.loglik_mean,
                  row.loglik_sd, row.brier, row.ece, row.ap, row.pos_logloss,
                  row.balanced_logloss);
    out << buf;
  }
}

std::vector<SweepCell> robustness_sweep(const LatentGraph& lg, SeriationMethod method,
                                        const std::vector<int>& bin_sizes,
                                        const std::vector<double>& kappas,
                                        const std::vector<std::uint64_t>& split_seeds,
                                        double fraction) {
  if (split_seeds.empty()) throw std::invalid_argument("robustness_sweep: need split seeds");
  std::vector<SweepCell> cells;
  for (int bins : bin_sizes) {
    for (double kappa : kappas) {
      std::vector<double> loglosses, aucs;
      for (std::uint64_t seed : split_seeds) {
        HoldoutSplit split = holdout_split(lg.n(), fraction, seed);
        FitReport fit = fit_pipeline(lg, method, bins, kappa, &split.mask);
        MetricReport report =
            score_predictions(wl_predictions(fit, split), test_labels(lg, split), seed);
        loglosses.push_back(report.logloss);
        aucs.push_back(report.auc);
      }
      auto mean_sd = [](const std::vector<double>& xs) {
        double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        double sd = xs.size() > 1 ? std::sqrt(var / (xs.size() - 1)) : 0.0;
        return std::pair{mean, sd};
      };
      SweepCell cell;
      cell.bins = bins;
      cell.kappa = kappa;
      std::tie(cell.logloss_mean, cell.logloss_sd) = mean_sd(loglosses);
      std::tie(cell.auc_mean, cell.auc_sd) = mean_sd(aucs);
      cells.push_back(cell);
    }
  }
  return cells;
}

void save_sweep_csv(const std::vector<SweepCell>& cells, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "K,kappa,logloss_mean,logloss_sd,auc_mean,auc_sd\n";
  char buf[256];
  for (const SweepCell& cell : cells) {
    std::snprintf(buf, sizeof(buf), "%d,%.6g,%.10g,%.6g,%.10g,%.6g\n", cell.bins, cell.kappa,
                  cell.logloss_mean, cell.logloss_sd, cell.auc_mean, cell.auc_sd);
    out << buf;
  }
}

}  // namespace wlerg
