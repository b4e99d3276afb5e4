#include "wlerg/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace wlerg {

TwoBlockScore two_block_score(const LatentGraph& lg, int vertex) {
  const std::vector<double>& u = lg.positions();
  WaveletIndex psi1 = WaveletIndex::detail(0, 0);
  TwoBlockScore out;
  for (int j = 0; j < lg.n(); ++j) {
    if (j == vertex || !lg.edge(vertex, j)) continue;
    out.score += eval_haar(psi1, u[j]);
  }
  out.label = out.score > 0.0 ? 1 : (out.score < 0.0 ? -1 : 0);
  return out;
}

double snr(int n, int scale, double p_in, double p_out) {
  if (!(p_in > 0.0 && p_in < 1.0 && p_out > 0.0 && p_out < 1.0)) {
    throw std::invalid_argument("snr: probabilities must be in (0,1)");
  }
  double delta = p_in - p_out;
  double pbar = 0.5 * (p_in + p_out);
  return (static_cast<double>(n) / std::exp2(scale + 1)) * delta * delta / (pbar * (1.0 - pbar));
}

ScaleLabels true_scale_labels(const std::vector<double>& positions, int depth) {
  ScaleLabels labels;
  labels.depth = depth;
  labels.labels.assign(positions.size() * static_cast<std::size_t>(depth), 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (int j = 0; j < depth; ++j) {
      // Left child of the scale-j parent iff the (j+1)-th dyadic digit is 0.
      int child = dyadic_cell(positions[i], j + 1);
      labels.labels[i * depth + j] = (child % 2 == 0) ? 1 : -1;
    }
  }
  return labels;
}

HierarchicalResult hierarchical_classify(const LatentGraph& lg, int depth,
                                         const std::vector<double>& deltas) {
  if (static_cast<int>(deltas.size()) != depth) {
    throw std::invalid_argument("hierarchical_classify: need one delta per scale");
  }
  const std::vector<double>& u = lg.positions();
  int n = lg.n();

  HierarchicalResult result;
  result.truth = true_scale_labels(u, depth);
  result.estimated.depth = depth;
  result.estimated.labels.assign(static_cast<std::size_t>(n) * depth, 0);
  result.error_rates.assign(depth, 0.0);

  // psi_{j,l(i,j)}(U_k) is nonzero only for neighbors inside the parent
  // block, where it is +-2^{j/2}; the sign classifier only needs the sign of
  // the within-block left/right contrast.
  for (int j = 0; j < depth; ++j) {
    double sign_delta = deltas[j] > 0.0 ? 1.0 : (deltas[j] < 0.0 ? -1.0 : 0.0);
    int errors = 0;
    for (int i = 0; i < n; ++i) {
      int parent = dyadic_cell(u[i], j);
      double score = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i || !lg.edge(i, k)) continue;
        if (dyadic_cell(u[k], j) != parent) continue;
        score += (dyadic_cell(u[k], j + 1) % 2 == 0) ? 1.0 : -1.0;
      }
      double signed_score = sign_delta * score;
      int label = signed_score > 0.0 ? 1 : (signed_score < 0.0 ? -1 : 0);
      result.estimated.labels[static_cast<std::size_t>(i) * depth + j] =
          static_cast<int8_t>(label);
      if (label != result.truth.at(i, j)) ++errors;
    }
    result.error_rates[j] = static_cast<double>(errors) / static_cast<double>(n);
  }
  return result;
}

namespace {

void finalize_report(ScanReport& report, int n_for_threshold, double threshold_mult,
                     const std::vector<std::vector<int>>& block_vertices) {
  report.threshold = threshold_mult * std::sqrt(std::log(static_cast<double>(n_for_threshold)));
  report.z_max = 0.0;
  for (const ScanBlock& block : report.blocks) {
    report.z_max = std::max(report.z_max, std::abs(block.z));
  }
  report.ranking.resize(report.blocks.size());
  std::iota(report.ranking.begin(), report.ranking.end(), 0);
  std::sort(report.ranking.begin(), report.ranking.end(), [&report](int a, int b) {
    double za = std::abs(report.blocks[a].z);
    double zb = std::abs(report.blocks[b].z);
    if (za != zb) return za > zb;
    return std::pair{report.blocks[a].j, report.blocks[a].l} <
           std::pair{report.blocks[b].j, report.blocks[b].l};
  });
  for (int idx : report.ranking) {
    ScanBlock& block = report.blocks[idx];
    block.detected = std::abs(block.z) >= report.threshold;
    if (block.detected) {
      report.detections.push_back(idx);
      report.detection_vertices.push_back(block_vertices[idx]);
    }
  }
}

}  // namespace

std::pair<int, int> default_scan_range(int n) {
  int hi = std::max(3, int_log2(std::max(n, 2)) - 2);
  return {3, hi};
}

ScanReport wavelet_scan(const LatentGraph& lg, const Graphon& w0, int j_lo, int j_hi,
                        double threshold_mult) {
  if (j_lo < 0 || j_hi < j_lo) throw std::invalid_argument("wavelet_scan: bad scale range");
  const std::vector<double>& u = lg.positions();
  int n = lg.n();

  ScanReport report;
  std::vector<std::vector<int>> block_vertices;
  for (int j = j_lo; j <= j_hi; ++j) {
    int n_blocks = 1 << j;
    std::vector<std::vector<int>> members(n_blocks);
    for (int i = 0; i < n; ++i) members[dyadic_cell(u[i], j)].push_back(i);
    for (int l = 0; l < n_blocks; ++l) {
      ScanBlock block;
      block.j = j;
      block.l = l;
      block.m = static_cast<int>(members[l].size());
      block.dyads = static_cast<std::size_t>(block.m) * (block.m - 1) / 2;
      if (block.m >= 2) {
        double acc = 0.0;
        for (std::size_t a = 0; a < members[l].size(); ++a) {
          for (std::size_t b = a + 1; b < members[l].size(); ++b) {
            int i = members[l][a];
            int k = members[l][b];
            acc += (lg.edge(i, k) ? 1.0 : 0.0) - w0(u[i], u[k]);
          }
        }
        block.t = acc / static_cast<double>(block.dyads);
        block.z = std::sqrt(static_cast<double>(block.dyads)) * block.t;
      }
      report.blocks.push_back(block);
      block_vertices.push_back(std::move(members[l]));
    }
  }
  finalize_report(report, n, threshold_mult, block_vertices);
  return report;
}

ScanReport residual_block_scan(const LatentGraph& lg, const FitReport& fit, int j_lo, int j_hi,
                               double threshold_mult) {
  int k = fit.bins;
  int grid_scale = int_log2(k);
  if (j_lo < 0 || j_hi < j_lo) {
    throw std::invalid_argument("residual_block_scan: bad scale range");
  }
  if (j_hi > grid_scale) {
    throw std::invalid_argument("residual_block_scan: scale exceeds log2(K)");
  }
  int n = lg.n();

  ScanReport report;
  std::vector<std::vector<int>> block_vertices;
  for (int j = j_lo; j <= j_hi; ++j) {
    int n_blocks = 1 << j;
    int bins_per_block = k >> j;
    std::vector<std::vector<int>> members(n_blocks);
    for (int i = 0; i < n; ++i) members[fit.bin_of[i] / bins_per_block].push_back(i);
    for (int l = 0; l < n_blocks; ++l) {
      ScanBlock block;
      block.j = j;
      block.l = l;
      block.m = static_cast<int>(members[l].size());
      block.dyads = static_cast<std::size_t>(block.m) * (block.m - 1) / 2;
      if (block.m >= 2) {
        double acc = 0.0;
        for (std::size_t a = 0; a < members[l].size(); ++a) {
          for (std::size_t b = a + 1; b < members[l].size(); ++b) {
            int i = members[l][a];
            int kk = members[l][b];
            acc += (lg.edge(i, kk) ? 1.0 : 0.0) - fit.predict(i, kk);
          }
        }
        block.t = acc / static_cast<double>(block.dyads);
        block.z = std::sqrt(static_cast<double>(block.dyads)) * block.t;
      }
      report.blocks.push_back(block);
      block_vertices.push_back(std::move(members[l]));
    }
  }
  finalize_report(report, n, threshold_mult, block_vertices);
  return report;
}

void ScanReport::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "j,l,m,N,T,Z,detected\n";
  char buf[64];
  for (const ScanBlock& block : blocks) {
    out << block.j << ',' << block.l << ',' << block.m << ',' << block.dyads << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", block.t);
    out << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", block.z);
    out << buf << ',' << (block.detected ? 1 : 0) << '\n';
  }
}

std::string ScanReport::detections_json() const {
  nlohmann::json doc;
  doc["z_max"] = z_max;
  doc["threshold"] = threshold;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t d = 0; d < detections.size(); ++d) {
    const ScanBlock& block = blocks[detections[d]];
    rows.push_back({{"j", block.j},
                    {"l", block.l},
                    {"m", block.m},
                    {"N", block.dyads},
                    {"T", block.t},
                    {"Z", block.z},
                    {"vertices", detection_vertices[d]}});
  }
  doc["detections"] = rows;
  return doc.dump(2);
}

void ScanReport::save_detections_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << detections_json() << '\n';
}

std::pair<double, double> effective_scale_probabilities(const Graphon& g, int scale,
                                                        int grid_size) {
  SquareMatrix w = render_graphon(g, grid_size);
  int k = grid_size;
  int cells_per_child = k >> (scale + 1);
  if (cells_per_child < 1) {
    throw std::invalid_argument("effective_scale_probabilities: grid too coarse");
  }
  double in_acc = 0.0, out_acc = 0.0;
  std::size_t in_count = 0, out_count = 0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (a / (2 * cells_per_child) != b / (2 * cells_per_child)) continue;  // same parent only
      bool same_child = (a / cells_per_child) == (b / cells_per_child);
      if (same_child) {
        in_acc += w(a, b);
        ++in_count;
      } else {
        out_acc += w(a, b);
        ++out_count;
      }
    }
  }
  return {in_count ? in_acc / static_cast<double>(in_count) : 0.0,
          out_count ? out_acc / static_cast<double>(out_count) : 0.0};
}

}  // namespace wlerg
