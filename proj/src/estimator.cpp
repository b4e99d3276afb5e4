#include "wlerg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wlerg {

double ThresholdPlan::threshold_at(int scale) const {
  return base_threshold * std::exp2(scale);
}

ThresholdPlan threshold_plan_for_dyads(std::size_t n_dyads, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("threshold_plan: kappa must be >= 0");
  ThresholdPlan plan;
  plan.multiplier = kappa;
  plan.dyad_count = n_dyads;
  double log_n = n_dyads > 0 ? std::log(static_cast<double>(n_dyads)) : 0.0;
  if (n_dyads <= 1 || log_n <= 0.0) {
    // Degenerate floor: a single dyad carries no multiscale information.
    plan.max_scale = 0;
    plan.base_threshold = 0.0;
    return plan;
  }
  double budget = static_cast<double>(n_dyads) / log_n;
  int j = 0;
  while (std::exp2(2.0 * (j + 1)) <= budget) ++j;
  plan.max_scale = j;
  plan.base_threshold = kappa * std::sqrt(log_n / static_cast<double>(n_dyads));
  return plan;
}

ThresholdPlan threshold_plan(int n, double kappa) {
  if (n < 2) throw std::invalid_argument("threshold_plan: need n >= 2");
  return threshold_plan_for_dyads(static_cast<std::size_t>(n) * (n - 1) / 2, kappa);
}

CoefficientGrid2D empirical_coefficients(const LatentGraph& lg, int max_scale) {
  if (lg.n() < 2) throw std::invalid_argument("empirical_coefficients: need n >= 2");
  const std::vector<double>& u = lg.positions();
  int n = lg.n();
  int atoms = 1 << (max_scale + 1);  // DC plus details at scales 0..max_scale
  CoefficientGrid2D out(atoms);

  // Active-atom sparsity: at any point exactly one detail per scale (plus DC)
  // is nonzero, so each vertex touches max_scale+2 atoms.
  std::vector<std::vector<std::pair<int, double>>> active(n);
  for (int i = 0; i < n; ++i) {
    auto& list = active[i];
    list.reserve(max_scale + 2);
    list.emplace_back(0, 1.0);
    for (int j = 0; j <= max_scale; ++j) {
      WaveletIndex idx = WaveletIndex::detail(j, dyadic_cell(u[i], j));
      list.emplace_back(idx.flat(), eval_haar(idx, u[i]));
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!lg.edge(i, j)) continue;
      // Both orientations accumulate; the symmetrized coefficient divides by
      // the number of ordered pairs below.
      for (const auto& [ra, va] : active[i]) {
        for (const auto& [rb, vb] : active[j]) {
          double prod = va * vb;
          out.at(ra, rb) += prod;
          out.at(rb, ra) += prod;
        }
      }
    }
  }
  double scale = 1.0 / (static_cast<double>(n) * (n - 1));
  for (double& v : out.values().data()) v *= scale;
  return out;
}

CoefficientGrid2D threshold_coefficients(const CoefficientGrid2D& coeffs,
                                         const ThresholdPlan& plan) {
  CoefficientGrid2D out = coeffs;
  int atoms = coeffs.size();
  for (int r1 = 0; r1 < atoms; ++r1) {
    for (int r2 = 0; r2 < atoms; ++r2) {
      if (r1 == 0 && r2 == 0) continue;  // DC carries the mean
      int scale = CoefficientGrid2D::pair_scale(r1, r2);
      double v = out.at(r1, r2);
      if (scale > plan.max_scale || std::abs(v) < plan.threshold_at(scale)) {
        out.at(r1, r2) = 0.0;
      }
    }
  }
  return out;
}

SquareMatrix reconstruct_graphon(const CoefficientGrid2D& survivors, double clip_eps,
                                 int grid_size) {
  if (!(clip_eps > 0.0 && clip_eps < 0.5)) {
    throw std::invalid_argument("reconstruct_graphon: clip level must be in (0, 0.5)");
  }
  int max_scale = 0;
  for (int r1 = 0; r1 < survivors.size(); ++r1) {
    for (int r2 = 0; r2 < survivors.size(); ++r2) {
      if (survivors.at(r1, r2) != 0.0) {
        max_scale = std::max(max_scale, CoefficientGrid2D::pair_scale(r1, r2));
      }
    }
  }
  int min_grid = 1 << (max_scale + 1);
  if (grid_size == 0) grid_size = std::max(min_grid, survivors.size());
  if (!is_power_of_two(grid_size) || grid_size < min_grid) {
    throw std::invalid_argument("reconstruct_graphon: grid too coarse for stored scales");
  }

  // Embed the L2-scale coefficients into a grid-sized array and invert on the
  // discrete scale.
  CoefficientGrid2D embedded(grid_size);
  int atoms = std::min(survivors.size(), grid_size);
  for (int r1 = 0; r1 < atoms; ++r1) {
    for (int r2 = 0; r2 < atoms; ++r2) {
      embedded.at(r1, r2) = survivors.at(r1, r2) * grid_size;
    }
  }
  SquareMatrix surface = inverse_haar_2d(embedded);
  for (double& v : surface.data()) v = std::clamp(v, clip_eps, 1.0 - clip_eps);
  return surface;
}

namespace {

std::vector<int> order_by_key(int n, const std::vector<double>& key) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&key](int a, int b) { return key[a] < key[b]; });
  return order;
}

std::vector<std::vector<int>> connected_components(const LatentGraph& lg) {
  int n = lg.n();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<int>> components;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    int id = static_cast<int>(components.size());
    components.emplace_back();
    stack.push_back(s);
    comp[s] = id;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      components[id].push_back(v);
      for (int w = 0; w < n; ++w) {
        if (comp[w] < 0 && lg.edge(v, w)) {
          comp[w] = id;
          stack.push_back(w);
        }
      }
    }
    std::sort(components[id].begin(), components[id].end());
  }
  return components;
}

// Fiedler coordinates of one connected component by deflated power
// iteration on sigma*I - L, keeping iterates orthogonal to the constant
// vector. Returns per-vertex values aligned with `vertices`.
std::vector<double> fiedler_coordinates(const LatentGraph& lg, const std::vector<int>& vertices) {
  int m = static_cast<int>(vertices.size());
  if (m == 1) return {0.0};
  std::vector<int> local(lg.n(), -1);
  for (int a = 0; a < m; ++a) local[vertices[a]] = a;

  std::vector<std::vector<int>> adj(m);
  std::vector<double> degree(m, 0.0);
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      if (lg.edge(vertices[a], vertices[b])) {
        adj[a].push_back(b);
        adj[b].push_back(a);
        degree[a] += 1.0;
        degree[b] += 1.0;
      }
    }
  }
  double sigma = 2.0 * *std::max_element(degree.begin(), degree.end()) + 1.0;

  // Deterministic start spread along the index axis.
  std::vector<double> x(m), next(m);
  for (int a = 0; a < m; ++a) x[a] = static_cast<double>(a) - 0.5 * (m - 1);

  auto deflate_normalize = [m](std::vector<double>& v) {
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / m;
    double norm = 0.0;
    for (double& t : v) {
      t -= mean;
      norm += t * t;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-300) {
      // Degenerate iterate; restart from an alternating vector (always
      // orthogonal-ish to the constant after re-centering).
      double fallback_norm = 0.0;
      for (std::size_t a = 0; a < v.size(); ++a) {
        v[a] = (a % 2 == 0) ? 1.0 : -1.0;
        fallback_norm += 1.0;
      }
      double fmean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
      fallback_norm = 0.0;
      for (double& t : v) {
        t -= fmean;
        fallback_norm += t * t;
      }
      fallback_norm = std::sqrt(fallback_norm);
      if (fallback_norm > 0.0) {
        for (double& t : v) t /= fallback_norm;
      }
      return;
    }
    for (double& t : v) t /= norm;
  };
  deflate_normalize(x);

  constexpr int kMaxIterations = 4000;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    for (int a = 0; a < m; ++a) {
      double acc = (sigma - degree[a]) * x[a];
      for (int b : adj[a]) acc += x[b];
      next[a] = acc;
    }
    deflate_normalize(next);
    double delta = 0.0;
    for (int a = 0; a < m; ++a) delta = std::max(delta, std::abs(next[a] - x[a]));
    x.swap(next);
    if (delta < 1e-13) break;
  }
  for (double v : x) {
    if (v != 0.0) {
      if (v < 0.0) {
        for (double& t : x) t = -t;
      }
      break;
    }
  }
  return x;
}

}  // namespace

std::vector<int> seriation(const LatentGraph& lg, SeriationMethod method, bool* disconnected) {
  int n = lg.n();
  if (disconnected) *disconnected = false;
  if (method == SeriationMethod::degree) {
    std::vector<int> deg = lg.degrees();
    std::vector<double> key(deg.begin(), deg.end());
    return order_by_key(n, key);
  }

  auto components = connected_components(lg);
  if (components.size() > 1 && disconnected) *disconnected = true;
  // Components by size descending, ties by smallest vertex id.
  std::sort(components.begin(), components.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              if (a.size() != b.size()) return a.size() > b.size();
              return a.front() < b.front();
            });

  std::vector<int> ordering;
  ordering.reserve(n);
  for (const auto& vertices : components) {
    std::vector<double> coords = fiedler_coordinates(lg, vertices);
    std::vector<int> local(vertices.size());
    std::iota(local.begin(), local.end(), 0);
    std::stable_sort(local.begin(), local.end(),
                     [&coords](int a, int b) { return coords[a] < coords[b]; });
    for (int a : local) ordering.push_back(vertices[a]);
  }
  return ordering;
}

OrderedHistogram build_ordered_histogram(const LatentGraph& lg, SeriationMethod method, int bins,
                                         const DyadMask* holdout) {
  int n = lg.n();
  if (bins < 1 || bins > n) {
    throw std::invalid_argument("build_ordered_histogram: bins must be in [1, n]");
  }
  if (holdout && holdout->n() != n) {
    throw std::invalid_argument("build_ordered_histogram: holdout mask size mismatch");
  }

  OrderedHistogram hist;
  // Strict holdout: masked dyads vanish from every training computation,
  // including the ordering.
  LatentGraph training = holdout ? lg.masked_copy(*holdout) : lg;
  hist.ordering = seriation(training, method, &hist.disconnected);

  hist.bin_of.assign(n, 0);
  int base = n / bins;
  int extra = n % bins;  // leading bins take one extra vertex
  int pos = 0;
  for (int b = 0; b < bins; ++b) {
    int width = base + (b < extra ? 1 : 0);
    for (int k = 0; k < width; ++k) hist.bin_of[hist.ordering[pos++]] = b;
  }

  std::vector<std::vector<double>> edges(bins, std::vector<double>(bins, 0.0));
  std::vector<std::vector<double>> counts(bins, std::vector<double>(bins, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (holdout && holdout->test_pair(i, j)) continue;
      int a = hist.bin_of[i];
      int b = hist.bin_of[j];
      if (a > b) std::swap(a, b);
      counts[a][b] += 1.0;
      hist.training_dyads += 1;
      if (training.edge(i, j)) {
        edges[a][b] += 1.0;
        hist.training_edges += 1;
      }
    }
  }
  if (hist.training_dyads == 0) {
    throw std::invalid_argument("build_ordered_histogram: no training dyads left");
  }
  hist.global_density = (static_cast<double>(hist.training_edges) + 0.5) /
                        (static_cast<double>(hist.training_dyads) + 1.0);

  hist.probabilities = SquareMatrix(bins);
  for (int a = 0; a < bins; ++a) {
    for (int b = a; b < bins; ++b) {
      double p;
      if (counts[a][b] == 0.0) {
        p = hist.global_density;
        ++hist.empty_cells;
      } else {
        p = (edges[a][b] + 0.5) / (counts[a][b] + 1.0);
      }
      hist.probabilities(a, b) = p;
      hist.probabilities(b, a) = p;
    }
  }
  return hist;
}

FitReport fit_pipeline(const LatentGraph& lg, SeriationMethod method, int bins, double kappa,
                       const DyadMask* holdout) {
  if (!is_power_of_two(bins)) {
    throw std::invalid_argument("fit_pipeline: K must be a power of two");
  }
  OrderedHistogram hist = build_ordered_histogram(lg, method, bins, holdout);

  SquareMatrix logits(bins);
  for (int a = 0; a < bins; ++a) {
    for (int b = 0; b < bins; ++b) logits(a, b) = logit(hist.probabilities(a, b));
  }

  FitReport fit;
  fit.method = method;
  fit.bins = bins;
  fit.kappa = kappa;
  fit.ordering = std::move(hist.ordering);
  fit.bin_of = std::move(hist.bin_of);
  fit.training_dyads = hist.training_dyads;
  fit.global_density = hist.global_density;
  fit.empty_cells = hist.empty_cells;
  fit.disconnected = hist.disconnected;
  fit.plan = threshold_plan_for_dyads(hist.training_dyads, kappa);

  // Multiscale shrinkage on the logit scale; the rule operates on
  // L2-normalized coefficients so the scale correction matches the
  // observed-design estimator.
  CoefficientGrid2D coeffs = to_l2_scale(forward_haar_2d(logits));
  CoefficientGrid2D kept = threshold_coefficients(coeffs, fit.plan);

  int grid_scale = bins > 1 ? int_log2(bins) - 1 : 0;
  fit.survivors_by_scale.assign(grid_scale + 1, 0);
  for (int r1 = 0; r1 < kept.size(); ++r1) {
    for (int r2 = 0; r2 < kept.size(); ++r2) {
      double v = kept.at(r1, r2);
      if (v == 0.0) continue;
      int scale = CoefficientGrid2D::pair_scale(r1, r2);
      fit.survivors.push_back({r1, r2, scale, v});
      if (!(r1 == 0 && r2 == 0)) ++fit.survivors_by_scale[scale];
    }
  }

  SquareMatrix eta = inverse_haar_2d(to_grid_scale(kept));
  fit.surface = SquareMatrix(bins);
  for (int a = 0; a < bins; ++a) {
    for (int b = 0; b < bins; ++b) {
      fit.surface(a, b) = std::clamp(logistic(eta(a, b)), fit.clip_lo, fit.clip_hi);
    }
  }
  return fit;
}

BandCoefficients recover_logit_coefficients(const FitReport& fit) {
  int k = fit.surface.size();
  SquareMatrix logits(k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) logits(a, b) = logit(fit.surface(a, b));
  }
  CoefficientGrid2D coeffs = to_l2_scale(forward_haar_2d(logits));
  BandCoefficients out(coeffs.at(0, 0));
  constexpr double kNoiseFloor = 1e-12;
  for (int r1 = 0; r1 < k; ++r1) {
    for (int r2 = r1; r2 < k; ++r2) {
      if (r1 == 0 && r2 == 0) continue;
      double v = r1 == r2 ? coeffs.at(r1, r2) : 0.5 * (coeffs.at(r1, r2) + coeffs.at(r2, r1));
      if (std::abs(v) > kNoiseFloor) {
        out.set(WaveletIndex::from_flat(r1), WaveletIndex::from_flat(r2), v);
      }
    }
  }
  return out;
}

std::string FitReport::to_json() const {
  nlohmann::json doc;
  doc["method"] = method == SeriationMethod::degree ? "degree" : "fiedler";
  doc["K"] = bins;
  doc["kappa"] = kappa;
  doc["plan"] = {{"J_n", plan.max_scale},
                 {"tau_n", plan.base_threshold},
                 {"kappa", plan.multiplier},
                 {"training_dyads", plan.dyad_count}};
  doc["ordering"] = ordering;
  doc["bin_of"] = bin_of;
  doc["clip"] = {clip_lo, clip_hi};
  doc["training_dyads"] = training_dyads;
  doc["global_density"] = global_density;
  doc["empty_cells"] = empty_cells;
  doc["disconnected"] = disconnected;
  doc["survivors_by_scale"] = survivors_by_scale;
  nlohmann::json survivor_rows = nlohmann::json::array();
  for (const SurvivorEntry& s : survivors) {
    WaveletIndex a = WaveletIndex::from_flat(s.flat1);
    WaveletIndex b = WaveletIndex::from_flat(s.flat2);
    survivor_rows.push_back({{"j1", a.dc ? -1 : a.j},
                             {"l1", a.dc ? 0 : a.l},
                             {"j2", b.dc ? -1 : b.j},
                             {"l2", b.dc ? 0 : b.l},
                             {"scale", s.scale},
                             {"value", s.value}});
  }
  doc["survivors"] = survivor_rows;
  return doc.dump(2);
}

void FitReport::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json() << '\n';
}

void FitReport::save_surface_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "row,col,p\n";
  char buf[64];
  for (int r = 0; r < surface.size(); ++r) {
    for (int c = 0; c < surface.size(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", surface(r, c));
      out << r << ',' << c << ',' << buf << '\n';
    }
  }
}

SquareMatrix FitReport::load_surface_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  struct Cell {
    int r, c;
    double p;
  };
  std::vector<Cell> cells;
  int size = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int r, c;
    double p;
    char comma;
    if (!(ss >> r >> comma >> c >> comma >> p)) {
      throw std::runtime_error("malformed surface CSV line: " + line);
    }
    cells.push_back({r, c, p});
    size = std::max({size, r + 1, c + 1});
  }
  SquareMatrix m(size);
  for (const Cell& cell : cells) m(cell.r, cell.c) = cell.p;
  return m;
}

}  // namespace wlerg
