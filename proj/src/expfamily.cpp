#include "wlerg/expfamily.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <json.hpp>

#include "wlerg/diagnostics.hpp"

namespace wlerg {

namespace {

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

BandCoefficients tilt_to_coeffs(const TiltVector& v) {
  BandCoefficients out(v.dc());
  const auto& I = v.index_set();
  for (std::size_t k = 0; k < I.size(); ++k) {
    const auto& [a, b] = I.pair(k);
    if (a.flat() <= b.flat()) out.set(a, b, v.entry(k));
  }
  return out;
}

}  // namespace

StatisticIndexSet StatisticIndexSet::closure(const std::vector<IndexPair>& pairs) {
  std::vector<IndexPair> all;
  for (const auto& [a, b] : pairs) {
    if (a.dc && b.dc) {
      throw std::invalid_argument("StatisticIndexSet: (DC,DC) is confounded with the edge count");
    }
    all.emplace_back(a, b);
    all.emplace_back(b, a);
  }
  std::sort(all.begin(), all.end(), [](const IndexPair& x, const IndexPair& y) {
    return std::pair{x.first.flat(), x.second.flat()} < std::pair{y.first.flat(), y.second.flat()};
  });
  all.erase(std::unique(all.begin(), all.end(),
                        [](const IndexPair& x, const IndexPair& y) {
                          return x.first == y.first && x.second == y.second;
                        }),
            all.end());
  StatisticIndexSet out;
  out.pairs_ = std::move(all);
  return out;
}

int StatisticIndexSet::find(const WaveletIndex& a, const WaveletIndex& b) const {
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    if (pairs_[k].first == a && pairs_[k].second == b) return static_cast<int>(k);
  }
  return -1;
}

int StatisticIndexSet::max_scale() const {
  int m = 0;
  for (const auto& [a, b] : pairs_) {
    m = std::max({m, a.scale_or_zero(), b.scale_or_zero()});
  }
  return m;
}

TiltVector::TiltVector(StatisticIndexSet index_set, double dc)
    : index_set_(std::move(index_set)), dc_(dc), values_(index_set_.size(), 0.0) {}

void TiltVector::set_symmetric(const WaveletIndex& a, const WaveletIndex& b, double v) {
  int k1 = index_set_.find(a, b);
  int k2 = index_set_.find(b, a);
  if (k1 < 0 || k2 < 0) throw std::invalid_argument("TiltVector: pair not in index set");
  values_[k1] = v;
  values_[k2] = v;
}

Eigen::VectorXd TiltVector::to_vector() const {
  Eigen::VectorXd v(dim());
  v(0) = dc_;
  for (std::size_t k = 0; k < values_.size(); ++k) v(1 + static_cast<Eigen::Index>(k)) = values_[k];
  return v;
}

TiltVector TiltVector::from_vector(const StatisticIndexSet& index_set, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != 1 + index_set.size()) {
    throw std::invalid_argument("TiltVector: vector dimension mismatch");
  }
  TiltVector out(index_set, v(0));
  for (std::size_t k = 0; k < index_set.size(); ++k) {
    out.values_[k] = v(1 + static_cast<Eigen::Index>(k));
  }
  // Exact symmetrization across mirrored pairs.
  for (std::size_t k = 0; k < index_set.size(); ++k) {
    const auto& [a, b] = index_set.pair(k);
    int m = index_set.find(b, a);
    if (m >= 0 && static_cast<std::size_t>(m) > k) {
      double avg = 0.5 * (out.values_[k] + out.values_[m]);
      out.values_[k] = avg;
      out.values_[m] = avg;
    }
  }
  return out;
}

TiltVector TiltVector::scaled(double factor) const {
  TiltVector out = *this;
  out.dc_ *= factor;
  for (double& v : out.values_) v *= factor;
  return out;
}

TiltVector TiltVector::plus(const TiltVector& other) const {
  if (!(index_set_ == other.index_set_)) {
    throw std::invalid_argument("TiltVector: index sets must match");
  }
  TiltVector out = *this;
  out.dc_ += other.dc_;
  for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] += other.values_[k];
  return out;
}

double TiltVector::norm() const {
  double s = dc_ * dc_;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

std::vector<double> sufficient_statistics(const LatentGraph& lg, const StatisticIndexSet& I) {
  const std::vector<double>& u = lg.positions();
  std::vector<double> stats(1 + I.size(), 0.0);
  int n = lg.n();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!lg.edge(i, j)) continue;
      stats[0] += 1.0;
      for (std::size_t k = 0; k < I.size(); ++k) {
        const auto& [a, b] = I.pair(k);
        stats[1 + k] += eval_haar(a, u[i]) * eval_haar(b, u[j]);
      }
    }
  }
  return stats;
}

double log_partition(const TiltVector& theta, const std::vector<double>& positions) {
  BandCoefficients coeffs = tilt_to_coeffs(theta);
  int n = static_cast<int>(positions.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      acc += softplus(coeffs.logit_eval(positions[i], positions[j]));
    }
  }
  return acc;
}

double conditional_loglik(const LatentGraph& lg, const TiltVector& theta) {
  std::vector<double> stats = sufficient_statistics(lg, theta.index_set());
  double dot = theta.dc() * stats[0];
  for (std::size_t k = 0; k < theta.index_set().size(); ++k) {
    dot += theta.entry(k) * stats[1 + k];
  }
  return dot - log_partition(theta, lg.positions());
}

MaxentReport maxent_entropy_identity(const TiltVector& theta,
                                     const std::vector<double>& positions) {
  int n = static_cast<int>(positions.size());
  if (n > 5) {
    throw std::invalid_argument("maxent_entropy_identity: enumeration capped at n <= 5");
  }
  if (n < 2) throw std::invalid_argument("maxent_entropy_identity: need n >= 2");

  const StatisticIndexSet& I = theta.index_set();
  BandCoefficients coeffs = tilt_to_coeffs(theta);
  std::size_t n_dyads = static_cast<std::size_t>(n) * (n - 1) / 2;
  std::size_t d = 1 + I.size();

  // Per-dyad logit and statistic contributions.
  std::vector<double> eta(n_dyads);
  std::vector<std::vector<double>> t_dyad(n_dyads, std::vector<double>(d, 0.0));
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++idx) {
      eta[idx] = coeffs.logit_eval(positions[i], positions[j]);
      t_dyad[idx][0] = 1.0;
      for (std::size_t k = 0; k < I.size(); ++k) {
        const auto& [a, b] = I.pair(k);
        t_dyad[idx][1 + k] = eval_haar(a, positions[i]) * eval_haar(b, positions[j]);
      }
    }
  }

  std::size_t n_graphs = std::size_t{1} << n_dyads;
  std::vector<double> logw(n_graphs);
  double logw_max = -1e300;
  for (std::size_t mask = 0; mask < n_graphs; ++mask) {
    double s = 0.0;
    for (std::size_t b = 0; b < n_dyads; ++b) {
      if ((mask >> b) & 1) s += eta[b];
    }
    logw[mask] = s;
    logw_max = std::max(logw_max, s);
  }
  double z = 0.0;
  for (double lw : logw) z += std::exp(lw - logw_max);
  double psi = logw_max + std::log(z);

  MaxentReport report;
  report.log_partition = psi;
  report.moments.assign(d, 0.0);
  double entropy = 0.0;
  for (std::size_t mask = 0; mask < n_graphs; ++mask) {
    double p = std::exp(logw[mask] - psi);
    if (p > 0.0) entropy -= p * (logw[mask] - psi);
    for (std::size_t b = 0; b < n_dyads; ++b) {
      if (!((mask >> b) & 1)) continue;
      for (std::size_t k = 0; k < d; ++k) report.moments[k] += p * t_dyad[b][k];
    }
  }
  report.entropy = entropy;
  return report;
}

Graphon tilted_kernel(const Graphon& g0, const TiltVector& lambda) {
  BandCoefficients coeffs = g0.coeffs();
  coeffs.set_c(coeffs.c() + lambda.dc());
  const StatisticIndexSet& I = lambda.index_set();
  for (std::size_t k = 0; k < I.size(); ++k) {
    const auto& [a, b] = I.pair(k);
    if (a.flat() <= b.flat() && lambda.entry(k) != 0.0) {
      coeffs.add(a, b, lambda.entry(k));
    }
  }
  return Graphon(coeffs);
}

namespace {

struct QuadratureContext {
  int grid = 0;
  SquareMatrix w;                        // base kernel on cell midpoints
  SquareMatrix g;                        // tilt surface g_lambda on midpoints
  std::vector<std::vector<double>> phi;  // per index-set pair, psi_r(x_a) psi_s(x_b) flattened
};

QuadratureContext make_context(const Graphon& g0, const TiltVector& lambda, int grid_size) {
  int needed_scale = std::max(g0.coeffs().jmax(), lambda.index_set().max_scale());
  int min_grid = 1 << (needed_scale + 2);
  if (!is_power_of_two(grid_size) || grid_size < std::max(min_grid, 2)) {
    throw std::invalid_argument(
        "limiting_logmgf: grid size must be a power of two >= 2^(J_max+2)");
  }
  QuadratureContext ctx;
  ctx.grid = grid_size;
  ctx.w = render_graphon(g0, grid_size);
  ctx.g = render_logit(tilt_to_coeffs(lambda), grid_size);

  const StatisticIndexSet& I = lambda.index_set();
  ctx.phi.resize(I.size());
  std::vector<double> mids(grid_size);
  for (int i = 0; i < grid_size; ++i) mids[i] = (i + 0.5) / grid_size;
  for (std::size_t k = 0; k < I.size(); ++k) {
    const auto& [a, b] = I.pair(k);
    std::vector<double> pa(grid_size), pb(grid_size);
    for (int i = 0; i < grid_size; ++i) {
      pa[i] = eval_haar(a, mids[i]);
      pb[i] = eval_haar(b, mids[i]);
    }
    ctx.phi[k].resize(static_cast<std::size_t>(grid_size) * grid_size);
    for (int r = 0; r < grid_size; ++r) {
      for (int c = 0; c < grid_size; ++c) {
        ctx.phi[k][static_cast<std::size_t>(r) * grid_size + c] = pa[r] * pb[c];
      }
    }
  }
  return ctx;
}

double logmgf_value_only(const QuadratureContext& ctx) {
  double acc = 0.0;
  int g = ctx.grid;
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      double w = ctx.w(r, c);
      acc += std::log(1.0 - w + w * std::exp(ctx.g(r, c)));
    }
  }
  return acc / (static_cast<double>(g) * g);
}

}  // namespace

MgfReport limiting_logmgf(const Graphon& g0, const TiltVector& lambda, int grid_size) {
  QuadratureContext ctx = make_context(g0, lambda, grid_size);
  std::size_t d = 1 + lambda.index_set().size();
  int g = ctx.grid;

  MgfReport report;
  report.grid_size = grid_size;
  report.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  report.hessian = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));

  std::vector<double> v(d);
  double value = 0.0;
  for (int r = 0; r < g; ++r) {
    for (int c = 0; c < g; ++c) {
      std::size_t cell = static_cast<std::size_t>(r) * g + c;
      double w = ctx.w(r, c);
      double eg = std::exp(ctx.g(r, c));
      double z = 1.0 - w + w * eg;
      value += std::log(z);
      double q = w * eg / z;
      double qv = q * (1.0 - q);
      v[0] = 1.0;
      for (std::size_t k = 1; k < d; ++k) v[k] = ctx.phi[k - 1][cell];
      for (std::size_t a = 0; a < d; ++a) {
        report.gradient(static_cast<Eigen::Index>(a)) += q * v[a];
        for (std::size_t b = a; b < d; ++b) {
          report.hessian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
              qv * v[a] * v[b];
        }
      }
    }
  }
  double cell_area = 1.0 / (static_cast<double>(g) * g);
  report.value = value * cell_area;
  report.gradient *= cell_area;
  report.hessian *= cell_area;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      report.hessian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          report.hessian(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(report.hessian);
  report.min_hessian_eigenvalue = es.eigenvalues().minCoeff();
  return report;
}

std::string MgfReport::to_json() const {
  nlohmann::json doc;
  doc["value"] = value;
  doc["gradient"] = std::vector<double>(gradient.data(), gradient.data() + gradient.size());
  nlohmann::json hess = nlohmann::json::array();
  for (Eigen::Index r = 0; r < hessian.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < hessian.cols(); ++c) row.push_back(hessian(r, c));
    hess.push_back(row);
  }
  doc["hessian"] = hess;
  doc["min_hessian_eigenvalue"] = min_hessian_eigenvalue;
  doc["grid_size"] = grid_size;
  return doc.dump(2);
}

double conditional_logmgf(const Graphon& g0, const TiltVector& lambda,
                          const std::vector<double>& positions) {
  BandCoefficients tilt = tilt_to_coeffs(lambda);
  int n = static_cast<int>(positions.size());
  if (n < 2) throw std::invalid_argument("conditional_logmgf: need n >= 2");
  double acc = 0.0;
  std::size_t dyads = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++dyads) {
      double w = logistic(g0.coeffs().logit_eval(positions[i], positions[j]));
      double eg = std::exp(tilt.logit_eval(positions[i], positions[j]));
      acc += std::log(1.0 - w + w * eg);
    }
  }
  return acc / static_cast<double>(dyads);
}

RateResult rate_function(const Graphon& g0, const TiltVector& target_mean, int grid_size) {
  const StatisticIndexSet& I = target_mean.index_set();
  Eigen::VectorXd t = target_mean.to_vector();
  TiltVector lambda(I);

  constexpr int kMaxIterations = 100;
  constexpr double kTolerance = 1e-10;

  MgfReport report = limiting_logmgf(g0, lambda, grid_size);
  double merit = report.value - t.dot(lambda.to_vector());
  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    Eigen::VectorXd residual = report.gradient - t;
    if (residual.norm() < kTolerance) {
      RateResult out;
      out.value = t.dot(lambda.to_vector()) - report.value;
      out.argmax = lambda;
      out.iterations = iter - 1;
      return out;
    }
    Eigen::VectorXd step = report.hessian.ldlt().solve(-residual);
    // Backtrack on the dual merit Lambda(lambda) - <lambda,t>; strict
    // convexity guarantees descent for small enough steps.
    double alpha = 1.0;
    for (int half = 0; half < 60; ++half) {
      TiltVector candidate =
          TiltVector::from_vector(I, lambda.to_vector() + alpha * step);
      QuadratureContext ctx = make_context(g0, candidate, grid_size);
      double cand_merit = logmgf_value_only(ctx) - t.dot(candidate.to_vector());
      if (cand_merit <= merit + 1e-15) {
        lambda = candidate;
        merit = cand_merit;
        break;
      }
      alpha *= 0.5;
      if (half == 59) {
        throw std::runtime_error("rate_function: line search failed (boundary moment?)");
      }
    }
    report = limiting_logmgf(g0, lambda, grid_size);
  }
  throw std::runtime_error(
      "rate_function: Newton did not converge; target mean is outside the attainable region");
}

std::vector<TiltPathRow> tilt_path_diagnostics(const Graphon& g0, const TiltVector& direction,
                                               const std::vector<double>& ts, int n,
                                               const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("tilt_path_diagnostics: need at least one seed");
  std::vector<TiltPathRow> rows;
  rows.reserve(ts.size());
  for (double t : ts) {
    Graphon g = tilted_kernel(g0, direction.scaled(t));
    TiltPathRow row;
    row.t = t;
    EnergySpectrum spectrum = wavelet_energy_by_scale(g.coeffs());
    row.energy.push_back(spectrum.dc);
    row.energy.insert(row.energy.end(), spectrum.by_scale.begin(), spectrum.by_scale.end());

    std::vector<double> edges, triangles;
    for (std::uint64_t seed : seeds) {
      LatentGraph sample = sample_graph(g, n, seed);
      edges.push_back(edge_density(sample));
      triangles.push_back(hom_density_graph(Motif::triangle, sample));
    }
    auto mean_sd = [](const std::vector<double>& xs) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
      return std::pair{mean, sd};
    };
    std::tie(row.edge_mean, row.edge_sd) = mean_sd(edges);
    std::tie(row.triangle_mean, row.triangle_sd) = mean_sd(triangles);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_tilt_path_csv(const std::vector<TiltPathRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  std::size_t n_scales = 0;
  for (const auto& row : rows) n_scales = std::max(n_scales, row.energy.size());
  out << "t,edge_density_mean,edge_density_sd,triangle_density_mean,triangle_density_sd";
  for (std::size_t s = 1; s < n_scales; ++s) out << ",energy_scale_" << (s - 1);
  out << ",energy_dc\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", row.t);
    out << buf;
    put(row.edge_mean);
    put(row.edge_sd);
    put(row.triangle_mean);
    put(row.triangle_sd);
    for (std::size_t s = 1; s < n_scales; ++s) {
      put(s < row.energy.size() ? row.energy[s] : 0.0);
    }
    put(row.energy.empty() ? 0.0 : row.energy[0]);
    out << '\n';
  }
}

}  // namespace wlerg
