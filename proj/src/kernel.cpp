#include "wlerg/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <json.hpp>

namespace wlerg {

double logistic(double t) {
  // Evaluate through the non-overflowing branch.
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  double e = std::exp(t);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("logit: probability must be in (0,1)");
  return std::log(p / (1.0 - p));
}

void BandCoefficients::widen_band(int jmin, int jmax) {
  jmin_ = std::min(jmin_, jmin);
  jmax_ = std::max(jmax_, jmax);
}

void BandCoefficients::set(const WaveletIndex& a, const WaveletIndex& b, double value) {
  if (a.dc && b.dc) {  // s_00 is confounded with c
    c_ += value;
    return;
  }
  Key key = a.flat() <= b.flat() ? Key{a.flat(), b.flat()} : Key{b.flat(), a.flat()};
  if (value == 0.0) {
    entries_.erase(key);
    return;
  }
  entries_[key] = value;
  if (!a.dc) widen_band(a.j, a.j);
  if (!b.dc) widen_band(b.j, b.j);
}

void BandCoefficients::add(const WaveletIndex& a, const WaveletIndex& b, double value) {
  set(a, b, get(a, b) + value);
}

double BandCoefficients::get(const WaveletIndex& a, const WaveletIndex& b) const {
  if (a.dc && b.dc) return 0.0;
  Key key = a.flat() <= b.flat() ? Key{a.flat(), b.flat()} : Key{b.flat(), a.flat()};
  auto it = entries_.find(key);
  return it == entries_.end() ? 0.0 : it->second;
}

double BandCoefficients::logit_eval(double x, double y) const {
  double acc = c_;
  for (const auto& [key, value] : entries_) {
    WaveletIndex a = WaveletIndex::from_flat(key.first);
    WaveletIndex b = WaveletIndex::from_flat(key.second);
    if (key.first == key.second) {
      acc += value * eval_haar(a, x) * eval_haar(a, y);
    } else {
      acc += value * (eval_haar(a, x) * eval_haar(b, y) + eval_haar(b, x) * eval_haar(a, y));
    }
  }
  return acc;
}

std::size_t BandCoefficients::wavelet_complexity() const {
  std::size_t count = 0;
  for (const auto& [key, value] : entries_) {
    if (value == 0.0) continue;
    count += key.first == key.second ? 1 : 2;
  }
  return count;
}

double BandCoefficients::coefficient_energy() const {
  double energy = 0.0;
  for (const auto& [key, value] : entries_) {
    energy += (key.first == key.second ? 1.0 : 2.0) * value * value;
  }
  return energy;
}

namespace {

WaveletIndex index_from_jl(int j, int l) {
  return j < 0 ? WaveletIndex::DC() : WaveletIndex::detail(j, l);
}

}  // namespace

std::string BandCoefficients::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [key, value] : entries_) {
    WaveletIndex a = WaveletIndex::from_flat(key.first);
    WaveletIndex b = WaveletIndex::from_flat(key.second);
    entries.push_back({{"j1", a.dc ? -1 : a.j},
                       {"l1", a.dc ? 0 : a.l},
                       {"j2", b.dc ? -1 : b.j},
                       {"l2", b.dc ? 0 : b.l},
                       {"value", value}});
  }
  nlohmann::json doc{{"c", c_}, {"band", {jmin_, jmax_}}, {"entries", entries}};
  return doc.dump(2);
}

BandCoefficients BandCoefficients::from_json(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  BandCoefficients out(doc.at("c").get<double>());
  for (const auto& e : doc.at("entries")) {
    WaveletIndex a = index_from_jl(e.at("j1").get<int>(), e.at("l1").get<int>());
    WaveletIndex b = index_from_jl(e.at("j2").get<int>(), e.at("l2").get<int>());
    out.add(a, b, e.at("value").get<double>());
  }
  if (doc.contains("band")) {
    out.widen_band(doc["band"][0].get<int>(), doc["band"][1].get<int>());
  }
  return out;
}

void BandCoefficients::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json() << '\n';
}

BandCoefficients BandCoefficients::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

double Graphon::operator()(double x, double y) const { return logistic(logit(x, y)); }

BandCoefficients from_edge_probability(double p) { return BandCoefficients(logit(p)); }

BandCoefficients from_two_block(double p_in, double p_out) {
  double li = logit(p_in);
  double lo = logit(p_out);
  BandCoefficients out(0.5 * (li + lo));
  out.set(WaveletIndex::detail(0, 0), WaveletIndex::detail(0, 0), 0.5 * (li - lo));
  return out;
}

BandCoefficients from_dyadic_sbm(int j_blocks, const SquareMatrix& block_logits, double c) {
  int k = 1 << j_blocks;
  if (block_logits.size() != k) {
    throw std::invalid_argument("from_dyadic_sbm: block matrix must be 2^J x 2^J");
  }
  if (!block_logits.is_symmetric(1e-12)) {
    throw std::invalid_argument("from_dyadic_sbm: block matrix must be symmetric");
  }
  BandCoefficients out = project_logit_surface(block_logits, 1e-12);
  out.set_c(out.c() + c);
  return out;
}

BandCoefficients from_low_rank(const std::vector<LowRankFactor>& factors) {
  BandCoefficients out;
  for (const LowRankFactor& f : factors) {
    for (std::size_t a = 0; a < f.loadings.size(); ++a) {
      for (std::size_t b = 0; b < f.loadings.size(); ++b) {
        const auto& [ia, va] = f.loadings[a];
        const auto& [ib, vb] = f.loadings[b];
        // The full outer product visits each ordered pair; the canonical
        // store receives every unordered pair twice off the diagonal, so add
        // only the a<=b orientation.
        if (ia.flat() > ib.flat()) continue;
        out.add(ia, ib, va * vb);
      }
    }
  }
  return out;
}

BandCoefficients hierarchical_anomaly_kernel(const BandCoefficients& f0, double tau,
                                             const std::vector<WaveletIndex>& indices) {
  if (!(tau > 0.0)) throw std::invalid_argument("hierarchical_anomaly_kernel: tau must be > 0");
  BandCoefficients out = f0;
  for (const WaveletIndex& r : indices) out.add(r, r, tau);
  return out;
}

BandCoefficients hierarchical_kernel(double c, const std::vector<double>& beta_by_scale) {
  BandCoefficients out(c);
  for (std::size_t j = 0; j < beta_by_scale.size(); ++j) {
    if (beta_by_scale[j] == 0.0) continue;
    for (int l = 0; l < (1 << j); ++l) {
      WaveletIndex idx = WaveletIndex::detail(static_cast<int>(j), l);
      out.add(idx, idx, beta_by_scale[j]);
    }
  }
  return out;
}

BandCoefficients project_logit_surface(const SquareMatrix& logit_grid, double sym_tol) {
  if (!is_power_of_two(logit_grid.size())) {
    throw std::invalid_argument("project_logit_surface: grid size must be a power of two");
  }
  if (!logit_grid.is_symmetric(sym_tol)) {
    throw std::invalid_argument("project_logit_surface: grid must be symmetric");
  }
  CoefficientGrid2D coeffs = to_l2_scale(forward_haar_2d(logit_grid));
  BandCoefficients out(coeffs.at(0, 0));
  int n = coeffs.size();
  for (int r1 = 0; r1 < n; ++r1) {
    for (int r2 = r1; r2 < n; ++r2) {
      if (r1 == 0 && r2 == 0) continue;
      // Store the symmetric average of the two orientations.
      double v = r1 == r2 ? coeffs.at(r1, r2) : 0.5 * (coeffs.at(r1, r2) + coeffs.at(r2, r1));
      if (v != 0.0) {
        out.set(WaveletIndex::from_flat(r1), WaveletIndex::from_flat(r2), v);
      }
    }
  }
  return out;
}

SquareMatrix render_logit(const BandCoefficients& coeffs, int grid_size) {
  SquareMatrix out(grid_size);
  std::vector<double> mids(grid_size);
  for (int i = 0; i < grid_size; ++i) mids[i] = (i + 0.5) / grid_size;
  for (int r = 0; r < grid_size; ++r) {
    for (int c = r; c < grid_size; ++c) {
      double v = coeffs.logit_eval(mids[r], mids[c]);
      out(r, c) = v;
      out(c, r) = v;
    }
  }
  return out;
}

SquareMatrix render_graphon(const Graphon& g, int grid_size) {
  SquareMatrix out = render_logit(g.coeffs(), grid_size);
  for (double& v : out.data()) v = logistic(v);
  return out;
}

CoefficientLaw::CoefficientLaw(std::vector<IndexPair> indices, std::vector<double> mean,
                               std::vector<double> cov_diagonal)
    : indices_(std::move(indices)), mean_(std::move(mean)) {
  if (mean_.size() != indices_.size() || cov_diagonal.size() != indices_.size()) {
    throw std::invalid_argument("CoefficientLaw: dimension mismatch");
  }
  cov_.assign(dim(), std::vector<double>(dim(), 0.0));
  for (std::size_t i = 0; i < dim(); ++i) {
    if (cov_diagonal[i] < 0.0) throw std::invalid_argument("CoefficientLaw: negative variance");
    cov_[i][i] = cov_diagonal[i];
  }
}

CoefficientLaw::CoefficientLaw(std::vector<IndexPair> indices, std::vector<double> mean,
                               std::vector<std::vector<double>> cov)
    : indices_(std::move(indices)), mean_(std::move(mean)), cov_(std::move(cov)) {
  if (mean_.size() != indices_.size() || cov_.size() != indices_.size()) {
    throw std::invalid_argument("CoefficientLaw: dimension mismatch");
  }
  for (const auto& row : cov_) {
    if (row.size() != indices_.size()) {
      throw std::invalid_argument("CoefficientLaw: covariance must be square");
    }
  }
}

CoefficientLaw CoefficientLaw::convolve(const CoefficientLaw& other) const {
  if (indices_ != other.indices_) {
    throw std::invalid_argument("convolve_laws: index sets must match");
  }
  std::vector<double> mean(dim());
  std::vector<std::vector<double>> cov(dim(), std::vector<double>(dim()));
  for (std::size_t i = 0; i < dim(); ++i) {
    mean[i] = mean_[i] + other.mean_[i];
    for (std::size_t j = 0; j < dim(); ++j) cov[i][j] = cov_[i][j] + other.cov_[i][j];
  }
  return CoefficientLaw(indices_, std::move(mean), std::move(cov));
}

std::vector<double> CoefficientLaw::sample(RngStream& rng) const {
  std::size_t d = dim();
  Eigen::MatrixXd sigma(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) sigma(i, j) = cov_[i][j];

  Eigen::MatrixXd root;
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) {
    root = llt.matrixL();
  } else {
    // Semi-definite covariance: symmetric square root with clamped spectrum.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    root = es.eigenvectors() * ev.asDiagonal();
  }

  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < d; ++i) z(static_cast<Eigen::Index>(i)) = rng.next_gaussian();
  Eigen::VectorXd x = root * z;
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = mean_[i] + x(static_cast<Eigen::Index>(i));
  return out;
}

BandCoefficients CoefficientLaw::realize(const std::vector<double>& theta) const {
  if (theta.size() != dim()) throw std::invalid_argument("realize: dimension mismatch");
  BandCoefficients out;
  for (std::size_t k = 0; k < dim(); ++k) {
    out.add(indices_[k].first, indices_[k].second, theta[k]);
  }
  return out;
}

CoefficientLaw convolve_laws(const CoefficientLaw& a, const CoefficientLaw& b) {
  return a.convolve(b);
}

}  // namespace wlerg
