#include "wlerg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wlerg {

double edge_density(const LatentGraph& lg) {
  if (lg.n() < 2) throw std::invalid_argument("edge_density: need n >= 2");
  return static_cast<double>(lg.edge_count()) / static_cast<double>(lg.dyad_count());
}

namespace {

// Row bitsets of the adjacency matrix for fast common-neighbor counting.
class RowBits {
 public:
  explicit RowBits(const LatentGraph& lg)
      : n_(lg.n()), words_((n_ + 63) / 64), bits_(static_cast<std::size_t>(n_) * words_, 0) {
    for (int i = 0; i < n_; ++i) {
      for (int j = i + 1; j < n_; ++j) {
        if (lg.edge(i, j)) {
          set(i, j);
          set(j, i);
        }
      }
    }
  }

  std::size_t common_neighbors(int i, int j) const {
    const std::uint64_t* a = &bits_[static_cast<std::size_t>(i) * words_];
    const std::uint64_t* b = &bits_[static_cast<std::size_t>(j) * words_];
    std::size_t total = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      total += static_cast<std::size_t>(__builtin_popcountll(a[w] & b[w]));
    }
    return total;
  }

 private:
  void set(int i, int j) {
    bits_[static_cast<std::size_t>(i) * words_ + (static_cast<std::size_t>(j) >> 6)] |=
        std::uint64_t{1} << (j & 63);
  }

  int n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

}  // namespace

double hom_density_graph(Motif motif, const LatentGraph& lg) {
  double n = static_cast<double>(lg.n());
  switch (motif) {
    case Motif::edge:
      // Ordered pairs with an edge.
      return 2.0 * static_cast<double>(lg.edge_count()) / (n * n);
    case Motif::twostar: {
      // sum_j deg(j)^2 ordered walks of length two.
      double acc = 0.0;
      for (int d : lg.degrees()) acc += static_cast<double>(d) * d;
      return acc / (n * n * n);
    }
    case Motif::triangle: {
      RowBits rows(lg);
      std::size_t closed = 0;  // ordered pairs (i<j) with an edge, weighted by common neighbors
      for (int i = 0; i < lg.n(); ++i) {
        for (int j = i + 1; j < lg.n(); ++j) {
          if (lg.edge(i, j)) closed += rows.common_neighbors(i, j);
        }
      }
      // closed = 3 * (#triangles); each triangle has 6 ordered embeddings.
      return 2.0 * static_cast<double>(closed) / (n * n * n);
    }
  }
  throw std::logic_error("hom_density_graph: unknown motif");
}

double hom_density_graphon(Motif motif, const Graphon& g, int grid_size) {
  SquareMatrix w = render_graphon(g, grid_size);
  int k = grid_size;
  double inv = 1.0 / static_cast<double>(k);
  switch (motif) {
    case Motif::edge: {
      double acc = 0.0;
      for (double v : w.data()) acc += v;
      return acc * inv * inv;
    }
    case Motif::twostar: {
      double acc = 0.0;
      for (int b = 0; b < k; ++b) {
        double row = 0.0;
        for (int a = 0; a < k; ++a) row += w(a, b);
        acc += (row * inv) * (row * inv);
      }
      return acc * inv;
    }
    case Motif::triangle: {
      double acc = 0.0;
      for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
          double wab = w(a, b);
          if (wab == 0.0) continue;
          double inner = 0.0;
          for (int c = 0; c < k; ++c) inner += w(b, c) * w(c, a);
          acc += wab * inner;
        }
      }
      return acc * inv * inv * inv;
    }
  }
  throw std::logic_error("hom_density_graphon: unknown motif");
}

BandCheck band_region_check(const BandCoefficients& coeffs, double bound, int jmin, int jmax) {
  BandCheck check;
  check.indices_in_band = true;
  for (const auto& [key, value] : coeffs.entries()) {
    for (int flat : {key.first, key.second}) {
      WaveletIndex idx = WaveletIndex::from_flat(flat);
      if (!idx.dc && (idx.j < jmin || idx.j > jmax)) check.indices_in_band = false;
    }
  }
  double energy_margin = bound - std::sqrt(coeffs.coefficient_energy());
  double offset_margin = bound - std::abs(coeffs.c());
  check.margin = std::min(energy_margin, offset_margin);
  check.inside = check.indices_in_band && check.margin >= 0.0;
  return check;
}

double EnergySpectrum::total() const {
  double acc = dc;
  for (double e : by_scale) acc += e;
  return acc;
}

EnergySpectrum wavelet_energy_by_scale(const BandCoefficients& coeffs) {
  EnergySpectrum spectrum;
  spectrum.dc = coeffs.c() * coeffs.c();
  spectrum.by_scale.assign(static_cast<std::size_t>(coeffs.jmax()) + 1, 0.0);
  for (const auto& [key, value] : coeffs.entries()) {
    int scale = CoefficientGrid2D::pair_scale(key.first, key.second);
    double mult = key.first == key.second ? 1.0 : 2.0;
    if (static_cast<std::size_t>(scale) >= spectrum.by_scale.size()) {
      spectrum.by_scale.resize(scale + 1, 0.0);
    }
    spectrum.by_scale[scale] += mult * value * value;
  }
  return spectrum;
}

EnergySpectrum wavelet_energy_by_scale(const CoefficientGrid2D& coeffs) {
  EnergySpectrum spectrum;
  int n = coeffs.size();
  spectrum.by_scale.assign(coeffs.max_scale() + 1, 0.0);
  for (int r1 = 0; r1 < n; ++r1) {
    for (int r2 = 0; r2 < n; ++r2) {
      double v = coeffs.at(r1, r2);
      if (v == 0.0) continue;
      if (r1 == 0 && r2 == 0) {
        spectrum.dc += v * v;
      } else {
        spectrum.by_scale[CoefficientGrid2D::pair_scale(r1, r2)] += v * v;
      }
    }
  }
  return spectrum;
}

namespace {

// One greedy alternation pass maximizing sign * sum_{A x B} F.
double greedy_pass(const SquareMatrix& f, double sign) {
  int k = f.size();
  std::vector<char> in_b(k, 1);
  std::vector<char> in_a(k, 0);
  double best = 0.0;
  for (int iter = 0; iter < 64; ++iter) {
    // Rows whose B-restricted sum improves the objective.
    for (int r = 0; r < k; ++r) {
      double row = 0.0;
      for (int c = 0; c < k; ++c) {
        if (in_b[c]) row += f(r, c);
      }
      in_a[r] = sign * row > 0.0 ? 1 : 0;
    }
    for (int c = 0; c < k; ++c) {
      double col = 0.0;
      for (int r = 0; r < k; ++r) {
        if (in_a[r]) col += f(r, c);
      }
      in_b[c] = sign * col > 0.0 ? 1 : 0;
    }
    double value = 0.0;
    for (int r = 0; r < k; ++r) {
      if (!in_a[r]) continue;
      for (int c = 0; c < k; ++c) {
        if (in_b[c]) value += f(r, c);
      }
    }
    value *= sign;
    if (value <= best + 1e-15 * std::abs(best)) {
      best = std::max(best, value);
      break;
    }
    best = value;
  }
  return best;
}

}  // namespace

CutProxy cut_distance_proxy(const SquareMatrix& a, const SquareMatrix& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cut_distance_proxy: surfaces must share a grid size");
  }
  int k = a.size();
  SquareMatrix f(k);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) f(r, c) = a(r, c) - b(r, c);
  }
  double cell_area = 1.0 / (static_cast<double>(k) * k);
  CutProxy proxy;
  proxy.lower = std::max(greedy_pass(f, +1.0), greedy_pass(f, -1.0)) * cell_area;
  double l1 = 0.0;
  for (double v : f.data()) l1 += std::abs(v);
  proxy.l1 = l1 * cell_area;
  return proxy;
}

}  // namespace wlerg
