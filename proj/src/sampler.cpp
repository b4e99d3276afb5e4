#include "wlerg/sampler.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wlerg/rng.hpp"

namespace wlerg {

namespace {

std::size_t dyads_of(int n) {
  return static_cast<std::size_t>(n) * (n - 1) / 2;
}

}  // namespace

DyadMask::DyadMask(int n)
    : n_(n), count_(dyads_of(n)), bits_((count_ + 63) / 64, 0) {}

void DyadMask::set(std::size_t linear) { bits_[linear >> 6] |= std::uint64_t{1} << (linear & 63); }

bool DyadMask::test_pair(int i, int j) const {
  if (i == j) return false;
  return test(LatentGraph::dyad_index(n_, i, j));
}

LatentGraph::LatentGraph(int n)
    : n_(n), dyads_(dyads_of(n)), bits_((dyads_ + 63) / 64, 0) {
  if (n < 1) throw std::invalid_argument("LatentGraph: vertex count must be >= 1");
}

LatentGraph::LatentGraph(int n, std::vector<double> positions) : LatentGraph(n) {
  set_positions(std::move(positions));
}

void LatentGraph::set_positions(std::vector<double> u) {
  if (static_cast<int>(u.size()) != n_) {
    throw std::invalid_argument("LatentGraph: positions size mismatch");
  }
  u_ = std::move(u);
}

void LatentGraph::adopt_bits(std::vector<std::uint64_t> bits) {
  if (bits.size() != bits_.size()) throw std::invalid_argument("adopt_bits: size mismatch");
  bits_ = std::move(bits);
}

const std::vector<double>& LatentGraph::positions() const {
  if (!has_positions()) throw std::logic_error("LatentGraph: latent positions not available");
  return u_;
}

std::size_t LatentGraph::dyad_index(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  // Row-major upper triangle: row i contributes n-1-i entries.
  return static_cast<std::size_t>(i) * (2 * n - i - 1) / 2 + (j - i - 1);
}

std::pair<int, int> LatentGraph::dyad_pair(int n, std::size_t linear) {
  // Invert the row-major triangular index: the row start of i is
  // s(i) = i*(2n-i-1)/2; solve the quadratic and correct for rounding.
  double nn = static_cast<double>(n);
  double disc = (2.0 * nn - 1.0) * (2.0 * nn - 1.0) - 8.0 * static_cast<double>(linear);
  int i = static_cast<int>((2.0 * nn - 1.0 - std::sqrt(std::max(disc, 0.0))) / 2.0);
  i = std::clamp(i, 0, n - 2);
  auto row_start = [n](int r) {
    return static_cast<std::size_t>(r) * (2 * n - r - 1) / 2;
  };
  while (i > 0 && row_start(i) > linear) --i;
  while (i < n - 2 && row_start(i + 1) <= linear) ++i;
  return {i, i + 1 + static_cast<int>(linear - row_start(i))};
}

bool LatentGraph::edge(int i, int j) const {
  if (i == j) return false;
  std::size_t idx = dyad_index(i, j);
  return (bits_[idx >> 6] >> (idx & 63)) & 1;
}

void LatentGraph::set_edge(int i, int j, bool present) {
  if (i == j) return;
  std::size_t idx = dyad_index(i, j);
  std::uint64_t bit = std::uint64_t{1} << (idx & 63);
  if (present) {
    bits_[idx >> 6] |= bit;
  } else {
    bits_[idx >> 6] &= ~bit;
  }
}

std::size_t LatentGraph::edge_count() const {
  std::size_t total = 0;
  for (std::uint64_t w : bits_) total += static_cast<std::size_t>(__builtin_popcountll(w));
  return total;
}

std::vector<int> LatentGraph::degrees() const {
  std::vector<int> deg(n_, 0);
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if (edge(i, j)) {
        ++deg[i];
        ++deg[j];
      }
    }
  }
  return deg;
}

LatentGraph LatentGraph::masked_copy(const DyadMask& mask) const {
  if (mask.n() != n_) throw std::invalid_argument("masked_copy: mask size mismatch");
  LatentGraph out = *this;
  for (std::size_t w = 0; w < bits_.size(); ++w) {
    std::uint64_t keep = ~std::uint64_t{0};
    for (int b = 0; b < 64; ++b) {
      std::size_t linear = (w << 6) + b;
      if (linear >= dyads_) break;
      if (mask.test(linear)) keep &= ~(std::uint64_t{1} << b);
    }
    out.bits_[w] &= keep;
  }
  return out;
}

void LatentGraph::save_edge_list(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "# n=" << n_ << '\n';
  for (int i = 0; i < n_; ++i) {
    for (int j = i + 1; j < n_; ++j) {
      if (edge(i, j)) out << i << ' ' << j << '\n';
    }
  }
}

LatentGraph LatentGraph::load_edge_list(const std::string& path, int n_hint) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::pair<int, int>> pairs;
  int n = n_hint;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto pos = line.find("n=");
      if (pos != std::string::npos) {
        n = std::max(n, std::atoi(line.c_str() + pos + 2));
      }
      continue;
    }
    std::istringstream ss(line);
    int i, j;
    if (!(ss >> i >> j)) throw std::runtime_error("malformed edge list line: " + line);
    if (i < 0 || j < 0) throw std::runtime_error("negative vertex id in edge list");
    if (i == j) continue;  // drop self-loops
    pairs.emplace_back(i, j);
    n = std::max({n, i + 1, j + 1});
  }
  if (n < 1) throw std::runtime_error("edge list defines no vertices: " + path);
  LatentGraph g(n);
  for (auto [i, j] : pairs) g.set_edge(i, j, true);  // duplicates and mirrors collapse
  return g;
}

void LatentGraph::save_positions_csv(const std::string& path) const {
  const std::vector<double>& u = positions();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "vertex,u\n";
  char buf[64];
  for (int i = 0; i < n_; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", u[i]);
    out << i << ',' << buf << '\n';
  }
}

std::vector<double> LatentGraph::load_positions_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::pair<int, double>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int i;
    char comma;
    double u;
    if (!(ss >> i >> comma >> u)) throw std::runtime_error("malformed positions line: " + line);
    rows.emplace_back(i, u);
  }
  std::vector<double> u(rows.size(), 0.0);
  for (auto [i, v] : rows) {
    if (i < 0 || i >= static_cast<int>(u.size())) {
      throw std::runtime_error("positions CSV: vertex id out of range");
    }
    u[i] = v;
  }
  return u;
}

namespace {

// Latent uniform for vertex i: open (0,1), zero draws redrawn with a bumped
// attempt counter.
double latent_uniform(std::uint64_t key, int i) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    double u = u64_to_unit(hash3(key, static_cast<std::uint64_t>(i), attempt));
    if (u > 0.0) return u;
  }
}

std::vector<double> sample_positions(int n, std::uint64_t seed) {
  std::uint64_t key = seed_from_label(seed, "latent-u");
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = latent_uniform(key, i);
  return u;
}

double edge_uniform(std::uint64_t key, int i, int j) {
  return u64_to_unit(hash3(key, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
}

// Fills the packed adjacency words [word_lo, word_hi); each word covers 64
// consecutive linear dyad indices, so threads own disjoint words.
void fill_words(LatentGraph& g, const KernelFn& w, std::uint64_t xi_key,
                std::size_t word_lo, std::size_t word_hi, std::vector<std::uint64_t>& words,
                std::vector<double>* xi_out) {
  const std::vector<double>& u = g.positions();
  int n = g.n();
  std::size_t dyads = g.dyad_count();
  for (std::size_t word = word_lo; word < word_hi; ++word) {
    std::uint64_t acc = 0;
    std::size_t base = word << 6;
    auto [i, j] = LatentGraph::dyad_pair(n, std::min(base, dyads - 1));
    for (int b = 0; b < 64; ++b) {
      std::size_t linear = base + b;
      if (linear >= dyads) break;
      double xi = edge_uniform(xi_key, i, j);
      if (xi_out) (*xi_out)[linear] = xi;
      if (xi <= w(u[i], u[j])) acc |= std::uint64_t{1} << b;
      // advance (i,j) through the upper triangle
      if (++j >= n) {
        ++i;
        j = i + 1;
      }
    }
    words[word] = acc;
  }
}

LatentGraph sample_core(const KernelFn& w, std::vector<double> positions, std::uint64_t seed,
                        int threads, std::vector<double>* xi_out) {
  int n = static_cast<int>(positions.size());
  if (n < 1) throw std::invalid_argument("sample_graph: vertex count must be >= 1");
  LatentGraph g(n, std::move(positions));
  if (n == 1) return g;

  std::uint64_t xi_key = seed_from_label(seed, "edge-xi");
  std::size_t words = (g.dyad_count() + 63) / 64;
  std::vector<std::uint64_t> packed(words, 0);
  if (xi_out) xi_out->assign(g.dyad_count(), 0.0);

  threads = std::max(1, threads);
  if (threads == 1 || words < 2) {
    fill_words(g, w, xi_key, 0, words, packed, xi_out);
  } else {
    std::vector<std::thread> pool;
    std::size_t chunk = (words + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::size_t lo = static_cast<std::size_t>(t) * chunk;
      std::size_t hi = std::min(words, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back([&, lo, hi] { fill_words(g, w, xi_key, lo, hi, packed, xi_out); });
    }
    for (auto& th : pool) th.join();
  }

  g.adopt_bits(std::move(packed));
  return g;
}

}  // namespace

LatentGraph sample_graph(const KernelFn& w, int n, std::uint64_t seed, int threads) {
  return sample_core(w, sample_positions(n, seed), seed, threads, nullptr);
}

LatentGraph sample_graph(const Graphon& g, int n, std::uint64_t seed, int threads) {
  return sample_graph(KernelFn([&g](double x, double y) { return g(x, y); }), n, seed, threads);
}

LatentGraph sample_graph_with_positions(const KernelFn& w, std::vector<double> positions,
                                        std::uint64_t seed, int threads) {
  return sample_core(w, std::move(positions), seed, threads, nullptr);
}

CoupledSample sample_coupled(const Graphon& g, int n, std::uint64_t seed) {
  CoupledSample out;
  KernelFn w = [&g](double x, double y) { return g(x, y); };
  out.graph = sample_core(w, sample_positions(n, seed), seed, 1, &out.xi);
  return out;
}

double CoupledSample::xi_at(int i, int j) const {
  return xi[LatentGraph::dyad_index(graph.n(), i, j)];
}

SquareMatrix empirical_step_graphon(const LatentGraph& lg) {
  const std::vector<double>& u = lg.positions();
  int n = lg.n();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&u](int a, int b) { return u[a] < u[b]; });
  SquareMatrix out(n);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      double v = lg.edge(order[a], order[b]) ? 1.0 : 0.0;
      out(a, b) = v;
      out(b, a) = v;
    }
  }
  return out;
}

}  // namespace wlerg
