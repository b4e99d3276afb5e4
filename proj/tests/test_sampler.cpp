#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include "wlerg/diagnostics.hpp"
#include "wlerg/kernel.hpp"
#include "wlerg/rng.hpp"
#include "wlerg/sampler.hpp"

using namespace wlerg;

TEST_CASE("single vertex graph") {
  Graphon g(from_edge_probability(0.3));
  LatentGraph lg = sample_graph(g, 1, 0);
  CHECK(lg.n() == 1);
  CHECK(lg.edge_count() == 0);
  CHECK(lg.has_positions());
}

TEST_CASE("dyad index round trip") {
  for (int n : {2, 3, 7, 50, 1000}) {
    std::size_t linear = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++linear) {
        CHECK(LatentGraph::dyad_index(n, i, j) == linear);
        auto [a, b] = LatentGraph::dyad_pair(n, linear);
        CHECK(a == i);
        CHECK(b == j);
      }
    }
  }
}

TEST_CASE("ER edge density lands in the binomial band") {
  // n=2000: N = 1999000 dyads, p = 0.3; the [0.27, 0.33] band has failure
  // probability far below 1e-6.
  Graphon g(from_edge_probability(0.3));
  LatentGraph lg = sample_graph(g, 2000, 7);
  double density = edge_density(lg);
  CHECK(density > 0.27);
  CHECK(density < 0.33);
}

TEST_CASE("two-block within-half density") {
  Graphon g(from_two_block(0.8, 0.2));
  LatentGraph lg = sample_graph(g, 2000, 11);
  const std::vector<double>& u = lg.positions();
  double edges = 0.0, dyads = 0.0;
  for (int i = 0; i < lg.n(); ++i) {
    for (int j = i + 1; j < lg.n(); ++j) {
      bool same_half = (u[i] < 0.5) == (u[j] < 0.5);
      if (!same_half) continue;
      dyads += 1.0;
      if (lg.edge(i, j)) edges += 1.0;
    }
  }
  double within = edges / dyads;
  CHECK(within > 0.77);
  CHECK(within < 0.83);
}

TEST_CASE("latent positions are open-unit and seed-stable") {
  Graphon g(from_edge_probability(0.5));
  LatentGraph a = sample_graph(g, 500, 3);
  LatentGraph b = sample_graph(g, 500, 3);
  LatentGraph c = sample_graph(g, 500, 4);
  for (int i = 0; i < a.n(); ++i) {
    CHECK(a.u(i) > 0.0);
    CHECK(a.u(i) < 1.0);
    CHECK(a.u(i) == b.u(i));
  }
  bool any_differs = false;
  for (int i = 0; i < a.n(); ++i) any_differs |= (a.u(i) != c.u(i));
  CHECK(any_differs);
}

TEST_CASE("thread count does not change the sample") {
  Graphon g(from_two_block(0.7, 0.2));
  LatentGraph serial = sample_graph(g, 257, 42, 1);
  LatentGraph parallel = sample_graph(g, 257, 42, 8);
  REQUIRE(serial.n() == parallel.n());
  CHECK(serial.edge_count() == parallel.edge_count());
  for (int i = 0; i < serial.n(); ++i) {
    for (int j = i + 1; j < serial.n(); ++j) {
      CHECK(serial.edge(i, j) == parallel.edge(i, j));
    }
  }
}

TEST_CASE("coupled sample satisfies its indicator invariant exactly") {
  Graphon g(from_two_block(0.75, 0.25));
  CoupledSample coupled = sample_coupled(g, 60, 5);
  const LatentGraph& lg = coupled.graph;
  for (int i = 0; i < lg.n(); ++i) {
    for (int j = i + 1; j < lg.n(); ++j) {
      bool expected = coupled.xi_at(i, j) <= g(lg.u(i), lg.u(j));
      CHECK(lg.edge(i, j) == expected);
    }
  }
}

TEST_CASE("coupled sample is permutation-consistent") {
  // Permuting vertex labels and re-deriving edges from the permuted (U, xi)
  // reproduces the permuted adjacency exactly.
  Graphon g(from_two_block(0.8, 0.3));
  CoupledSample coupled = sample_coupled(g, 5, 9);
  const LatentGraph& lg = coupled.graph;
  std::vector<int> perm{3, 0, 4, 1, 2};
  for (int i = 0; i < 5; ++i) {
    for (int j = i + 1; j < 5; ++j) {
      int pi = perm[i], pj = perm[j];
      bool rederived = coupled.xi_at(pi, pj) <= g(lg.u(pi), lg.u(pj));
      CHECK(rederived == lg.edge(pi, pj));
    }
  }
}

TEST_CASE("conditional edge means match the kernel") {
  // Fixed latent positions, 10000 edge resamples: each dyad's empirical mean
  // stays within 4 standard errors of W(U_i,U_j) for 99% of dyads.
  Graphon g(from_two_block(0.7, 0.4));
  RngStream urng(301);
  std::vector<double> positions(30);
  for (double& u : positions) u = urng.next_open_unit();
  KernelFn w = [&g](double x, double y) { return g(x, y); };

  const int resamples = 10000;
  int n = static_cast<int>(positions.size());
  std::vector<int> hits(static_cast<std::size_t>(n) * (n - 1) / 2, 0);
  for (int rep = 0; rep < resamples; ++rep) {
    LatentGraph lg = sample_graph_with_positions(w, positions, 1000 + rep);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j, ++idx) {
        hits[idx] += lg.edge(i, j) ? 1 : 0;
      }
    }
  }
  std::size_t idx = 0;
  int outside = 0;
  int total = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++idx) {
      double p = g(positions[i], positions[j]);
      double se = std::sqrt(p * (1.0 - p) / resamples);
      double phat = static_cast<double>(hits[idx]) / resamples;
      ++total;
      if (std::abs(phat - p) > 4.0 * se) ++outside;
    }
  }
  CHECK(static_cast<double>(outside) / total <= 0.01);
}

TEST_CASE("empirical step graphon") {
  SUBCASE("n=2 single edge fills the off-diagonal blocks") {
    LatentGraph lg(2, {0.6, 0.3});
    lg.set_edge(0, 1, true);
    SquareMatrix s = empirical_step_graphon(lg);
    CHECK(s(0, 0) == 0.0);
    CHECK(s(1, 1) == 0.0);
    CHECK(s(0, 1) == 1.0);
    CHECK(s(1, 0) == 1.0);
  }
  SUBCASE("empty graph gives the zero surface") {
    LatentGraph lg(4, {0.1, 0.2, 0.3, 0.4});
    SquareMatrix s = empirical_step_graphon(lg);
    for (double v : s.data()) CHECK(v == 0.0);
  }
  SUBCASE("complete graph on 3 vertices") {
    LatentGraph lg(3, {0.9, 0.1, 0.5});
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) lg.set_edge(i, j, true);
    }
    SquareMatrix s = empirical_step_graphon(lg);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        CHECK(s(a, b) == (a == b ? 0.0 : 1.0));
      }
    }
  }
  SUBCASE("rows follow the latent order") {
    Graphon g(from_two_block(0.9, 0.05));
    LatentGraph lg = sample_graph(g, 200, 21);
    SquareMatrix s = empirical_step_graphon(lg);
    // Ordered by U, the first half should be much denser internally than
    // across halves.
    double within = 0.0, across = 0.0;
    int h = 100;
    for (int a = 0; a < h; ++a) {
      for (int b = 0; b < h; ++b) {
        within += s(a, b);
        across += s(a, b + h);
      }
    }
    CHECK(within / (h * h) > 0.6);
    CHECK(across / (h * h) < 0.35);
  }
}

TEST_CASE("edge list save/load round trip") {
  Graphon g(from_edge_probability(0.2));
  LatentGraph lg = sample_graph(g, 40, 13);
  auto path = std::filesystem::temp_directory_path() / "wlerg_edges_test.txt";
  lg.save_edge_list(path.string());
  LatentGraph loaded = LatentGraph::load_edge_list(path.string());
  REQUIRE(loaded.n() == lg.n());
  CHECK(loaded.edge_count() == lg.edge_count());
  for (int i = 0; i < lg.n(); ++i) {
    for (int j = i + 1; j < lg.n(); ++j) CHECK(loaded.edge(i, j) == lg.edge(i, j));
  }
  CHECK(!loaded.has_positions());
  std::filesystem::remove(path);
}

TEST_CASE("edge list loader symmetrizes and drops junk") {
  auto path = std::filesystem::temp_directory_path() / "wlerg_edges_dirty.txt";
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "0 1\n";
    out << "1 0\n";   // duplicate mirror
    out << "2 2\n";   // self-loop
    out << "1 3\n";
    out << "1 3\n";   // duplicate
  }
  LatentGraph lg = LatentGraph::load_edge_list(path.string());
  CHECK(lg.n() == 4);
  CHECK(lg.edge_count() == 2);
  CHECK(lg.edge(0, 1));
  CHECK(lg.edge(3, 1));
  CHECK(!lg.edge(2, 3));
  std::filesystem::remove(path);

  LatentGraph padded = [&] {
    std::ofstream out(path);
    out << "0 1\n";
    return LatentGraph::load_edge_list(path.string(), 10);
  }();
  CHECK(padded.n() == 10);
  std::filesystem::remove(path);
}

TEST_CASE("masked copy zeroes exactly the masked dyads") {
  Graphon g(from_edge_probability(0.5));
  LatentGraph lg = sample_graph(g, 30, 2);
  DyadMask mask(30);
  mask.set(LatentGraph::dyad_index(30, 3, 7));
  mask.set(LatentGraph::dyad_index(30, 0, 29));
  LatentGraph masked = lg.masked_copy(mask);
  CHECK(!masked.edge(3, 7));
  CHECK(!masked.edge(0, 29));
  for (int i = 0; i < 30; ++i) {
    for (int j = i + 1; j < 30; ++j) {
      if (mask.test_pair(i, j)) continue;
      CHECK(masked.edge(i, j) == lg.edge(i, j));
    }
  }
}
