#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "wlerg/kernel.hpp"
#include "wlerg/rng.hpp"

using namespace wlerg;

namespace {

WaveletIndex psi1() { return WaveletIndex::detail(0, 0); }

}  // namespace

TEST_CASE("logit_eval") {
  SUBCASE("offset only") {
    BandCoefficients coeffs(0.7);
    CHECK(coeffs.logit_eval(0.123, 0.9) == doctest::Approx(0.7));
  }
  SUBCASE("single diagonal detail coefficient gives the +-1 block pattern") {
    BandCoefficients coeffs;
    coeffs.set(psi1(), psi1(), 1.0);
    CHECK(coeffs.logit_eval(0.25, 0.25) == doctest::Approx(1.0));
    CHECK(coeffs.logit_eval(0.25, 0.75) == doctest::Approx(-1.0));
    CHECK(coeffs.logit_eval(0.75, 0.75) == doctest::Approx(1.0));
  }
  SUBCASE("off-diagonal entries mirror") {
    BandCoefficients coeffs;
    coeffs.set(WaveletIndex::DC(), psi1(), 0.5);
    CHECK(coeffs.logit_eval(0.25, 0.75) == doctest::Approx(0.5 * (1.0 * -1.0 + 1.0 * 1.0)));
    CHECK(coeffs.logit_eval(0.25, 0.25) == doctest::Approx(1.0));
    CHECK(coeffs.get(psi1(), WaveletIndex::DC()) == doctest::Approx(0.5));
  }
}

TEST_CASE("graphon_eval") {
  CHECK(Graphon(BandCoefficients{})(0.4, 0.8) == doctest::Approx(0.5));
  CHECK(Graphon(BandCoefficients(2.0))(0.1, 0.2) == doctest::Approx(0.880797).epsilon(1e-6));
  Graphon two_block(from_two_block(0.8, 0.2));
  CHECK(two_block(0.25, 0.3) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(two_block(0.25, 0.75) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("graphon symmetry and range on random kernels") {
  RngStream rng(3);
  BandCoefficients coeffs(0.3);
  for (int k = 0; k < 12; ++k) {
    WaveletIndex a = WaveletIndex::from_flat(static_cast<int>(rng.next_below(16)));
    WaveletIndex b = WaveletIndex::from_flat(static_cast<int>(rng.next_below(16)));
    coeffs.add(a, b, rng.next_unit() * 2.0 - 1.0);
  }
  Graphon g(coeffs);
  for (int t = 0; t < 200; ++t) {
    double x = rng.next_open_unit();
    double y = rng.next_open_unit();
    double w = g(x, y);
    CHECK(g(y, x) == w);  // exact symmetry
    CHECK(w > 0.0);
    CHECK(w < 1.0);
  }
}

TEST_CASE("from_two_block coefficients") {
  SUBCASE("flat case") {
    BandCoefficients coeffs = from_two_block(0.5, 0.5);
    CHECK(coeffs.c() == doctest::Approx(0.0));
    CHECK(coeffs.get(psi1(), psi1()) == doctest::Approx(0.0));
  }
  SUBCASE("0.8 / 0.2") {
    BandCoefficients coeffs = from_two_block(0.8, 0.2);
    CHECK(coeffs.c() == doctest::Approx(0.0).scale(1.0));
    CHECK(coeffs.get(psi1(), psi1()) == doctest::Approx(1.386294).epsilon(1e-6));
  }
  SUBCASE("0.6 / 0.4") {
    BandCoefficients coeffs = from_two_block(0.6, 0.4);
    CHECK(coeffs.c() == doctest::Approx(0.0).scale(1.0));
    CHECK(coeffs.get(psi1(), psi1()) == doctest::Approx(0.405465).epsilon(1e-6));
  }
  SUBCASE("boundary probabilities rejected") {
    CHECK_THROWS_AS(from_two_block(1.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(from_two_block(0.8, 0.0), std::invalid_argument);
  }
}

TEST_CASE("from_dyadic_sbm") {
  SUBCASE("single block is Erdos-Renyi") {
    SquareMatrix b(1, 0.0);
    Graphon g(from_dyadic_sbm(0, b, logit(0.3)));
    CHECK(g(0.2, 0.9) == doctest::Approx(0.3).epsilon(1e-12));
  }
  SUBCASE("two-block equality with the closed-form constructor") {
    SquareMatrix b(2);
    b(0, 0) = b(1, 1) = logit(0.8);
    b(0, 1) = b(1, 0) = logit(0.2);
    Graphon lhs(from_dyadic_sbm(1, b, 0.0));
    Graphon rhs(from_two_block(0.8, 0.2));
    for (int r = 0; r < 64; ++r) {
      for (int c = 0; c < 64; ++c) {
        double x = (r + 0.5) / 64;
        double y = (c + 0.5) / 64;
        CHECK(std::abs(lhs(x, y) - rhs(x, y)) < 1e-12);
      }
    }
  }
  SUBCASE("random symmetric blocks reproduce sigma(c + beta) at midpoints") {
    RngStream rng(17);
    int scale = 2;
    int k = 1 << scale;
    SquareMatrix b(k);
    for (int r = 0; r < k; ++r) {
      for (int c = r; c < k; ++c) {
        b(r, c) = b(c, r) = rng.next_unit() * 2.0 - 1.0;
      }
    }
    double c0 = 0.4;
    Graphon g(from_dyadic_sbm(scale, b, c0));
    for (int r = 0; r < k; ++r) {
      for (int c = 0; c < k; ++c) {
        double x = (r + 0.5) / k;
        double y = (c + 0.5) / k;
        CHECK(g(x, y) == doctest::Approx(logistic(c0 + b(r, c))).epsilon(1e-10));
      }
    }
  }
  SUBCASE("rejects wrong shapes") {
    CHECK_THROWS_AS(from_dyadic_sbm(2, SquareMatrix(3), 0.0), std::invalid_argument);
    SquareMatrix asym(2);
    asym(0, 1) = 1.0;
    CHECK_THROWS_AS(from_dyadic_sbm(1, asym, 0.0), std::invalid_argument);
  }
}

TEST_CASE("from_low_rank") {
  SUBCASE("empty list gives S = 0") {
    BandCoefficients coeffs = from_low_rank({});
    CHECK(coeffs.stored_entries() == 0);
  }
  SUBCASE("single unit vector is a rank-one diagonal") {
    BandCoefficients coeffs = from_low_rank({LowRankFactor{{{psi1(), 1.0}}}});
    CHECK(coeffs.get(psi1(), psi1()) == doctest::Approx(1.0));
    CHECK(coeffs.wavelet_complexity() == 1);
  }
  SUBCASE("two random vectors match the outer-product oracle entrywise") {
    RngStream rng(5);
    std::vector<WaveletIndex> support;
    for (int r = 0; r < 6; ++r) support.push_back(WaveletIndex::from_flat(r));
    LowRankFactor f1, f2;
    std::vector<double> v1, v2;
    for (const WaveletIndex& idx : support) {
      v1.push_back(rng.next_unit() * 2.0 - 1.0);
      v2.push_back(rng.next_unit() * 2.0 - 1.0);
      f1.loadings.push_back({idx, v1.back()});
      f2.loadings.push_back({idx, v2.back()});
    }
    BandCoefficients coeffs = from_low_rank({f1, f2});
    for (std::size_t a = 0; a < support.size(); ++a) {
      for (std::size_t b = 0; b < support.size(); ++b) {
        double expected = v1[a] * v1[b] + v2[a] * v2[b];
        if (support[a].dc && support[b].dc) continue;  // folded into c
        CHECK(coeffs.get(support[a], support[b]) == doctest::Approx(expected).epsilon(1e-12));
      }
    }
    // DC x DC lands in the offset.
    CHECK(coeffs.c() == doctest::Approx(v1[0] * v1[0] + v2[0] * v2[0]).epsilon(1e-12));

    // PSD of the realized Gram matrix on the active support.
    Eigen::MatrixXd s(support.size(), support.size());
    for (std::size_t a = 0; a < support.size(); ++a) {
      for (std::size_t b = 0; b < support.size(); ++b) {
        s(a, b) = v1[a] * v1[b] + v2[a] * v2[b];
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("hierarchical_anomaly_kernel") {
  SUBCASE("single index") {
    BandCoefficients coeffs = hierarchical_anomaly_kernel({}, 1.0, {psi1()});
    CHECK(coeffs.get(psi1(), psi1()) == doctest::Approx(1.0));
    CHECK(coeffs.stored_entries() == 1);
  }
  SUBCASE("collision sums") {
    BandCoefficients base;
    base.set(psi1(), psi1(), 0.5);
    BandCoefficients coeffs = hierarchical_anomaly_kernel(base, 1.0, {psi1()});
    CHECK(coeffs.get(psi1(), psi1()) == doctest::Approx(1.5));
  }
  SUBCASE("a full scale activates 2^j pairs") {
    std::vector<WaveletIndex> indices;
    for (int l = 0; l < 8; ++l) indices.push_back(WaveletIndex::detail(3, l));
    BandCoefficients coeffs = hierarchical_anomaly_kernel({}, 0.8, indices);
    CHECK(coeffs.wavelet_complexity() == 8);
    CHECK(coeffs.jmax() == 3);
  }
  SUBCASE("tau must be positive") {
    CHECK_THROWS_AS(hierarchical_anomaly_kernel({}, 0.0, {psi1()}), std::invalid_argument);
  }
}

TEST_CASE("wavelet_complexity counts ordered nonzero pairs") {
  BandCoefficients coeffs;
  CHECK(coeffs.wavelet_complexity() == 0);
  CHECK(from_two_block(0.8, 0.2).wavelet_complexity() == 1);

  // 16 anomaly pairs at scale 4 plus 3 disjoint diagonal entries.
  BandCoefficients base;
  base.set(WaveletIndex::detail(1, 0), WaveletIndex::detail(1, 0), 0.2);
  base.set(WaveletIndex::detail(1, 1), WaveletIndex::detail(1, 1), 0.3);
  base.set(WaveletIndex::detail(2, 0), WaveletIndex::detail(2, 0), 0.4);
  std::vector<WaveletIndex> indices;
  for (int l = 0; l < 16; ++l) indices.push_back(WaveletIndex::detail(4, l));
  CHECK(hierarchical_anomaly_kernel(base, 0.8, indices).wavelet_complexity() == 19);

  // Off-diagonal pairs count once per orientation.
  BandCoefficients off;
  off.set(psi1(), WaveletIndex::detail(1, 0), 0.7);
  CHECK(off.wavelet_complexity() == 2);
}

TEST_CASE("coefficient law convolution") {
  using IndexPair = CoefficientLaw::IndexPair;
  std::vector<IndexPair> scalar{{psi1(), psi1()}};

  SUBCASE("point mass at zero is the identity") {
    CoefficientLaw zero(scalar, {0.0}, std::vector<double>{0.0});
    CoefficientLaw law(scalar, {1.5}, std::vector<double>{2.0});
    CoefficientLaw out = convolve_laws(zero, law);
    CHECK(out.mean()[0] == doctest::Approx(1.5));
    CHECK(out.cov()[0][0] == doctest::Approx(2.0));
  }
  SUBCASE("N(1,1) * N(2,4) = N(3,5)") {
    CoefficientLaw a(scalar, {1.0}, std::vector<double>{1.0});
    CoefficientLaw b(scalar, {2.0}, std::vector<double>{4.0});
    CoefficientLaw out = convolve_laws(a, b);
    CHECK(out.mean()[0] == doctest::Approx(3.0));
    CHECK(out.cov()[0][0] == doctest::Approx(5.0));
  }
  SUBCASE("mismatched index sets rejected") {
    CoefficientLaw a(scalar, {0.0}, std::vector<double>{1.0});
    CoefficientLaw b({{psi1(), WaveletIndex::detail(1, 0)}}, {0.0}, std::vector<double>{1.0});
    CHECK_THROWS_AS(convolve_laws(a, b), std::invalid_argument);
  }
}

TEST_CASE("pathwise superposition of sampled coefficient laws") {
  using IndexPair = CoefficientLaw::IndexPair;
  std::vector<IndexPair> indices{{psi1(), psi1()},
                                 {WaveletIndex::detail(1, 0), WaveletIndex::detail(1, 1)},
                                 {WaveletIndex::DC(), WaveletIndex::detail(1, 0)}};
  CoefficientLaw law1(indices, {0.5, -0.2, 0.1}, std::vector<double>{1.0, 0.5, 0.25});
  CoefficientLaw law2(indices, {-0.3, 0.4, 0.0}, std::vector<double>{0.7, 0.1, 0.9});

  RngStream rng(99);
  std::vector<double> theta1 = law1.sample(rng);
  std::vector<double> theta2 = law2.sample(rng);
  std::vector<double> sum(theta1.size());
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = theta1[k] + theta2[k];

  BandCoefficients s1 = law1.realize(theta1);
  BandCoefficients s2 = law2.realize(theta2);
  BandCoefficients s12 = law1.realize(sum);

  RngStream urng(7);
  for (int t = 0; t < 64; ++t) {
    double x = urng.next_open_unit();
    double y = urng.next_open_unit();
    double y1 = s1.logit_eval(x, y);
    double y2 = s2.logit_eval(x, y);
    CHECK(std::abs(s12.logit_eval(x, y) - (y1 + y2)) < 1e-12);
  }
}

TEST_CASE("gaussian sampling matches its law") {
  using IndexPair = CoefficientLaw::IndexPair;
  std::vector<IndexPair> indices{{psi1(), psi1()}, {WaveletIndex::detail(1, 0), WaveletIndex::detail(1, 0)}};
  std::vector<std::vector<double>> cov{{2.0, 0.8}, {0.8, 1.0}};
  CoefficientLaw law(indices, {1.0, -2.0}, cov);

  RngStream rng(123);
  const int draws = 20000;
  double m0 = 0.0, m1 = 0.0, c00 = 0.0, c01 = 0.0, c11 = 0.0;
  for (int i = 0; i < draws; ++i) {
    std::vector<double> theta = law.sample(rng);
    m0 += theta[0];
    m1 += theta[1];
    c00 += (theta[0] - 1.0) * (theta[0] - 1.0);
    c01 += (theta[0] - 1.0) * (theta[1] + 2.0);
    c11 += (theta[1] + 2.0) * (theta[1] + 2.0);
  }
  CHECK(m0 / draws == doctest::Approx(1.0).epsilon(0.05));
  CHECK(m1 / draws == doctest::Approx(-2.0).epsilon(0.05));
  CHECK(c00 / draws == doctest::Approx(2.0).epsilon(0.1));
  CHECK(c01 / draws == doctest::Approx(0.8).epsilon(0.2));
  CHECK(c11 / draws == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("project_logit_surface") {
  SUBCASE("constant grid folds into c") {
    BandCoefficients coeffs = project_logit_surface(SquareMatrix(8, 1.3));
    CHECK(coeffs.c() == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(coeffs.stored_entries() == 0);
  }
  SUBCASE("round trip against the two-block constructor") {
    BandCoefficients truth = from_two_block(0.8, 0.2);
    SquareMatrix grid = render_logit(truth, 16);
    BandCoefficients recovered = project_logit_surface(grid);
    CHECK(recovered.c() == doctest::Approx(truth.c()).scale(1.0));
    CHECK(recovered.get(psi1(), psi1()) ==
          doctest::Approx(truth.get(psi1(), psi1())).epsilon(1e-10));
  }
  SUBCASE("random symmetric grid reconstructs exactly") {
    RngStream rng(8);
    SquareMatrix grid(8);
    for (int r = 0; r < 8; ++r) {
      for (int c = r; c < 8; ++c) {
        grid(r, c) = grid(c, r) = rng.next_unit() * 4.0 - 2.0;
      }
    }
    BandCoefficients coeffs = project_logit_surface(grid);
    SquareMatrix back = render_logit(coeffs, 8);
    CHECK(back.max_abs_diff(grid) < 1e-10);
  }
  SUBCASE("asymmetric grid rejected") {
    SquareMatrix grid(4);
    grid(0, 1) = 1.0;
    CHECK_THROWS_AS(project_logit_surface(grid), std::invalid_argument);
  }
}

TEST_CASE("kernel JSON round trip") {
  BandCoefficients coeffs = from_two_block(0.7, 0.35);
  coeffs.add(WaveletIndex::detail(2, 1), WaveletIndex::detail(3, 5), -0.25);
  auto path = std::filesystem::temp_directory_path() / "wlerg_kernel_test.json";
  coeffs.save_json(path.string());
  BandCoefficients loaded = BandCoefficients::load_json(path.string());
  CHECK(loaded == coeffs);
  std::filesystem::remove(path);
}

TEST_CASE("s00 always folds into c") {
  BandCoefficients coeffs(0.2);
  coeffs.add(WaveletIndex::DC(), WaveletIndex::DC(), 0.3);
  CHECK(coeffs.c() == doctest::Approx(0.5));
  CHECK(coeffs.stored_entries() == 0);
  CHECK(coeffs.get(WaveletIndex::DC(), WaveletIndex::DC()) == 0.0);
}
