#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include "wlerg/haar.hpp"
#include "wlerg/rng.hpp"

using namespace wlerg;

namespace {

// Independent pointwise oracle: brute-force inner product of a K x K grid
// against the explicit discrete tensor atom (unit Euclidean norm).
double inner_product_oracle(const SquareMatrix& grid, const WaveletIndex& a,
                            const WaveletIndex& b) {
  int k = grid.size();
  double acc = 0.0;
  double norm = 0.0;
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) {
      double atom = eval_haar(a, (r + 0.5) / k) * eval_haar(b, (c + 0.5) / k);
      acc += grid(r, c) * atom;
      norm += atom * atom;
    }
  }
  return acc / std::sqrt(norm);
}

SquareMatrix random_grid(int k, std::uint64_t seed, double lo = -10.0, double hi = 10.0) {
  RngStream rng(seed);
  SquareMatrix grid(k);
  for (double& v : grid.data()) v = lo + (hi - lo) * rng.next_unit();
  return grid;
}

}  // namespace

TEST_CASE("wavelet index flat bijection and ordering") {
  CHECK(WaveletIndex::DC().flat() == 0);
  CHECK(WaveletIndex::detail(0, 0).flat() == 1);
  CHECK(WaveletIndex::detail(1, 0).flat() == 2);
  CHECK(WaveletIndex::detail(1, 1).flat() == 3);
  CHECK(WaveletIndex::detail(3, 5).flat() == 13);
  for (int r = 0; r < 64; ++r) {
    CHECK(WaveletIndex::from_flat(r).flat() == r);
  }
  CHECK(WaveletIndex::DC() < WaveletIndex::detail(0, 0));
  CHECK(WaveletIndex::detail(1, 1) < WaveletIndex::detail(2, 0));
  CHECK_THROWS(WaveletIndex::detail(2, 4));
}

TEST_CASE("dyadic intervals partition and nest") {
  DyadicInterval root{0, 0};
  CHECK(root.lo() == 0.0);
  CHECK(root.hi() == 1.0);
  CHECK(root.left_child().j == 1);
  CHECK(root.left_child().l == 0);
  CHECK(root.right_child().l == 1);
  // Half-open: 0.5 belongs to the right child only.
  CHECK(!root.left_child().contains(0.5));
  CHECK(root.right_child().contains(0.5));
  for (int j = 0; j <= 4; ++j) {
    double x = 0.3717;
    int hits = 0;
    for (int l = 0; l < (1 << j); ++l) {
      if (DyadicInterval{j, l}.contains(x)) ++hits;
    }
    CHECK(hits == 1);
  }
}

TEST_CASE("eval_haar pointwise values") {
  // psi_1 = 1 on (0,1/2), -1 on (1/2,1)
  CHECK(eval_haar(WaveletIndex::detail(0, 0), 0.25) == doctest::Approx(1.0));
  CHECK(eval_haar(WaveletIndex::DC(), 0.9) == doctest::Approx(1.0));
  CHECK(eval_haar(WaveletIndex::detail(1, 0), 0.1) == doctest::Approx(std::sqrt(2.0)));
  // Half-open boundary convention.
  CHECK(eval_haar(WaveletIndex::detail(0, 0), 0.5) == doctest::Approx(-1.0));
  // Outside the support.
  CHECK(eval_haar(WaveletIndex::detail(2, 1), 0.9) == 0.0);
  CHECK(eval_haar(WaveletIndex::detail(2, 3), 0.8) == doctest::Approx(2.0));
  CHECK(eval_haar(WaveletIndex::detail(2, 3), 0.9) == doctest::Approx(-2.0));
}

TEST_CASE("1D atoms are orthonormal under Riemann sums") {
  // Inner products on a grid finer than every scale involved.
  const int grid = 1 << 8;
  std::vector<WaveletIndex> atoms{WaveletIndex::DC()};
  for (int j = 0; j <= 4; ++j) {
    for (int l = 0; l < (1 << j); ++l) atoms.push_back(WaveletIndex::detail(j, l));
  }
  for (std::size_t a = 0; a < atoms.size(); ++a) {
    for (std::size_t b = a; b < atoms.size(); ++b) {
      double acc = 0.0;
      for (int i = 0; i < grid; ++i) {
        double x = (i + 0.5) / grid;
        acc += eval_haar(atoms[a], x) * eval_haar(atoms[b], x);
      }
      acc /= grid;
      CHECK(std::abs(acc - (a == b ? 1.0 : 0.0)) < 1e-10);
    }
  }
}

TEST_CASE("forward transform matches brute-force inner products") {
  SUBCASE("constant grid concentrates on DC") {
    double a = 1.7;
    SquareMatrix grid(4, a);
    CoefficientGrid2D coeffs = forward_haar_2d(grid);
    CHECK(coeffs.at(0, 0) == doctest::Approx(4.0 * a).epsilon(1e-12));
    for (int r1 = 0; r1 < 4; ++r1) {
      for (int r2 = 0; r2 < 4; ++r2) {
        if (r1 == 0 && r2 == 0) continue;
        CHECK(std::abs(coeffs.at(r1, r2)) < 1e-12);
      }
    }
    CHECK(coeffs.at(0, 0) ==
          doctest::Approx(inner_product_oracle(grid, WaveletIndex::DC(), WaveletIndex::DC())));
  }
  SUBCASE("zero grid") {
    CoefficientGrid2D coeffs = forward_haar_2d(SquareMatrix(8, 0.0));
    for (double v : coeffs.values().data()) CHECK(v == 0.0);
  }
  SUBCASE("every coefficient equals the oracle on a random grid") {
    SquareMatrix grid = random_grid(8, 7);
    CoefficientGrid2D coeffs = forward_haar_2d(grid);
    for (int r1 = 0; r1 < 8; ++r1) {
      for (int r2 = 0; r2 < 8; ++r2) {
        double expected =
            inner_product_oracle(grid, WaveletIndex::from_flat(r1), WaveletIndex::from_flat(r2));
        CHECK(coeffs.at(r1, r2) == doctest::Approx(expected).epsilon(1e-10));
      }
    }
  }
  SUBCASE("non-power-of-two rejected") {
    CHECK_THROWS_AS(forward_haar_2d(SquareMatrix(6)), std::invalid_argument);
  }
}

TEST_CASE("inverse transform") {
  SUBCASE("all-zero coefficients give the zero grid") {
    SquareMatrix grid = inverse_haar_2d(CoefficientGrid2D(4));
    for (double v : grid.data()) CHECK(v == 0.0);
  }
  SUBCASE("single DC coefficient v at K=2 gives the constant grid v/2") {
    CoefficientGrid2D coeffs(2);
    coeffs.at(0, 0) = 3.0;
    SquareMatrix grid = inverse_haar_2d(coeffs);
    for (double v : grid.data()) CHECK(v == doctest::Approx(1.5).epsilon(1e-14));
  }
  SUBCASE("forward then inverse is the identity on random coefficients") {
    CoefficientGrid2D coeffs(8);
    RngStream rng(11);
    for (double& v : coeffs.values().data()) v = rng.next_unit() * 4.0 - 2.0;
    CoefficientGrid2D round = forward_haar_2d(inverse_haar_2d(coeffs));
    CHECK(round.values().max_abs_diff(coeffs.values()) < 1e-12);
  }
}

TEST_CASE("round trip and Parseval across grid sizes") {
  for (int k = 2; k <= 256; k *= 2) {
    SquareMatrix grid = random_grid(k, 100 + k);
    CoefficientGrid2D coeffs = forward_haar_2d(grid);
    SquareMatrix back = inverse_haar_2d(coeffs);
    CHECK(back.max_abs_diff(grid) < 1e-11);
    CHECK(std::abs(coeffs.values().frobenius_norm() - grid.frobenius_norm()) < 1e-10);
  }
}

TEST_CASE("L2 rescaling inverts") {
  SquareMatrix grid = random_grid(16, 42);
  CoefficientGrid2D coeffs = forward_haar_2d(grid);
  CoefficientGrid2D round = to_grid_scale(to_l2_scale(coeffs));
  CHECK(round.values().max_abs_diff(coeffs.values()) < 1e-13);
  // Continuous DC coefficient of a step surface is its mean.
  double mean = 0.0;
  for (double v : grid.data()) mean += v;
  mean /= grid.data().size();
  CHECK(to_l2_scale(coeffs).at(0, 0) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("coefficient CSV round trip with DC written as j=-1") {
  SquareMatrix grid = random_grid(8, 5);
  CoefficientGrid2D coeffs = forward_haar_2d(grid);
  auto path = std::filesystem::temp_directory_path() / "wlerg_coeffs_test.csv";
  coeffs.save_csv(path.string());
  CoefficientGrid2D loaded = CoefficientGrid2D::load_csv(path.string());
  REQUIRE(loaded.size() == coeffs.size());
  CHECK(loaded.values().max_abs_diff(coeffs.values()) == 0.0);

  std::FILE* f = std::fopen(path.string().c_str(), "r");
  REQUIRE(f);
  char header[64];
  REQUIRE(std::fgets(header, sizeof(header), f));
  CHECK(std::string(header) == "j1,l1,j2,l2,value\n");
  char first[128];
  REQUIRE(std::fgets(first, sizeof(first), f));
  CHECK(std::string(first).rfind("-1,0,-1,0,", 0) == 0);
  std::fclose(f);
  std::filesystem::remove(path);
}

TEST_CASE("pair scale uses the max convention") {
  CHECK(CoefficientGrid2D::pair_scale(0, 0) == 0);
  CHECK(CoefficientGrid2D::pair_scale(0, WaveletIndex::detail(3, 2).flat()) == 3);
  CHECK(CoefficientGrid2D::pair_scale(WaveletIndex::detail(1, 0).flat(),
                                      WaveletIndex::detail(4, 7).flat()) == 4);
}
