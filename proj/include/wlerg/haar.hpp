#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace wlerg {

// Identifier of a 1D Haar atom on (0,1): either the constant scaling
// function (DC) or the detail atom psi_{j,l} supported on [l*2^-j, (l+1)*2^-j).
//
// The flat index r provides the canonical bijection used everywhere for
// ordering and serialization: r=0 is DC, and detail (j,l) maps to r = 2^j + l,
// i.e. DC first, then details in lexicographic (j,l) order.
struct WaveletIndex {
  bool dc = true;
  int j = 0;  // scale (detail only)
  int l = 0;  // location in {0,...,2^j-1} (detail only)

  static WaveletIndex DC() { return WaveletIndex{}; }
  static WaveletIndex detail(int j, int l);

  int flat() const { return dc ? 0 : (1 << j) + l; }
  static WaveletIndex from_flat(int r);

  // Scale used by the j(lambda)=max convention; DC counts as scale 0.
  int scale_or_zero() const { return dc ? 0 : j; }

  friend bool operator==(const WaveletIndex& a, const WaveletIndex& b) {
    return a.flat() == b.flat();
  }
  friend std::strong_ordering operator<=>(const WaveletIndex& a, const WaveletIndex& b) {
    return a.flat() <=> b.flat();
  }
};

// Dyadic interval [l*2^-j, (l+1)*2^-j), half-open so that the intervals at a
// fixed scale partition [0,1) exactly.
struct DyadicInterval {
  int j = 0;
  int l = 0;

  double lo() const { return static_cast<double>(l) / static_cast<double>(1 << j); }
  double hi() const { return static_cast<double>(l + 1) / static_cast<double>(1 << j); }
  DyadicInterval left_child() const { return {j + 1, 2 * l}; }
  DyadicInterval right_child() const { return {j + 1, 2 * l + 1}; }
  bool contains(double x) const { return x >= lo() && x < hi(); }
};

// Returns the dyadic cell index floor(x * 2^j), clamped into {0,...,2^j-1}.
int dyadic_cell(double x, int j);

// Pointwise Haar evaluation. DC returns 1; a detail atom returns +2^{j/2} on
// the left child of its interval, -2^{j/2} on the right child, 0 outside.
// Dyadic boundaries follow the half-open convention: eval at x=0.5 for
// (j=0,l=0) is -1.
double eval_haar(const WaveletIndex& idx, double x);

// Dense K x K real matrix, row-major. Shared by surfaces, logit grids and
// coefficient arrays.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int size, double fill = 0.0)
      : size_(size), data_(static_cast<std::size_t>(size) * size, fill) {}

  int size() const { return size_; }
  double& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * size_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * size_ + c]; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool is_symmetric(double tol = 0.0) const;
  double frobenius_norm() const;
  double max_abs_diff(const SquareMatrix& other) const;

 private:
  int size_ = 0;
  std::vector<double> data_;
};

// Output of the unitary 2D Haar analysis of a K x K grid. Entry (r1,r2) is
// the inner product of the grid with the discrete orthonormal tensor atom
// indexed by the flat pair (r1,r2); position equals flat index, so row/column
// r covers DC (r=0) and detail scales j=0..log2(K)-1.
class CoefficientGrid2D {
 public:
  CoefficientGrid2D() = default;
  explicit CoefficientGrid2D(int size) : values_(size) {}
  explicit CoefficientGrid2D(SquareMatrix values) : values_(std::move(values)) {}

  int size() const { return values_.size(); }
  int max_scale() const;  // finest detail scale present: log2(size)-1

  double& at(int r1, int r2) { return values_(r1, r2); }
  double at(int r1, int r2) const { return values_(r1, r2); }
  double& at(const WaveletIndex& a, const WaveletIndex& b) { return values_(a.flat(), b.flat()); }
  double at(const WaveletIndex& a, const WaveletIndex& b) const {
    return values_(a.flat(), b.flat());
  }

  const SquareMatrix& values() const { return values_; }
  SquareMatrix& values() { return values_; }

  // j(lambda) of the tensor pair under the max-scale convention.
  static int pair_scale(int r1, int r2);

  // CSV with header "j1,l1,j2,l2,value"; DC is written as j=-1,l=0.
  void save_csv(const std::string& path) const;
  void write_csv(std::ostream& out) const;
  static CoefficientGrid2D load_csv(const std::string& path);

 private:
  SquareMatrix values_;
};

// Unitary (orthonormal) 2D Haar transform pair on dyadic grids. Forward
// followed by inverse is the identity to floating tolerance and the Euclidean
// norm of the coefficient array equals the Frobenius norm of the grid.
// Throws std::invalid_argument when the grid size is not a power of two.
CoefficientGrid2D forward_haar_2d(const SquareMatrix& grid);
SquareMatrix inverse_haar_2d(const CoefficientGrid2D& coeffs);

// Rescaling between the discrete orthonormal convention above and
// L2((0,1)^2)-orthonormal coefficients of the step function the grid
// represents: continuous = discrete / K.
CoefficientGrid2D to_l2_scale(const CoefficientGrid2D& discrete);
CoefficientGrid2D to_grid_scale(const CoefficientGrid2D& l2);

bool is_power_of_two(int k);
int int_log2(int k);

}  // namespace wlerg
