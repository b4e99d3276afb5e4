#include "wlerg/haar.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace wlerg {

bool is_power_of_two(int k) { return k > 0 && (k & (k - 1)) == 0; }

int int_log2(int k) {
  int j = 0;
  while ((1 << (j + 1)) <= k) ++j;
  return j;
}

WaveletIndex WaveletIndex::detail(int j, int l) {
  if (j < 0 || l < 0 || l >= (1 << j)) {
    throw std::invalid_argument("WaveletIndex: location out of range for scale");
  }
  WaveletIndex idx;
  idx.dc = false;
  idx.j = j;
  idx.l = l;
  return idx;
}

WaveletIndex WaveletIndex::from_flat(int r) {
  if (r < 0) throw std::invalid_argument("WaveletIndex: negative flat index");
  if (r == 0) return DC();
  int j = int_log2(r);
  return detail(j, r - (1 << j));
}

int dyadic_cell(double x, int j) {
  int cell = static_cast<int>(std::floor(x * static_cast<double>(1 << j)));
  if (cell < 0) cell = 0;
  if (cell >= (1 << j)) cell = (1 << j) - 1;
  return cell;
}

double eval_haar(const WaveletIndex& idx, double x) {
  if (idx.dc) return 1.0;
  // Position within the supporting interval, in units of its half-width.
  double t = x * static_cast<double>(1 << idx.j) - static_cast<double>(idx.l);
  if (t < 0.0 || t >= 1.0) return 0.0;
  double amp = std::exp2(0.5 * idx.j);
  return t < 0.5 ? amp : -amp;
}

bool SquareMatrix::is_symmetric(double tol) const {
  for (int r = 0; r < size_; ++r)
    for (int c = r + 1; c < size_; ++c)
      if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
  return true;
}

double SquareMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double SquareMatrix::max_abs_diff(const SquareMatrix& other) const {
  if (other.size_ != size_) throw std::invalid_argument("SquareMatrix: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    m = std::max(m, std::abs(data_[i] - other.data_[i]));
  }
  return m;
}

int CoefficientGrid2D::max_scale() const {
  return size() > 1 ? int_log2(size()) - 1 : 0;
}

int CoefficientGrid2D::pair_scale(int r1, int r2) {
  return std::max(WaveletIndex::from_flat(r1).scale_or_zero(),
                  WaveletIndex::from_flat(r2).scale_or_zero());
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// One-dimensional full-pyramid unitary Haar analysis. With the pairwise
// average/difference butterfly, the final layout puts the coefficient of the
// atom with flat index r at position r.
void haar_forward_1d(double* x, int k, double* scratch) {
  for (int len = k; len > 1; len /= 2) {
    int half = len / 2;
    for (int i = 0; i < half; ++i) {
      double a = x[2 * i];
      double b = x[2 * i + 1];
      scratch[i] = (a + b) * kInvSqrt2;
      scratch[half + i] = (a - b) * kInvSqrt2;
    }
    for (int i = 0; i < len; ++i) x[i] = scratch[i];
  }
}

void haar_inverse_1d(double* x, int k, double* scratch) {
  for (int len = 2; len <= k; len *= 2) {
    int half = len / 2;
    for (int i = 0; i < half; ++i) {
      double a = x[i];
      double d = x[half + i];
      scratch[2 * i] = (a + d) * kInvSqrt2;
      scratch[2 * i + 1] = (a - d) * kInvSqrt2;
    }
    for (int i = 0; i < len; ++i) x[i] = scratch[i];
  }
}

template <typename Step>
void transform_2d(SquareMatrix& m, Step step) {
  int k = m.size();
  std::vector<double> scratch(k);
  std::vector<double> column(k);
  for (int r = 0; r < k; ++r) {
    step(&m.data()[static_cast<std::size_t>(r) * k], k, scratch.data());
  }
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < k; ++r) column[r] = m(r, c);
    step(column.data(), k, scratch.data());
    for (int r = 0; r < k; ++r) m(r, c) = column[r];
  }
}

}  // namespace

CoefficientGrid2D forward_haar_2d(const SquareMatrix& grid) {
  if (!is_power_of_two(grid.size())) {
    throw std::invalid_argument("forward_haar_2d: grid size must be a power of two");
  }
  SquareMatrix work = grid;
  transform_2d(work, haar_forward_1d);
  return CoefficientGrid2D(std::move(work));
}

SquareMatrix inverse_haar_2d(const CoefficientGrid2D& coeffs) {
  if (!is_power_of_two(coeffs.size())) {
    throw std::invalid_argument("inverse_haar_2d: coefficient size must be a power of two");
  }
  SquareMatrix work = coeffs.values();
  transform_2d(work, haar_inverse_1d);
  return work;
}

CoefficientGrid2D to_l2_scale(const CoefficientGrid2D& discrete) {
  CoefficientGrid2D out = discrete;
  double inv = 1.0 / discrete.size();
  for (double& v : out.values().data()) v *= inv;
  return out;
}

CoefficientGrid2D to_grid_scale(const CoefficientGrid2D& l2) {
  CoefficientGrid2D out = l2;
  double k = static_cast<double>(l2.size());
  for (double& v : out.values().data()) v *= k;
  return out;
}

void CoefficientGrid2D::write_csv(std::ostream& out) const {
  out << "j1,l1,j2,l2,value\n";
  char buf[64];
  for (int r1 = 0; r1 < size(); ++r1) {
    WaveletIndex a = WaveletIndex::from_flat(r1);
    for (int r2 = 0; r2 < size(); ++r2) {
      double v = at(r1, r2);
      if (v == 0.0) continue;
      WaveletIndex b = WaveletIndex::from_flat(r2);
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << (a.dc ? -1 : a.j) << ',' << (a.dc ? 0 : a.l) << ','
          << (b.dc ? -1 : b.j) << ',' << (b.dc ? 0 : b.l) << ',' << buf << '\n';
    }
  }
}

void CoefficientGrid2D::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out);
}

CoefficientGrid2D CoefficientGrid2D::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty coefficient CSV: " + path);

  struct Entry {
    int r1, r2;
    double v;
  };
  std::vector<Entry> entries;
  int max_flat = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    int j1, l1, j2, l2;
    double v;
    char comma;
    if (!(ss >> j1 >> comma >> l1 >> comma >> j2 >> comma >> l2 >> comma >> v)) {
      throw std::runtime_error("malformed coefficient CSV line: " + line);
    }
    WaveletIndex a = j1 < 0 ? WaveletIndex::DC() : WaveletIndex::detail(j1, l1);
    WaveletIndex b = j2 < 0 ? WaveletIndex::DC() : WaveletIndex::detail(j2, l2);
    entries.push_back({a.flat(), b.flat(), v});
    max_flat = std::max({max_flat, a.flat(), b.flat()});
  }
  int size = 1;
  while (size <= max_flat) size *= 2;
  CoefficientGrid2D grid(size);
  for (const Entry& e : entries) grid.at(e.r1, e.r2) = e.v;
  return grid;
}

}  // namespace wlerg
