#pragma once

#include <vector>

#include "wlerg/kernel.hpp"
#include "wlerg/sampler.hpp"

namespace wlerg {

// L_n = 2/(n(n-1)) * edge count; requires n >= 2.
double edge_density(const LatentGraph& lg);

enum class Motif { edge, triangle, twostar };

// Homomorphism density t(H,G) = n^{-k} * (number of vertex maps carrying all
// motif edges to edges), with A_ii = 0. twostar is the path on 3 vertices.
double hom_density_graph(Motif motif, const LatentGraph& lg);

// Graphon-side density by midpoint quadrature; exact for band-limited Haar
// kernels once the grid resolves the finest active scale.
double hom_density_graphon(Motif motif, const Graphon& g, int grid_size);

// Membership in the band-limited region Theta_B: |c| <= B and the ordered
// coefficient energy sum s_rs^2 <= B^2, with all stored indices inside the
// requested scale band. The region is closed; margin is the distance to the
// nearer constraint boundary (negative when outside).
struct BandCheck {
  bool inside = false;
  bool indices_in_band = false;
  double margin = 0.0;
};
BandCheck band_region_check(const BandCoefficients& coeffs, double bound, int jmin, int jmax);

// Squared-coefficient totals bucketed by the max-scale convention, with DC
// (the offset direction) kept separate. Buckets sum to the total squared
// coefficient norm.
struct EnergySpectrum {
  double dc = 0.0;
  std::vector<double> by_scale;

  double total() const;
};
EnergySpectrum wavelet_energy_by_scale(const BandCoefficients& coeffs);
EnergySpectrum wavelet_energy_by_scale(const CoefficientGrid2D& coeffs);

// Greedy lower-bound proxy for the cut distance between two K x K step
// surfaces, alternating row/column sign-set selection, reported with the
// trivial L1 upper bound. Always 0 <= lower <= l1.
struct CutProxy {
  double lower = 0.0;
  double l1 = 0.0;
};
CutProxy cut_distance_proxy(const SquareMatrix& a, const SquareMatrix& b);

}  // namespace wlerg
