#pragma once

#include <span>
#include <vector>

#include "hartree/grid.hpp"

namespace hartree {

/// Periodized power kernel W(x) = |x|^{-alpha} on a grid.
///
/// `real_samples` is indexed like any field (centered coordinates), so
/// real_samples at x is W at displacement x. `multiplier` is the spectral
/// symbol used by convolve_density; it already carries the cell volume.
struct Kernel {
  Grid grid;
  double exponent = 0.0;
  RealArray real_samples;
  RealArray multiplier;
};

/// Samples |x|^{-alpha} at periodic distance |x| <= L/2, zero beyond (box
/// corners), and the cell average of |x|^{-alpha} at the origin.
/// Throws SingularKernel if alpha >= N.
Kernel build_kernel(const Grid& grid, double alpha);

/// W == 0; used for free-particle checks.
Kernel zero_kernel(const Grid& grid);

/// Mean of |x|^{-alpha} over the cube [-h/2, h/2]^N.
double origin_cell_average(int dim, double alpha, double h);

/// |f|^p sample-wise, with |f| = 0 mapped to 0.
RealArray density_power(const Field& f, double p);

/// (W * rho)(x) ~ integral W(x - y) rho(y) dy by midpoint quadrature.
RealArray convolve_density(const Kernel& kernel, const RealArray& density);

/// F_q(f, g) = (1/q) int int W(x - y) |f(x)|^p |g(y)|^p dx dy.
double pair_interaction(double q, const Field& f, const Field& g, const Kernel& kernel, double p);

struct EnergyBreakdown {
  double kinetic = 0.0;
  double interaction = 0.0;
  double total = 0.0;  // kinetic - interaction
};

/// 1/2 sum_j ||grad phi_j||^2 - 1/(2p) sum_{k,j} int (W * |phi_k|^p) |phi_j|^p.
EnergyBreakdown total_energy(const MultiField& mf, const Kernel& kernel, double p);

/// E(h) = 1/2 ||grad h||^2 - F_{2p}(h, h).
double single_energy(const Field& h, const Kernel& kernel, double p);

/// L2 gradient of total_energy with respect to Re<., .>:
///   grad_j = -Lap phi_j - (W * sum_k |phi_k|^p) |phi_j|^{p-2} phi_j.
MultiField energy_gradient(const MultiField& mf, const Kernel& kernel, double p);

struct EnergyAndGradient {
  EnergyBreakdown energy;
  MultiField gradient;
  std::vector<double> grad_norms_sq;  // ||grad phi_j||^2 per component
};

/// Both at the cost of one convolution.
EnergyAndGradient energy_and_gradient(const MultiField& mf, const Kernel& kernel, double p);

/// total_energy(to) - total_energy(from), assembled from d = to - from so
/// that differences far below the energy's own rounding stay resolved.
double energy_difference(const MultiField& from, const MultiField& to, const Kernel& kernel, double p);

/// Real potential each component feels: (W * sum_k |phi_k|^p) |phi_j|^{p-2}.
std::vector<RealArray> effective_potentials(const MultiField& mf, const Kernel& kernel, double p);

/// ||grad_j + lambda_j phi_j||_{L2} per component.
std::vector<double> el_residual(const MultiField& mf, std::span<const double> lambda,
                                const Kernel& kernel, double p);

}  // namespace hartree
