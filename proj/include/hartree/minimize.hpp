#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hartree/functional.hpp"
#include "hartree/params.hpp"

namespace hartree {

/// A converged (or best-effort) constrained minimizer.
struct GroundState {
  MultiField fields;
  std::vector<double> multipliers;
  EnergyBreakdown energy;
  std::vector<double> residuals;  // ||grad_j + lambda_j phi_j|| / ||phi_j||_{H1}
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::vector<double> energy_history;  // only with SolverOptions::record_history

  double max_residual() const;
};

struct SolverOptions {
  double tol = 1e-6;
  int max_iters = 200000;
  /// Phase ramp and random phases in the initial guess.
  bool complex_seed = false;
  /// Keep the energy after every accepted step in GroundState::energy_history.
  bool record_history = false;
};

/// Seeded initial guess: one Gaussian per component, sigma ~ L/10, with small
/// seed-dependent offsets and widths, projected onto the mass constraint.
/// With `complex_seed`, each component also carries a phase ramp and a
/// random global phase.
MultiField initial_guess(const Grid& grid, const std::vector<double>& masses, std::uint64_t seed,
                         bool complex_seed);

/// phi_j <- sqrt(M_j / mass(phi_j)) phi_j. Throws InvalidParameter on a
/// zero-mass component.
MultiField project_masses(const MultiField& mf, const std::vector<double>& masses);

/// lambda_j = -Re<grad_j, phi_j> / mass(phi_j), the least-squares multiplier.
std::vector<double> extract_multipliers(const MultiField& mf, const Kernel& kernel, double p);

/// Projected L2 gradient descent with backtracking, started from `init`.
/// Never throws for non-convergence; throws NumericalError on NaN energy.
GroundState ground_state(const SystemParams& params, const Kernel& kernel, const MultiField& init,
                         const SolverOptions& options = {});

/// Same, from initial_guess(seed).
GroundState ground_state(const SystemParams& params, const Kernel& kernel, std::uint64_t seed,
                         const SolverOptions& options = {});

/// m = 1 minimizer of E at mass `mass`, phase-aligned to be real.
GroundState single_component_ground(double mass, const SystemParams& params, const Kernel& kernel,
                                    const SolverOptions& options = {}, std::uint64_t seed = 1);

struct PhaseFactorization {
  double theta = 0.0;
  RealArray aligned;  // Re(e^{-i theta} f)
  double deviation = 0.0;
};

/// theta = arg<|f|, f>, deviation = ||f - e^{i theta}|f||| / ||f||.
PhaseFactorization phase_factorize(const Field& f);

/// Smallest aligned value over grid points off the box boundary faces.
double interior_minimum(const Grid& grid, const RealArray& aligned);

/// ||f(x) - f(-x)|| / ||f||, reflection through the origin.
double reflection_defect(const Field& f);

/// Circular shift putting the peak of sum_j |phi_j|^2 at the origin (lowest
/// flat index wins ties).
MultiField center_on_peak(const MultiField& mf);

}  // namespace hartree
