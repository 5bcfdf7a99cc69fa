#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hartree/functional.hpp"
#include "hartree/minimize.hpp"

namespace hartree {

/// One Strang step (half potential, full kinetic, half potential) of
///   -i d/dt psi_j = Lap psi_j + (W * sum_k |psi_k|^p) |psi_j|^{p-2} psi_j.
/// The potential is frozen on each half step, so each sub-flow is an exact
/// phase rotation. Throws NumericalError on NaN.
MultiField step(const MultiField& mf, double dt, const Kernel& kernel, double p);

/// Called as observer(t, state) at every recorded sample.
using Observer = std::function<void(double, const MultiField&)>;

struct EvolveOptions {
  int sample_every = 1;                 // record every k-th step (plus t = 0 and t = T)
  const GroundState* reference = nullptr;  // for orbit_distance, if set
  std::vector<Observer> observers;
  double instability_threshold = 0.1;   // relative energy drift that flags the run
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<std::vector<double>> masses;  // masses[j][sample]
  std::vector<double> energy;
  std::vector<double> orbit_distance;       // empty without a reference
  double dt = 0.0;
  double final_time = 0.0;
  bool unstable = false;

  double max_relative_mass_drift() const;
  double max_energy_drift() const;  // max_t |E(t) - E(0)|
};

/// Propagates mf0 to time T in steps of dt (T/dt rounded to whole steps).
EvolutionTrace evolve(const MultiField& mf0, double T, double dt, const Kernel& kernel, double p,
                      const EvolveOptions& options = {});

/// sqrt( inf_{tau, theta} sum_j || psi_j - e^{i theta_j} phi_j(. - tau) ||_{H1}^2 ).
/// The translation starts from the best grid shift of the density
/// cross-correlation and is then refined continuously within one cell.
double orbit_distance(const MultiField& mf, const GroundState& gs);

/// Minimum over several representatives of the minimizer set.
double orbit_distance(const MultiField& mf, std::span<const GroundState> representatives);

/// Least-squares slope of the unwrapped phase series.
double fitted_phase_rate(std::span<const double> times, std::span<const double> phases);

/// log2(drift_coarse / drift_fine) for runs at dt and dt/2.
double convergence_order(double drift_coarse, double drift_fine);

}  // namespace hartree
