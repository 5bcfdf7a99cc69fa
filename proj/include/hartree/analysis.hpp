#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hartree/evolve.hpp"
#include "hartree/minimize.hpp"

namespace hartree {

// -- concentration ----------------------------------------------------------

/// Q(R) = sup_y int_{B_R(y)} sum_j |u_j|^2, sup over grid centers, balls in
/// the periodic metric.
struct ConcentrationProfile {
  std::vector<double> radii;
  std::vector<double> Q;
};

ConcentrationProfile concentration_profile(const MultiField& mf, std::span<const double> radii);

// -- scaling arguments ------------------------------------------------------

/// Omega(M, p) = 1/(2p) + (1/p) sum_{j>=2} c_j + 1/(2p) sum_{j,k>=2} c_j c_k,
/// c_j = (M_j / M_1)^{p/2}.
double omega_constant(std::span<const double> masses, double p);

struct ScalingScan {
  std::vector<double> thetas;
  std::vector<double> energies;
  std::vector<double> kinetic;
  double theta_star = 0.0;  // largest theta with negative energy
  double energy_at_star = 0.0;
  double omega = 0.0;
  double base_interaction = 0.0;  // int (W * |u_1|^p) |u_1|^p
};

/// Builds u_j = (M_j / M_1)^{1/2} u1, dilates the tuple by each theta and
/// evaluates the energy. Throws BoxOverflow if a dilation loses mass and
/// Error if no theta gives a negative energy.
ScalingScan scaling_negativity_test(const SystemParams& params, const Field& u1,
                                    std::span<const double> theta_grid, const Kernel& kernel);

struct StrictScaling {
  double scaled_energy = 0.0;   // E(Gamma^{1/2} u)
  double gamma_energy = 0.0;    // Gamma E(u)
  double delta_observed = 0.0;  // Gamma E(u) - E(Gamma^{1/2} u)
  double delta_predicted = 0.0; // (Gamma^p - Gamma) F_{2p}(u, u)
};

StrictScaling strict_scaling_check(const Field& u, double scale, const Kernel& kernel, double p);

/// (E(phi_1) - F_p(phi_1, phi_2), E(phi_2) - F_p(phi_1, phi_2)) for a
/// converged two-component state.
std::pair<double, double> cross_term_check(const GroundState& gs, const Kernel& kernel, double p);

// -- subadditivity ----------------------------------------------------------

struct MassPair {
  std::vector<double> M;
  std::vector<double> T;
  std::string label;
};

/// Outcome of computing I at one mass vector (reduced to its positive
/// entries), best over the seeds.
struct InfimumRun {
  std::vector<double> masses;  // as requested, zeros included
  double value = 0.0;
  bool converged = false;
  std::vector<GroundState> runs;  // one per seed
  const GroundState& best() const;
};

struct SubadditivityRecord {
  MassPair pair;
  double I_M = 0.0, I_T = 0.0, I_sum = 0.0;
  double margin = 0.0;  // I_M + I_T - I_{M+T}
  std::vector<std::uint64_t> seeds;
  bool converged = false;
};

struct ScanOptions {
  SolverOptions solver;
  std::vector<std::uint64_t> seeds{1, 2};
  int workers = 1;
};

struct ScanResult {
  std::vector<SubadditivityRecord> records;  // input order
  std::vector<InfimumRun> runs;              // one per distinct mass vector
};

/// I at `masses`; zero components are dropped and the reduced problem solved.
InfimumRun constrained_infimum(const std::vector<double>& masses, const SystemParams& params,
                               const Kernel& kernel, const ScanOptions& options);

ScanResult subadditivity_scan(std::span<const MassPair> pairs, const SystemParams& params,
                              const Kernel& kernel, const ScanOptions& options);

/// Every unordered (M, T) with entries in {0, 0.5, 1}, M, T != 0 and M + T
/// componentwise positive.
std::vector<MassPair> default_pairs_m2();

/// The five canonical three-component cases plus two seeded random positive
/// pairs.
std::vector<MassPair> default_pairs_m3(std::uint64_t seed);

// -- stability --------------------------------------------------------------

/// Smooth localized random tuple normalized to sum_j ||v_j||_{H1}^2 = 1.
MultiField random_perturbation(const Grid& grid, int m, std::uint64_t seed);

struct StabilityEntry {
  double epsilon = 0.0;
  double initial_distance = 0.0;
  double max_distance = 0.0;  // worst over seeds and sampled times
  double ratio = 0.0;         // max_distance / epsilon (0 for epsilon == 0)
  bool unstable = false;
};

struct StabilityReport {
  std::vector<StabilityEntry> entries;
  double T = 0.0, dt = 0.0;
};

StabilityReport stability_experiment(const GroundState& gs, std::span<const double> epsilons, double T,
                                     double dt, std::span<const std::uint64_t> seeds, const Kernel& kernel,
                                     double p, int sample_every = 10, int workers = 1);

}  // namespace hartree
