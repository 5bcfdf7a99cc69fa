#include "hartree/minimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

// Portable uniform [0, 1) from a 64-bit engine.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

constexpr int kMaxHalvings = 60;

}  // namespace

double GroundState::max_residual() const {
  return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

MultiField initial_guess(const Grid& grid, const std::vector<double>& masses, std::uint64_t seed,
                         bool complex_seed) {
  const int m = static_cast<int>(masses.size());
  if (m < 1) throw InvalidParameter("initial_guess needs at least one mass");
  std::mt19937_64 rng(seed);
  const double L = grid.box_length();

  std::vector<Field> comps;
  for (int j = 0; j < m; ++j) {
    std::vector<double> center(grid.dim()), ramp(grid.dim());
    for (int d = 0; d < grid.dim(); ++d) {
      center[d] = (j - 0.5 * (m - 1)) * 0.02 * L + (uniform01(rng) - 0.5) * 0.04 * L;
      ramp[d] = (0.5 + uniform01(rng)) * 8.0 * std::numbers::pi / L;
    }
    const double sigma = 0.1 * L * (0.9 + 0.2 * uniform01(rng));
    const double phase = 2.0 * std::numbers::pi * uniform01(rng);
    comps.push_back(sample(grid, [&](const std::vector<double>& x) {
      double r2 = 0.0, arg = phase;
      for (int d = 0; d < grid.dim(); ++d) {
        r2 += (x[d] - center[d]) * (x[d] - center[d]);
        arg += ramp[d] * x[d];
      }
      const double amp = std::exp(-r2 / (2.0 * sigma * sigma));
      return complex_seed ? std::polar(amp, arg) : Complex(amp, 0.0);
    }));
  }
  return project_masses(MultiField(std::move(comps)), masses);
}

MultiField project_masses(const MultiField& mf, const std::vector<double>& masses) {
  if (static_cast<int>(masses.size()) != mf.size())
    throw InvalidParameter("one target mass per component required");
  MultiField out = mf;
  for (int j = 0; j < mf.size(); ++j) {
    const double current = mass(mf[j]);
    if (!(current > 0.0)) throw InvalidParameter("cannot project a zero-mass component");
    out[j].data *= std::sqrt(masses[j] / current);
  }
  return out;
}

std::vector<double> extract_multipliers(const MultiField& mf, const Kernel& kernel, double p) {
  const MultiField grad = energy_gradient(mf, kernel, p);
  std::vector<double> lambda(mf.size());
  for (int j = 0; j < mf.size(); ++j) {
    const double mj = mass(mf[j]);
    if (!(mj > 0.0)) throw InvalidParameter("multiplier of a zero-mass component is undefined");
    lambda[j] = -inner(grad[j], mf[j]).real() / mj;
  }
  return lambda;
}

namespace {

struct Diagnostics {
  std::vector<double> lambda;
  std::vector<double> residuals;
};

Diagnostics diagnose(const MultiField& x, const EnergyAndGradient& eg) {
  Diagnostics d;
  for (int j = 0; j < x.size(); ++j) {
    const double mj = mass(x[j]);
    const double lam = -inner(eg.gradient[j], x[j]).real() / mj;
    const double res = std::sqrt(mass(Field(x.grid(), eg.gradient[j].data + lam * x[j].data)));
    d.lambda.push_back(lam);
    d.residuals.push_back(res / std::sqrt(mj + eg.grad_norms_sq[j]));
  }
  return d;
}

}  // namespace

GroundState ground_state(const SystemParams& params, const Kernel& kernel, const MultiField& init,
                         const SolverOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidParameter("solver tolerance must be > 0");
  if (init.size() != static_cast<int>(params.masses.size()))
    throw InvalidParameter("initial guess has the wrong number of components");
  require_same_grid(init.grid(), kernel.grid);
  const double p = params.power;
  const Grid& g = init.grid();
  const double tau0 = 1.0 / (g.k_squared().maxCoeff() + 1.0);

  MultiField x = project_masses(init, params.masses);
  EnergyAndGradient eg = energy_and_gradient(x, kernel, p);
  if (!std::isfinite(eg.energy.total)) throw NumericalError("initial energy is not finite");

  GroundState gs;
  if (options.record_history) gs.energy_history.push_back(eg.energy.total);
  Diagnostics diag = diagnose(x, eg);
  int it = 0;
  for (; it < options.max_iters; ++it) {
    if (*std::max_element(diag.residuals.begin(), diag.residuals.end()) <= options.tol) {
      gs.converged = true;
      break;
    }
    bool accepted = false;
    double tau = tau0;
    for (int h = 0; h < kMaxHalvings; ++h, tau *= 0.5) {
      MultiField trial = x;
      for (int j = 0; j < x.size(); ++j) trial[j].data -= tau * eg.gradient[j].data;
      trial = project_masses(trial, params.masses);
      EnergyAndGradient trial_eg = energy_and_gradient(trial, kernel, p);
      if (!std::isfinite(trial_eg.energy.total)) {
        std::ostringstream os;
        os << "energy became " << trial_eg.energy.total << " at iteration " << it << " (tau = " << tau << ")";
        throw NumericalError(os.str());
      }
      // Rescaling onto the masses rounds at the 1e-16 level; remove that
      // mass error to first order so it cannot mask the true decrease.
      double change = energy_difference(x, trial, kernel, p);
      for (int j = 0; j < x.size(); ++j) {
        const ComplexArray d = trial[j].data - x[j].data;
        const ComplexArray s = trial[j].data + x[j].data;
        change += 0.5 * diag.lambda[j] * g.cell_volume() * (d.conjugate() * s).real().sum();
      }
      if (change <= 0.0) {
        x = std::move(trial);
        eg = std::move(trial_eg);
        if (options.record_history) gs.energy_history.push_back(eg.energy.total);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // stalled at roundoff level
    diag = diagnose(x, eg);
  }

  gs.fields = center_on_peak(x);
  gs.iterations = it;
  gs.energy = total_energy(gs.fields, kernel, p);
  const auto final_eg = energy_and_gradient(gs.fields, kernel, p);
  diag = diagnose(gs.fields, final_eg);
  gs.multipliers = diag.lambda;
  gs.residuals = diag.residuals;
  gs.converged = gs.max_residual() <= options.tol;
  return gs;
}

GroundState ground_state(const SystemParams& params, const Kernel& kernel, std::uint64_t seed,
                         const SolverOptions& options) {
  const Grid grid(params.space_dim, params.points_per_dim, params.box_length);
  GroundState gs = ground_state(params, kernel, initial_guess(grid, params.masses, seed, options.complex_seed),
                                options);
  gs.seed = seed;
  return gs;
}

GroundState single_component_ground(double mass_value, const SystemParams& params, const Kernel& kernel,
                                    const SolverOptions& options, std::uint64_t seed) {
  if (!(mass_value > 0.0)) throw InvalidParameter("single-component mass must be > 0");
  SystemParams single = params;
  single.component_count = 1;
  single.masses = {mass_value};
  GroundState gs = ground_state(single, kernel, seed, options);
  const auto pf = phase_factorize(gs.fields[0]);
  gs.fields[0].data *= std::polar(1.0, -pf.theta);
  return gs;
}

PhaseFactorization phase_factorize(const Field& f) {
  const double norm = std::sqrt(mass(f));
  if (!(norm > 0.0)) throw InvalidParameter("cannot factorize a zero field");
  const RealArray modulus = f.data.abs();
  const Complex overlap = (modulus.cast<Complex>() * f.data).sum();
  PhaseFactorization out;
  out.theta = std::arg(overlap);
  out.aligned = (f.data * std::polar(1.0, -out.theta)).real();
  const ComplexArray diff = f.data - std::polar(1.0, out.theta) * modulus.cast<Complex>();
  out.deviation = std::sqrt(f.grid.cell_volume() * diff.abs2().sum()) / norm;
  return out;
}

double interior_minimum(const Grid& grid, const RealArray& aligned) {
  double lowest = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto idx = grid.unflatten(i);
    if (std::find(idx.begin(), idx.end(), 0) != idx.end()) continue;
    lowest = std::min(lowest, aligned[i]);
  }
  return lowest;
}

double reflection_defect(const Field& f) {
  const Grid& g = f.grid;
  const int n = g.points_per_dim();
  ComplexArray reflected(g.size());
  std::vector<int> idx(g.dim());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto src = g.unflatten(i);
    for (int d = 0; d < g.dim(); ++d) idx[d] = (n - src[d]) % n;
    reflected[g.flatten(idx)] = f.data[i];
  }
  return std::sqrt((f.data - reflected).abs2().sum() / f.data.abs2().sum());
}

MultiField center_on_peak(const MultiField& mf) {
  const Grid& g = mf.grid();
  RealArray total = RealArray::Zero(g.size());
  for (const Field& f : mf) total += f.data.abs2();
  Eigen::Index peak = 0;
  for (Eigen::Index i = 1; i < g.size(); ++i)
    if (total[i] > total[peak]) peak = i;
  const auto idx = g.unflatten(peak);
  std::vector<int> cells(g.dim());
  for (int d = 0; d < g.dim(); ++d) cells[d] = g.points_per_dim() / 2 - idx[d];
  MultiField out = mf;
  for (int j = 0; j < mf.size(); ++j) out[j] = shift(mf[j], cells);
  return out;
}

}  // namespace hartree
