#include "hartree/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hartree/errors.hpp"

namespace hartree {

namespace {

void rotate_by_potential(MultiField& mf, const Kernel& kernel, double p, double tau) {
  const auto pots = effective_potentials(mf, kernel, p);
  for (int j = 0; j < mf.size(); ++j) {
    const RealArray angle = pots[j] * tau;
    mf[j].data *= angle.cos().cast<Complex>() + Complex(0.0, 1.0) * angle.sin().cast<Complex>();
  }
}

}  // namespace

MultiField step(const MultiField& mf, double dt, const Kernel& kernel, double p) {
  if (!(dt > 0.0)) throw InvalidParameter("time step must be > 0");
  require_same_grid(mf.grid(), kernel.grid);
  const Grid& g = mf.grid();

  MultiField out = mf;
  rotate_by_potential(out, kernel, p, 0.5 * dt);

  const RealArray angle = -g.k_squared() * dt;
  const ComplexArray free_flow = angle.cos().cast<Complex>() + Complex(0.0, 1.0) * angle.sin().cast<Complex>();
  for (Field& f : out) f.data = inverse_transform(g, transform(f) * free_flow);

  rotate_by_potential(out, kernel, p, 0.5 * dt);
  for (const Field& f : out)
    if (!f.data.isFinite().all()) throw NumericalError("non-finite state after time step");
  return out;
}

double EvolutionTrace::max_relative_mass_drift() const {
  double worst = 0.0;
  for (const auto& series : masses)
    for (double m : series) worst = std::max(worst, std::abs(m - series.front()) / series.front());
  return worst;
}

double EvolutionTrace::max_energy_drift() const {
  double worst = 0.0;
  for (double e : energy) worst = std::max(worst, std::abs(e - energy.front()));
  return worst;
}

EvolutionTrace evolve(const MultiField& mf0, double T, double dt, const Kernel& kernel, double p,
                      const EvolveOptions& options) {
  if (!(T > 0.0) || !(dt > 0.0)) throw InvalidParameter("evolve needs T > 0 and dt > 0");
  const int sample_every = std::max(1, options.sample_every);
  const long steps = std::max<long>(1, std::lround(T / dt));

  EvolutionTrace trace;
  trace.dt = dt;
  trace.masses.assign(mf0.size(), {});

  auto record = [&](double t, const MultiField& state) {
    trace.times.push_back(t);
    for (int j = 0; j < state.size(); ++j) trace.masses[j].push_back(mass(state[j]));
    trace.energy.push_back(total_energy(state, kernel, p).total);
    if (options.reference) trace.orbit_distance.push_back(orbit_distance(state, *options.reference));
    for (const auto& obs : options.observers) obs(t, state);
  };

  MultiField state = mf0;
  record(0.0, state);
  const double e0 = trace.energy.front();
  for (long s = 1; s <= steps; ++s) {
    state = step(state, dt, kernel, p);
    if (s % sample_every == 0 || s == steps) {
      record(s * dt, state);
      if (std::abs(trace.energy.back() - e0) > options.instability_threshold * std::abs(e0)) {
        trace.unstable = true;
        break;
      }
    }
  }
  trace.final_time = trace.times.back();
  return trace;
}

namespace {

// Spectral data for evaluating the gauge-optimized H1 distance at any
// translation without further transforms.
class GaugeSearch {
 public:
  GaugeSearch(const MultiField& psi, const MultiField& phi) : grid_(psi.grid()) {
    require_same_grid(psi.grid(), phi.grid());
    if (psi.size() != phi.size()) throw InvalidParameter("orbit distance needs matching component counts");
    weight_ = 1.0 + grid_.k_squared();
    for (int j = 0; j < psi.size(); ++j) {
      psi_hat_.push_back(transform(psi[j]));
      phi_hat_.push_back(transform(phi[j]));
    }
  }

  // Per-axis spectral translation factors, Nyquist bin as a cosine.
  ComplexArray translation_factors(std::span<const double> tau) const {
    const int n = grid_.points_per_dim();
    std::vector<std::vector<Complex>> axis(grid_.dim(), std::vector<Complex>(n));
    for (int d = 0; d < grid_.dim(); ++d)
      for (int q = 0; q < n; ++q) {
        const double ph = -grid_.wavenumber(q) * tau[d];
        axis[d][q] = (q == n / 2) ? Complex(std::cos(ph), 0.0) : std::polar(1.0, ph);
      }
    ComplexArray f(grid_.size());
    for (Eigen::Index flat = 0; flat < grid_.size(); ++flat) {
      Eigen::Index rest = flat;
      Complex v = 1.0;
      for (int d = grid_.dim() - 1; d >= 0; --d) {
        v *= axis[d][rest % n];
        rest /= n;
      }
      f[flat] = v;
    }
    return f;
  }

  // Squared distance with the H1-optimal phase per component, evaluated
  // directly from the residual spectrum.
  double distance_sq(std::span<const double> tau) const {
    const ComplexArray factors = translation_factors(tau);
    const double norm = grid_.cell_volume() / static_cast<double>(grid_.size());
    double total = 0.0;
    for (std::size_t j = 0; j < psi_hat_.size(); ++j) {
      const ComplexArray moved = phi_hat_[j] * factors;
      const Complex overlap = (weight_.cast<Complex>() * moved.conjugate() * psi_hat_[j]).sum();
      const Complex rot = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
      total += norm * (weight_ * (psi_hat_[j] - rot * moved).abs2()).sum();
    }
    return total;
  }

 private:
  Grid grid_;
  RealArray weight_;
  std::vector<ComplexArray> psi_hat_, phi_hat_;
};

std::vector<double> best_grid_shift(const MultiField& psi, const MultiField& phi) {
  const Grid& g = psi.grid();
  RealArray rho_psi = RealArray::Zero(g.size()), rho_phi = RealArray::Zero(g.size());
  for (const Field& f : psi) rho_psi += f.data.abs2();
  for (const Field& f : phi) rho_phi += f.data.abs2();
  const ComplexArray corr = inverse_transform(
      g, transform(g, rho_psi.cast<Complex>()) * transform(g, rho_phi.cast<Complex>()).conjugate());
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < g.size(); ++i)
    if (corr[i].real() > corr[best].real()) best = i;
  // corr[s] = sum_x rho_psi(x) rho_phi(x - s h): index s is the shift.
  const auto idx = g.unflatten(best);
  const int n = g.points_per_dim();
  std::vector<double> tau(g.dim());
  for (int d = 0; d < g.dim(); ++d) tau[d] = (idx[d] < n / 2 ? idx[d] : idx[d] - n) * g.spacing();
  return tau;
}

}  // namespace

double orbit_distance(const MultiField& mf, const GroundState& gs) {
  const GaugeSearch search(mf, gs.fields);
  std::vector<double> tau = best_grid_shift(mf, gs.fields);
  const double at_grid = search.distance_sq(tau);

  // Golden-section refinement of each axis within one cell of the grid shift.
  const double h = mf.grid().spacing();
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  std::vector<double> refined = tau;
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int d = 0; d < mf.grid().dim(); ++d) {
      double a = refined[d] - h, b = refined[d] + h;
      auto eval = [&](double v) {
        std::vector<double> t = refined;
        t[d] = v;
        return search.distance_sq(t);
      };
      double c = b - golden * (b - a), e = a + golden * (b - a);
      double fc = eval(c), fe = eval(e);
      for (int it = 0; it < 60 && (b - a) > 1e-12 * h; ++it) {
        if (fc < fe) {
          b = e; e = c; fe = fc;
          c = b - golden * (b - a); fc = eval(c);
        } else {
          a = c; c = e; fc = fe;
          e = a + golden * (b - a); fe = eval(e);
        }
      }
      refined[d] = 0.5 * (a + b);
    }
  }
  const double best = std::min(at_grid, search.distance_sq(refined));
  return std::sqrt(std::max(best, 0.0));
}

double orbit_distance(const MultiField& mf, std::span<const GroundState> representatives) {
  if (representatives.empty()) throw InvalidParameter("no representatives given");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& gs : representatives) best = std::min(best, orbit_distance(mf, gs));
  return best;
}

double fitted_phase_rate(std::span<const double> times, std::span<const double> phases) {
  if (times.size() != phases.size() || times.size() < 2)
    throw InvalidParameter("phase fit needs at least two matching samples");
  std::vector<double> unwrapped(phases.begin(), phases.end());
  for (std::size_t i = 1; i < unwrapped.size(); ++i) {
    double d = phases[i] - phases[i - 1];
    d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
    unwrapped[i] = unwrapped[i - 1] + d;
  }
  const double n = static_cast<double>(times.size());
  double st = 0, sp = 0, stt = 0, stp = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    st += times[i];
    sp += unwrapped[i];
    stt += times[i] * times[i];
    stp += times[i] * unwrapped[i];
  }
  return (n * stp - st * sp) / (n * stt - st * st);
}

double convergence_order(double drift_coarse, double drift_fine) {
  if (!(drift_coarse > 0.0) || !(drift_fine > 0.0)) throw InvalidParameter("drifts must be positive");
  return std::log2(drift_coarse / drift_fine);
}

}  // namespace hartree
