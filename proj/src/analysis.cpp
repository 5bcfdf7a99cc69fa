#include "hartree/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "hartree/errors.hpp"
#include "hartree/parallel.hpp"

namespace hartree {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Periodic distance of each displacement-ordered index from the origin.
RealArray displacement_radius(const Grid& g) {
  const int n = g.points_per_dim();
  RealArray r(g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const auto idx = g.unflatten(i);
    double s = 0.0;
    for (int c : idx) {
      const double d = (c < n / 2 ? c : c - n) * g.spacing();
      s += d * d;
    }
    r[i] = std::sqrt(s);
  }
  return r;
}

}  // namespace

ConcentrationProfile concentration_profile(const MultiField& mf, std::span<const double> radii) {
  const Grid& g = mf.grid();
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw InvalidParameter("radii must be increasing");

  RealArray rho = RealArray::Zero(g.size());
  for (const Field& f : mf) rho += f.data.abs2();
  const ComplexArray rho_hat = transform(g, rho.cast<Complex>());
  const RealArray dist = displacement_radius(g);

  ConcentrationProfile out;
  double running = 0.0;
  for (double R : radii) {
    const RealArray ball = (dist <= R).cast<double>();
    const RealArray sums =
        inverse_transform(g, rho_hat * transform(g, ball.cast<Complex>())).real() * g.cell_volume();
    // Nested balls: clamp the O(eps) FFT noise so Q stays nondecreasing.
    running = std::max(running, sums.maxCoeff());
    out.radii.push_back(R);
    out.Q.push_back(running);
  }
  return out;
}

double omega_constant(std::span<const double> masses, double p) {
  if (masses.empty() || !(masses[0] > 0.0)) throw InvalidParameter("omega needs M_1 > 0");
  double single = 0.0, pairs = 0.0;
  for (std::size_t j = 1; j < masses.size(); ++j) {
    const double cj = std::pow(masses[j] / masses[0], 0.5 * p);
    single += cj;
    for (std::size_t k = 1; k < masses.size(); ++k) pairs += cj * std::pow(masses[k] / masses[0], 0.5 * p);
  }
  return 1.0 / (2.0 * p) + single / p + pairs / (2.0 * p);
}

ScalingScan scaling_negativity_test(const SystemParams& params, const Field& u1,
                                    std::span<const double> theta_grid, const Kernel& kernel) {
  const double p = params.power;
  const auto& M = params.masses;
  const double m1 = mass(u1);
  if (std::abs(m1 - M[0]) > 1e-8 * M[0]) throw InvalidParameter("u1 must carry mass M_1");

  ScalingScan scan;
  scan.omega = omega_constant(M, p);
  scan.base_interaction = 2.0 * p * pair_interaction(2.0 * p, u1, u1, kernel, p);
  bool found = false;
  for (double theta : theta_grid) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InvalidParameter("theta grid must lie in (0, 1]");
    const Field scaled = dilate(u1, theta);
    if (std::abs(mass(scaled) - m1) > 1e-6 * m1)
      throw BoxOverflow("dilation by theta = " + std::to_string(theta) + " pushes mass out of the box");
    std::vector<Field> comps;
    for (double mj : M) comps.emplace_back(u1.grid, scaled.data * std::sqrt(mj / M[0]));
    const auto e = total_energy(MultiField(std::move(comps)), kernel, p);
    scan.thetas.push_back(theta);
    scan.energies.push_back(e.total);
    scan.kinetic.push_back(e.kinetic);
    if (e.total < 0.0 && (!found || theta > scan.theta_star)) {
      found = true;
      scan.theta_star = theta;
      scan.energy_at_star = e.total;
    }
  }
  if (!found) throw Error("no dilation in the grid gives negative energy; try smaller theta or a larger box");
  return scan;
}

StrictScaling strict_scaling_check(const Field& u, double scale, const Kernel& kernel, double p) {
  if (!(scale > 1.0)) throw InvalidParameter("strict scaling needs Gamma > 1");
  const Field scaled(u.grid, u.data * std::sqrt(scale));
  StrictScaling out;
  out.scaled_energy = single_energy(scaled, kernel, p);
  out.gamma_energy = scale * single_energy(u, kernel, p);
  out.delta_observed = out.gamma_energy - out.scaled_energy;
  out.delta_predicted = (std::pow(scale, p) - scale) * pair_interaction(2.0 * p, u, u, kernel, p);
  return out;
}

std::pair<double, double> cross_term_check(const GroundState& gs, const Kernel& kernel, double p) {
  if (gs.fields.size() != 2) throw InvalidParameter("cross-term check needs two components");
  if (!gs.converged) throw InvalidParameter("cross-term check needs a converged state");
  const double coupling = pair_interaction(p, gs.fields[0], gs.fields[1], kernel, p);
  return {single_energy(gs.fields[0], kernel, p) - coupling, single_energy(gs.fields[1], kernel, p) - coupling};
}

const GroundState& InfimumRun::best() const {
  const GroundState* best = nullptr;
  for (const auto& r : runs)
    if (r.converged && (!best || r.energy.total < best->energy.total)) best = &r;
  return best ? *best : runs.front();
}

InfimumRun constrained_infimum(const std::vector<double>& masses, const SystemParams& params,
                               const Kernel& kernel, const ScanOptions& options) {
  const SystemParams reduced = reduced_params(params, masses);
  InfimumRun out;
  out.masses = masses;
  for (auto seed : options.seeds) out.runs.push_back(ground_state(reduced, kernel, seed, options.solver));
  out.converged = std::all_of(out.runs.begin(), out.runs.end(), [](const auto& r) { return r.converged; });
  out.value = out.best().energy.total;
  return out;
}

ScanResult subadditivity_scan(std::span<const MassPair> pairs, const SystemParams& params, const Kernel& kernel,
                              const ScanOptions& options) {
  // I only depends on the multiset of positive masses (all couplings equal),
  // so each distinct sorted vector is solved once.
  auto key_of = [](const std::vector<double>& v) {
    std::vector<double> k;
    for (double x : v)
      if (x > 0.0) k.push_back(x);
    std::sort(k.begin(), k.end());
    return k;
  };
  std::vector<std::vector<double>> keys;
  std::map<std::vector<double>, std::size_t> slot;
  auto request = [&](const std::vector<double>& v) {
    auto k = key_of(v);
    if (k.empty()) throw InvalidParameter("scan mass vectors must be nonzero");
    if (!slot.count(k)) {
      slot[k] = keys.size();
      keys.push_back(k);
    }
  };
  for (const auto& pair : pairs) {
    if (pair.M.size() != pair.T.size()) throw InvalidParameter("M and T must have equal length");
    std::vector<double> sum(pair.M.size());
    for (std::size_t i = 0; i < sum.size(); ++i) {
      if (pair.M[i] < 0.0 || pair.T[i] < 0.0) throw InvalidParameter("masses must be >= 0");
      sum[i] = pair.M[i] + pair.T[i];
      if (!(sum[i] > 0.0)) throw InvalidParameter("M + T must be componentwise positive");
    }
    request(pair.M);
    request(pair.T);
    request(sum);
  }

  ScanResult result;
  result.runs.resize(keys.size());
  parallel_for(keys.size(), options.workers, [&](std::size_t i) {
    result.runs[i] = constrained_infimum(keys[i], params, kernel, options);
  });

  for (const auto& pair : pairs) {
    std::vector<double> sum(pair.M.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = pair.M[i] + pair.T[i];
    const auto& rm = result.runs[slot[key_of(pair.M)]];
    const auto& rt = result.runs[slot[key_of(pair.T)]];
    const auto& rs = result.runs[slot[key_of(sum)]];
    SubadditivityRecord rec;
    rec.pair = pair;
    rec.I_M = rm.value;
    rec.I_T = rt.value;
    rec.I_sum = rs.value;
    rec.margin = rec.I_M + rec.I_T - rec.I_sum;
    rec.seeds = options.seeds;
    rec.converged = rm.converged && rt.converged && rs.converged;
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::vector<MassPair> default_pairs_m2() {
  const double levels[] = {0.0, 0.5, 1.0};
  std::vector<std::vector<double>> vecs;
  for (double a : levels)
    for (double b : levels)
      if (a > 0.0 || b > 0.0) vecs.push_back({a, b});
  std::vector<MassPair> out;
  for (std::size_t i = 0; i < vecs.size(); ++i)
    for (std::size_t j = i; j < vecs.size(); ++j) {
      const auto& M = vecs[i];
      const auto& T = vecs[j];
      if (M[0] + T[0] > 0.0 && M[1] + T[1] > 0.0) out.push_back({M, T, "m2"});
    }
  return out;
}

std::vector<MassPair> default_pairs_m3(std::uint64_t seed) {
  std::vector<MassPair> out{
      {{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, "A9"},
      {{0.5, 0.0, 0.5}, {0.5, 1.0, 0.5}, "A3"},
      {{0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, "B3"},
      {{0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}, "B5"},
      {{0.0, 1.0, 0.0}, {1.0, 0.0, 1.0}, "B2"},
  };
  std::mt19937_64 rng(seed);
  for (int r = 0; r < 2; ++r) {
    MassPair pair;
    pair.label = "random" + std::to_string(r + 1);
    for (int i = 0; i < 3; ++i) {
      pair.M.push_back(0.25 + 0.75 * uniform01(rng));
      pair.T.push_back(0.25 + 0.75 * uniform01(rng));
    }
    out.push_back(std::move(pair));
  }
  return out;
}

MultiField random_perturbation(const Grid& grid, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double k_cut = 2.0;
  const double width = grid.box_length() / 8.0;
  std::vector<Field> comps;
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    ComplexArray noise(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) noise[i] = Complex(standard_normal(rng), standard_normal(rng));
    ComplexArray spec = transform(grid, noise);
    spec *= (-0.5 * grid.k_squared() / (k_cut * k_cut)).exp();
    Field f(grid, inverse_transform(grid, spec));
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
      double r2 = 0.0;
      for (double x : grid.position(i)) r2 += x * x;
      f.data[i] *= std::exp(-0.5 * r2 / (width * width));
    }
    total += h1_norm_sq(f);
    comps.push_back(std::move(f));
  }
  for (auto& f : comps) f.data /= std::sqrt(total);
  return MultiField(std::move(comps));
}

StabilityReport stability_experiment(const GroundState& gs, std::span<const double> epsilons, double T, double dt,
                                     std::span<const std::uint64_t> seeds, const Kernel& kernel, double p,
                                     int sample_every, int workers) {
  if (seeds.empty()) throw InvalidParameter("stability experiment needs at least one seed");
  std::vector<double> masses;
  for (const Field& f : gs.fields) masses.push_back(mass(f));

  struct Job {
    std::size_t eps_index;
    std::uint64_t seed;
    double initial = 0.0, worst = 0.0;
    bool unstable = false;
  };
  std::vector<Job> jobs;
  for (std::size_t e = 0; e < epsilons.size(); ++e)
    for (auto s : seeds) jobs.push_back({e, s});

  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    Job& job = jobs[i];
    const double eps = epsilons[job.eps_index];
    if (eps < 0.0) throw InvalidParameter("perturbation sizes must be >= 0");
    MultiField start = gs.fields;
    if (eps > 0.0) {
      const MultiField v = random_perturbation(gs.fields.grid(), gs.fields.size(), job.seed);
      for (int j = 0; j < start.size(); ++j) start[j].data += eps * v[j].data;
      start = project_masses(start, masses);
    }
    EvolveOptions opts;
    opts.sample_every = sample_every;
    opts.reference = &gs;
    const auto trace = evolve(start, T, dt, kernel, p, opts);
    job.initial = trace.orbit_distance.front();
    job.worst = *std::max_element(trace.orbit_distance.begin(), trace.orbit_distance.end());
    job.unstable = trace.unstable;
  });

  StabilityReport report;
  report.T = T;
  report.dt = dt;
  for (std::size_t e = 0; e < epsilons.size(); ++e) {
    StabilityEntry entry;
    entry.epsilon = epsilons[e];
    for (const auto& job : jobs) {
      if (job.eps_index != e) continue;
      entry.initial_distance = std::max(entry.initial_distance, job.initial);
      entry.max_distance = std::max(entry.max_distance, job.worst);
      entry.unstable = entry.unstable || job.unstable;
    }
    entry.ratio = entry.epsilon > 0.0 ? entry.max_distance / entry.epsilon : 0.0;
    report.entries.push_back(entry);
  }
  return report;
}

}  // namespace hartree
