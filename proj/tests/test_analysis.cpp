#include <cmath>

#include "doctest.h"
#include "hartree/analysis.hpp"
#include "hartree/errors.hpp"
#include "oracles.hpp"

using namespace hartree;

namespace {

const Grid& ref_grid() {
  static const Grid g(1, 256, 40.0);
  return g;
}

const Kernel& ref_kernel() {
  static const Kernel k = build_kernel(ref_grid(), 0.5);
  return k;
}

SystemParams params_with(std::vector<double> masses) {
  SystemParams p;
  p.component_count = static_cast<int>(masses.size());
  p.masses = std::move(masses);
  return p;
}

const GroundState& reference_state() {
  static const GroundState gs = ground_state(params_with({1.0, 1.0}), ref_kernel(), 1);
  return gs;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("concentration of one bump") {
  const Grid g(1, 256, 40.0);
  const MultiField mf = project_masses(MultiField({oracle::gaussian(g, 1.0, {5.0})}), std::vector<double>{1.0});
  const std::vector<double> radii{0.5, 1.0, 2.0, 4.0, 8.0};
  const auto q = concentration_profile(mf, radii);
  REQUIRE(q.Q.size() == radii.size());
  for (std::size_t i = 1; i < radii.size(); ++i) CHECK(q.Q[i] >= q.Q[i - 1]);
  CHECK(q.Q[0] < 0.7);
  CHECK(q.Q.back() == doctest::Approx(1.0).epsilon(1e-10));
  // |u|^2 has standard deviation 1/sqrt(2), so a centred ball holds erf(R),
  // up to the cell discretization of the ball.
  CHECK(q.Q[2] == doctest::Approx(std::erf(2.0)).epsilon(0.01));
}

TEST_CASE("concentration of two separated bumps") {
  const Grid g(1, 512, 80.0);
  Field two(g, oracle::gaussian(g, 1.0, {-15.0}).data + oracle::gaussian(g, 1.0, {15.0}).data);
  const MultiField mf = project_masses(MultiField({two}), std::vector<double>{2.0});
  const std::vector<double> radii{5.0, 10.0};
  const auto q = concentration_profile(mf, radii);
  for (double v : q.Q) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("ground state is tight") {
  const double radius = 10.0;
  const auto q = concentration_profile(reference_state().fields, std::span<const double>(&radius, 1));
  CHECK(q.Q[0] >= 0.99 * 2.0);
}

TEST_CASE("omega constant") {
  CHECK(omega_constant(std::vector<double>{1.0}, 2.0) == doctest::Approx(0.25));
  CHECK(omega_constant(std::vector<double>{1.0, 1.0}, 2.0) == doctest::Approx(1.0));
  // Omega times the self interaction of u1 is the whole interaction of the
  // proportional tuple.
  const std::vector<double> M{0.7, 1.3, 0.4};
  const double p = 2.5;
  const Field u1(ref_grid(), oracle::gaussian(ref_grid(), 1.2).data * 0.8);
  std::vector<Field> comps;
  for (double m : M) comps.emplace_back(ref_grid(), u1.data * std::sqrt(m / M[0]));
  const MultiField tuple(comps);
  const double interaction = total_energy(tuple, ref_kernel(), p).interaction;
  const double self = 2.0 * p * pair_interaction(2.0 * p, u1, u1, ref_kernel(), p);
  CHECK(rel(omega_constant(M, p) * self, interaction) <= 1e-12);
}

TEST_CASE("dilation drives the energy negative") {
  const auto params = params_with({1.0, 1.0});
  Field u1 = oracle::gaussian(ref_grid(), 0.5);
  u1.data *= std::sqrt(1.0 / mass(u1));
  const std::vector<double> thetas{1.0, 0.8, 0.6, 0.45, 0.3};
  const auto scan = scaling_negativity_test(params, u1, thetas, ref_kernel());
  CHECK(scan.energy_at_star < 0.0);
  CHECK(scan.theta_star > 0.0);

  const MultiField tuple({u1, u1});
  CHECK(rel(scan.energies[0], total_energy(tuple, ref_kernel(), 2.0).total) <= 1e-12);

  // Slope of log kinetic against log theta.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(thetas.size());
  for (std::size_t i = 0; i < thetas.size(); ++i) {
    const double x = std::log(thetas[i]), y = std::log(scan.kinetic[i]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  CHECK(((n * sxy - sx * sy) / (n * sxx - sx * sx)) == doctest::Approx(2.0).epsilon(1e-3));

  const std::vector<double> too_small{0.01};
  CHECK_THROWS_AS(scaling_negativity_test(params, u1, too_small, ref_kernel()), BoxOverflow);
  const std::vector<double> invalid{1.5};
  CHECK_THROWS_AS(scaling_negativity_test(params, u1, invalid, ref_kernel()), InvalidParameter);
}

TEST_CASE("strict scaling") {
  const Field& u = reference_state().fields[0];
  const auto two = strict_scaling_check(u, 2.0, ref_kernel(), 2.0);
  CHECK(std::abs(two.delta_observed - 2.0 * pair_interaction(4.0, u, u, ref_kernel(), 2.0)) <= 1e-12);
  for (double gamma : {1.1, 1.5, 2.0}) {
    const auto s = strict_scaling_check(u, gamma, ref_kernel(), 2.0);
    CHECK(s.delta_observed > 0.0);
    CHECK(std::abs(s.delta_observed - s.delta_predicted) <= 1e-12);
  }
  const auto near_one = strict_scaling_check(u, 1.0 + 1e-9, ref_kernel(), 2.0);
  CHECK(std::abs(near_one.delta_observed) <= 1e-8);
  CHECK_THROWS_AS(strict_scaling_check(u, 1.0, ref_kernel(), 2.0), InvalidParameter);
}

TEST_CASE("cross term") {
  const GroundState& gs = reference_state();
  const auto [a, b] = cross_term_check(gs, ref_kernel(), 2.0);
  CHECK(a < 0.0);
  CHECK(b < 0.0);
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
  const auto [za, zb] = cross_term_check(gs, zero_kernel(ref_grid()), 2.0);
  CHECK(za == doctest::Approx(0.5 * grad_norm_sq(gs.fields[0])).epsilon(1e-12));
  CHECK(zb > 0.0);

  GroundState unconverged = gs;
  unconverged.converged = false;
  CHECK_THROWS_AS(cross_term_check(unconverged, ref_kernel(), 2.0), InvalidParameter);
}

TEST_CASE("default mass pairs") {
  const auto m2 = default_pairs_m2();
  bool has_a1 = false, has_b2 = false;
  for (const auto& pair : m2) {
    for (int i = 0; i < 2; ++i) CHECK(pair.M[i] + pair.T[i] > 0.0);
    has_a1 = has_a1 || (pair.M == std::vector<double>{0.5, 0.5} && pair.T == pair.M);
    has_b2 = has_b2 || (pair.M == std::vector<double>{0.0, 1.0} && pair.T == std::vector<double>{1.0, 0.0});
  }
  CHECK(has_a1);
  CHECK(has_b2);
  const auto m3 = default_pairs_m3(4);
  CHECK(m3.size() == 7);
  CHECK(m3[2].label == "B3");
  CHECK(default_pairs_m3(4)[5].M == m3[5].M);
}

TEST_CASE("subadditivity, two components") {
  const auto params = params_with({1.0, 1.0});
  const std::vector<MassPair> pairs{{{0.5, 0.5}, {0.5, 0.5}, "a1"}, {{0.0, 1.0}, {1.0, 0.0}, "b2"}};
  ScanOptions opts;
  opts.workers = 2;
  const auto result = subadditivity_scan(pairs, params, ref_kernel(), opts);
  REQUIRE(result.records.size() == 2);
  // (0.5,0.5) twice, (1,1) twice, (1) and its reduced twin share one solve.
  CHECK(result.runs.size() == 3);
  for (const auto& r : result.records) {
    CHECK(r.converged);
    CHECK(r.margin > 10.0 * opts.solver.tol);
  }
  // Splitting (1,1) into single-component problems loses at least the
  // coupling of the two single minimizers.
  const GroundState single = single_component_ground(1.0, params_with({1.0}), ref_kernel());
  const double coupling = pair_interaction(2.0, single.fields[0], single.fields[0], ref_kernel(), 2.0);
  CHECK(result.records[1].margin >= coupling - 1e-6);
  CHECK(result.records[1].I_M == doctest::Approx(single.energy.total).epsilon(1e-6));
}

TEST_CASE("subadditivity, three components") {
  const auto params = params_with({1.0, 1.0, 1.0});
  const std::vector<MassPair> pairs{{{0.0, 1.0, 1.0}, {1.0, 0.0, 1.0}, "B3"}};
  const auto result = subadditivity_scan(pairs, params, ref_kernel(), ScanOptions{});
  CHECK(result.records[0].margin > 1e-5);

  const std::vector<MassPair> bad{{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, "zero"}};
  CHECK_THROWS_AS(subadditivity_scan(bad, params, ref_kernel(), ScanOptions{}), InvalidParameter);
}

TEST_CASE("random perturbation") {
  const MultiField v = random_perturbation(ref_grid(), 3, 11);
  double total = 0.0;
  for (const Field& f : v) total += h1_norm_sq(f);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((random_perturbation(ref_grid(), 3, 11)[1].data - v[1].data).abs().maxCoeff() == 0.0);
}

TEST_CASE("stability without and with perturbation") {
  const GroundState& gs = reference_state();
  const std::vector<double> eps{0.0, 1e-2};
  const std::vector<std::uint64_t> seeds{1};
  const auto report = stability_experiment(gs, eps, 1.0, 1e-3, seeds, ref_kernel(), 2.0);
  REQUIRE(report.entries.size() == 2);
  CHECK(report.entries[0].max_distance <= 1e-4);
  CHECK(report.entries[1].max_distance <= 10.0 * 1e-2);
  CHECK_FALSE(report.entries[1].unstable);
}
