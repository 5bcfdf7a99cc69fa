#include "hartree/run.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Core>

#include "hartree/analysis.hpp"
#include "hartree/errors.hpp"
#include "hartree/evolve.hpp"
#include "hartree/parallel.hpp"
#include "hartree/snapshot.hpp"
#include "json.hpp"

namespace hartree {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string joined(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + num(v[i]);
  return s;
}

// Single funnel for every file of a run, so the manifest sees all of them.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void text(const std::string& name, const std::string& contents) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << contents;
    if (!out) throw Error("cannot write " + (dir_ / name).string());
    files_[name] = {sha256_hex(contents), contents.size()};
  }

  void snapshot(const std::string& name, const MultiField& mf) {
    std::ostringstream buf(std::ios::binary);
    write_snapshot(buf, mf);
    text(name, buf.str());
  }

  json listing() const {
    json out = json::array();
    for (const auto& [name, info] : files_)
      out.push_back({{"path", name}, {"sha256", info.first}, {"bytes", info.second}});
    return out;
  }

 private:
  fs::path dir_;
  std::map<std::string, std::pair<std::string, std::size_t>> files_;
};

json params_json(const SystemParams& p) {
  return {{"space_dim", p.space_dim},       {"component_count", p.component_count},
          {"power", p.power},               {"kernel_exponent", p.kernel_exponent},
          {"masses", p.masses},             {"box_length", p.box_length},
          {"points_per_dim", p.points_per_dim}};
}

json energy_json(const EnergyBreakdown& e) {
  return {{"kinetic", e.kinetic}, {"interaction", e.interaction}, {"total", e.total}};
}

struct Context {
  const RunConfig& config;
  std::ostream& log;
  ArtifactWriter& out;
  Grid grid;
  Kernel kernel;
};

SolverOptions solver_options(const RunConfig& c) {
  SolverOptions o;
  o.tol = c.solver.tol;
  o.max_iters = c.solver.max_iters;
  return o;
}

// All seeds, best converged state first by energy.
std::vector<GroundState> minimize_seeds(Context& ctx) {
  const auto& seeds = ctx.config.solver.seeds;
  std::vector<GroundState> runs(seeds.size());
  parallel_for(seeds.size(), ctx.config.workers, [&](std::size_t i) {
    runs[i] = ground_state(ctx.config.params, ctx.kernel, seeds[i], solver_options(ctx.config));
  });
  std::stable_sort(runs.begin(), runs.end(), [](const GroundState& a, const GroundState& b) {
    if (a.converged != b.converged) return a.converged;
    return a.energy.total < b.energy.total;
  });
  for (const auto& r : runs)
    ctx.log << "seed " << r.seed << ": E = " << num(r.energy.total) << ", residual " << r.max_residual()
            << (r.converged ? "" : " (not converged)") << ", " << r.iterations << " iterations\n";
  return runs;
}

void write_ground_state(Context& ctx, const std::vector<GroundState>& runs) {
  const GroundState& gs = runs.front();
  ctx.out.snapshot("ground_state.chfld", gs.fields);
  json per_seed = json::array();
  for (const auto& r : runs)
    per_seed.push_back({{"seed", r.seed},
                        {"energy", r.energy.total},
                        {"converged", r.converged},
                        {"iterations", r.iterations},
                        {"max_residual", r.max_residual()}});
  std::vector<double> masses;
  for (const Field& f : gs.fields) masses.push_back(mass(f));
  const json sidecar = {{"masses", masses},
                        {"lambda", gs.multipliers},
                        {"energy", energy_json(gs.energy)},
                        {"residuals", gs.residuals},
                        {"iterations", gs.iterations},
                        {"converged", gs.converged},
                        {"seed", gs.seed},
                        {"params", params_json(ctx.config.params)},
                        {"runs", per_seed}};
  ctx.out.text("ground_state.json", sidecar.dump(2) + "\n");
}

int do_validate(Context& ctx) {
  const ValidationReport report = validate_assumptions(ctx.config.params);
  json clauses = json::array();
  for (const auto& c : report.clauses) {
    ctx.log << (c.pass ? "ok   " : "FAIL ") << c.name << "  margin " << num(c.margin) << "  (" << c.description
            << ")\n";
    clauses.push_back({{"name", c.name}, {"description", c.description}, {"pass", c.pass}, {"margin", c.margin}});
  }
  json j = {{"pass", report.pass}, {"clauses", clauses}};
  if (report.pass) {
    const auto d = derive_exponents(ctx.config.params);
    j["exponents"] = {{"r", d.weak_lr_index},
                      {"t", d.hls_dual_index},
                      {"mu", d.gn_exponent},
                      {"growth", d.growth_exponent},
                      {"interp", d.interp_index}};
  }
  ctx.out.text("validation.json", j.dump(2) + "\n");
  return report.pass ? 0 : 1;
}

int do_minimize(Context& ctx) {
  write_ground_state(ctx, minimize_seeds(ctx));
  return 0;
}

int do_evolve(Context& ctx) {
  const auto runs = minimize_seeds(ctx);
  write_ground_state(ctx, runs);
  const GroundState& gs = runs.front();
  const auto& ev = ctx.config.evolution;
  MultiField initial = gs.fields;
  if (!ev.initial.empty()) {
    initial = load_snapshot(ev.initial);
    require_same_grid(initial.grid(), ctx.grid);
    if (initial.size() != gs.fields.size()) throw GridMismatch("initial snapshot has the wrong component count");
  }
  EvolveOptions opts;
  opts.sample_every = ev.sample_every;
  opts.reference = &gs;
  const auto trace = evolve(initial, ev.T, ev.dt, ctx.kernel, ctx.config.params.power, opts);

  std::ostringstream csv;
  csv << "t";
  for (std::size_t j = 0; j < trace.masses.size(); ++j) csv << ",mass_" << j + 1;
  csv << ",energy,orbit_distance\n";
  for (std::size_t s = 0; s < trace.times.size(); ++s) {
    csv << num(trace.times[s]);
    for (const auto& series : trace.masses) csv << ',' << num(series[s]);
    csv << ',' << num(trace.energy[s]) << ',' << num(trace.orbit_distance[s]) << '\n';
  }
  ctx.out.text("trace.csv", csv.str());
  const json summary = {{"final_time", trace.final_time},
                        {"dt", trace.dt},
                        {"samples", trace.times.size()},
                        {"max_relative_mass_drift", trace.max_relative_mass_drift()},
                        {"max_energy_drift", trace.max_energy_drift()},
                        {"max_orbit_distance",
                         *std::max_element(trace.orbit_distance.begin(), trace.orbit_distance.end())},
                        {"unstable", trace.unstable}};
  ctx.out.text("trace.json", summary.dump(2) + "\n");
  ctx.log << "evolved to t = " << trace.final_time << ", mass drift " << trace.max_relative_mass_drift()
          << ", energy drift " << trace.max_energy_drift() << '\n';
  return 0;
}

std::vector<MassPair> scan_pairs(const RunConfig& c) {
  switch (c.params.component_count) {
    case 1:
      return {{{0.5}, {0.5}, "m1"}, {{0.5}, {1.0}, "m1"}, {{1.0}, {1.0}, "m1"}};
    case 2:
      return default_pairs_m2();
    default:
      return default_pairs_m3(c.seed);
  }
}

int do_scan(Context& ctx) {
  ScanOptions opts;
  opts.solver = solver_options(ctx.config);
  opts.seeds = ctx.config.solver.seeds;
  opts.workers = ctx.config.workers;
  const auto pairs = scan_pairs(ctx.config);
  const auto result = subadditivity_scan(pairs, ctx.config.params, ctx.kernel, opts);

  std::ostringstream csv;
  csv << "label,M,T,I_M,I_T,I_sum,margin,converged\n";
  double min_margin = INFINITY;
  bool all_converged = true;
  for (const auto& r : result.records) {
    csv << r.pair.label << ',' << joined(r.pair.M) << ',' << joined(r.pair.T) << ',' << num(r.I_M) << ','
        << num(r.I_T) << ',' << num(r.I_sum) << ',' << num(r.margin) << ',' << (r.converged ? 1 : 0) << '\n';
    min_margin = std::min(min_margin, r.margin);
    all_converged = all_converged && r.converged;
    ctx.log << r.pair.label << " [" << joined(r.pair.M) << "] + [" << joined(r.pair.T) << "]: margin "
            << num(r.margin) << '\n';
  }
  ctx.out.text("scan.csv", csv.str());

  json infima = json::array();
  bool lambda_positive = true;
  for (const auto& run : result.runs) {
    const auto& best = run.best();
    for (double l : best.multipliers) lambda_positive = lambda_positive && l > 0.0;
    infima.push_back({{"masses", run.masses},
                      {"value", run.value},
                      {"lambda", best.multipliers},
                      {"converged", run.converged}});
  }
  const json summary = {{"pairs", result.records.size()},
                        {"min_margin", min_margin},
                        {"all_margins_positive", min_margin > 0.0},
                        {"all_converged", all_converged},
                        {"all_multipliers_positive", lambda_positive},
                        {"infima", infima}};
  ctx.out.text("scan.json", summary.dump(2) + "\n");
  return 0;
}

int do_stability(Context& ctx) {
  const auto runs = minimize_seeds(ctx);
  write_ground_state(ctx, runs);
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < ctx.config.stability.perturbations; ++k) seeds.push_back(ctx.config.seed + k);
  const auto& ev = ctx.config.evolution;
  const auto report = stability_experiment(runs.front(), ctx.config.stability.epsilons, ev.T, ev.dt, seeds,
                                           ctx.kernel, ctx.config.params.power, ev.sample_every,
                                           ctx.config.workers);
  std::ostringstream csv;
  csv << "epsilon,initial_distance,max_distance,ratio,unstable\n";
  json entries = json::array();
  for (const auto& e : report.entries) {
    csv << num(e.epsilon) << ',' << num(e.initial_distance) << ',' << num(e.max_distance) << ',' << num(e.ratio)
        << ',' << (e.unstable ? 1 : 0) << '\n';
    entries.push_back({{"epsilon", e.epsilon},
                       {"initial_distance", e.initial_distance},
                       {"max_distance", e.max_distance},
                       {"ratio", e.ratio},
                       {"unstable", e.unstable}});
    ctx.log << "eps " << e.epsilon << ": sup distance " << num(e.max_distance) << " (ratio " << e.ratio << ")\n";
  }
  ctx.out.text("stability.csv", csv.str());
  ctx.out.text("stability.json", json({{"T", report.T}, {"dt", report.dt}, {"entries", entries}}).dump(2) + "\n");
  return 0;
}

struct Check {
  std::string name;
  double value;
  double threshold;
  bool pass;
};

int do_lemma_checks(Context& ctx) {
  const RunConfig& c = ctx.config;
  const double p = c.params.power;
  const double tol = c.solver.tol;
  std::vector<Check> checks;
  auto add = [&](std::string name, double value, double threshold, bool pass) {
    checks.push_back({std::move(name), value, threshold, pass});
  };

  const auto runs = minimize_seeds(ctx);
  write_ground_state(ctx, runs);
  const GroundState& gs = runs.front();
  add("converged", gs.max_residual(), tol, gs.converged);
  add("negative_energy", gs.energy.total, -10.0 * tol, gs.energy.total < -10.0 * tol);
  for (std::size_t j = 0; j < gs.multipliers.size(); ++j)
    add("lambda_" + std::to_string(j + 1), gs.multipliers[j], 0.0, gs.multipliers[j] > 0.0);

  {
    const double sigma = c.params.box_length / 40.0;
    Field u1 = sample(ctx.grid, [&](const std::vector<double>& x) {
      double r2 = 0.0;
      for (double v : x) r2 += v * v;
      return Complex(std::exp(-0.5 * r2 / (sigma * sigma)), 0.0);
    });
    u1.data *= std::sqrt(c.params.masses[0] / mass(u1));
    const std::vector<double> thetas{1.0, 0.8, 0.6, 0.4, 0.3};
    try {
      const auto scan = scaling_negativity_test(c.params, u1, thetas, ctx.kernel);
      add("scaling_negativity", scan.energy_at_star, 0.0, true);
    } catch (const Error& e) {
      ctx.log << "scaling test: " << e.what() << '\n';
      add("scaling_negativity", 0.0, 0.0, false);
    }
  }

  for (int j = 0; j < gs.fields.size(); ++j)
    for (double gamma : {1.1, 1.5, 2.0}) {
      const auto s = strict_scaling_check(gs.fields[j], gamma, ctx.kernel, p);
      char tag[48];
      std::snprintf(tag, sizeof tag, "_%d_gamma_%g", j + 1, gamma);
      add(std::string("strict_scaling") + tag, s.delta_observed, 0.0, s.delta_observed > 0.0);
      const double gap = std::abs(s.delta_observed - s.delta_predicted);
      add(std::string("scaling_identity") + tag, gap, 1e-12 * std::max(1.0, std::abs(s.gamma_energy)),
          gap <= 1e-12 * std::max(1.0, std::abs(s.gamma_energy)));
    }

  if (gs.fields.size() == 2 && gs.converged) {
    const auto [a, b] = cross_term_check(gs, ctx.kernel, p);
    add("cross_term_1", a, 0.0, a < 0.0);
    add("cross_term_2", b, 0.0, b < 0.0);
  }

  double total_mass = 0.0;
  for (double m : c.params.masses) total_mass += m;
  const double radius = c.params.box_length / 4.0;
  const auto q = concentration_profile(gs.fields, std::span<const double>(&radius, 1));
  add("tightness_Q", q.Q[0], 0.99 * total_mass, q.Q[0] >= 0.99 * total_mass);

  {
    SolverOptions opts = solver_options(c);
    opts.tol = std::min(tol, 1e-8);
    opts.complex_seed = true;
    const auto cgs = ground_state(c.params, ctx.kernel, c.seed, opts);
    for (int j = 0; j < cgs.fields.size(); ++j) {
      const auto pf = phase_factorize(cgs.fields[j]);
      add("phase_deviation_" + std::to_string(j + 1), pf.deviation, 1e-6, pf.deviation <= 1e-6);
      const double low = interior_minimum(ctx.grid, pf.aligned);
      add("phase_positive_" + std::to_string(j + 1), low, 0.0, low > 0.0);
    }
  }

  std::ostringstream csv;
  csv << "check,value,threshold,pass\n";
  json list = json::array();
  bool all = true;
  for (const auto& ch : checks) {
    csv << ch.name << ',' << num(ch.value) << ',' << num(ch.threshold) << ',' << (ch.pass ? 1 : 0) << '\n';
    list.push_back({{"check", ch.name}, {"value", ch.value}, {"threshold", ch.threshold}, {"pass", ch.pass}});
    ctx.log << (ch.pass ? "PASS " : "FAIL ") << ch.name << "  " << num(ch.value) << '\n';
    all = all && ch.pass;
  }
  ctx.out.text("lemma_checks.csv", csv.str());
  ctx.out.text("lemma_checks.json", json({{"pass", all}, {"checks", list}}).dump(2) + "\n");
  return all ? 0 : 1;
}

}  // namespace

int run(const RunConfig& config, std::ostream& log, const std::string& config_bytes) {
  ArtifactWriter out(config.output_dir);
  const SystemParams& P = config.params;
  Context ctx{config, log, out, Grid(P.space_dim, P.points_per_dim, P.box_length), Kernel{}};
  ctx.kernel = build_kernel(ctx.grid, P.kernel_exponent);

  int status = 0;
  switch (config.experiment) {
    case Experiment::validate: status = do_validate(ctx); break;
    case Experiment::minimize: status = do_minimize(ctx); break;
    case Experiment::evolve: status = do_evolve(ctx); break;
    case Experiment::scan_subadditivity: status = do_scan(ctx); break;
    case Experiment::stability: status = do_stability(ctx); break;
    case Experiment::lemma_checks: status = do_lemma_checks(ctx); break;
  }

  // Where the files go is not an input; leaving it out keeps manifests of
  // identical runs identical.
  json canonical = json::parse(dump_config(config));
  canonical.erase("output_dir");
  json inputs = {{"config", canonical}, {"config_sha256", sha256_hex(canonical.dump())}};
  if (!config_bytes.empty()) inputs["config_file_sha256"] = sha256_hex(config_bytes);
  if (!config.evolution.initial.empty() && config.experiment == Experiment::evolve) {
    std::ifstream in(config.evolution.initial, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    inputs["initial_snapshot_sha256"] = sha256_hex(buf.str());
  }
  const json manifest = {
      {"program", "hartree"},
      {"version", kVersion},
      {"experiment", std::string(to_string(config.experiment))},
      {"exit_status", status},
      {"inputs", inputs},
      {"libraries",
       {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
        {"compiler", __VERSION__}}},
      {"files", out.listing()},
  };
  out.text("manifest.json", manifest.dump(2) + "\n");
  return status;
}

}  // namespace hartree
