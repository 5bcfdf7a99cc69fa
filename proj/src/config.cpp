#include "hartree/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include "hartree/errors.hpp"
#include "json.hpp"

namespace hartree {

using nlohmann::json;

namespace {

constexpr std::pair<Experiment, std::string_view> kExperiments[] = {
    {Experiment::minimize, "minimize"},
    {Experiment::evolve, "evolve"},
    {Experiment::scan_subadditivity, "scan-subadditivity"},
    {Experiment::stability, "stability"},
    {Experiment::validate, "validate"},
    {Experiment::lemma_checks, "lemma-checks"},
};

void reject_unknown(const json& obj, std::string_view where, std::initializer_list<std::string_view> known) {
  if (!obj.is_object()) throw FormatError(std::string(where) + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto k : known) ok = ok || key == k;
    if (!ok) throw FormatError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
void read(const json& obj, const char* key, std::string_view where, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string(where) + "." + key + ": " + e.what());
  }
}

// Integers given as 3.0 are accepted; 3.5 is not.
void read_int(const json& obj, const char* key, std::string_view where, int& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number() || (it->is_number_float() && it->get<double>() != static_cast<int>(it->get<double>())))
    throw FormatError(std::string(where) + "." + key + " must be an integer");
  out = static_cast<int>(it->get<double>());
}

SystemParams read_params(const json& j) {
  reject_unknown(j, "params", {"space_dim", "component_count", "power", "kernel_exponent", "masses",
                               "box_length", "points_per_dim", "interaction_sign"});
  SystemParams p;
  read_int(j, "space_dim", "params", p.space_dim);
  read_int(j, "component_count", "params", p.component_count);
  read(j, "power", "params", p.power);
  read(j, "kernel_exponent", "params", p.kernel_exponent);
  read(j, "box_length", "params", p.box_length);
  read_int(j, "points_per_dim", "params", p.points_per_dim);
  if (j.contains("masses")) {
    read(j, "masses", "params", p.masses);
  } else {
    p.masses.assign(p.component_count, 1.0);
  }
  double sign = 1.0;
  read(j, "interaction_sign", "params", sign);
  if (sign != 1.0) throw InvalidParameter("interaction_sign must be +1 (focusing); only W = +|x|^{-alpha} is supported");
  return p;
}

}  // namespace

std::string_view to_string(Experiment e) {
  for (const auto& [value, name] : kExperiments)
    if (value == e) return name;
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  for (const auto& [value, spelled] : kExperiments)
    if (spelled == name) return value;
  throw FormatError("unknown experiment '" + std::string(name) + "'");
}

RunConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("config parse error: ") + e.what());
  }
  reject_unknown(j, "config", {"params", "solver", "evolution", "stability", "experiment", "output_dir", "seed"});

  RunConfig c;
  if (j.contains("params")) c.params = read_params(j["params"]);
  if (j.contains("solver")) {
    const json& s = j["solver"];
    reject_unknown(s, "solver", {"tol", "max_iters", "seeds"});
    read(s, "tol", "solver", c.solver.tol);
    read_int(s, "max_iters", "solver", c.solver.max_iters);
    read(s, "seeds", "solver", c.solver.seeds);
  }
  if (j.contains("evolution")) {
    const json& e = j["evolution"];
    reject_unknown(e, "evolution", {"T", "dt", "sample_every", "initial"});
    read(e, "T", "evolution", c.evolution.T);
    read(e, "dt", "evolution", c.evolution.dt);
    read_int(e, "sample_every", "evolution", c.evolution.sample_every);
    read(e, "initial", "evolution", c.evolution.initial);
  }
  if (j.contains("stability")) {
    const json& s = j["stability"];
    reject_unknown(s, "stability", {"epsilons", "perturbations"});
    read(s, "epsilons", "stability", c.stability.epsilons);
    read_int(s, "perturbations", "stability", c.stability.perturbations);
  }
  if (j.contains("experiment")) {
    std::string name;
    read(j, "experiment", "config", name);
    c.experiment = parse_experiment(name);
  }
  read(j, "output_dir", "config", c.output_dir);
  read(j, "seed", "config", c.seed);

  if (!(c.solver.tol > 0.0)) throw InvalidParameter("solver.tol must be > 0");
  if (c.solver.max_iters < 1) throw InvalidParameter("solver.max_iters must be >= 1");
  if (c.solver.seeds.empty()) throw InvalidParameter("solver.seeds must not be empty");
  if (!(c.evolution.T > 0.0) || !(c.evolution.dt > 0.0)) throw InvalidParameter("evolution.T and evolution.dt must be > 0");
  if (c.evolution.sample_every < 1) throw InvalidParameter("evolution.sample_every must be >= 1");
  if (c.stability.perturbations < 1) throw InvalidParameter("stability.perturbations must be >= 1");
  for (double eps : c.stability.epsilons)
    if (!(eps >= 0.0)) throw InvalidParameter("stability.epsilons must be >= 0");

  check_well_formed(c.params);
  const ValidationReport report = validate_assumptions(c.params);
  if (const ClauseResult* bad = report.first_failure()) {
    const std::string tag = bad->name.substr(0, bad->name.find(':'));
    std::ostringstream os;
    os << "assumption (" << tag << ") violated: " << bad->name << " (" << bad->description
       << "), margin " << bad->margin;
    throw InvalidParameter(os.str());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const RunConfig& c) {
  const SystemParams& p = c.params;
  json j = {
      {"params",
       {{"space_dim", p.space_dim},
        {"component_count", p.component_count},
        {"power", p.power},
        {"kernel_exponent", p.kernel_exponent},
        {"masses", p.masses},
        {"box_length", p.box_length},
        {"points_per_dim", p.points_per_dim}}},
      {"solver", {{"tol", c.solver.tol}, {"max_iters", c.solver.max_iters}, {"seeds", c.solver.seeds}}},
      {"evolution",
       {{"T", c.evolution.T},
        {"dt", c.evolution.dt},
        {"sample_every", c.evolution.sample_every},
        {"initial", c.evolution.initial}}},
      {"stability", {{"epsilons", c.stability.epsilons}, {"perturbations", c.stability.perturbations}}},
      {"experiment", std::string(to_string(c.experiment))},
      {"output_dir", c.output_dir},
      {"seed", c.seed},
  };
  return j.dump(2);
}

}  // namespace hartree
