#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hartree/params.hpp"

namespace hartree {

enum class Experiment { minimize, evolve, scan_subadditivity, stability, validate, lemma_checks };

std::string_view to_string(Experiment e);
/// Accepts the config spellings ("scan-subadditivity", ...). Throws FormatError.
Experiment parse_experiment(std::string_view name);

struct SolverConfig {
  double tol = 1e-6;
  int max_iters = 200000;
  std::vector<std::uint64_t> seeds{1, 2};
};

struct EvolutionConfig {
  double T = 5.0;
  double dt = 1e-3;
  int sample_every = 10;
  std::string initial;  // optional CHFLD1 file; the ground state when empty
};

struct StabilityConfig {
  std::vector<double> epsilons{1e-3, 1e-2};
  int perturbations = 2;  // random directions per epsilon
};

struct RunConfig {
  SystemParams params;
  SolverConfig solver;
  EvolutionConfig evolution;
  StabilityConfig stability;
  Experiment experiment = Experiment::minimize;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int workers = 1;  // runtime only, never read from or written to the file
};

/// Parses and validates a JSON config. Missing keys take the defaults above;
/// unknown keys and wrong types raise FormatError (parse errors carry the
/// line and column). Parameters failing an assumption raise InvalidParameter
/// naming the clause, e.g. "(h0)".
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical JSON form, every field present.
std::string dump_config(const RunConfig& config);

}  // namespace hartree
