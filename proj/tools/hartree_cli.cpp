#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hartree/config.hpp"
#include "hartree/errors.hpp"
#include "hartree/run.hpp"

namespace {

constexpr const char* kWorkersEnv = "HARTREE_WORKERS";

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int workers = 0;
};

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
  sub->add_option("--seed", opt.seed, "rng seed (overrides seed)");
  sub->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states and dynamics of coupled nonlinear Hartree systems"};
  app.set_version_flag("--version", hartree::kVersion);
  app.require_subcommand(1);

  Options opt;
  const std::pair<const char*, hartree::Experiment> commands[] = {
      {"validate", hartree::Experiment::validate},
      {"minimize", hartree::Experiment::minimize},
      {"evolve", hartree::Experiment::evolve},
      {"scan", hartree::Experiment::scan_subadditivity},
      {"stability", hartree::Experiment::stability},
      {"check-lemmas", hartree::Experiment::lemma_checks},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, experiment] : commands) {
    auto* sub = app.add_subcommand(name);
    add_common(sub, opt);
    subs.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(opt.config, std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    hartree::RunConfig config = hartree::parse_config(bytes.str());
    for (std::size_t i = 0; i < subs.size(); ++i)
      if (subs[i]->parsed()) config.experiment = commands[i].second;
    if (!opt.out.empty()) config.output_dir = opt.out;
    for (auto* sub : subs)
      if (sub->parsed() && sub->count("--seed")) config.seed = opt.seed;

    config.workers = 1;
    if (const char* env = std::getenv(kWorkersEnv)) {
      const int w = std::atoi(env);
      if (w < 1) throw hartree::InvalidParameter(std::string(kWorkersEnv) + " must be a positive integer");
      config.workers = w;
    }
    if (opt.workers > 0) config.workers = opt.workers;

    return hartree::run(config, std::cout, bytes.str());
  } catch (const hartree::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
