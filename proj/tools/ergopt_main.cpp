#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "ergopt/errors.hpp"
#include "ergopt/pipeline.hpp"

namespace {

constexpr const char* kDescription =
    "Entropy-penalized Markov chains on [0,1]: Perron eigenpairs, Gibbs "
    "chains, zero-temperature subactions, Mane/Peierls costs, graph maps "
    "and large-deviation tables.";

int run(const std::string& subcommand, const std::string& config_path,
        const std::string& out_override, int threads) {
  ergopt::ExperimentConfig cfg;
  try {
    cfg = ergopt::ExperimentConfig::from_file(config_path);
  } catch (const ergopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  const std::string outdir =
      out_override.empty() ? cfg.output_dir : out_override;
  try {
    return ergopt::run_subcommand(subcommand, cfg, outdir, threads);
  } catch (const ergopt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ergopt::PrereqError& e) {
    std::cerr << "missing prerequisite: " << e.what() << "; run `ergopt "
              << e.required_subcommand() << " --config " << config_path
              << "` first\n";
    return 4;
  } catch (const ergopt::error& e) {
    std::cerr << "numeric failure in " << e.where() << ": " << e.what()
              << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{kDescription};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  int threads = 1;

  const auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", out_override,
                    "output directory (defaults to the config's output_dir)");
    sub->add_option("--threads", threads, "worker threads (default 1)");
    return sub;
  };

  add("solve", "twist report, Karp value, subactions, per-beta eigenpairs "
               "and chains");
  add("zerotemp", "beta-limit diagnostics and the duality certificate");
  add("mane", "cost matrices, non-wandering set, separating subaction");
  add("graph", "graph map and its monotonicity/support checks");
  add("ldp", "large-deviation tables per cylinder");
  add("all", "the full pipeline in order");

  CLI11_PARSE(app, argc, argv);

  const std::string sub = app.get_subcommands().front()->get_name();
  return run(sub, config_path, out_override, threads);
}
