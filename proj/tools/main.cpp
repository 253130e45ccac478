#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "sparsecoll/study.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sparse-grid stochastic collocation studies"};
  app.require_subcommand(1);

  sparsecoll::CliOptions opts;
  opts.threads = std::max(1U, std::thread::hardware_concurrency());
  std::string out_dir;
  std::uint64_t seed = 0;

  const std::map<std::string, std::string> help{
      {"nodes", "print nodes and weights of a univariate rule"},
      {"quad-1d", "univariate quadrature convergence of mean, variance and skewness"},
      {"interp-1d", "univariate interpolation convergence (cross-validation error)"},
      {"adapt", "dimension-adaptive collocation, one row per refinement step"},
      {"moments", "moments from quadrature weights and surrogate Monte Carlo"},
      {"sobol", "first- and total-order Sobol indices on the surrogate"},
      {"cv-error", "cross-validation error of a surrogate against the model"},
  };
  for (const auto& kind : sparsecoll::study_kinds()) {
    auto* sub = app.add_subcommand(kind, help.at(kind));
    sub->add_option("--config", opts.config_path, "study configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory; CSV goes to stdout when omitted");
    sub->add_option("--seed", seed, "random seed, overrides the configuration");
    sub->add_option("--threads", opts.threads, "maximum worker threads")->check(CLI::Range(1U, 4096U));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto* sub : app.get_subcommands()) {
    opts.study = sub->get_name();
    if (sub->count("--out")) opts.out_dir = out_dir;
    if (sub->count("--seed")) opts.seed = seed;
  }
  return sparsecoll::run_cli(opts, std::cout, std::cerr);
}
