#include <optional>
#include <string>

#include "CLI11.hpp"
#include "meanfield/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mean-field particle simulation and Lyapunov stability checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  long long seed = -1;

  const auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "experiment config (JSON)")
        ->required();
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--seed", seed, "seed override");
    return sub;
  };

  CLI::App* simulate =
      add("simulate", "integrate the particle system and export summaries");
  CLI::App* probe = add("probe", "Monte Carlo Lyapunov stability probe");
  CLI::App* criterion =
      add("criterion", "quadratic-form stability criterion for linear fields");

  CLI11_PARSE(app, argc, argv);

  std::optional<std::string> out_override;
  if (!out_dir.empty()) out_override = out_dir;
  std::optional<std::uint64_t> seed_override;
  if (seed >= 0) seed_override = static_cast<std::uint64_t>(seed);

  std::string command;
  if (simulate->parsed()) command = "simulate";
  if (probe->parsed()) command = "probe";
  if (criterion->parsed()) command = "criterion";

  return meanfield::cli::run_command(command, config_path, out_override,
                                     seed_override);
}
