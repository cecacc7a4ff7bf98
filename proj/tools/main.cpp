#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hallfmo/config.hpp"
#include "hallfmo/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "Free-material optimization of 2D thermal conductivity tensors with an "
      "antisymmetric (thermal Hall) component"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  int max_iters_override = 0;
  bool quiet = false;

  CLI::App* run_cmd = app.add_subcommand(
      "run", "Execute a configured forward analysis or optimization");
  run_cmd->add_option("config", config_path, "JSON run configuration")
      ->required();
  run_cmd->add_option("--output", output_override,
                      "Override the configured output directory");
  run_cmd
      ->add_option("--max-iters", max_iters_override,
                   "Override the optimizer iteration cap")
      ->check(CLI::PositiveNumber);
  run_cmd->add_flag("--quiet", quiet, "Suppress per-iteration progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    hallfmo::RunConfig cfg = hallfmo::load_config(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (max_iters_override > 0) cfg.optimizer.max_iters = max_iters_override;
    return hallfmo::run(cfg, quiet);
  } catch (const hallfmo::config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const hallfmo::io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const hallfmo::numerical_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 3;
  }
}
