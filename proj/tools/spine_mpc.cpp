// Command-line runner for the spine MPC experiments.
//
//   spine-mpc --config configs/reference_2d.cfg --out out/ref
//   spine-mpc --controller smoothing --steps 500 --out out/quick
//   spine-mpc --config c.cfg --sweep 1,2,3 --out out/sweep   (one run per seed)
//
// Exit codes: 0 success, 1 config/validation error, 2 aborted run.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <thread>
#include <vector>

#include "spine/harness.hpp"

namespace {

spine::ExperimentConfig make_config(const std::string& config_path,
                                    const std::string& controller_word) {
  using namespace spine;
  std::optional<ControllerKind> kind;
  if (controller_word == "smoothing") kind = ControllerKind::smoothing;
  if (controller_word == "reference") kind = ControllerKind::reference;

  if (!config_path.empty()) return load_experiment_config(config_path);
  return default_experiment(kind.value_or(ControllerKind::reference));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cable-driven tensegrity spine: MPC trajectory-tracking experiments"};

  std::string config_path;
  std::string controller_word;
  std::string out_dir;
  std::string sweep_seeds;
  std::string disturbance_word;
  std::int64_t seed = -1;
  int steps = -1;

  app.add_option("--config", config_path, "experiment config file");
  app.add_option("--controller", controller_word, "smoothing|reference")
      ->check(CLI::IsMember({"smoothing", "reference"}));
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "disturbance seed");
  app.add_option("--disturbance", disturbance_word, "on|off")
      ->check(CLI::IsMember({"on", "off"}));
  app.add_option("--steps", steps, "number of closed-loop steps");
  app.add_option("--sweep", sweep_seeds, "comma-separated seeds; runs one experiment per seed");

  CLI11_PARSE(app, argc, argv);

  try {
    spine::ExperimentConfig config = make_config(config_path, controller_word);

    spine::ExperimentOverrides overrides;
    if (!controller_word.empty())
      overrides.controller = controller_word == "smoothing"
                                 ? spine::ControllerKind::smoothing
                                 : spine::ControllerKind::reference;
    if (!out_dir.empty()) overrides.output_dir = out_dir;
    if (seed >= 0) overrides.seed = static_cast<std::uint64_t>(seed);
    if (!disturbance_word.empty()) overrides.disturbance = disturbance_word == "on";
    if (steps >= 0) overrides.steps = steps;
    spine::apply_overrides(config, overrides);

    if (sweep_seeds.empty()) {
      const auto result = spine::run_experiment(config, &std::cout);
      std::cout << "outputs in " << config.run.output_dir << "\n";
      return result.exit_code;
    }

    // Fan independent seeded runs out across worker threads.
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(sweep_seeds);
    std::string tok;
    while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
    if (seeds.empty()) throw spine::ConfigError("--sweep: no seeds given");

    std::vector<int> codes(seeds.size(), 0);
    std::vector<std::thread> workers;
    for (size_t i = 0; i < seeds.size(); ++i) {
      workers.emplace_back([&, i] {
        spine::ExperimentConfig run_config = config;
        run_config.disturbance.seed = seeds[i];
        run_config.run.output_dir =
            (std::filesystem::path(config.run.output_dir) / ("seed_" + std::to_string(seeds[i])))
                .string();
        try {
          codes[i] = spine::run_experiment(run_config, nullptr).exit_code;
        } catch (const std::exception&) {
          codes[i] = spine::exit_config_error;
        }
      });
    }
    for (auto& w : workers) w.join();
    int worst = 0;
    for (size_t i = 0; i < seeds.size(); ++i) {
      std::cout << "seed " << seeds[i] << ": exit " << codes[i] << "\n";
      worst = std::max(worst, codes[i]);
    }
    return worst;
  } catch (const spine::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return spine::exit_config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return spine::exit_config_error;
  }
}
