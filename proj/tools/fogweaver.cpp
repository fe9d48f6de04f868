#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fogweaver/experiment.hpp"

namespace {

fogweaver::ExperimentConfig resolve_config(const std::string& configPath,
                                           const std::string& outFlag, const std::string& modeFlag,
                                           int repetitionsFlag) {
  fogweaver::ExperimentConfig cfg;
  if (!configPath.empty()) cfg = fogweaver::ExperimentConfig::load_file(configPath);

  if (!outFlag.empty()) {
    cfg.outputDir = outFlag;
  } else if (!cfg.outputDirFromFile) {
    if (const char* env = std::getenv("FOGWEAVER_OUT"); env != nullptr && env[0] != '\0') {
      cfg.outputDir = env;
    }
  }
  if (!modeFlag.empty()) cfg.mode = modeFlag;
  if (repetitionsFlag > 0) cfg.repetitions = repetitionsFlag;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"four execution designs of one placement optimizer, measured on a fog network"};
  app.require_subcommand(1);

  std::string configPath;
  std::string outFlag;
  std::string modeFlag;
  std::string scenarioName;
  int rep = 0;
  int repetitionsFlag = 0;
  std::uint64_t seedFlag = 0;
  bool allowMixed = false;

  const auto addCommon = [&](CLI::App* cmd) {
    cmd->add_option("--config", configPath, "experiment config file (JSON)");
    cmd->add_option("--out", outFlag, "output directory (overrides config and FOGWEAVER_OUT)");
  };

  CLI::App* topology = app.add_subcommand("topology", "generate the network and the problem files");
  addCommon(topology);

  CLI::App* run = app.add_subcommand("run", "execute a single optimization run");
  addCommon(run);
  run->add_option("--scenario", scenarioName, "traditional, semi, fully or neighbor")->required();
  run->add_option("--rep", rep, "repetition number (default 0)");
  CLI::Option* seedOpt = run->add_option("--seed", seedFlag, "override the derived run seed");
  run->add_option("--mode", modeFlag, "deterministic or concurrent")
      ->check(CLI::IsMember({"deterministic", "concurrent"}));

  CLI::App* campaign = app.add_subcommand("campaign", "run every scenario for all repetitions");
  addCommon(campaign);
  campaign->add_option("--reps", repetitionsFlag, "repetitions per scenario (overrides config)");
  campaign->add_option("--mode", modeFlag, "deterministic or concurrent")
      ->check(CLI::IsMember({"deterministic", "concurrent"}));

  CLI::App* metrics = app.add_subcommand("metrics", "aggregate finished runs into metrics files");
  addCommon(metrics);
  metrics->add_flag("--allow-mixed", allowMixed,
                    "aggregate runs even when they solved different problem instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const fogweaver::ExperimentConfig cfg =
        resolve_config(configPath, outFlag, modeFlag, repetitionsFlag);
    if (topology->parsed()) {
      fogweaver::cmd_topology(cfg);
    } else if (run->parsed()) {
      if (rep < 0) throw std::invalid_argument("--rep must be >= 0");
      std::optional<std::uint64_t> seedOverride;
      if (seedOpt->count() > 0) seedOverride = seedFlag;
      const fogweaver::Scenario scenario = fogweaver::scenario_from_string(scenarioName);
      const fogweaver::RunResult result = fogweaver::cmd_run(cfg, scenario, rep, seedOverride);
      std::cout << fogweaver::to_string(scenario) << " rep " << rep << ": front "
                << result.finalFront.size() << ", children " << result.childrenCreated
                << ", messages " << result.messageCount << "\n";
    } else if (campaign->parsed()) {
      fogweaver::cmd_campaign(cfg);
    } else if (metrics->parsed()) {
      fogweaver::cmd_metrics(cfg.outputDir, allowMixed);
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
