#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fogweaver/engines.hpp"
#include "fogweaver/metrics.hpp"

namespace fogweaver {

// Experiment file schema. Section and key names follow the config files this
// tool consumes; values map onto TopologyConfig / ProblemConfig / EngineConfig.
struct ExperimentConfig {
  // genetic
  int populationSize = 200;
  int numberOfGenerations = 100;
  double mutationProbability = 0.3;
  int numberOfWorkers = 20;
  int neighborhoodRadiusHops = 1;

  // infrastructure
  int numberOfFogDevices = 100;
  std::string topology = "barabasi-albert";
  int attachmentsPerNode = 2;
  std::string workerPlacementCriterion = "betweenness-centrality";
  std::array<double, 2> fogNetworkLatencyMs = {2.0, 6.0};
  double cloudNetworkLatencyMs = 100.0;
  std::array<int, 2> fogDeviceResources = {1, 4};
  double gatewayPercentage = 25.0;

  // application
  int numberOfApplications = 10;
  std::array<int, 2> applicationResources = {1, 2};

  // user
  std::array<double, 2> interRequestTimeMs = {5.0, 10.0};
  std::array<double, 2> applicationPopularityPercent = {0.0, 75.0};

  // experiment
  int repetitions = 10;
  std::uint64_t seedBase = 1;
  std::string outputDir = "out";
  std::string mode = "deterministic";  // or "concurrent"

  bool outputDirFromFile = false;  // set by from_json, never serialized

  void validate() const;  // throws std::invalid_argument
  TopologyConfig topology_config() const;
  ProblemConfig problem_config() const;
  EngineConfig engine_config(Scenario scenario, std::uint64_t runSeed) const;

  // Identifies the problem instance the config generates; runs are only
  // comparable when their keys match.
  std::string instance_key() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);  // strict keys
  static ExperimentConfig load_file(const std::string& path);
};

std::uint64_t run_seed(const ExperimentConfig& cfg, Scenario scenario, int rep);

struct PreparedInstance {
  std::shared_ptr<const InfrastructureGraph> graph;
  ProblemInstance problem;
  WorkerOverlay overlay;
};

// Topology, problem and worker overlay, all derived from cfg.seedBase.
PreparedInstance prepare_instance(const ExperimentConfig& cfg);

struct RunPaths {
  std::string dir;
  std::string frontCsv;
  std::string snapshotsCsv;
  std::string hopsCsv;
  std::string runInfo;
};

RunPaths run_paths(const std::string& outputDir, Scenario scenario, int rep);

void write_run_artifacts(const RunPaths& paths, const ExperimentConfig& cfg, Scenario scenario,
                         int rep, std::uint64_t seed, const RunResult& result);

std::vector<ObjectiveVector> read_front_csv(const std::string& path);
std::vector<std::vector<ObjectiveVector>> read_snapshots_csv(const std::string& path);
std::vector<LogRecord> read_hops_csv(const std::string& path);
RunSummary read_run_summary(const std::string& runDir);

// Subcommand bodies. All of them throw std::invalid_argument for config
// problems and std::runtime_error for failures while running or writing.
void cmd_topology(const ExperimentConfig& cfg);
RunResult cmd_run(const ExperimentConfig& cfg, Scenario scenario, int rep,
                  std::optional<std::uint64_t> seedOverride,
                  const PreparedInstance* prepared = nullptr);
void cmd_campaign(const ExperimentConfig& cfg);
MetricsReport cmd_metrics(const std::string& outputDir, bool allowMixedInstances);

}  // namespace fogweaver
