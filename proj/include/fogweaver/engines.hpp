#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fogweaver/bus.hpp"
#include "fogweaver/fapp.hpp"
#include "fogweaver/moo.hpp"
#include "fogweaver/topology.hpp"

namespace fogweaver {

enum class Scenario { Traditional, SemiDistributed, FullyDistributed, NeighborAware };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& name);

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EngineConfig {
  Scenario scenario = Scenario::Traditional;
  int populationSize = 200;
  int generationCount = 100;
  double mutationProbability = 0.3;
  int workerCount = 20;
  int neighborhoodRadius = 1;
  std::uint64_t seed = 1;
  bool concurrent = false;

  int sub_population_size() const { return populationSize / workerCount; }
  long long children_budget() const {
    return static_cast<long long>(populationSize) * generationCount;
  }
  void validate() const;  // throws std::invalid_argument
};

struct RunResult {
  std::vector<Individual> finalFront;  // chromosomes attached, canonical order
  std::vector<std::vector<ObjectiveVector>> snapshots;  // one per populationSize children
  std::vector<LogRecord> hopLog;
  std::vector<std::string> solutionPayloads;  // encoded solution/<n> payloads, for audits

  long long childrenCreated = 0;
  long long matingCount = 0;
  long long messageCount = 0;      // every logged transfer
  long long protocolMessages = 0;  // matingIndex >= 0
  long long protocolHops = 0;
  double wallClockSeconds = 0.0;
};

// Dispatches on cfg.scenario. Distributed scenarios exchange solutions over an
// in-process bus whose hop log lands in the result; Traditional never touches
// the bus. Deterministic mode replays bit-identically for a fixed seed.
RunResult run_engine(const EngineConfig& cfg, const ProblemInstance& problem,
                     const WorkerOverlay& overlay);

// Canonical front extraction: non-dominated members, deduplicated on
// (objectives, chromosome), sorted by objectives then chromosome.
std::vector<Individual> extract_front(const std::vector<Individual>& members);

}  // namespace fogweaver
