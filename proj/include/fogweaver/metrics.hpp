#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fogweaver/fapp.hpp"

namespace fogweaver {

// Mean Euclidean distance from each front point to its nearest reference
// point. Throws std::invalid_argument if either set is empty.
double generational_distance(const std::vector<ObjectiveVector>& front,
                             const std::vector<ObjectiveVector>& reference);

// Schott's spacing: standard deviation (n-1 denominator) of the Manhattan
// nearest-neighbor distances. Undefined for fewer than two points; throws.
double spacing(const std::vector<ObjectiveVector>& front);

// One finished run, as loaded from its artifacts or taken from a RunResult.
struct RunSummary {
  std::string scenario;
  int rep = 0;
  std::uint64_t seed = 0;
  std::string instanceKey;  // identifies the topology/problem the run solved
  std::vector<ObjectiveVector> front;
  long long matingCount = 0;
  long long protocolMessages = 0;
  long long protocolHops = 0;
  long long messageCount = 0;
};

struct RunMetrics {
  std::string scenario;
  int rep = 0;
  std::uint64_t seed = 0;
  double gd = 0.0;
  double spacingValue = 0.0;  // NaN when the front is a singleton
  double meanHopsPerMating = 0.0;
  long long messageCount = 0;
};

struct ScenarioStats {
  std::string scenario;
  int runCount = 0;
  double gdMedian = 0.0, gdMean = 0.0, gdVariance = 0.0;
  double spacingMedian = 0.0, spacingMean = 0.0, spacingVariance = 0.0;
  double hopsMedian = 0.0, hopsMean = 0.0, hopsVariance = 0.0;
};

struct MetricsReport {
  std::vector<RunMetrics> perRun;          // input order
  std::vector<ScenarioStats> perScenario;  // order of first appearance
  std::vector<ObjectiveVector> referenceFront;
  std::string referenceProvenance;
  std::vector<std::string> warnings;
};

double median(std::vector<double> values);           // throws on empty
double mean(const std::vector<double>& values);      // throws on empty
double sample_variance(const std::vector<double>& values);  // 0 for n < 2

// Builds the reference front from the union of all run fronts, then scores
// every run against it. Runs over different problem instances are rejected
// unless allowMixedInstances is set (a warning is recorded instead).
MetricsReport aggregate(const std::vector<RunSummary>& runs, bool allowMixedInstances = false);

}  // namespace fogweaver
