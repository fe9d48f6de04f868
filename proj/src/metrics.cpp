#include "fogweaver/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "fogweaver/moo.hpp"

namespace fogweaver {

double generational_distance(const std::vector<ObjectiveVector>& front,
                             const std::vector<ObjectiveVector>& reference) {
  if (front.empty()) throw std::invalid_argument("generational distance of an empty front");
  if (reference.empty()) throw std::invalid_argument("empty reference front");
  double sum = 0.0;
  for (const ObjectiveVector& p : front) {
    double best = std::numeric_limits<double>::infinity();
    for (const ObjectiveVector& r : reference) {
      const double d1 = p.meanInstances - r.meanInstances;
      const double d2 = p.meanDistance - r.meanDistance;
      best = std::min(best, std::sqrt(d1 * d1 + d2 * d2));
    }
    sum += best;
  }
  return sum / static_cast<double>(front.size());
}

double spacing(const std::vector<ObjectiveVector>& front) {
  if (front.size() < 2) {
    throw std::invalid_argument("spacing is undefined for fronts with fewer than two points");
  }
  const std::size_t n = front.size();
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = std::abs(front[i].meanInstances - front[j].meanInstances) +
                       std::abs(front[i].meanDistance - front[j].meanDistance);
      nearest[i] = std::min(nearest[i], d);
    }
  }
  const double avg = mean(nearest);
  double sum = 0.0;
  for (const double d : nearest) sum += (avg - d) * (avg - d);
  return std::sqrt(sum / static_cast<double>(n - 1));
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double mean(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  double sum = 0.0;
  for (const double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double avg = mean(values);
  double sum = 0.0;
  for (const double v : values) sum += (v - avg) * (v - avg);
  return sum / static_cast<double>(values.size() - 1);
}

MetricsReport aggregate(const std::vector<RunSummary>& runs, bool allowMixedInstances) {
  if (runs.empty()) throw std::invalid_argument("no runs to aggregate");

  MetricsReport report;

  std::set<std::string> instanceKeys;
  for (const RunSummary& run : runs) instanceKeys.insert(run.instanceKey);
  if (instanceKeys.size() > 1) {
    std::string keys;
    for (const std::string& k : instanceKeys) keys += (keys.empty() ? "" : ", ") + k;
    if (!allowMixedInstances) {
      throw std::invalid_argument(
          "runs cover different problem instances (" + keys +
          "); pass --allow-mixed to aggregate them against one reference front");
    }
    report.warnings.push_back("aggregating runs from mixed problem instances: " + keys);
  }

  std::vector<std::vector<ObjectiveVector>> fronts;
  fronts.reserve(runs.size());
  for (const RunSummary& run : runs) {
    if (run.front.empty()) {
      throw std::invalid_argument("run " + run.scenario + "/rep" + std::to_string(run.rep) +
                                  " has an empty front");
    }
    fronts.push_back(run.front);
  }
  report.referenceFront = reference_front(fronts);
  report.referenceProvenance =
      "non-dominated union of the fronts of all " + std::to_string(runs.size()) + " runs";
  if (runs.size() == 1) {
    report.warnings.push_back(
        "only one run: the reference front is that run's own front, so its "
        "generational distance is zero by construction");
  }

  std::vector<std::string> scenarioOrder;
  std::map<std::string, std::vector<const RunMetrics*>> byScenario;
  for (const RunSummary& run : runs) {
    RunMetrics m;
    m.scenario = run.scenario;
    m.rep = run.rep;
    m.seed = run.seed;
    m.gd = generational_distance(run.front, report.referenceFront);
    if (run.front.size() >= 2) {
      m.spacingValue = spacing(run.front);
    } else {
      m.spacingValue = std::numeric_limits<double>::quiet_NaN();
      report.warnings.push_back("run " + run.scenario + "/rep" + std::to_string(run.rep) +
                                " has a singleton front; spacing is undefined for it");
    }
    m.meanHopsPerMating =
        run.matingCount > 0
            ? static_cast<double>(run.protocolHops) / static_cast<double>(run.matingCount)
            : 0.0;
    m.messageCount = run.messageCount;
    report.perRun.push_back(m);
  }
  for (const RunMetrics& m : report.perRun) {
    if (byScenario.find(m.scenario) == byScenario.end()) scenarioOrder.push_back(m.scenario);
    byScenario[m.scenario].push_back(&m);
  }

  for (const std::string& name : scenarioOrder) {
    const auto& rows = byScenario[name];
    std::vector<double> gd, sp, hops;
    for (const RunMetrics* m : rows) {
      gd.push_back(m->gd);
      if (!std::isnan(m->spacingValue)) sp.push_back(m->spacingValue);
      hops.push_back(m->meanHopsPerMating);
    }
    ScenarioStats s;
    s.scenario = name;
    s.runCount = static_cast<int>(rows.size());
    s.gdMedian = median(gd);
    s.gdMean = mean(gd);
    s.gdVariance = sample_variance(gd);
    if (!sp.empty()) {
      s.spacingMedian = median(sp);
      s.spacingMean = mean(sp);
      s.spacingVariance = sample_variance(sp);
    } else {
      s.spacingMedian = s.spacingMean = s.spacingVariance =
          std::numeric_limits<double>::quiet_NaN();
    }
    s.hopsMedian = median(hops);
    s.hopsMean = mean(hops);
    s.hopsVariance = sample_variance(hops);
    report.perScenario.push_back(s);
  }
  return report;
}

}  // namespace fogweaver
