#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "fogweaver/metrics.hpp"
#include "fogweaver/moo.hpp"
#include "oracles.hpp"

using namespace fogweaver;

namespace {

std::vector<ObjectiveVector> as_front(const std::vector<oracles::Point>& points) {
  std::vector<ObjectiveVector> front;
  for (const auto& [a, b] : points) front.push_back({a, b});
  return front;
}

std::vector<oracles::Point> random_points(Rng& rng, std::size_t n, double scale) {
  std::vector<oracles::Point> points;
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back({rng.uniform01() * scale, rng.uniform01() * scale});
  }
  return points;
}

RunSummary summary(const std::string& scenario, int rep, std::vector<ObjectiveVector> front) {
  RunSummary s;
  s.scenario = scenario;
  s.rep = rep;
  s.seed = 100 + rep;
  s.instanceKey = "instance-a";
  s.front = std::move(front);
  s.matingCount = 10;
  s.protocolMessages = 20;
  s.protocolHops = 55;
  s.messageCount = 30;
  return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("generational distance of a known pair") {
  CHECK(generational_distance({{1, 1}}, {{0, 0}}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(generational_distance({{0, 0}}, {{0, 0}}) == 0.0);
  CHECK(generational_distance({{0, 0}, {4, 3}}, {{0, 0}}) == doctest::Approx(2.5));
  CHECK_THROWS_AS(generational_distance({}, {{0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(generational_distance({{0, 0}}, {}), std::invalid_argument);
}

TEST_CASE("spacing of known fronts") {
  CHECK(spacing({{0, 0}, {1, 1}, {5, 5}}) == doctest::Approx(std::sqrt(12.0)));
  CHECK(spacing({{0, 0}, {1, 1}}) == doctest::Approx(0.0));
  CHECK(spacing({{0, 0}, {0, 0}, {0, 0}}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(spacing({{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(spacing({}), std::invalid_argument);
}

TEST_CASE("quality indicators match their oracles") {
  Rng rng(71);
  for (int trial = 0; trial < 200; ++trial) {
    const auto frontPoints = random_points(rng, 2 + rng.uniform_index(30), 10.0);
    const auto referencePoints = random_points(rng, 1 + rng.uniform_index(30), 10.0);
    CHECK(generational_distance(as_front(frontPoints), as_front(referencePoints)) ==
          doctest::Approx(oracles::generational_distance(frontPoints, referencePoints))
              .epsilon(1e-12));
    CHECK(spacing(as_front(frontPoints)) ==
          doctest::Approx(oracles::spacing(frontPoints)).epsilon(1e-12));
  }
}

TEST_CASE("indicators ignore point order") {
  Rng rng(73);
  const auto points = random_points(rng, 12, 5.0);
  const auto reference = random_points(rng, 8, 5.0);
  const double gd = generational_distance(as_front(points), as_front(reference));
  const double sp = spacing(as_front(points));
  auto shuffledPoints = points;
  auto shuffledReference = reference;
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(shuffledPoints);
    rng.shuffle(shuffledReference);
    CHECK(generational_distance(as_front(shuffledPoints), as_front(shuffledReference)) ==
          doctest::Approx(gd).epsilon(1e-12));
    CHECK(spacing(as_front(shuffledPoints)) == doctest::Approx(sp).epsilon(1e-12));
  }
}

TEST_CASE("summary statistics behave on small samples") {
  CHECK(median({3, 1, 2}) == 2.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK(median({7}) == 7.0);
  CHECK(mean({1, 2, 3, 4}) == 2.5);
  CHECK(sample_variance({5, 5, 5}) == 0.0);
  CHECK(sample_variance({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(32.0 / 7.0));
  CHECK(sample_variance({42}) == 0.0);
  CHECK_THROWS_AS(median({}), std::invalid_argument);
  CHECK_THROWS_AS(mean({}), std::invalid_argument);
}

TEST_CASE("aggregation scores runs against the pooled reference") {
  const RunSummary runA = summary("traditional", 0, {{0, 2}, {2, 0}});
  const RunSummary runB = summary("semi", 0, {{1, 3}, {3, 1}});
  const MetricsReport report = aggregate({runA, runB});

  REQUIRE(report.referenceFront.size() == 2);
  CHECK(report.referenceFront[0] == ObjectiveVector{0, 2});
  CHECK(report.referenceFront[1] == ObjectiveVector{2, 0});
  CHECK(report.referenceProvenance.find("2 runs") != std::string::npos);

  REQUIRE(report.perRun.size() == 2);
  CHECK(report.perRun[0].scenario == "traditional");
  CHECK(report.perRun[0].gd == doctest::Approx(0.0));
  CHECK(report.perRun[1].gd == doctest::Approx(std::sqrt(2.0)));
  CHECK(report.perRun[0].meanHopsPerMating == doctest::Approx(5.5));
  CHECK(report.perRun[0].messageCount == 30);

  REQUIRE(report.perScenario.size() == 2);
  CHECK(report.perScenario[0].scenario == "traditional");
  CHECK(report.perScenario[0].runCount == 1);
  CHECK(report.perScenario[1].gdMedian == doctest::Approx(std::sqrt(2.0)));
  CHECK(report.perScenario[1].hopsMedian == doctest::Approx(5.5));
}

TEST_CASE("scenario statistics pool repetitions in first-appearance order") {
  std::vector<RunSummary> runs;
  runs.push_back(summary("fully", 0, {{0, 4}, {4, 0}}));
  runs.push_back(summary("neighbor", 0, {{0, 4}, {4, 0}}));
  runs.push_back(summary("fully", 1, {{1, 5}, {5, 1}}));
  runs[2].protocolHops = 110;
  const MetricsReport report = aggregate(runs);

  REQUIRE(report.perScenario.size() == 2);
  CHECK(report.perScenario[0].scenario == "fully");
  CHECK(report.perScenario[0].runCount == 2);
  CHECK(report.perScenario[1].scenario == "neighbor");
  CHECK(report.perScenario[0].hopsMean == doctest::Approx((5.5 + 11.0) / 2));
  CHECK(report.perScenario[0].gdMean == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(report.perScenario[0].gdVariance ==
        doctest::Approx(sample_variance({0.0, std::sqrt(2.0)})));
}

TEST_CASE("mixing problem instances is rejected unless allowed") {
  RunSummary runA = summary("traditional", 0, {{0, 2}, {2, 0}});
  RunSummary runB = summary("semi", 0, {{1, 3}, {3, 1}});
  runB.instanceKey = "instance-b";
  CHECK_THROWS_AS(aggregate({runA, runB}), std::invalid_argument);

  const MetricsReport report = aggregate({runA, runB}, true);
  bool warned = false;
  for (const std::string& w : report.warnings) {
    if (w.find("instance") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("degenerate aggregations warn instead of lying") {
  const MetricsReport solo = aggregate({summary("traditional", 0, {{0, 2}, {2, 0}})});
  CHECK(solo.perRun[0].gd == 0.0);
  bool selfReference = false;
  for (const std::string& w : solo.warnings) {
    if (w.find("only one run") != std::string::npos) selfReference = true;
  }
  CHECK(selfReference);

  const MetricsReport singleton = aggregate(
      {summary("traditional", 0, {{1, 1}}), summary("semi", 0, {{0, 2}, {2, 0}})});
  CHECK(std::isnan(singleton.perRun[0].spacingValue));
  bool spacingWarning = false;
  for (const std::string& w : singleton.warnings) {
    if (w.find("spacing") != std::string::npos) spacingWarning = true;
  }
  CHECK(spacingWarning);
  CHECK(std::isfinite(singleton.perScenario[1].spacingMedian));

  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);

  RunSummary empty = summary("traditional", 0, {});
  CHECK_THROWS_AS(aggregate({empty}), std::invalid_argument);
}

TEST_CASE("hop intensity divides protocol hops by matings") {
  RunSummary idle = summary("traditional", 0, {{0, 2}, {2, 0}});
  idle.matingCount = 0;
  idle.protocolHops = 0;
  const MetricsReport report = aggregate({idle});
  CHECK(report.perRun[0].meanHopsPerMating == 0.0);
}

}  // TEST_SUITE
