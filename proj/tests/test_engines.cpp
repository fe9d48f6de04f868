#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "fogweaver/engines.hpp"

using namespace fogweaver;

namespace {

struct Fixture {
  std::shared_ptr<InfrastructureGraph> graph;
  ProblemInstance problem;
  WorkerOverlay overlay;
};

const Fixture& small_fixture() {
  static const Fixture fixture = [] {
    TopologyConfig tcfg;
    tcfg.deviceCount = 20;
    tcfg.workerCount = 4;
    auto graph = std::make_shared<InfrastructureGraph>(generate_topology(tcfg, 5));
    ProblemConfig pcfg;
    pcfg.appCount = 4;
    ProblemInstance problem = build_problem(graph, pcfg, 5);
    WorkerOverlay overlay = place_workers(*graph, 4, 1);
    return Fixture{graph, std::move(problem), std::move(overlay)};
  }();
  return fixture;
}

EngineConfig small_config(Scenario s) {
  EngineConfig cfg;
  cfg.scenario = s;
  cfg.populationSize = 8;
  cfg.generationCount = 3;
  cfg.workerCount = 4;
  cfg.seed = 42;
  return cfg;
}

void check_front(const ProblemInstance& problem, const std::vector<Individual>& front) {
  REQUIRE(!front.empty());
  for (std::size_t i = 0; i < front.size(); ++i) {
    REQUIRE(front[i].chromosome.has_value());
    CHECK(is_feasible(problem, *front[i].chromosome).feasible);
    CHECK(evaluate(problem, *front[i].chromosome) == front[i].objectives);
    for (std::size_t j = 0; j < front.size(); ++j) {
      if (i == j) continue;
      CHECK(!dominates(front[j].objectives, front[i].objectives));
    }
  }
  for (std::size_t i = 0; i + 1 < front.size(); ++i) {
    const auto key = [](const Individual& ind) {
      return std::make_tuple(ind.objectives.meanInstances, ind.objectives.meanDistance,
                             ind.chromosome->to_string01());
    };
    CHECK(key(front[i]) < key(front[i + 1]));
  }
}

std::string classify(const std::string& topic) {
  const auto segments = split_topic(topic);
  if (segments.front() == "solution") return "solution";
  if (segments.size() == 3) return segments[2];
  return segments.back();
}

std::map<long long, std::map<std::string, int>> protocol_by_mating(const RunResult& r) {
  std::map<long long, std::map<std::string, int>> groups;
  for (const LogRecord& rec : r.hopLog) {
    if (rec.matingIndex >= 0) ++groups[rec.matingIndex][classify(rec.topic)];
  }
  return groups;
}

void check_counters(const RunResult& r) {
  CHECK(r.messageCount == static_cast<long long>(r.hopLog.size()));
  long long protocolMessages = 0;
  long long protocolHops = 0;
  for (const LogRecord& rec : r.hopLog) {
    if (rec.matingIndex >= 0) {
      ++protocolMessages;
      protocolHops += rec.hops;
    }
  }
  CHECK(r.protocolMessages == protocolMessages);
  CHECK(r.protocolHops == protocolHops);
}

void check_mating_coverage(const RunResult& r) {
  const auto groups = protocol_by_mating(r);
  CHECK(static_cast<long long>(groups.size()) == r.matingCount);
  if (!groups.empty()) {
    CHECK(groups.begin()->first == 0);
    CHECK(groups.rbegin()->first == r.matingCount - 1);
  }
}

void check_payloads(const ProblemInstance& problem, const RunResult& r) {
  CHECK(static_cast<long long>(r.solutionPayloads.size()) == r.matingCount);
  for (const std::string& bytes : r.solutionPayloads) {
    const nlohmann::json payload = decode(bytes);
    const Placement p = chromosome_from_string(payload.at("chromosome").get<std::string>(),
                                               problem.appCount, problem.deviceCount);
    CHECK(is_feasible(problem, p).feasible);
  }
}

bool same_run(const RunResult& a, const RunResult& b) {
  if (a.childrenCreated != b.childrenCreated || a.matingCount != b.matingCount ||
      a.messageCount != b.messageCount || a.protocolMessages != b.protocolMessages ||
      a.protocolHops != b.protocolHops) {
    return false;
  }
  if (a.finalFront.size() != b.finalFront.size()) return false;
  for (std::size_t i = 0; i < a.finalFront.size(); ++i) {
    if (!(a.finalFront[i].objectives == b.finalFront[i].objectives)) return false;
    if (a.finalFront[i].chromosome->to_string01() != b.finalFront[i].chromosome->to_string01()) {
      return false;
    }
  }
  if (a.snapshots != b.snapshots) return false;
  if (a.hopLog.size() != b.hopLog.size()) return false;
  for (std::size_t i = 0; i < a.hopLog.size(); ++i) {
    const LogRecord& x = a.hopLog[i];
    const LogRecord& y = b.hopLog[i];
    if (x.seqNo != y.seqNo || x.topic != y.topic || x.srcDevice != y.srcDevice ||
        x.dstDevice != y.dstDevice || x.hops != y.hops || x.matingIndex != y.matingIndex) {
      return false;
    }
  }
  return a.solutionPayloads == b.solutionPayloads;
}

const std::vector<Scenario> kAllScenarios = {Scenario::Traditional, Scenario::SemiDistributed,
                                             Scenario::FullyDistributed, Scenario::NeighborAware};

}  // namespace

TEST_SUITE("engines") {

TEST_CASE("scenario names round trip") {
  for (const Scenario s : kAllScenarios) CHECK(scenario_from_string(to_string(s)) == s);
  CHECK(to_string(Scenario::SemiDistributed) == "semi");
  CHECK_THROWS_AS(scenario_from_string("centralized"), std::invalid_argument);
}

TEST_CASE("config validation pins the shape of a run") {
  EngineConfig cfg = small_config(Scenario::SemiDistributed);
  CHECK_NOTHROW(cfg.validate());

  EngineConfig odd = cfg;
  odd.populationSize = 9;
  CHECK_THROWS_AS(odd.validate(), std::invalid_argument);

  EngineConfig indivisible = cfg;
  indivisible.workerCount = 3;
  CHECK_THROWS_AS(indivisible.validate(), std::invalid_argument);

  EngineConfig traditional = indivisible;
  traditional.scenario = Scenario::Traditional;
  traditional.populationSize = 10;
  CHECK_NOTHROW(traditional.validate());  // worker layout is ignored

  EngineConfig unevenBudget = small_config(Scenario::FullyDistributed);
  unevenBudget.populationSize = 4;
  unevenBudget.generationCount = 1;
  CHECK_THROWS_AS(unevenBudget.validate(), std::invalid_argument);

  EngineConfig badMutation = cfg;
  badMutation.mutationProbability = 1.5;
  CHECK_THROWS_AS(badMutation.validate(), std::invalid_argument);

  EngineConfig noWorkers = cfg;
  noWorkers.workerCount = 0;
  CHECK_THROWS_AS(noWorkers.validate(), std::invalid_argument);

  EngineConfig negativeGens = cfg;
  negativeGens.generationCount = -1;
  CHECK_THROWS_AS(negativeGens.validate(), std::invalid_argument);

  EngineConfig badRadius = small_config(Scenario::NeighborAware);
  badRadius.neighborhoodRadius = -1;
  CHECK_THROWS_AS(badRadius.validate(), std::invalid_argument);
}

TEST_CASE("worker overlay must match the configured worker count") {
  const Fixture& f = small_fixture();
  EngineConfig cfg = small_config(Scenario::FullyDistributed);
  const WorkerOverlay tooSmall = place_workers(*f.graph, 2, 1);
  CHECK_THROWS_AS(run_engine(cfg, f.problem, tooSmall), std::invalid_argument);
}

TEST_CASE("zero generations yields the initial front and no traffic") {
  const Fixture& f = small_fixture();
  for (const Scenario s : kAllScenarios) {
    CAPTURE(to_string(s));
    EngineConfig cfg = small_config(s);
    cfg.generationCount = 0;
    const RunResult r = run_engine(cfg, f.problem, f.overlay);
    CHECK(r.childrenCreated == 0);
    CHECK(r.matingCount == 0);
    CHECK(r.snapshots.empty());
    CHECK(r.protocolMessages == 0);
    check_front(f.problem, r.finalFront);
    if (s == Scenario::Traditional) CHECK(r.messageCount == 0);
  }
}

TEST_CASE("every scenario spends exactly its children budget") {
  const Fixture& f = small_fixture();
  for (const Scenario s : kAllScenarios) {
    CAPTURE(to_string(s));
    const EngineConfig cfg = small_config(s);
    const RunResult r = run_engine(cfg, f.problem, f.overlay);
    CHECK(r.childrenCreated == cfg.children_budget());
    CHECK(r.matingCount == cfg.children_budget() / 2);
    CHECK(r.snapshots.size() == static_cast<std::size_t>(cfg.generationCount));
    check_front(f.problem, r.finalFront);
    check_counters(r);
    if (s == Scenario::Traditional) {
      CHECK(r.messageCount == 0);
      CHECK(r.hopLog.empty());
      CHECK(r.solutionPayloads.empty());
    } else {
      CHECK(r.messageCount > 0);
      check_mating_coverage(r);
      check_payloads(f.problem, r);
    }
  }
}

TEST_CASE("deterministic mode replays bit for bit") {
  const Fixture& f = small_fixture();
  for (const Scenario s : kAllScenarios) {
    CAPTURE(to_string(s));
    const EngineConfig cfg = small_config(s);
    const RunResult a = run_engine(cfg, f.problem, f.overlay);
    const RunResult b = run_engine(cfg, f.problem, f.overlay);
    CHECK(same_run(a, b));

    EngineConfig reseeded = cfg;
    reseeded.seed = 43;
    const RunResult c = run_engine(reseeded, f.problem, f.overlay);
    CHECK(c.childrenCreated == a.childrenCreated);
  }
}

TEST_CASE("coordinated matings use three messages plus bounded removals") {
  const Fixture& f = small_fixture();
  const RunResult r = run_engine(small_config(Scenario::SemiDistributed), f.problem, f.overlay);
  const auto groups = protocol_by_mating(r);
  REQUIRE(static_cast<long long>(groups.size()) == r.matingCount);
  for (const auto& [mating, counts] : groups) {
    CAPTURE(mating);
    CHECK(counts.at("sendSolution") == 1);
    CHECK(counts.at("solution") == 1);
    CHECK(counts.at("newChildren") == 1);
    int removals = 0;
    int other = 0;
    for (const auto& [kind, count] : counts) {
      if (kind == "removeSolutions") {
        removals = count;
      } else if (kind != "sendSolution" && kind != "solution" && kind != "newChildren") {
        other += count;
      }
    }
    CHECK(removals <= 2);
    CHECK(other == 0);
  }
  for (const LogRecord& rec : r.hopLog) {
    if (rec.matingIndex >= 0) continue;
    const std::string kind = classify(rec.topic);
    CHECK((kind == "join" || kind == "solutionTemplate" || kind == "newPopulation" ||
           kind == "stopOptimization"));
  }
}

TEST_CASE("island matings are a request and a reply") {
  const Fixture& f = small_fixture();
  for (const Scenario s : {Scenario::FullyDistributed, Scenario::NeighborAware}) {
    CAPTURE(to_string(s));
    const RunResult r = run_engine(small_config(s), f.problem, f.overlay);
    const auto groups = protocol_by_mating(r);
    REQUIRE(static_cast<long long>(groups.size()) == r.matingCount);
    for (const auto& [mating, counts] : groups) {
      CAPTURE(mating);
      CHECK(counts.size() == 2);
      CHECK(counts.at("sendSolution") == 1);
      CHECK(counts.at("solution") == 1);
    }
    CHECK(r.protocolMessages == 2 * r.matingCount);
  }
}

TEST_CASE("a minimal coordinated run performs one mating") {
  const Fixture& f = small_fixture();
  EngineConfig cfg = small_config(Scenario::SemiDistributed);
  cfg.populationSize = 2;
  cfg.generationCount = 1;
  cfg.workerCount = 2;
  const WorkerOverlay overlay = place_workers(*f.graph, 2, 1);
  const RunResult r = run_engine(cfg, f.problem, overlay);
  CHECK(r.matingCount == 1);
  CHECK(r.childrenCreated == 2);
  CHECK(r.snapshots.size() == 1);
  check_front(f.problem, r.finalFront);
}

TEST_CASE("a lone island mates with itself at zero hop cost") {
  const Fixture& f = small_fixture();
  EngineConfig cfg = small_config(Scenario::FullyDistributed);
  cfg.populationSize = 4;
  cfg.generationCount = 2;
  cfg.workerCount = 1;
  const WorkerOverlay overlay = place_workers(*f.graph, 1, 1);
  const RunResult r = run_engine(cfg, f.problem, overlay);
  CHECK(r.childrenCreated == 8);
  CHECK(r.matingCount == 4);
  for (const LogRecord& rec : r.hopLog) {
    if (rec.matingIndex >= 0) {
      CHECK(rec.srcDevice == rec.dstDevice);
      CHECK(rec.hops == 0);
    }
  }
  check_front(f.problem, r.finalFront);
}

TEST_CASE("neighbor selection equals island selection when everyone is adjacent") {
  std::vector<Device> devices;
  for (int i = 0; i < 3; ++i) devices.push_back({i, 10, i == 0});
  const std::vector<Link> links = {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
  auto graph = std::make_shared<InfrastructureGraph>(build_graph(devices, links, 0, 50.0));
  const ProblemInstance problem = make_instance(graph, {1, 1}, {{1}, {1}});

  WorkerOverlay overlay;
  overlay.workers = {{0, 0}, {1, 1}, {2, 2}};
  overlay.neighborSets = {{1, 2}, {0, 2}, {0, 1}};

  EngineConfig cfg;
  cfg.populationSize = 6;
  cfg.generationCount = 2;
  cfg.workerCount = 3;
  cfg.seed = 9;

  cfg.scenario = Scenario::FullyDistributed;
  const RunResult fully = run_engine(cfg, problem, overlay);
  cfg.scenario = Scenario::NeighborAware;
  const RunResult neighbor = run_engine(cfg, problem, overlay);
  CHECK(same_run(fully, neighbor));
}

TEST_CASE("snapshot extremes never move backwards") {
  const Fixture& f = small_fixture();
  for (const Scenario s : kAllScenarios) {
    CAPTURE(to_string(s));
    EngineConfig cfg = small_config(s);
    cfg.generationCount = 6;
    const RunResult r = run_engine(cfg, f.problem, f.overlay);
    REQUIRE(r.snapshots.size() == 6);
    double bestO1 = std::numeric_limits<double>::infinity();
    double bestO2 = std::numeric_limits<double>::infinity();
    for (const auto& snapshot : r.snapshots) {
      REQUIRE(!snapshot.empty());
      double o1 = std::numeric_limits<double>::infinity();
      double o2 = std::numeric_limits<double>::infinity();
      for (const ObjectiveVector& v : snapshot) {
        o1 = std::min(o1, v.meanInstances);
        o2 = std::min(o2, v.meanDistance);
        for (const ObjectiveVector& w : snapshot) CHECK(!dominates(w, v));
      }
      CHECK(o1 <= bestO1);
      CHECK(o2 <= bestO2);
      bestO1 = o1;
      bestO2 = o2;
    }
  }
}

TEST_CASE("concurrent mode spends the same budget under real threads") {
  const Fixture& f = small_fixture();
  for (const Scenario s :
       {Scenario::SemiDistributed, Scenario::FullyDistributed, Scenario::NeighborAware}) {
    CAPTURE(to_string(s));
    EngineConfig cfg = small_config(s);
    cfg.concurrent = true;
    const RunResult r = run_engine(cfg, f.problem, f.overlay);
    CHECK(r.childrenCreated == cfg.children_budget());
    CHECK(r.matingCount == cfg.children_budget() / 2);
    CHECK(r.snapshots.size() == static_cast<std::size_t>(cfg.generationCount));
    check_front(f.problem, r.finalFront);
    check_counters(r);
    check_mating_coverage(r);

    const auto groups = protocol_by_mating(r);
    for (const auto& [mating, counts] : groups) {
      CAPTURE(mating);
      CHECK(counts.at("sendSolution") == 1);
      CHECK(counts.at("solution") == 1);
      if (s != Scenario::SemiDistributed) CHECK(counts.size() == 2);
    }
  }
}

}  // TEST_SUITE
