#include <algorithm>
#include <climits>
#include <cmath>
#include <set>

#include "doctest.h"
#include "fogweaver/topology.hpp"
#include "oracles.hpp"

using namespace fogweaver;

namespace {

std::vector<oracles::Edge> all_edges(const InfrastructureGraph& g) {
  std::vector<oracles::Edge> edges;
  for (const Link& l : g.links) edges.push_back({l.deviceA, l.deviceB, l.latency});
  edges.push_back({g.cloudAttachment, g.cloudDeviceId, g.cloudLatency});
  return edges;
}

std::vector<oracles::Edge> fog_edges(const InfrastructureGraph& g) {
  std::vector<oracles::Edge> edges;
  for (const Link& l : g.links) edges.push_back({l.deviceA, l.deviceB, l.latency});
  return edges;
}

InfrastructureGraph line_graph(int n, double latency = 1.0, int gateway = 0) {
  std::vector<Device> devices;
  for (int i = 0; i < n; ++i) devices.push_back({i, 4, i == gateway});
  std::vector<Link> links;
  for (int i = 0; i + 1 < n; ++i) links.push_back({i, i + 1, latency});
  return build_graph(std::move(devices), std::move(links), 0, 100.0);
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("growth produces the expected link count") {
  TopologyConfig cfg;
  cfg.deviceCount = 10;
  cfg.attachmentsPerNode = 2;
  cfg.workerCount = 2;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const InfrastructureGraph g = generate_topology(cfg, seed);
    CHECK(g.fog_count() == 10);
    CHECK(g.links.size() == 17);  // 3 seed links + 7 nodes * 2 attachments
    CHECK(g.cloudDeviceId == 10);
    std::set<std::pair<int, int>> seen;
    for (const Link& l : g.links) {
      CHECK(l.deviceA < l.deviceB);
      CHECK(seen.insert({l.deviceA, l.deviceB}).second);
    }
  }
}

TEST_CASE("one attachment per node grows a tree") {
  TopologyConfig cfg;
  cfg.deviceCount = 3;
  cfg.attachmentsPerNode = 1;
  cfg.workerCount = 1;
  cfg.gatewayFraction = 1.0;
  const InfrastructureGraph g = generate_topology(cfg, 4);
  CHECK(g.links.size() == 2);
  CHECK(g.gateway_ids().size() == 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) CHECK(g.hopTable[i][j] >= 0);
  }
}

TEST_CASE("default configuration shape") {
  const TopologyConfig cfg;
  const InfrastructureGraph g = generate_topology(cfg, 1);
  CHECK(g.fog_count() == 100);
  CHECK(g.links.size() == 3 + 97 * 2);
  CHECK(g.gateway_ids().size() == 25);
  CHECK(g.cloudDeviceId == 100);
  CHECK(g.cloudLatency == 100.0);
  CHECK(g.hopTable.size() == 101);
  CHECK(g.latencyTable.size() == 101);
  for (const Link& l : g.links) {
    CHECK(l.latency >= 2.0);
    CHECK(l.latency <= 6.0);
  }
  for (const Device& d : g.devices) {
    CHECK(d.resources >= 1);
    CHECK(d.resources <= 4);
  }
}

TEST_CASE("hop and latency tables match search oracles") {
  TopologyConfig cfg;
  cfg.deviceCount = 12;
  cfg.workerCount = 3;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const InfrastructureGraph g = generate_topology(cfg, seed);
    const auto edges = all_edges(g);
    const int n = g.node_count();
    for (int src = 0; src < n; ++src) {
      const auto hops = oracles::bfs_hops(n, edges, src);
      const auto lat = oracles::dijkstra(n, edges, src);
      for (int dst = 0; dst < n; ++dst) {
        CHECK(g.hopTable[src][dst] == hops[dst]);
        CHECK(g.latencyTable[src][dst] == doctest::Approx(lat[dst]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("hops and latency can disagree on the best path") {
  // Two routes between 0 and 2: direct but slow, or via 1 and fast.
  std::vector<Device> devices = {{0, 4, true}, {1, 4, false}, {2, 4, false}};
  std::vector<Link> links = {{0, 2, 10.0}, {0, 1, 2.0}, {1, 2, 2.0}};
  const InfrastructureGraph g = build_graph(devices, links, 0, 100.0);
  CHECK(g.hopTable[0][2] == 1);
  CHECK(g.latencyTable[0][2] == doctest::Approx(4.0));
}

TEST_CASE("betweenness of a path and a star") {
  const InfrastructureGraph path = line_graph(3);
  const auto pathBc = betweenness_centrality(path);
  CHECK(pathBc[0] == doctest::Approx(0.0));
  CHECK(pathBc[1] == doctest::Approx(1.0));
  CHECK(pathBc[2] == doctest::Approx(0.0));

  std::vector<Device> devices;
  for (int i = 0; i < 5; ++i) devices.push_back({i, 4, i == 1});
  std::vector<Link> links = {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}};
  const InfrastructureGraph star = build_graph(devices, links, 0, 100.0);
  const auto starBc = betweenness_centrality(star);
  CHECK(starBc[0] == doctest::Approx(6.0));  // all C(4,2) leaf pairs
  for (int leaf = 1; leaf < 5; ++leaf) CHECK(starBc[leaf] == doctest::Approx(0.0));
}

TEST_CASE("betweenness matches the path-counting oracle") {
  TopologyConfig cfg;
  cfg.workerCount = 2;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    cfg.deviceCount = 8 + static_cast<int>(seed % 3);
    const InfrastructureGraph g = generate_topology(cfg, seed);
    const auto expected = oracles::betweenness(g.fog_count(), fog_edges(g));
    const auto actual = betweenness_centrality(g);
    REQUIRE(actual.size() == expected.size());
    for (std::size_t v = 0; v < expected.size(); ++v) {
      CHECK(actual[v] == doctest::Approx(expected[v]).epsilon(1e-9));
    }
  }
}

TEST_CASE("cloud attaches to the most central device") {
  TopologyConfig cfg;
  cfg.deviceCount = 30;
  cfg.workerCount = 5;
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    const InfrastructureGraph g = generate_topology(cfg, seed);
    const auto bc = betweenness_centrality(g);
    int best = 0;
    for (int v = 1; v < g.fog_count(); ++v) {
      if (bc[v] > bc[best]) best = v;  // ties stay with the lower id
    }
    CHECK(g.cloudAttachment == best);
    CHECK(g.hopTable[g.cloudAttachment][g.cloudDeviceId] == 1);
    CHECK(g.latencyTable[g.cloudAttachment][g.cloudDeviceId] == doctest::Approx(100.0));
  }
}

TEST_CASE("workers sit on the most central devices") {
  const InfrastructureGraph g = line_graph(3);
  const WorkerOverlay overlay = place_workers(g, 2, 1);
  REQUIRE(overlay.workers.size() == 2);
  CHECK(overlay.workers[0].workerId == 0);
  CHECK(overlay.workers[0].hostDeviceId == 1);  // the middle of the path
  CHECK(overlay.workers[1].hostDeviceId == 0);  // tie on zero, lower id first
}

TEST_CASE("neighbor sets cover the radius ball with a nearest fallback") {
  const InfrastructureGraph g = line_graph(6);
  const std::vector<Worker> workers = {{0, 0}, {1, 1}, {2, 5}};
  const NeighborResult result = compute_neighbors(workers, g, 1);
  CHECK(result.sets[0] == std::vector<int>{1});
  CHECK(result.sets[1] == std::vector<int>{0});
  CHECK(result.sets[2] == std::vector<int>{1});  // nearest worker, 4 hops out
  CHECK(result.fallbackWorkers == std::vector<int>{2});
}

TEST_CASE("a lone worker has no neighbors") {
  const InfrastructureGraph g = line_graph(4);
  const NeighborResult result = compute_neighbors({{0, 2}}, g, 1);
  CHECK(result.sets.size() == 1);
  CHECK(result.sets[0].empty());
  CHECK(result.fallbackWorkers.empty());
}

TEST_CASE("default placement gives every worker a consistent neighbor set") {
  const TopologyConfig cfg;
  const InfrastructureGraph g = generate_topology(cfg, 1);
  const WorkerOverlay overlay = place_workers(g, cfg.workerCount, cfg.neighborhoodRadius);
  REQUIRE(overlay.workers.size() == 20);
  std::set<int> fallback(overlay.fallbackWorkers.begin(), overlay.fallbackWorkers.end());
  for (int w = 0; w < 20; ++w) {
    const auto& set = overlay.neighborSets[w];
    CHECK(!set.empty());
    CHECK(std::is_sorted(set.begin(), set.end()));
    const int host = overlay.workers[w].hostDeviceId;
    if (fallback.count(w) == 0) {
      for (const int peer : set) {
        CHECK(g.hopTable[host][overlay.workers[peer].hostDeviceId] <= cfg.neighborhoodRadius);
        CHECK(peer != w);
      }
    } else {
      int nearest = INT_MAX;
      for (int other = 0; other < 20; ++other) {
        const int d = g.hopTable[host][overlay.workers[other].hostDeviceId];
        if (other != w && d > 0) nearest = std::min(nearest, d);
      }
      for (const int peer : set) {
        CHECK(g.hopTable[host][overlay.workers[peer].hostDeviceId] == nearest);
      }
    }
  }
}

TEST_CASE("graph json round trip") {
  TopologyConfig cfg;
  cfg.deviceCount = 15;
  cfg.workerCount = 3;
  const InfrastructureGraph g = generate_topology(cfg, 3);
  const InfrastructureGraph back = InfrastructureGraph::from_json(g.to_json());
  CHECK(back.fog_count() == g.fog_count());
  CHECK(back.links.size() == g.links.size());
  CHECK(back.cloudAttachment == g.cloudAttachment);
  CHECK(back.cloudLatency == g.cloudLatency);
  CHECK(back.gateway_ids() == g.gateway_ids());
  CHECK(back.hopTable == g.hopTable);
  CHECK(back.latencyTable == g.latencyTable);
}

TEST_CASE("configuration validation rejects bad values") {
  TopologyConfig cfg;
  cfg.deviceCount = 2;  // not enough room for the seed clique with m = 2
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TopologyConfig{};
  cfg.gatewayFraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TopologyConfig{};
  cfg.workerCount = 101;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TopologyConfig{};
  cfg.fogLatencyRange = {6.0, 2.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(TopologyConfig{}.validate());
}

TEST_CASE("disconnected hand graphs are rejected") {
  std::vector<Device> devices = {{0, 4, true}, {1, 4, false}, {2, 4, false}};
  std::vector<Link> links = {{0, 1, 1.0}};
  CHECK_THROWS(build_graph(devices, links, 0, 100.0));
}

}  // TEST_SUITE
