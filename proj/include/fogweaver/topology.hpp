#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace fogweaver {

struct TopologyConfig {
  int deviceCount = 100;
  int attachmentsPerNode = 2;              // BA parameter m
  std::array<double, 2> fogLatencyRange = {2.0, 6.0};   // ms
  double cloudLatency = 100.0;             // ms
  std::array<int, 2> deviceResourceRange = {1, 4};      // resource units
  double gatewayFraction = 0.25;
  int workerCount = 20;
  int neighborhoodRadius = 1;              // hops

  void validate() const;  // throws std::invalid_argument
};

struct Device {
  int deviceId = 0;
  int resources = 0;
  bool isGateway = false;
};

struct Link {
  int deviceA = 0;
  int deviceB = 0;
  double latency = 0.0;
};

// Fog devices 0..N-1 plus one distinguished cloud node with id N, attached by a
// single link. hopTable minimizes hop count, latencyTable minimizes summed link
// latency; the two optima may ride different paths.
struct InfrastructureGraph {
  std::vector<Device> devices;  // fog only, deviceId == index
  std::vector<Link> links;      // fog-to-fog links
  int cloudDeviceId = 0;        // == devices.size()
  int cloudAttachment = 0;      // fog device holding the cloud link
  double cloudLatency = 0.0;

  std::vector<std::vector<int>> hopTable;         // (N+1) x (N+1)
  std::vector<std::vector<double>> latencyTable;  // (N+1) x (N+1)

  int fog_count() const { return static_cast<int>(devices.size()); }
  int node_count() const { return fog_count() + 1; }
  std::vector<int> gateway_ids() const;

  nlohmann::json to_json() const;  // tables omitted, rebuilt on load
  static InfrastructureGraph from_json(const nlohmann::json& j);
};

struct Worker {
  int workerId = 0;
  int hostDeviceId = 0;
};

struct WorkerOverlay {
  std::vector<Worker> workers;                 // indexed by workerId
  std::vector<std::vector<int>> neighborSets;  // workerId -> sorted worker ids
  std::vector<int> fallbackWorkers;            // workers whose radius-ball was empty
};

// Builds tables and validates connectivity for a hand-assembled graph.
InfrastructureGraph build_graph(std::vector<Device> devices, std::vector<Link> links,
                                int cloudAttachment, double cloudLatency);

// Barabasi-Albert growth (clique of m+1 seeds, then m preferential edges per
// node), uniform link latencies and device resources, gateway sampling, cloud
// attached to the most central fog device. Deterministic in seed.
InfrastructureGraph generate_topology(const TopologyConfig& cfg, std::uint64_t seed);

// Unnormalized betweenness over the fog subgraph (cloud excluded), counting
// each unordered pair once. Path a-b-c scores b = 1.
std::vector<double> betweenness_centrality(const InfrastructureGraph& graph);

struct NeighborResult {
  std::vector<std::vector<int>> sets;
  std::vector<int> fallbackWorkers;
};

// Workers within `radius` hops of each worker's host; a worker with an empty
// ball falls back to all workers at its minimum positive hop distance.
NeighborResult compute_neighbors(const std::vector<Worker>& workers,
                                 const InfrastructureGraph& graph, int radius);

// Top-k fog devices by (betweenness desc, deviceId asc), one worker each.
WorkerOverlay place_workers(const InfrastructureGraph& graph, int k, int neighborhoodRadius);

}  // namespace fogweaver
