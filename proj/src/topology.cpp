#include "fogweaver/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fogweaver/rng.hpp"

namespace fogweaver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<std::pair<int, double>>> adjacency(const InfrastructureGraph& g) {
  std::vector<std::vector<std::pair<int, double>>> adj(g.node_count());
  for (const Link& l : g.links) {
    adj[l.deviceA].push_back({l.deviceB, l.latency});
    adj[l.deviceB].push_back({l.deviceA, l.latency});
  }
  adj[g.cloudDeviceId].push_back({g.cloudAttachment, g.cloudLatency});
  adj[g.cloudAttachment].push_back({g.cloudDeviceId, g.cloudLatency});
  return adj;
}

std::vector<int> bfs_hops(const std::vector<std::vector<std::pair<int, double>>>& adj, int src) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> queue{src};
  dist[src] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (const auto& [v, w] : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

std::vector<double> dijkstra(const std::vector<std::vector<std::pair<int, double>>>& adj,
                             int src) {
  const std::size_t n = adj.size();
  std::vector<double> dist(n, kInf);
  std::vector<bool> done(n, false);
  dist[src] = 0.0;
  for (std::size_t iter = 0; iter < n; ++iter) {
    int u = -1;
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (!done[i] && dist[i] < best) {
        best = dist[i];
        u = static_cast<int>(i);
      }
    }
    if (u < 0) break;
    done[u] = true;
    for (const auto& [v, w] : adj[u]) {
      if (dist[u] + w < dist[v]) dist[v] = dist[u] + w;
    }
  }
  return dist;
}

void build_tables(InfrastructureGraph& g) {
  const auto adj = adjacency(g);
  const int n = g.node_count();
  g.hopTable.assign(n, std::vector<int>(n, 0));
  g.latencyTable.assign(n, std::vector<double>(n, 0.0));
  for (int s = 0; s < n; ++s) {
    const auto hops = bfs_hops(adj, s);
    const auto lat = dijkstra(adj, s);
    for (int t = 0; t < n; ++t) {
      if (hops[t] < 0 || lat[t] == kInf) {
        throw std::runtime_error("infrastructure graph is disconnected");
      }
      g.hopTable[s][t] = hops[t];
      g.latencyTable[s][t] = lat[t];
    }
  }
}

}  // namespace

void TopologyConfig::validate() const {
  if (deviceCount <= attachmentsPerNode) {
    throw std::invalid_argument("deviceCount must exceed attachmentsPerNode");
  }
  if (attachmentsPerNode < 1) throw std::invalid_argument("attachmentsPerNode must be >= 1");
  if (fogLatencyRange[0] > fogLatencyRange[1] || fogLatencyRange[0] < 0) {
    throw std::invalid_argument("invalid fogLatencyRange");
  }
  if (cloudLatency <= 0) throw std::invalid_argument("cloudLatency must be positive");
  if (deviceResourceRange[0] > deviceResourceRange[1] || deviceResourceRange[0] < 1) {
    throw std::invalid_argument("invalid deviceResourceRange");
  }
  if (gatewayFraction <= 0.0 || gatewayFraction > 1.0) {
    throw std::invalid_argument("gatewayFraction must be in (0, 1]");
  }
  if (workerCount < 1 || workerCount > deviceCount) {
    throw std::invalid_argument("workerCount must be in [1, deviceCount]");
  }
  if (neighborhoodRadius < 0) throw std::invalid_argument("neighborhoodRadius must be >= 0");
}

std::vector<int> InfrastructureGraph::gateway_ids() const {
  std::vector<int> out;
  for (const Device& d : devices) {
    if (d.isGateway) out.push_back(d.deviceId);
  }
  return out;
}

InfrastructureGraph build_graph(std::vector<Device> devices, std::vector<Link> links,
                                int cloudAttachment, double cloudLatency) {
  InfrastructureGraph g;
  g.devices = std::move(devices);
  g.links = std::move(links);
  for (Link& l : g.links) {
    if (l.deviceA > l.deviceB) std::swap(l.deviceA, l.deviceB);
  }
  std::sort(g.links.begin(), g.links.end(), [](const Link& a, const Link& b) {
    return std::tie(a.deviceA, a.deviceB) < std::tie(b.deviceA, b.deviceB);
  });
  g.cloudDeviceId = g.fog_count();
  g.cloudAttachment = cloudAttachment;
  g.cloudLatency = cloudLatency;
  build_tables(g);
  return g;
}

InfrastructureGraph generate_topology(const TopologyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(derive_seed(seed, "topology-graph"));

  const int n = cfg.deviceCount;
  const int m = cfg.attachmentsPerNode;

  std::vector<Device> devices(n);
  for (int i = 0; i < n; ++i) devices[i].deviceId = i;

  std::vector<Link> links;
  // Every endpoint occurrence, so sampling an element is degree-proportional.
  std::vector<int> endpoints;
  auto add_link = [&](int a, int b) {
    links.push_back({a, b, rng.uniform_real(cfg.fogLatencyRange[0], cfg.fogLatencyRange[1])});
    endpoints.push_back(a);
    endpoints.push_back(b);
  };

  for (int a = 0; a < m + 1; ++a) {
    for (int b = a + 1; b < m + 1; ++b) add_link(a, b);
  }
  for (int v = m + 1; v < n; ++v) {
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < m) {
      int t = endpoints[rng.uniform_index(endpoints.size())];
      if (std::find(targets.begin(), targets.end(), t) == targets.end()) {
        targets.push_back(t);
      }
    }
    for (int t : targets) add_link(v, t);
  }

  for (Device& d : devices) {
    d.resources = rng.uniform_int(cfg.deviceResourceRange[0], cfg.deviceResourceRange[1]);
  }

  const int gatewayCount = static_cast<int>(std::lround(cfg.gatewayFraction * n));
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  rng.shuffle(ids);
  for (int i = 0; i < gatewayCount; ++i) devices[ids[i]].isGateway = true;

  // Cloud joins at the most central fog device (ties to the lowest id).
  InfrastructureGraph fogOnly;
  fogOnly.devices = devices;
  fogOnly.links = links;
  fogOnly.cloudDeviceId = n;
  fogOnly.cloudAttachment = 0;
  fogOnly.cloudLatency = cfg.cloudLatency;
  const auto centrality = betweenness_centrality(fogOnly);
  int attach = 0;
  for (int i = 1; i < n; ++i) {
    if (centrality[i] > centrality[attach]) attach = i;
  }

  return build_graph(std::move(devices), std::move(links), attach, cfg.cloudLatency);
}

// Brandes, unweighted. Dependencies are halved at the end so each unordered
// pair contributes once.
std::vector<double> betweenness_centrality(const InfrastructureGraph& graph) {
  const int n = graph.fog_count();
  std::vector<std::vector<int>> adj(n);
  for (const Link& l : graph.links) {
    adj[l.deviceA].push_back(l.deviceB);
    adj[l.deviceB].push_back(l.deviceA);
  }

  std::vector<double> bc(n, 0.0);
  for (int s = 0; s < n; ++s) {
    std::vector<int> order;
    std::vector<std::vector<int>> pred(n);
    std::vector<long long> sigma(n, 0);
    std::vector<int> dist(n, -1);
    sigma[s] = 1;
    dist[s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      order.push_back(u);
      for (int v : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
        if (dist[v] == dist[u] + 1) {
          sigma[v] += sigma[u];
          pred[v].push_back(u);
        }
      }
    }
    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int w = *it;
      for (int u : pred[w]) {
        delta[u] += static_cast<double>(sigma[u]) / static_cast<double>(sigma[w]) *
                    (1.0 + delta[w]);
      }
      if (w != s) bc[w] += delta[w];
    }
  }
  for (double& x : bc) x /= 2.0;
  return bc;
}

NeighborResult compute_neighbors(const std::vector<Worker>& workers,
                                 const InfrastructureGraph& graph, int radius) {
  NeighborResult result;
  result.sets.resize(workers.size());
  for (std::size_t i = 0; i < workers.size(); ++i) {
    const int host = workers[i].hostDeviceId;
    std::vector<int> within;
    int minPositive = std::numeric_limits<int>::max();
    for (std::size_t j = 0; j < workers.size(); ++j) {
      if (j == i) continue;
      const int hops = graph.hopTable[host][workers[j].hostDeviceId];
      if (hops <= radius) within.push_back(workers[j].workerId);
      if (hops > 0) minPositive = std::min(minPositive, hops);
    }
    if (within.empty() && workers.size() > 1) {
      for (std::size_t j = 0; j < workers.size(); ++j) {
        if (j == i) continue;
        if (graph.hopTable[host][workers[j].hostDeviceId] == minPositive) {
          within.push_back(workers[j].workerId);
        }
      }
      result.fallbackWorkers.push_back(workers[i].workerId);
    }
    std::sort(within.begin(), within.end());
    result.sets[i] = std::move(within);
  }
  return result;
}

WorkerOverlay place_workers(const InfrastructureGraph& graph, int k, int neighborhoodRadius) {
  if (k < 1 || k > graph.fog_count()) {
    throw std::invalid_argument("worker count must be in [1, fog device count]");
  }
  const auto centrality = betweenness_centrality(graph);
  std::vector<int> ids(graph.fog_count());
  std::iota(ids.begin(), ids.end(), 0);
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (centrality[a] != centrality[b]) return centrality[a] > centrality[b];
    return a < b;
  });

  WorkerOverlay overlay;
  for (int w = 0; w < k; ++w) overlay.workers.push_back({w, ids[w]});
  auto neighbors = compute_neighbors(overlay.workers, graph, neighborhoodRadius);
  overlay.neighborSets = std::move(neighbors.sets);
  overlay.fallbackWorkers = std::move(neighbors.fallbackWorkers);
  return overlay;
}

nlohmann::json InfrastructureGraph::to_json() const {
  nlohmann::json j;
  j["devices"] = nlohmann::json::array();
  for (const Device& d : devices) {
    j["devices"].push_back(
        {{"deviceId", d.deviceId}, {"resources", d.resources}, {"isGateway", d.isGateway}});
  }
  j["links"] = nlohmann::json::array();
  for (const Link& l : links) {
    j["links"].push_back(
        {{"deviceA", l.deviceA}, {"deviceB", l.deviceB}, {"latency", l.latency}});
  }
  j["cloud"] = {{"deviceId", cloudDeviceId},
                {"attachedTo", cloudAttachment},
                {"latency", cloudLatency}};
  return j;
}

InfrastructureGraph InfrastructureGraph::from_json(const nlohmann::json& j) {
  std::vector<Device> devices;
  for (const auto& d : j.at("devices")) {
    devices.push_back({d.at("deviceId").get<int>(), d.at("resources").get<int>(),
                       d.at("isGateway").get<bool>()});
  }
  std::vector<Link> links;
  for (const auto& l : j.at("links")) {
    links.push_back({l.at("deviceA").get<int>(), l.at("deviceB").get<int>(),
                     l.at("latency").get<double>()});
  }
  const auto& cloud = j.at("cloud");
  InfrastructureGraph g = build_graph(std::move(devices), std::move(links),
                                      cloud.at("attachedTo").get<int>(),
                                      cloud.at("latency").get<double>());
  if (cloud.at("deviceId").get<int>() != g.cloudDeviceId) {
    throw std::invalid_argument("cloud deviceId does not match device count");
  }
  return g;
}

}  // namespace fogweaver
