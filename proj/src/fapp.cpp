#include "fogweaver/fapp.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fogweaver {

namespace {

// First-fit decreasing check that one instance of every app can be packed.
bool single_instance_packing_exists(const std::vector<int>& consumption,
                                    const std::vector<int>& resources) {
  std::vector<int> demand = consumption;
  std::sort(demand.begin(), demand.end(), std::greater<int>());
  std::vector<int> spare = resources;
  for (int d : demand) {
    bool placed = false;
    for (int& s : spare) {
      if (s >= d) {
        s -= d;
        placed = true;
        break;
      }
    }
    if (!placed) return false;
  }
  return true;
}

std::vector<int> device_loads(const ProblemInstance& p, const Placement& x) {
  std::vector<int> load(p.deviceCount, 0);
  for (int a = 0; a < p.appCount; ++a) {
    for (int i = 0; i < p.deviceCount; ++i) {
      if (x.at(a, i)) load[i] += p.appConsumption[a];
    }
  }
  return load;
}

}  // namespace

void ProblemConfig::validate() const {
  if (appCount < 1) throw std::invalid_argument("appCount must be >= 1");
  if (appResourceRange[0] > appResourceRange[1] || appResourceRange[0] < 1) {
    throw std::invalid_argument("invalid appResourceRange");
  }
  if (popularityRange[0] > popularityRange[1] || popularityRange[0] < 0.0 ||
      popularityRange[1] > 1.0) {
    throw std::invalid_argument("popularityRange must be within [0, 1]");
  }
}

int Placement::count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

int Placement::row_sum(int a) const {
  int sum = 0;
  for (int i = 0; i < devices_; ++i) sum += at(a, i) ? 1 : 0;
  return sum;
}

std::string Placement::to_string01() const {
  std::string s(bits_.size(), '0');
  for (std::size_t k = 0; k < bits_.size(); ++k) {
    if (bits_[k]) s[k] = '1';
  }
  return s;
}

Placement Placement::from_string01(std::string_view s, int apps, int devices) {
  if (s.size() != static_cast<std::size_t>(apps) * static_cast<std::size_t>(devices)) {
    throw std::invalid_argument("chromosome string length does not match shape");
  }
  Placement p(apps, devices);
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (s[k] == '1') {
      p.genes()[k] = 1;
    } else if (s[k] != '0') {
      throw std::invalid_argument("chromosome string must contain only 0 and 1");
    }
  }
  return p;
}

ProblemInstance make_instance(std::shared_ptr<const InfrastructureGraph> graph,
                              std::vector<int> appConsumption,
                              std::vector<std::vector<std::uint8_t>> requestMatrix) {
  ProblemInstance p;
  p.graph = graph;
  p.appCount = static_cast<int>(appConsumption.size());
  p.deviceCount = graph->fog_count();
  p.appConsumption = std::move(appConsumption);
  p.gatewayDevices = graph->gateway_ids();
  p.requestMatrix = std::move(requestMatrix);
  p.deviceResources.reserve(p.deviceCount);
  for (const Device& d : graph->devices) p.deviceResources.push_back(d.resources);
  p.gatewayLatency.resize(p.gatewayDevices.size());
  for (std::size_t gi = 0; gi < p.gatewayDevices.size(); ++gi) {
    p.gatewayLatency[gi].assign(graph->latencyTable[p.gatewayDevices[gi]].begin(),
                                graph->latencyTable[p.gatewayDevices[gi]].begin() +
                                    p.deviceCount);
  }
  for (const auto& row : p.requestMatrix) {
    if (row.size() != p.gatewayDevices.size()) {
      throw std::invalid_argument("request matrix width does not match gateway count");
    }
    if (std::find(row.begin(), row.end(), std::uint8_t{1}) == row.end()) {
      throw std::invalid_argument("every app needs at least one requesting gateway");
    }
  }
  return p;
}

ProblemInstance build_problem(std::shared_ptr<const InfrastructureGraph> graph,
                              const ProblemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const auto gateways = graph->gateway_ids();
  if (gateways.empty()) throw std::invalid_argument("topology has no gateways");
  const int G = static_cast<int>(gateways.size());

  Rng rng(derive_seed(seed, "problem"));
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<int> consumption(cfg.appCount);
    for (int a = 0; a < cfg.appCount; ++a) {
      consumption[a] = rng.uniform_int(cfg.appResourceRange[0], cfg.appResourceRange[1]);
    }
    std::vector<std::vector<std::uint8_t>> requests(
        cfg.appCount, std::vector<std::uint8_t>(G, 0));
    for (int g = 0; g < G; ++g) {
      for (int a = 0; a < cfg.appCount; ++a) {
        const double p = rng.uniform_real(cfg.popularityRange[0], cfg.popularityRange[1]);
        if (rng.uniform01() < p) requests[a][g] = 1;
      }
    }
    for (int a = 0; a < cfg.appCount; ++a) {
      auto& row = requests[a];
      if (std::find(row.begin(), row.end(), std::uint8_t{1}) == row.end()) {
        row[rng.uniform_index(row.size())] = 1;
      }
    }

    std::vector<int> resources;
    for (const Device& d : graph->devices) resources.push_back(d.resources);
    if (!single_instance_packing_exists(consumption, resources)) continue;

    ProblemInstance p = make_instance(graph, std::move(consumption), std::move(requests));
    p.popularityRange = cfg.popularityRange;
    return p;
  }
  throw std::runtime_error("could not build a packable problem instance");
}

ObjectiveVector evaluate(const ProblemInstance& problem, const Placement& placement) {
  if (placement.apps() != problem.appCount || placement.devices() != problem.deviceCount) {
    throw std::invalid_argument("placement shape does not match problem");
  }
  const int A = problem.appCount;
  const int G = static_cast<int>(problem.gatewayDevices.size());

  double instanceSum = 0.0;
  double distanceSum = 0.0;
  for (int a = 0; a < A; ++a) {
    std::vector<int> instances;
    for (int i = 0; i < problem.deviceCount; ++i) {
      if (placement.at(a, i)) instances.push_back(i);
    }
    if (instances.empty()) {
      throw std::runtime_error("placement leaves app " + std::to_string(a) +
                               " without an instance");
    }
    instanceSum += static_cast<double>(instances.size());

    double gatewaySum = 0.0;
    int gatewayCount = 0;
    for (int g = 0; g < G; ++g) {
      if (!problem.requestMatrix[a][g]) continue;
      double best = std::numeric_limits<double>::infinity();
      for (int i : instances) best = std::min(best, problem.gatewayLatency[g][i]);
      gatewaySum += best;
      ++gatewayCount;
    }
    distanceSum += gatewaySum / static_cast<double>(gatewayCount);
  }
  return {instanceSum / A, distanceSum / A};
}

FeasibilityReport is_feasible(const ProblemInstance& problem, const Placement& placement) {
  FeasibilityReport report;
  for (int a = 0; a < problem.appCount; ++a) {
    if (placement.row_sum(a) == 0) report.appsWithoutInstance.push_back(a);
  }
  const auto load = device_loads(problem, placement);
  for (int i = 0; i < problem.deviceCount; ++i) {
    if (load[i] > problem.deviceResources[i]) report.overloadedDevices.push_back(i);
  }
  report.feasible = report.appsWithoutInstance.empty() && report.overloadedDevices.empty();
  return report;
}

Placement repair(const ProblemInstance& problem, Placement placement, Rng& rng) {
  if (is_feasible(problem, placement).feasible) return placement;

  const int A = problem.appCount;
  const int I = problem.deviceCount;
  const long long attemptBudget = static_cast<long long>(A) * I;
  long long attempts = 0;

  auto load = device_loads(problem, placement);
  std::vector<int> replicas(A);
  for (int a = 0; a < A; ++a) replicas[a] = placement.row_sum(a);

  auto spare_devices = [&](int need, int exclude) {
    std::vector<int> out;
    for (int j = 0; j < I; ++j) {
      if (j != exclude && problem.deviceResources[j] - load[j] >= need) out.push_back(j);
    }
    return out;
  };

  // Capacity pass: thin out the most-replicated apps, migrating last replicas
  // that may not be dropped.
  for (int i = 0; i < I; ++i) {
    while (load[i] > problem.deviceResources[i]) {
      std::vector<int> appsHere;
      for (int a = 0; a < A; ++a) {
        if (placement.at(a, i)) appsHere.push_back(a);
      }
      std::vector<int> removable;
      for (int a : appsHere) {
        if (replicas[a] > 1) removable.push_back(a);
      }
      if (!removable.empty()) {
        int maxReplicas = 0;
        for (int a : removable) maxReplicas = std::max(maxReplicas, replicas[a]);
        std::vector<int> tied;
        for (int a : removable) {
          if (replicas[a] == maxReplicas) tied.push_back(a);
        }
        const int a = tied[rng.uniform_index(tied.size())];
        placement.set(a, i, false);
        load[i] -= problem.appConsumption[a];
        --replicas[a];
        continue;
      }
      // Everything left on this device is a last replica: migrate one.
      rng.shuffle(appsHere);
      bool moved = false;
      for (int a : appsHere) {
        const auto candidates = spare_devices(problem.appConsumption[a], i);
        if (candidates.empty()) continue;
        if (++attempts > attemptBudget) {
          throw std::runtime_error("repair exceeded its relocation budget");
        }
        const int j = candidates[rng.uniform_index(candidates.size())];
        placement.set(a, i, false);
        placement.set(a, j, true);
        load[i] -= problem.appConsumption[a];
        load[j] += problem.appConsumption[a];
        moved = true;
        break;
      }
      if (!moved) {
        throw std::runtime_error("repair cannot relieve device " + std::to_string(i));
      }
    }
  }

  // Coverage pass: give every missing app an instance, freeing space from the
  // most-replicated apps if nothing fits.
  for (int a = 0; a < A; ++a) {
    while (replicas[a] == 0) {
      auto candidates = spare_devices(problem.appConsumption[a], -1);
      if (!candidates.empty()) {
        const int j = candidates[rng.uniform_index(candidates.size())];
        placement.set(a, j, true);
        load[j] += problem.appConsumption[a];
        ++replicas[a];
        break;
      }
      if (++attempts > attemptBudget) {
        throw std::runtime_error("repair exceeded its relocation budget");
      }
      int donor = -1;
      for (int b = 0; b < A; ++b) {
        if (replicas[b] > 1 && (donor < 0 || replicas[b] > replicas[donor])) donor = b;
      }
      if (donor < 0) {
        throw std::runtime_error("repair cannot free capacity for app " + std::to_string(a));
      }
      std::vector<int> hosts;
      for (int j = 0; j < I; ++j) {
        if (placement.at(donor, j)) hosts.push_back(j);
      }
      // Free the host that is already closest to fitting the app, so the
      // spare capacity accumulates on one device instead of scattering.
      int j = hosts.front();
      for (const int h : hosts) {
        if (problem.deviceResources[h] - load[h] > problem.deviceResources[j] - load[j]) j = h;
      }
      placement.set(donor, j, false);
      load[j] -= problem.appConsumption[donor];
      --replicas[donor];
    }
  }

  if (!is_feasible(problem, placement).feasible) {
    throw std::logic_error("repair produced an infeasible placement");
  }
  return placement;
}

Placement random_placement(const ProblemInstance& problem, Rng& rng) {
  Placement p(problem.appCount, problem.deviceCount);
  const double density = 1.0 / problem.deviceCount;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (rng.uniform01() < density) p.genes()[k] = 1;
  }
  return repair(problem, std::move(p), rng);
}

nlohmann::json ProblemInstance::request_matrix_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : requestMatrix) {
    nlohmann::json r = nlohmann::json::array();
    for (std::uint8_t v : row) r.push_back(static_cast<int>(v));
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json ProblemInstance::to_template_json() const {
  nlohmann::json j;
  j["appConsumption"] = appConsumption;
  j["gatewayDevices"] = gatewayDevices;
  j["requestMatrix"] = request_matrix_json();
  j["deviceResources"] = deviceResources;
  j["gatewayLatency"] = gatewayLatency;
  return j;
}

ProblemInstance ProblemInstance::from_template_json(const nlohmann::json& j) {
  ProblemInstance p;
  p.appConsumption = j.at("appConsumption").get<std::vector<int>>();
  p.gatewayDevices = j.at("gatewayDevices").get<std::vector<int>>();
  p.deviceResources = j.at("deviceResources").get<std::vector<int>>();
  p.gatewayLatency = j.at("gatewayLatency").get<std::vector<std::vector<double>>>();
  p.appCount = static_cast<int>(p.appConsumption.size());
  p.deviceCount = static_cast<int>(p.deviceResources.size());
  for (const auto& row : j.at("requestMatrix")) {
    std::vector<std::uint8_t> r;
    for (const auto& v : row) r.push_back(static_cast<std::uint8_t>(v.get<int>()));
    p.requestMatrix.push_back(std::move(r));
  }
  return p;
}

}  // namespace fogweaver
