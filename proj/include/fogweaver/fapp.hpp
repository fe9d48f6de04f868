#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fogweaver/rng.hpp"
#include "fogweaver/topology.hpp"

namespace fogweaver {

struct ProblemConfig {
  int appCount = 10;
  std::array<int, 2> appResourceRange = {1, 2};
  std::array<double, 2> popularityRange = {0.0, 0.75};
  std::array<double, 2> interRequestTime = {5.0, 10.0};  // recorded, not simulated

  void validate() const;
};

// Binary placement matrix: x[a][i] == 1 iff app a runs an instance on fog
// device i. The cloud is not a placement target.
class Placement {
 public:
  Placement() = default;
  Placement(int apps, int devices) : apps_(apps), devices_(devices), bits_(apps * devices, 0) {}

  int apps() const { return apps_; }
  int devices() const { return devices_; }
  bool at(int a, int i) const { return bits_[static_cast<std::size_t>(a) * devices_ + i] != 0; }
  void set(int a, int i, bool v) {
    bits_[static_cast<std::size_t>(a) * devices_ + i] = v ? 1 : 0;
  }
  void flip(std::size_t gene) { bits_[gene] ^= 1; }
  std::size_t size() const { return bits_.size(); }
  int count() const;
  int row_sum(int a) const;

  const std::vector<std::uint8_t>& genes() const { return bits_; }
  std::vector<std::uint8_t>& genes() { return bits_; }

  std::string to_string01() const;  // row-major "0110..."
  static Placement from_string01(std::string_view s, int apps, int devices);

  friend bool operator==(const Placement& a, const Placement& b) {
    return a.apps_ == b.apps_ && a.devices_ == b.devices_ && a.bits_ == b.bits_;
  }

 private:
  int apps_ = 0;
  int devices_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct ObjectiveVector {
  double meanInstances = 0.0;  // minimized
  double meanDistance = 0.0;   // minimized, ms

  friend bool operator==(const ObjectiveVector& a, const ObjectiveVector& b) {
    return a.meanInstances == b.meanInstances && a.meanDistance == b.meanDistance;
  }
};

// Everything evaluation and repair need, detached from the graph so workers
// can rebuild it from a solutionTemplate payload.
struct ProblemInstance {
  std::shared_ptr<const InfrastructureGraph> graph;  // may be null on worker side
  int appCount = 0;
  int deviceCount = 0;                        // fog devices
  std::vector<int> appConsumption;            // per app
  std::vector<int> gatewayDevices;            // ascending device ids
  std::vector<std::vector<std::uint8_t>> requestMatrix;    // A x G
  std::vector<int> deviceResources;           // per fog device
  std::vector<std::vector<double>> gatewayLatency;         // G x I
  std::array<double, 2> popularityRange = {0.0, 0.75};

  nlohmann::json request_matrix_json() const;
  nlohmann::json to_template_json() const;  // solutionTemplate "infrastructure" attribute
  static ProblemInstance from_template_json(const nlohmann::json& j);
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<int> appsWithoutInstance;  // c1 violations
  std::vector<int> overloadedDevices;    // c2 violations
};

// Derives the per-gateway latency view and request data from a graph.
ProblemInstance make_instance(std::shared_ptr<const InfrastructureGraph> graph,
                              std::vector<int> appConsumption,
                              std::vector<std::vector<std::uint8_t>> requestMatrix);

// Random request matrix: per (gateway, app) pair draw popularity p then a
// Bernoulli(p) request; apps nobody asked for get one random gateway. Regenerates
// until a feasible single-instance packing exists. Deterministic in seed.
ProblemInstance build_problem(std::shared_ptr<const InfrastructureGraph> graph,
                              const ProblemConfig& cfg, std::uint64_t seed);

// Mean instance count and mean request latency. Throws if an app has no
// instance; capacity violations do not affect the objective values.
ObjectiveVector evaluate(const ProblemInstance& problem, const Placement& placement);

FeasibilityReport is_feasible(const ProblemInstance& problem, const Placement& placement);

// Capacity repair first (drop the most-replicated apps at overloaded devices,
// never a last replica; blocked last replicas migrate), then instantiate
// missing apps on devices with spare capacity. Feasible input passes through
// untouched. Throws after appCount*deviceCount failed relocation attempts.
Placement repair(const ProblemInstance& problem, Placement placement, Rng& rng);

// Bernoulli(1/deviceCount) genes, then repair.
Placement random_placement(const ProblemInstance& problem, Rng& rng);

}  // namespace fogweaver
