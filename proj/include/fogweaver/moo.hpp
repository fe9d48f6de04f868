#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fogweaver/fapp.hpp"
#include "fogweaver/rng.hpp"

namespace fogweaver {

using SolutionId = std::uint64_t;

struct Individual {
  SolutionId id = 0;
  std::optional<Placement> chromosome;  // absent in objective-space-only views
  ObjectiveVector objectives;
  int ownerWorkerId = -1;
};

// Strict Pareto dominance on minimized objectives.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Deb's front peeling; index lists preserve input order within each front.
std::vector<std::vector<std::size_t>> fast_non_dominated_sort(
    const std::vector<ObjectiveVector>& points);

// Crowding distances for one front. Extremes are infinite; a front whose
// objective spans are all zero gets zeros; a singleton front gets infinity.
std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front);

// Population with cached front indices (1-based) and crowding distances.
class RankedPopulation {
 public:
  RankedPopulation() = default;
  explicit RankedPopulation(std::vector<Individual> members);

  const std::vector<Individual>& members() const { return members_; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }

  bool contains(SolutionId id) const { return index_.count(id) != 0; }
  const Individual& by_id(SolutionId id) const { return members_[index_.at(id)]; }
  int front_of(SolutionId id) const { return frontIndex_[index_.at(id)]; }
  double crowding_of(SolutionId id) const { return crowding_[index_.at(id)]; }

  std::vector<const Individual*> front_one() const;

 private:
  friend SolutionId binary_tournament(const RankedPopulation& pop, Rng& rng);

  std::vector<Individual> members_;
  std::vector<int> frontIndex_;
  std::vector<double> crowding_;
  std::unordered_map<SolutionId, std::size_t> index_;
};

// Two uniform draws with replacement; lower front wins, then higher crowding,
// then a coin flip.
SolutionId binary_tournament(const RankedPopulation& pop, Rng& rng);

// Two-point crossover on the row-major flattened chromosome, no repair.
std::pair<Placement, Placement> two_point_cross(const Placement& p1, const Placement& p2,
                                                Rng& rng);

// two_point_cross followed by repair of both children.
std::pair<Placement, Placement> crossover(const ProblemInstance& problem, const Placement& p1,
                                          const Placement& p2, Rng& rng);

// Flips exactly one uniformly chosen gene, then repairs. The caller decides
// whether to mutate at all (probability given by config).
Placement mutate(const ProblemInstance& problem, const Placement& p, Rng& rng);

struct InsertResult {
  RankedPopulation population;
  std::vector<SolutionId> removed;
};

// Union of population and children sorted by (front asc, crowding desc, id
// asc); the first `capacity` survive. Survivors are re-ranked.
InsertResult steady_state_insert(const RankedPopulation& pop, std::vector<Individual> children,
                                 std::size_t capacity);

// Non-dominated subset of the union of fronts, exact duplicates collapsed.
std::vector<ObjectiveVector> reference_front(
    const std::vector<std::vector<ObjectiveVector>>& fronts);

}  // namespace fogweaver
