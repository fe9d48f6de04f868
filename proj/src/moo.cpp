#include "fogweaver/moo.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fogweaver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::array<double, 2> as_array(const ObjectiveVector& v) {
  return {v.meanInstances, v.meanDistance};
}

}  // namespace

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
  const bool noWorse =
      a.meanInstances <= b.meanInstances && a.meanDistance <= b.meanDistance;
  const bool better =
      a.meanInstances < b.meanInstances || a.meanDistance < b.meanDistance;
  return noWorse && better;
}

std::vector<std::vector<std::size_t>> fast_non_dominated_sort(
    const std::vector<ObjectiveVector>& points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<int> dominationCount(n, 0);
  std::vector<std::vector<std::size_t>> fronts;

  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(points[p], points[q])) {
        dominated[p].push_back(q);
      } else if (dominates(points[q], points[p])) {
        ++dominationCount[p];
      }
    }
    if (dominationCount[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    fronts.push_back(current);
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated[p]) {
        if (--dominationCount[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());  // keep input order inside each front
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<ObjectiveVector>& front) {
  const std::size_t n = front.size();
  if (n == 0) return {};
  if (n == 1) return {kInf};
  std::vector<double> distance(n, 0.0);
  for (int obj = 0; obj < 2; ++obj) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return as_array(front[a])[obj] < as_array(front[b])[obj];
    });
    const double lo = as_array(front[order.front()])[obj];
    const double hi = as_array(front[order.back()])[obj];
    distance[order.front()] = kInf;
    distance[order.back()] = kInf;
    if (hi == lo) continue;  // degenerate span contributes nothing
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (distance[order[k]] == kInf) continue;
      distance[order[k]] += (as_array(front[order[k + 1]])[obj] -
                             as_array(front[order[k - 1]])[obj]) /
                            (hi - lo);
    }
  }
  return distance;
}

RankedPopulation::RankedPopulation(std::vector<Individual> members)
    : members_(std::move(members)) {
  frontIndex_.assign(members_.size(), 0);
  crowding_.assign(members_.size(), 0.0);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (!index_.emplace(members_[i].id, i).second) {
      throw std::invalid_argument("duplicate solution id in population");
    }
  }
  std::vector<ObjectiveVector> points;
  points.reserve(members_.size());
  for (const Individual& ind : members_) points.push_back(ind.objectives);
  const auto fronts = fast_non_dominated_sort(points);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    std::vector<ObjectiveVector> frontPoints;
    frontPoints.reserve(fronts[f].size());
    for (std::size_t idx : fronts[f]) frontPoints.push_back(points[idx]);
    const auto crowd = crowding_distance(frontPoints);
    for (std::size_t k = 0; k < fronts[f].size(); ++k) {
      frontIndex_[fronts[f][k]] = static_cast<int>(f) + 1;
      crowding_[fronts[f][k]] = crowd[k];
    }
  }
}

std::vector<const Individual*> RankedPopulation::front_one() const {
  std::vector<const Individual*> out;
  for (std::size_t i = 0; i < members_.size(); ++i) {
    if (frontIndex_[i] == 1) out.push_back(&members_[i]);
  }
  return out;
}

SolutionId binary_tournament(const RankedPopulation& pop, Rng& rng) {
  if (pop.empty()) throw std::invalid_argument("tournament over empty population");
  const std::size_t a = rng.uniform_index(pop.size());
  const std::size_t b = rng.uniform_index(pop.size());
  const int fa = pop.frontIndex_[a];
  const int fb = pop.frontIndex_[b];
  if (fa != fb) return pop.members_[fa < fb ? a : b].id;
  const double ca = pop.crowding_[a];
  const double cb = pop.crowding_[b];
  if (ca != cb) return pop.members_[ca > cb ? a : b].id;
  return pop.members_[rng.coin() ? a : b].id;
}

std::pair<Placement, Placement> two_point_cross(const Placement& p1, const Placement& p2,
                                                Rng& rng) {
  if (p1.apps() != p2.apps() || p1.devices() != p2.devices()) {
    throw std::invalid_argument("crossover parents have different shapes");
  }
  const std::size_t len = p1.size();
  // Distinct ordered cut points over [0, len].
  std::size_t c1 = rng.uniform_index(len + 1);
  std::size_t c2 = rng.uniform_index(len);
  if (c2 >= c1) ++c2;
  if (c1 > c2) std::swap(c1, c2);

  Placement child1 = p1;
  Placement child2 = p2;
  for (std::size_t k = c1; k < c2; ++k) {
    std::swap(child1.genes()[k], child2.genes()[k]);
  }
  return {std::move(child1), std::move(child2)};
}

std::pair<Placement, Placement> crossover(const ProblemInstance& problem, const Placement& p1,
                                          const Placement& p2, Rng& rng) {
  auto [c1, c2] = two_point_cross(p1, p2, rng);
  c1 = repair(problem, std::move(c1), rng);
  c2 = repair(problem, std::move(c2), rng);
  return {std::move(c1), std::move(c2)};
}

Placement mutate(const ProblemInstance& problem, const Placement& p, Rng& rng) {
  Placement out = p;
  out.flip(rng.uniform_index(out.size()));
  return repair(problem, std::move(out), rng);
}

InsertResult steady_state_insert(const RankedPopulation& pop, std::vector<Individual> children,
                                 std::size_t capacity) {
  std::vector<Individual> all = pop.members();
  for (Individual& child : children) all.push_back(std::move(child));
  RankedPopulation unionPop(std::move(all));

  std::vector<std::size_t> order(unionPop.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Individual& ia = unionPop.members()[a];
    const Individual& ib = unionPop.members()[b];
    const int fa = unionPop.front_of(ia.id);
    const int fb = unionPop.front_of(ib.id);
    if (fa != fb) return fa < fb;
    const double ca = unionPop.crowding_of(ia.id);
    const double cb = unionPop.crowding_of(ib.id);
    if (ca != cb) return ca > cb;
    return ia.id < ib.id;
  });

  InsertResult result;
  std::vector<Individual> survivors;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k < capacity) {
      survivors.push_back(unionPop.members()[order[k]]);
    } else {
      result.removed.push_back(unionPop.members()[order[k]].id);
    }
  }
  result.population = RankedPopulation(std::move(survivors));
  return result;
}

std::vector<ObjectiveVector> reference_front(
    const std::vector<std::vector<ObjectiveVector>>& fronts) {
  std::vector<ObjectiveVector> pool;
  for (const auto& front : fronts) pool.insert(pool.end(), front.begin(), front.end());

  std::sort(pool.begin(), pool.end(), [](const ObjectiveVector& a, const ObjectiveVector& b) {
    if (a.meanInstances != b.meanInstances) return a.meanInstances < b.meanInstances;
    return a.meanDistance < b.meanDistance;
  });
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  std::vector<ObjectiveVector> front;
  for (const ObjectiveVector& p : pool) {
    bool isDominated = false;
    for (const ObjectiveVector& q : pool) {
      if (dominates(q, p)) {
        isDominated = true;
        break;
      }
    }
    if (!isDominated) front.push_back(p);
  }
  return front;
}

}  // namespace fogweaver
