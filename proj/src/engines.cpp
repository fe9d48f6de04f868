#include "fogweaver/engines.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

namespace fogweaver {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::Traditional: return "traditional";
    case Scenario::SemiDistributed: return "semi";
    case Scenario::FullyDistributed: return "fully";
    case Scenario::NeighborAware: return "neighbor";
  }
  throw std::logic_error("unknown scenario");
}

Scenario scenario_from_string(const std::string& name) {
  if (name == "traditional") return Scenario::Traditional;
  if (name == "semi") return Scenario::SemiDistributed;
  if (name == "fully") return Scenario::FullyDistributed;
  if (name == "neighbor") return Scenario::NeighborAware;
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

void EngineConfig::validate() const {
  if (populationSize < 2 || populationSize % 2 != 0) {
    throw std::invalid_argument("populationSize must be an even number >= 2");
  }
  if (generationCount < 0) throw std::invalid_argument("generationCount must be >= 0");
  if (mutationProbability < 0.0 || mutationProbability > 1.0) {
    throw std::invalid_argument("mutationProbability must be in [0, 1]");
  }
  if (workerCount < 1) throw std::invalid_argument("workerCount must be >= 1");
  if (scenario != Scenario::Traditional) {
    if (populationSize % workerCount != 0) {
      throw std::invalid_argument("populationSize must be divisible by workerCount");
    }
    if ((scenario == Scenario::FullyDistributed || scenario == Scenario::NeighborAware) &&
        children_budget() % (2LL * workerCount) != 0) {
      throw std::invalid_argument(
          "children budget must split into whole matings per worker");
    }
  }
  if (neighborhoodRadius < 0) throw std::invalid_argument("neighborhoodRadius must be >= 0");
}

namespace {

SolutionId make_id(int slot, std::uint64_t counter) {
  return (static_cast<SolutionId>(slot + 1) << 40) | counter;
}

std::pair<Individual, Individual> breed(const ProblemInstance& problem, const EngineConfig& cfg,
                                        const Placement& p1, const Placement& p2, Rng& rng,
                                        const std::function<SolutionId()>& nextId, int owner) {
  auto [c1, c2] = crossover(problem, p1, p2, rng);
  if (rng.uniform01() < cfg.mutationProbability) c1 = mutate(problem, c1, rng);
  if (rng.uniform01() < cfg.mutationProbability) c2 = mutate(problem, c2, rng);
  Individual i1{nextId(), c1, evaluate(problem, c1), owner};
  Individual i2{nextId(), c2, evaluate(problem, c2), owner};
  return {std::move(i1), std::move(i2)};
}

std::vector<ObjectiveVector> snapshot_points(const std::vector<ObjectiveVector>& points) {
  return reference_front({points});
}

nlohmann::json fitness_json(const ObjectiveVector& v) {
  return nlohmann::json::array({v.meanInstances, v.meanDistance});
}

ObjectiveVector fitness_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

nlohmann::json template_payload(const EngineConfig& cfg, const ProblemInstance& problem) {
  return {{"subPopulationSize", cfg.sub_population_size()},
          {"chromosomeShape", nlohmann::json::array({problem.appCount, problem.deviceCount})},
          {"infrastructure", problem.to_template_json()}};
}

// Blocking mailbox for the concurrent runtime.
class Inbox {
 public:
  void push(Message m) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      queue_.push_back(std::move(m));
    }
    cv_.notify_all();
  }
  void close() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }
  std::optional<Message> pop() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) return std::nullopt;
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }
  std::optional<Message> try_pop() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (queue_.empty()) return std::nullopt;
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Message> queue_;
  bool closed_ = false;
};

// ---------------------------------------------------------------------------
// Semi-distributed actors: the coordinator keeps the whole objective space and
// drives every mating; workers keep the chromosomes and breed on command.

class SemiWorker {
 public:
  SemiWorker(int id, int host, const EngineConfig& cfg, MessageBus& bus, std::uint64_t seed)
      : id_(id),
        host_(host),
        cfg_(&cfg),
        bus_(&bus),
        rng_(seed),
        clientId_(std::to_string(id)) {}

  const std::string& client_id() const { return clientId_; }

  void register_and_subscribe() {
    bus_->register_client(clientId_, host_);
    bus_->subscribe(clientId_, "command/" + clientId_ + "/solutionTemplate");
    bus_->subscribe(clientId_, "command/" + clientId_ + "/removeSolutions");
    bus_->subscribe(clientId_, "command/" + clientId_ + "/sendSolution");
    bus_->subscribe(clientId_, "solution/" + clientId_);
    bus_->subscribe(clientId_, "command/stopOptimization");
  }

  void publish_join() { bus_->publish(clientId_, "command/join", {{"workerId", id_}}); }

  void on_message(const Message& m) {
    const auto seg = split_topic(m.topic);
    if (seg.size() == 3 && seg[0] == "command" && seg[2] == "solutionTemplate") {
      on_template(m);
    } else if (seg.size() == 3 && seg[0] == "command" && seg[2] == "sendSolution") {
      on_send_solution(m);
    } else if (seg.size() == 2 && seg[0] == "solution") {
      on_solution(m);
    } else if (seg.size() == 3 && seg[0] == "command" && seg[2] == "removeSolutions") {
      on_remove(m);
    } else if (m.topic == "command/stopOptimization") {
      stopped_ = true;
    } else {
      throw ProtocolError("worker " + clientId_ + " cannot handle topic " + m.topic);
    }
  }

  bool stopped() const { return stopped_; }
  const std::map<SolutionId, Individual>& store() const { return store_; }

 private:
  SolutionId next_id() { return make_id(id_, counter_++); }

  RankedPopulation ranked_store() const {
    std::vector<Individual> members;
    members.reserve(store_.size());
    for (const auto& [id, ind] : store_) members.push_back(ind);
    return RankedPopulation(std::move(members));
  }

  void on_template(const Message& m) {
    problem_ = ProblemInstance::from_template_json(m.payload.at("infrastructure"));
    const int subPop = m.payload.at("subPopulationSize").get<int>();
    nlohmann::json ids = nlohmann::json::array();
    nlohmann::json fitness = nlohmann::json::array();
    for (int k = 0; k < subPop; ++k) {
      Placement x = random_placement(problem_, rng_);
      Individual ind{next_id(), x, evaluate(problem_, x), id_};
      ids.push_back(ind.id);
      fitness.push_back(fitness_json(ind.objectives));
      store_.emplace(ind.id, std::move(ind));
    }
    haveTemplate_ = true;
    bus_->publish(clientId_, "fitness/" + clientId_ + "/newPopulation",
                  {{"workerId", id_}, {"solutionIds", ids}, {"fitness", fitness}});
  }

  void on_send_solution(const Message& m) {
    const SolutionId sid = m.payload.at("solutionId").get<SolutionId>();
    const int requester = m.payload.at("requesterId").get<int>();
    const Placement* chromosome = nullptr;
    if (const auto it = store_.find(sid); it != store_.end()) {
      chromosome = &*it->second.chromosome;
    } else {
      for (const auto& [gid, gp] : grace_) {
        if (gid == sid) chromosome = &gp;
      }
    }
    if (chromosome == nullptr) {
      throw ProtocolError("worker " + clientId_ + " asked for unknown solution " +
                          std::to_string(sid));
    }
    bus_->publish(clientId_, "solution/" + std::to_string(requester),
                  {{"chromosome", chromosome_to_string(*chromosome)}}, m.matingIndex);
  }

  void on_solution(const Message& m) {
    if (!haveTemplate_) throw ProtocolError("solution before template");
    const Placement parent1 = chromosome_from_string(
        m.payload.at("chromosome").get<std::string>(), problem_.appCount, problem_.deviceCount);
    Placement parent2 = parent1;
    if (!store_.empty()) {
      const RankedPopulation local = ranked_store();
      parent2 = *local.by_id(binary_tournament(local, rng_)).chromosome;
    }
    auto [c1, c2] = breed(problem_, *cfg_, parent1, parent2, rng_,
                          [this] { return next_id(); }, id_);
    nlohmann::json ids = nlohmann::json::array({c1.id, c2.id});
    nlohmann::json fitness =
        nlohmann::json::array({fitness_json(c1.objectives), fitness_json(c2.objectives)});
    store_.emplace(c1.id, std::move(c1));
    store_.emplace(c2.id, std::move(c2));
    bus_->publish(clientId_, "fitness/" + clientId_ + "/newChildren",
                  {{"workerId", id_}, {"solutionIds", ids}, {"fitness", fitness}},
                  m.matingIndex);
  }

  void on_remove(const Message& m) {
    for (const auto& v : m.payload.at("ids")) {
      const SolutionId sid = v.get<SolutionId>();
      const auto it = store_.find(sid);
      if (it == store_.end()) {
        throw ProtocolError("removal of unknown solution " + std::to_string(sid));
      }
      grace_.push_back({sid, *it->second.chromosome});
      if (grace_.size() > kGraceCapacity) grace_.pop_front();
      store_.erase(it);
    }
  }

  static constexpr std::size_t kGraceCapacity = 4;

  int id_;
  int host_;
  const EngineConfig* cfg_;
  MessageBus* bus_;
  Rng rng_;
  std::string clientId_;
  ProblemInstance problem_;
  bool haveTemplate_ = false;
  std::map<SolutionId, Individual> store_;
  std::deque<std::pair<SolutionId, Placement>> grace_;
  std::uint64_t counter_ = 0;
  bool stopped_ = false;
};

class SemiCoordinator {
 public:
  SemiCoordinator(const EngineConfig& cfg, const ProblemInstance& problem, MessageBus& bus,
                  std::uint64_t seed)
      : cfg_(&cfg),
        problem_(&problem),
        bus_(&bus),
        rng_(seed),
        totalMatings_(cfg.children_budget() / 2),
        nextSnapshotAt_(cfg.populationSize) {}

  void register_and_subscribe() {
    bus_->register_client(kClientId, problem_->graph->cloudDeviceId);
    bus_->subscribe(kClientId, "command/join");
    bus_->subscribe(kClientId, "fitness/+/newPopulation");
    bus_->subscribe(kClientId, "fitness/+/newChildren");
  }

  void on_message(const Message& m) {
    const auto seg = split_topic(m.topic);
    if (m.topic == "command/join") {
      on_join(m);
    } else if (seg.size() == 3 && seg[0] == "fitness" && seg[2] == "newPopulation") {
      on_new_population(m);
    } else if (seg.size() == 3 && seg[0] == "fitness" && seg[2] == "newChildren") {
      on_new_children(m);
    } else {
      throw ProtocolError("coordinator cannot handle topic " + m.topic);
    }
  }

  bool done() const { return stopPublished_; }
  long long children_created() const { return childrenCreated_; }
  long long matings_completed() const { return matingsCompleted_; }
  const RankedPopulation& global() const { return global_; }
  const std::vector<std::vector<ObjectiveVector>>& snapshots() const { return snapshots_; }

  static constexpr const char* kClientId = "coordinator";

 private:
  void on_join(const Message& m) {
    const int w = m.payload.at("workerId").get<int>();
    bus_->publish(kClientId, "command/" + std::to_string(w) + "/solutionTemplate",
                  template_payload(*cfg_, *problem_));
  }

  void on_new_population(const Message& m) {
    const int w = m.payload.at("workerId").get<int>();
    const auto& ids = m.payload.at("solutionIds");
    const auto& fitness = m.payload.at("fitness");
    for (std::size_t k = 0; k < ids.size(); ++k) {
      initial_.push_back(
          {ids[k].get<SolutionId>(), std::nullopt, fitness_from_json(fitness[k]), w});
    }
    if (++populationsReceived_ < cfg_->workerCount) return;

    if (static_cast<int>(initial_.size()) != cfg_->populationSize) {
      throw ProtocolError("initial population size mismatch");
    }
    global_ = RankedPopulation(std::move(initial_));
    if (totalMatings_ == 0) {
      publish_stop();
      return;
    }
    for (int n = 0; n < cfg_->workerCount; ++n) schedule_mating(n);
  }

  void on_new_children(const Message& m) {
    const int n = m.payload.at("workerId").get<int>();
    const auto& ids = m.payload.at("solutionIds");
    const auto& fitness = m.payload.at("fitness");
    std::vector<Individual> children;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      children.push_back(
          {ids[k].get<SolutionId>(), std::nullopt, fitness_from_json(fitness[k]), n});
    }

    InsertResult ins =
        steady_state_insert(global_, children, static_cast<std::size_t>(cfg_->populationSize));
    std::map<int, std::vector<SolutionId>> removedByOwner;
    for (const SolutionId rid : ins.removed) {
      int owner = -1;
      if (global_.contains(rid)) {
        owner = global_.by_id(rid).ownerWorkerId;
      } else {
        for (const Individual& child : children) {
          if (child.id == rid) owner = child.ownerWorkerId;
        }
      }
      if (owner < 0) throw ProtocolError("removed id has no owner");
      removedByOwner[owner].push_back(rid);
    }
    global_ = std::move(ins.population);
    childrenCreated_ += 2;
    ++matingsCompleted_;

    for (const auto& [owner, rids] : removedByOwner) {
      bus_->publish(kClientId, "command/" + std::to_string(owner) + "/removeSolutions",
                    {{"ids", rids}}, m.matingIndex);
    }

    while (childrenCreated_ >= nextSnapshotAt_ &&
           static_cast<int>(snapshots_.size()) < cfg_->generationCount) {
      take_snapshot();
      nextSnapshotAt_ += cfg_->populationSize;
    }

    if (childrenCreated_ == cfg_->children_budget()) {
      publish_stop();
    } else {
      schedule_mating(n);
    }
  }

  void schedule_mating(int idleWorker) {
    if (matingsScheduled_ == totalMatings_) return;
    const long long idx = matingsScheduled_++;
    const SolutionId pid = binary_tournament(global_, rng_);
    const int owner = global_.by_id(pid).ownerWorkerId;
    bus_->publish(kClientId, "command/" + std::to_string(owner) + "/sendSolution",
                  {{"solutionId", pid}, {"requesterId", idleWorker}}, idx);
  }

  void take_snapshot() {
    std::vector<ObjectiveVector> points;
    for (const Individual* p : global_.front_one()) points.push_back(p->objectives);
    snapshots_.push_back(snapshot_points(points));
  }

  void publish_stop() {
    bus_->publish(kClientId, "command/stopOptimization", nlohmann::json::object());
    stopPublished_ = true;
  }

  const EngineConfig* cfg_;
  const ProblemInstance* problem_;
  MessageBus* bus_;
  Rng rng_;
  std::vector<Individual> initial_;
  int populationsReceived_ = 0;
  RankedPopulation global_;
  long long totalMatings_ = 0;
  long long matingsScheduled_ = 0;
  long long matingsCompleted_ = 0;
  long long childrenCreated_ = 0;
  long long nextSnapshotAt_ = 0;
  std::vector<std::vector<ObjectiveVector>> snapshots_;
  bool stopPublished_ = false;
};

// ---------------------------------------------------------------------------
// Fully-distributed / neighbor-aware worker: keeps its own sub-population,
// asks a peer for one parent per mating, inserts children locally.

class DistWorker {
 public:
  DistWorker(int id, int host, const EngineConfig& cfg, MessageBus& bus, std::uint64_t seed,
             std::vector<int> candidates, long long matingQuota,
             std::function<void()> onMatingComplete)
      : id_(id),
        host_(host),
        cfg_(&cfg),
        bus_(&bus),
        rng_(seed),
        clientId_(std::to_string(id)),
        candidates_(std::move(candidates)),
        matingsLeft_(matingQuota),
        onMatingComplete_(std::move(onMatingComplete)) {
    if (candidates_.empty()) candidates_.push_back(id_);  // lone worker mates with itself
  }

  const std::string& client_id() const { return clientId_; }

  void register_and_subscribe() {
    bus_->register_client(clientId_, host_);
    bus_->subscribe(clientId_, "command/" + clientId_ + "/solutionTemplate");
    bus_->subscribe(clientId_, "command/" + clientId_ + "/sendSolution");
    bus_->subscribe(clientId_, "solution/" + clientId_);
    bus_->subscribe(clientId_, "command/stopOptimization");
  }

  void publish_join() { bus_->publish(clientId_, "command/join", {{"workerId", id_}}); }

  bool can_initiate() const {
    return haveTemplate_ && !pending_.has_value() && matingsLeft_ > 0 && !stopped_;
  }

  void initiate(long long matingIndex) {
    const int peer = candidates_[rng_.uniform_index(candidates_.size())];
    pending_ = matingIndex;
    --matingsLeft_;
    bus_->publish(clientId_, "command/" + std::to_string(peer) + "/sendSolution",
                  {{"requesterId", id_}}, matingIndex);
  }

  void on_message(const Message& m) {
    const auto seg = split_topic(m.topic);
    if (seg.size() == 3 && seg[0] == "command" && seg[2] == "solutionTemplate") {
      on_template(m);
      std::deque<Message> replay;
      replay.swap(early_);
      for (const Message& deferred : replay) on_message(deferred);
    } else if (m.topic == "command/stopOptimization") {
      stopped_ = true;
    } else if (!haveTemplate_) {
      early_.push_back(m);  // a peer raced ahead of our template
    } else if (seg.size() == 3 && seg[0] == "command" && seg[2] == "sendSolution") {
      on_send_solution(m);
    } else if (seg.size() == 2 && seg[0] == "solution") {
      on_solution(m);
    } else {
      throw ProtocolError("worker " + clientId_ + " cannot handle topic " + m.topic);
    }
  }

  bool stopped() const { return stopped_; }
  bool idle() const { return !pending_.has_value(); }
  long long matings_left() const { return matingsLeft_; }

  std::vector<Individual> members_copy() const {
    std::lock_guard<std::mutex> lock(popMutex_);
    return local_.members();
  }

 private:
  SolutionId next_id() { return make_id(id_, counter_++); }

  void on_template(const Message& m) {
    problem_ = ProblemInstance::from_template_json(m.payload.at("infrastructure"));
    const int subPop = m.payload.at("subPopulationSize").get<int>();
    std::vector<Individual> members;
    for (int k = 0; k < subPop; ++k) {
      Placement x = random_placement(problem_, rng_);
      members.push_back({next_id(), x, evaluate(problem_, x), id_});
    }
    std::lock_guard<std::mutex> lock(popMutex_);
    local_ = RankedPopulation(std::move(members));
    haveTemplate_ = true;
  }

  void on_send_solution(const Message& m) {
    const int requester = m.payload.at("requesterId").get<int>();
    std::string chromosome;
    {
      std::lock_guard<std::mutex> lock(popMutex_);
      const SolutionId pick = binary_tournament(local_, rng_);
      chromosome = chromosome_to_string(*local_.by_id(pick).chromosome);
    }
    bus_->publish(clientId_, "solution/" + std::to_string(requester),
                  {{"chromosome", chromosome}}, m.matingIndex);
  }

  void on_solution(const Message& m) {
    if (!pending_.has_value()) throw ProtocolError("unsolicited solution for " + clientId_);
    const Placement parent1 = chromosome_from_string(
        m.payload.at("chromosome").get<std::string>(), problem_.appCount, problem_.deviceCount);
    {
      std::lock_guard<std::mutex> lock(popMutex_);
      const Placement parent2 = *local_.by_id(binary_tournament(local_, rng_)).chromosome;
      auto [c1, c2] = breed(problem_, *cfg_, parent1, parent2, rng_,
                            [this] { return next_id(); }, id_);
      InsertResult ins = steady_state_insert(
          local_, {std::move(c1), std::move(c2)},
          static_cast<std::size_t>(cfg_->sub_population_size()));
      local_ = std::move(ins.population);
    }
    pending_.reset();
    onMatingComplete_();
  }

  int id_;
  int host_;
  const EngineConfig* cfg_;
  MessageBus* bus_;
  Rng rng_;
  std::string clientId_;
  std::vector<int> candidates_;
  long long matingsLeft_ = 0;
  std::function<void()> onMatingComplete_;
  ProblemInstance problem_;
  bool haveTemplate_ = false;
  std::deque<Message> early_;
  RankedPopulation local_;
  mutable std::mutex popMutex_;
  std::optional<long long> pending_;
  std::uint64_t counter_ = 0;
  bool stopped_ = false;
};

class ContextProvider {
 public:
  ContextProvider(const EngineConfig& cfg, const ProblemInstance& problem, MessageBus& bus)
      : cfg_(&cfg), problem_(&problem), bus_(&bus) {}

  void register_and_subscribe() {
    bus_->register_client(kClientId, problem_->graph->cloudDeviceId);
    bus_->subscribe(kClientId, "command/join");
  }

  void on_message(const Message& m) {
    if (m.topic != "command/join") {
      throw ProtocolError("context provider cannot handle topic " + m.topic);
    }
    const int w = m.payload.at("workerId").get<int>();
    bus_->publish(kClientId, "command/" + std::to_string(w) + "/solutionTemplate",
                  template_payload(*cfg_, *problem_));
  }

  void publish_stop() {
    bus_->publish(kClientId, "command/stopOptimization", nlohmann::json::object());
  }

  static constexpr const char* kClientId = "context";

 private:
  const EngineConfig* cfg_;
  const ProblemInstance* problem_;
  MessageBus* bus_;
};

// ---------------------------------------------------------------------------

void fill_counters(RunResult& rr, const MessageBus& bus) {
  rr.hopLog = bus.log();
  rr.solutionPayloads = bus.retained_solution_payloads();
  rr.messageCount = static_cast<long long>(rr.hopLog.size());
  for (const LogRecord& rec : rr.hopLog) {
    if (rec.matingIndex >= 0) {
      ++rr.protocolMessages;
      rr.protocolHops += rec.hops;
    }
  }
}

RunResult run_traditional(const EngineConfig& cfg, const ProblemInstance& problem) {
  Rng rng(derive_seed(cfg.seed, "traditional"));
  std::uint64_t counter = 0;
  const auto nextId = [&] { return make_id(0, counter++); };

  std::vector<Individual> members;
  for (int k = 0; k < cfg.populationSize; ++k) {
    Placement x = random_placement(problem, rng);
    members.push_back({nextId(), x, evaluate(problem, x), -1});
  }
  RankedPopulation pop(std::move(members));

  RunResult rr;
  for (int gen = 0; gen < cfg.generationCount; ++gen) {
    std::vector<Individual> children;
    while (static_cast<int>(children.size()) < cfg.populationSize) {
      const Placement& p1 = *pop.by_id(binary_tournament(pop, rng)).chromosome;
      const Placement& p2 = *pop.by_id(binary_tournament(pop, rng)).chromosome;
      auto [c1, c2] = breed(problem, cfg, p1, p2, rng, nextId, -1);
      children.push_back(std::move(c1));
      children.push_back(std::move(c2));
    }
    rr.matingCount += cfg.populationSize / 2;
    rr.childrenCreated += cfg.populationSize;
    InsertResult ins = steady_state_insert(pop, std::move(children),
                                           static_cast<std::size_t>(cfg.populationSize));
    pop = std::move(ins.population);

    std::vector<ObjectiveVector> points;
    for (const Individual* p : pop.front_one()) points.push_back(p->objectives);
    rr.snapshots.push_back(snapshot_points(points));
  }
  rr.finalFront = extract_front(pop.members());
  return rr;
}

RunResult run_semi(const EngineConfig& cfg, const ProblemInstance& problem,
                   const WorkerOverlay& overlay) {
  MessageBus bus(problem.graph, TopicSchemaSet::semi_distributed());
  bus.set_payload_retention(true);

  SemiCoordinator coordinator(cfg, problem, bus, derive_seed(cfg.seed, "coordinator"));
  coordinator.register_and_subscribe();
  std::vector<std::unique_ptr<SemiWorker>> workers;
  for (int w = 0; w < cfg.workerCount; ++w) {
    workers.push_back(std::make_unique<SemiWorker>(
        w, overlay.workers[w].hostDeviceId, cfg, bus,
        derive_seed(cfg.seed, "worker/" + std::to_string(w))));
    workers.back()->register_and_subscribe();
  }

  if (!cfg.concurrent) {
    std::deque<std::pair<std::string, Message>> queue;
    bus.set_delivery_sink(
        [&](const std::string& client, const Message& m) { queue.emplace_back(client, m); });
    for (auto& w : workers) w->publish_join();
    while (!queue.empty()) {
      auto [client, m] = std::move(queue.front());
      queue.pop_front();
      if (client == SemiCoordinator::kClientId) {
        coordinator.on_message(m);
      } else {
        workers[std::stoul(client)]->on_message(m);
      }
    }
    if (!coordinator.done()) throw ProtocolError("semi run stalled before its budget");
  } else {
    std::map<std::string, Inbox> inboxes;
    inboxes[SemiCoordinator::kClientId];
    for (auto& w : workers) inboxes[w->client_id()];
    bus.set_delivery_sink(
        [&](const std::string& client, const Message& m) { inboxes.at(client).push(m); });

    std::vector<std::thread> threads;
    threads.emplace_back([&] {
      Inbox& inbox = inboxes.at(SemiCoordinator::kClientId);
      while (auto m = inbox.pop()) {
        coordinator.on_message(*m);
        if (coordinator.done()) break;
      }
    });
    for (auto& w : workers) {
      threads.emplace_back([&inboxes, worker = w.get()] {
        worker->publish_join();
        Inbox& inbox = inboxes.at(worker->client_id());
        while (auto m = inbox.pop()) {
          worker->on_message(*m);
          if (worker->stopped()) break;
        }
      });
    }
    for (std::thread& t : threads) t.join();
    if (!coordinator.done()) throw ProtocolError("semi run stalled before its budget");
  }

  // Teardown conservation audit: global objective space == union of stores.
  std::size_t stored = 0;
  for (const auto& w : workers) {
    stored += w->store().size();
    for (const auto& [id, ind] : w->store()) {
      if (!coordinator.global().contains(id)) {
        throw ProtocolError("worker stores a solution unknown to the coordinator");
      }
    }
  }
  if (stored != coordinator.global().size()) {
    throw ProtocolError("coordinator space and worker stores diverge");
  }

  std::vector<Individual> front;
  for (const Individual* p : coordinator.global().front_one()) {
    Individual ind = *p;
    const auto& store = workers[ind.ownerWorkerId]->store();
    const auto it = store.find(ind.id);
    if (it == store.end()) throw ProtocolError("front member missing from its owner");
    ind.chromosome = it->second.chromosome;
    front.push_back(std::move(ind));
  }

  RunResult rr;
  rr.finalFront = extract_front(front);
  rr.snapshots = coordinator.snapshots();
  rr.childrenCreated = coordinator.children_created();
  rr.matingCount = coordinator.matings_completed();
  fill_counters(rr, bus);
  return rr;
}

RunResult run_islands(const EngineConfig& cfg, const ProblemInstance& problem,
                      const WorkerOverlay& overlay) {
  MessageBus bus(problem.graph, TopicSchemaSet::fully_distributed());
  bus.set_payload_retention(true);

  const long long quota = cfg.children_budget() / (2LL * cfg.workerCount);
  const long long budget = cfg.children_budget();

  std::atomic<long long> childrenCreated{0};
  std::mutex snapshotMutex;
  std::vector<std::vector<ObjectiveVector>> snapshots;
  long long nextSnapshotAt = cfg.populationSize;

  ContextProvider provider(cfg, problem, bus);
  provider.register_and_subscribe();
  std::vector<std::unique_ptr<DistWorker>> workers;

  const auto take_due_snapshots = [&](long long created) {
    std::lock_guard<std::mutex> lock(snapshotMutex);
    while (created >= nextSnapshotAt &&
           static_cast<int>(snapshots.size()) < cfg.generationCount) {
      std::vector<ObjectiveVector> points;
      for (const auto& w : workers) {
        for (const Individual& ind : w->members_copy()) points.push_back(ind.objectives);
      }
      snapshots.push_back(snapshot_points(points));
      nextSnapshotAt += cfg.populationSize;
    }
  };

  const auto onMatingComplete = [&] {
    const long long created = childrenCreated.fetch_add(2) + 2;
    take_due_snapshots(created);
    if (created == budget) provider.publish_stop();
  };

  for (int w = 0; w < cfg.workerCount; ++w) {
    std::vector<int> candidates;
    if (cfg.scenario == Scenario::FullyDistributed) {
      for (int other = 0; other < cfg.workerCount; ++other) {
        if (other != w) candidates.push_back(other);
      }
    } else {
      candidates = overlay.neighborSets[w];
    }
    workers.push_back(std::make_unique<DistWorker>(
        w, overlay.workers[w].hostDeviceId, cfg, bus,
        derive_seed(cfg.seed, "worker/" + std::to_string(w)), std::move(candidates), quota,
        onMatingComplete));
    workers.back()->register_and_subscribe();
  }

  if (!cfg.concurrent) {
    std::deque<std::pair<std::string, Message>> queue;
    bus.set_delivery_sink(
        [&](const std::string& client, const Message& m) { queue.emplace_back(client, m); });
    const auto drain = [&] {
      while (!queue.empty()) {
        auto [client, m] = std::move(queue.front());
        queue.pop_front();
        if (client == ContextProvider::kClientId) {
          provider.on_message(m);
        } else {
          workers[std::stoul(client)]->on_message(m);
        }
      }
    };

    for (auto& w : workers) w->publish_join();
    drain();

    long long nextMatingIndex = 0;
    std::size_t cursor = 0;
    while (true) {
      DistWorker* initiator = nullptr;
      for (int k = 0; k < cfg.workerCount; ++k) {
        DistWorker* w = workers[(cursor + k) % cfg.workerCount].get();
        if (w->can_initiate()) {
          initiator = w;
          cursor = (cursor + k + 1) % cfg.workerCount;
          break;
        }
      }
      if (initiator == nullptr) break;
      initiator->initiate(nextMatingIndex++);
      drain();
      if (!initiator->idle()) throw ProtocolError("mating did not complete");
    }
    drain();
    if (childrenCreated.load() != budget) {
      throw ProtocolError("island run stalled before its budget");
    }
  } else {
    std::map<std::string, Inbox> inboxes;
    inboxes[ContextProvider::kClientId];
    for (auto& w : workers) inboxes[w->client_id()];
    bus.set_delivery_sink(
        [&](const std::string& client, const Message& m) { inboxes.at(client).push(m); });

    std::atomic<long long> matingIndexAlloc{0};
    std::vector<std::thread> threads;
    for (auto& w : workers) {
      threads.emplace_back([&inboxes, &matingIndexAlloc, worker = w.get()] {
        worker->publish_join();
        Inbox& inbox = inboxes.at(worker->client_id());
        while (!worker->stopped()) {
          if (auto m = inbox.try_pop()) {
            worker->on_message(*m);
            continue;
          }
          if (worker->can_initiate()) {
            worker->initiate(matingIndexAlloc.fetch_add(1));
            continue;
          }
          auto m = inbox.pop();
          if (!m) break;
          worker->on_message(*m);
        }
      });
    }
    std::thread providerThread([&] {
      Inbox& inbox = inboxes.at(ContextProvider::kClientId);
      while (auto m = inbox.pop()) provider.on_message(*m);
    });
    for (std::thread& t : threads) t.join();
    inboxes.at(ContextProvider::kClientId).close();
    providerThread.join();
    if (childrenCreated.load() != budget) {
      throw ProtocolError("island run stalled before its budget");
    }
  }

  std::vector<Individual> all;
  for (const auto& w : workers) {
    std::vector<Individual> members = w->members_copy();
    if (static_cast<int>(members.size()) != cfg.sub_population_size()) {
      throw ProtocolError("worker sub-population size drifted");
    }
    for (Individual& ind : members) all.push_back(std::move(ind));
  }

  RunResult rr;
  rr.finalFront = extract_front(all);
  rr.snapshots = std::move(snapshots);
  rr.childrenCreated = childrenCreated.load();
  rr.matingCount = rr.childrenCreated / 2;
  fill_counters(rr, bus);
  return rr;
}

}  // namespace

std::vector<Individual> extract_front(const std::vector<Individual>& members) {
  std::vector<ObjectiveVector> points;
  points.reserve(members.size());
  for (const Individual& ind : members) points.push_back(ind.objectives);
  const auto fronts = fast_non_dominated_sort(points);

  std::vector<Individual> front;
  if (!fronts.empty()) {
    for (const std::size_t idx : fronts[0]) front.push_back(members[idx]);
  }
  const auto key = [](const Individual& ind) {
    return std::make_tuple(ind.objectives.meanInstances, ind.objectives.meanDistance,
                           ind.chromosome ? ind.chromosome->to_string01() : std::string(),
                           ind.id);
  };
  std::sort(front.begin(), front.end(),
            [&](const Individual& a, const Individual& b) { return key(a) < key(b); });
  front.erase(std::unique(front.begin(), front.end(),
                          [&](const Individual& a, const Individual& b) {
                            return a.objectives == b.objectives &&
                                   a.chromosome == b.chromosome;
                          }),
              front.end());
  return front;
}

RunResult run_engine(const EngineConfig& cfg, const ProblemInstance& problem,
                     const WorkerOverlay& overlay) {
  cfg.validate();
  if (cfg.scenario != Scenario::Traditional &&
      static_cast<int>(overlay.workers.size()) < cfg.workerCount) {
    throw std::invalid_argument("overlay has fewer workers than the config requires");
  }
  const auto start = std::chrono::steady_clock::now();
  RunResult rr;
  switch (cfg.scenario) {
    case Scenario::Traditional:
      rr = run_traditional(cfg, problem);
      break;
    case Scenario::SemiDistributed:
      rr = run_semi(cfg, problem, overlay);
      break;
    case Scenario::FullyDistributed:
    case Scenario::NeighborAware:
      rr = run_islands(cfg, problem, overlay);
      break;
  }
  rr.wallClockSeconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rr;
}

}  // namespace fogweaver
