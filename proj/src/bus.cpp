#include "fogweaver/bus.hpp"

#include <algorithm>
#include <set>

namespace fogweaver {

std::vector<std::string> split_topic(std::string_view topic) {
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (true) {
    const std::size_t slash = topic.find('/', start);
    const std::string_view seg = topic.substr(
        start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
    if (seg.empty()) throw BusError("empty topic segment in '" + std::string(topic) + "'");
    segments.emplace_back(seg);
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return segments;
}

void validate_pattern(std::string_view pattern) {
  const auto segments = split_topic(pattern);
  for (const std::string& seg : segments) {
    if (seg == "+") continue;
    if (seg.find('+') != std::string::npos || seg.find('#') != std::string::npos) {
      throw BusError("invalid wildcard use in pattern '" + std::string(pattern) + "'");
    }
  }
}

bool topic_matches(std::string_view pattern, std::string_view topic) {
  const auto p = split_topic(pattern);
  const auto t = split_topic(topic);
  if (p.size() != t.size()) return false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] != "+" && p[i] != t[i]) return false;
  }
  return true;
}

TopicSchemaSet TopicSchemaSet::semi_distributed() {
  TopicSchemaSet s;
  s.schemas_ = {
      {"command/+/solutionTemplate", {"subPopulationSize", "chromosomeShape", "infrastructure"}},
      {"command/+/removeSolutions", {"ids"}},
      {"command/+/sendSolution", {"solutionId", "requesterId"}},
      {"solution/+", {"chromosome"}},
      {"command/stopOptimization", {}},
      {"command/join", {"workerId"}},
      {"fitness/+/newPopulation", {"workerId", "solutionIds", "fitness"}},
      {"fitness/+/newChildren", {"workerId", "solutionIds", "fitness"}},
  };
  return s;
}

TopicSchemaSet TopicSchemaSet::fully_distributed() {
  TopicSchemaSet s;
  s.schemas_ = {
      {"command/+/sendSolution", {"requesterId"}},
      {"solution/+", {"chromosome"}},
      {"command/stopOptimization", {}},
      {"command/+/solutionTemplate", {"subPopulationSize", "chromosomeShape", "infrastructure"}},
      {"command/join", {"workerId"}},
  };
  return s;
}

const TopicSchema* TopicSchemaSet::match(std::string_view topic) const {
  for (const TopicSchema& schema : schemas_) {
    if (topic_matches(schema.pattern, topic)) return &schema;
  }
  return nullptr;
}

std::string encode(const nlohmann::json& payload) { return payload.dump(); }

nlohmann::json decode(std::string_view bytes) {
  nlohmann::json j = nlohmann::json::parse(bytes, nullptr, false);
  if (j.is_discarded()) throw BusError("malformed payload document");
  return j;
}

MessageBus::MessageBus(std::shared_ptr<const InfrastructureGraph> graph, TopicSchemaSet schemas)
    : graph_(std::move(graph)), schemas_(std::move(schemas)) {}

void MessageBus::register_client(const std::string& clientId, int hostDeviceId) {
  if (hostDeviceId < 0 || hostDeviceId >= graph_->node_count()) {
    throw BusError("client host device out of range");
  }
  clients_[clientId] = hostDeviceId;
}

void MessageBus::subscribe(const std::string& clientId, const std::string& pattern) {
  validate_pattern(pattern);
  if (!clients_.count(clientId)) throw BusError("unknown client '" + clientId + "'");
  subscriptions_.push_back({clientId, split_topic(pattern)});
}

int MessageBus::publish(const std::string& clientId, const std::string& topic,
                        const nlohmann::json& payload, long long matingIndex) {
  std::lock_guard<std::mutex> lock(mutex_);

  const auto clientIt = clients_.find(clientId);
  if (clientIt == clients_.end()) throw BusError("unknown client '" + clientId + "'");
  const auto topicSegments = split_topic(topic);
  for (const std::string& seg : topicSegments) {
    if (seg.find('+') != std::string::npos || seg.find('#') != std::string::npos) {
      throw BusError("published topic may not contain wildcards");
    }
  }

  const TopicSchema* schema = schemas_.match(topic);
  if (schema == nullptr) throw BusError("topic '" + topic + "' has no schema");
  if (!payload.is_object()) throw BusError("payload must be a JSON object");
  std::set<std::string> expected(schema->attributes.begin(), schema->attributes.end());
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  for (const std::string& key : schema->attributes) {
    if (!payload.contains(key)) missing.push_back(key);
  }
  for (const auto& [key, value] : payload.items()) {
    if (!expected.count(key)) extra.push_back(key);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string what = "payload for '" + topic + "' violates schema;";
    for (const std::string& k : missing) what += " missing " + k;
    for (const std::string& k : extra) what += " extra " + k;
    throw BusError(what);
  }

  int deliveries = 0;
  const int srcDevice = clientIt->second;
  for (const Subscription& sub : subscriptions_) {
    if (sub.pattern.size() != topicSegments.size()) continue;
    bool match = true;
    for (std::size_t i = 0; i < sub.pattern.size(); ++i) {
      if (sub.pattern[i] != "+" && sub.pattern[i] != topicSegments[i]) {
        match = false;
        break;
      }
    }
    if (!match) continue;

    Message m;
    m.topic = topic;
    m.payload = payload;
    m.srcClient = clientId;
    m.dstClient = sub.clientId;
    m.srcDeviceId = srcDevice;
    m.dstDeviceId = clients_.at(sub.clientId);
    m.hopCost = graph_->hopTable[m.srcDeviceId][m.dstDeviceId];
    m.seqNo = nextSeq_++;
    m.matingIndex = matingIndex;

    log_.push_back({m.seqNo, m.topic, m.srcDeviceId, m.dstDeviceId, m.hopCost, matingIndex});
    if (retainSolutionPayloads_ && topicSegments.front() == "solution") {
      solutionPayloads_.push_back(encode(payload));
    }
    if (sink_) sink_(sub.clientId, m);
    ++deliveries;
  }
  return deliveries;
}

std::string chromosome_to_string(const Placement& p) { return p.to_string01(); }

Placement chromosome_from_string(std::string_view s, int apps, int devices) {
  return Placement::from_string01(s, apps, devices);
}

}  // namespace fogweaver
