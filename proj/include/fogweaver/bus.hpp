#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fogweaver/fapp.hpp"
#include "fogweaver/topology.hpp"

namespace fogweaver {

struct BusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Message {
  std::string topic;
  nlohmann::json payload;
  std::string srcClient;
  std::string dstClient;
  int srcDeviceId = 0;
  int dstDeviceId = 0;
  int hopCost = 0;
  std::uint64_t seqNo = 0;
  long long matingIndex = -1;  // -1 for init/stop traffic
};

struct LogRecord {
  std::uint64_t seqNo = 0;
  std::string topic;
  int srcDevice = 0;
  int dstDevice = 0;
  int hops = 0;
  long long matingIndex = -1;
};

struct TopicSchema {
  std::string pattern;                  // may contain '+' segments
  std::vector<std::string> attributes;  // exact payload keys
};

// Splits "a/b/c"; empty segments are invalid.
std::vector<std::string> split_topic(std::string_view topic);

// Literal match with '+' as a single-level wildcard in the pattern.
bool topic_matches(std::string_view pattern, std::string_view topic);

// Throws BusError on empty segments, embedded '+', or unsupported wildcards.
void validate_pattern(std::string_view pattern);

class TopicSchemaSet {
 public:
  static TopicSchemaSet semi_distributed();
  static TopicSchemaSet fully_distributed();

  const TopicSchema* match(std::string_view topic) const;
  const std::vector<TopicSchema>& schemas() const { return schemas_; }

 private:
  std::vector<TopicSchema> schemas_;
};

// Canonical UTF-8 JSON: object keys sorted, no whitespace.
std::string encode(const nlohmann::json& payload);
nlohmann::json decode(std::string_view bytes);  // throws BusError on malformed input

// In-process topic bus. Publishing validates the topic and payload against the
// schema set, logs one record per publisher->subscriber transfer with the
// endpoint-to-endpoint hop count, and hands deliveries to the runtime sink.
class MessageBus {
 public:
  using DeliverySink = std::function<void(const std::string& clientId, const Message&)>;

  MessageBus(std::shared_ptr<const InfrastructureGraph> graph, TopicSchemaSet schemas);

  void set_delivery_sink(DeliverySink sink) { sink_ = std::move(sink); }
  void set_payload_retention(bool on) { retainSolutionPayloads_ = on; }

  void register_client(const std::string& clientId, int hostDeviceId);
  void subscribe(const std::string& clientId, const std::string& pattern);

  // Returns the number of deliveries. No subscribers: dropped, zero records.
  int publish(const std::string& clientId, const std::string& topic,
              const nlohmann::json& payload, long long matingIndex = -1);

  const std::vector<LogRecord>& log() const { return log_; }
  const std::vector<std::string>& retained_solution_payloads() const {
    return solutionPayloads_;
  }
  long long message_count() const { return static_cast<long long>(log_.size()); }

 private:
  struct Subscription {
    std::string clientId;
    std::vector<std::string> pattern;
  };

  std::shared_ptr<const InfrastructureGraph> graph_;
  TopicSchemaSet schemas_;
  std::map<std::string, int> clients_;  // clientId -> host device
  std::vector<Subscription> subscriptions_;
  std::vector<LogRecord> log_;
  std::vector<std::string> solutionPayloads_;
  DeliverySink sink_;
  std::uint64_t nextSeq_ = 0;
  bool retainSolutionPayloads_ = false;
  std::mutex mutex_;  // serializes publishes in concurrent mode
};

// Row-major 0/1 chromosome helpers shared by payloads and artifacts.
std::string chromosome_to_string(const Placement& p);
Placement chromosome_from_string(std::string_view s, int apps, int devices);

}  // namespace fogweaver
