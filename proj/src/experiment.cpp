#include "fogweaver/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace fogweaver {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return nlohmann::json(v).dump();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed while writing " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return nlohmann::json::parse(in);
}

void check_keys(const nlohmann::json& section, const std::string& name,
                std::initializer_list<const char*> allowed) {
  if (!section.is_object()) {
    throw std::invalid_argument("section '" + name + "' must be an object");
  }
  for (const auto& item : section.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return item.key() == a; });
    if (!known) {
      throw std::invalid_argument("unknown key '" + item.key() + "' in section '" + name + "'");
    }
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

std::ifstream open_csv(const std::string& path, const std::string& header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string first;
  if (!std::getline(in, first) || first != header) {
    throw std::runtime_error(path + " does not start with header '" + header + "'");
  }
  return in;
}

nlohmann::json overlay_json(const WorkerOverlay& overlay) {
  nlohmann::json workers = nlohmann::json::array();
  for (const Worker& w : overlay.workers) {
    workers.push_back({{"workerId", w.workerId}, {"hostDeviceId", w.hostDeviceId}});
  }
  return {{"workers", workers},
          {"neighborSets", overlay.neighborSets},
          {"fallbackWorkers", overlay.fallbackWorkers}};
}

}  // namespace

void ExperimentConfig::validate() const {
  if (topology != "barabasi-albert") {
    throw std::invalid_argument("unsupported topology '" + topology + "'");
  }
  if (workerPlacementCriterion != "betweenness-centrality") {
    throw std::invalid_argument("unsupported worker placement criterion '" +
                                workerPlacementCriterion + "'");
  }
  if (gatewayPercentage <= 0.0 || gatewayPercentage > 100.0) {
    throw std::invalid_argument("gatewayPercentage must be in (0, 100]");
  }
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (mode != "deterministic" && mode != "concurrent") {
    throw std::invalid_argument("mode must be 'deterministic' or 'concurrent'");
  }
  if (outputDir.empty()) throw std::invalid_argument("outputDir must not be empty");
  topology_config().validate();
  problem_config().validate();
  engine_config(Scenario::FullyDistributed, 1).validate();
}

TopologyConfig ExperimentConfig::topology_config() const {
  TopologyConfig cfg;
  cfg.deviceCount = numberOfFogDevices;
  cfg.attachmentsPerNode = attachmentsPerNode;
  cfg.fogLatencyRange = fogNetworkLatencyMs;
  cfg.cloudLatency = cloudNetworkLatencyMs;
  cfg.deviceResourceRange = fogDeviceResources;
  cfg.gatewayFraction = gatewayPercentage / 100.0;
  cfg.workerCount = numberOfWorkers;
  cfg.neighborhoodRadius = neighborhoodRadiusHops;
  return cfg;
}

ProblemConfig ExperimentConfig::problem_config() const {
  ProblemConfig cfg;
  cfg.appCount = numberOfApplications;
  cfg.appResourceRange = applicationResources;
  cfg.popularityRange = {applicationPopularityPercent[0] / 100.0,
                         applicationPopularityPercent[1] / 100.0};
  cfg.interRequestTime = interRequestTimeMs;
  return cfg;
}

EngineConfig ExperimentConfig::engine_config(Scenario scenario, std::uint64_t runSeed) const {
  EngineConfig cfg;
  cfg.scenario = scenario;
  cfg.populationSize = populationSize;
  cfg.generationCount = numberOfGenerations;
  cfg.mutationProbability = mutationProbability;
  cfg.workerCount = numberOfWorkers;
  cfg.neighborhoodRadius = neighborhoodRadiusHops;
  cfg.seed = runSeed;
  cfg.concurrent = (mode == "concurrent");
  return cfg;
}

std::string ExperimentConfig::instance_key() const {
  const nlohmann::json full = to_json();
  const nlohmann::json identity = {{"infrastructure", full.at("infrastructure")},
                                   {"application", full.at("application")},
                                   {"user", full.at("user")},
                                   {"seedBase", seedBase}};
  std::ostringstream key;
  key << "fog" << numberOfFogDevices << "-apps" << numberOfApplications << "-" << std::hex
      << std::setw(16) << std::setfill('0') << fnv1a64(identity.dump());
  return key.str();
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"genetic",
           {{"populationSize", populationSize},
            {"numberOfGenerations", numberOfGenerations},
            {"mutationProbability", mutationProbability},
            {"numberOfWorkers", numberOfWorkers},
            {"neighborhoodRadiusHops", neighborhoodRadiusHops}}},
          {"infrastructure",
           {{"numberOfFogDevices", numberOfFogDevices},
            {"topology", topology},
            {"attachmentsPerNode", attachmentsPerNode},
            {"workerPlacementCriterion", workerPlacementCriterion},
            {"fogNetworkLatencyMs", fogNetworkLatencyMs},
            {"cloudNetworkLatencyMs", cloudNetworkLatencyMs},
            {"fogDeviceResources", fogDeviceResources},
            {"gatewayPercentage", gatewayPercentage}}},
          {"application",
           {{"numberOfApplications", numberOfApplications},
            {"applicationResources", applicationResources}}},
          {"user",
           {{"interRequestTimeMs", interRequestTimeMs},
            {"applicationPopularityPercent", applicationPopularityPercent}}},
          {"experiment",
           {{"repetitions", repetitions},
            {"seedBase", seedBase},
            {"outputDir", outputDir},
            {"mode", mode}}}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  check_keys(j, "config", {"genetic", "infrastructure", "application", "user", "experiment"});
  ExperimentConfig cfg;

  if (j.contains("genetic")) {
    const auto& sec = j.at("genetic");
    check_keys(sec, "genetic",
               {"populationSize", "numberOfGenerations", "mutationProbability",
                "numberOfWorkers", "neighborhoodRadiusHops"});
    if (sec.contains("populationSize")) cfg.populationSize = sec.at("populationSize").get<int>();
    if (sec.contains("numberOfGenerations")) {
      cfg.numberOfGenerations = sec.at("numberOfGenerations").get<int>();
    }
    if (sec.contains("mutationProbability")) {
      cfg.mutationProbability = sec.at("mutationProbability").get<double>();
    }
    if (sec.contains("numberOfWorkers")) cfg.numberOfWorkers = sec.at("numberOfWorkers").get<int>();
    if (sec.contains("neighborhoodRadiusHops")) {
      cfg.neighborhoodRadiusHops = sec.at("neighborhoodRadiusHops").get<int>();
    }
  }

  if (j.contains("infrastructure")) {
    const auto& sec = j.at("infrastructure");
    check_keys(sec, "infrastructure",
               {"numberOfFogDevices", "topology", "attachmentsPerNode",
                "workerPlacementCriterion", "fogNetworkLatencyMs", "cloudNetworkLatencyMs",
                "fogDeviceResources", "gatewayPercentage"});
    if (sec.contains("numberOfFogDevices")) {
      cfg.numberOfFogDevices = sec.at("numberOfFogDevices").get<int>();
    }
    if (sec.contains("topology")) cfg.topology = sec.at("topology").get<std::string>();
    if (sec.contains("attachmentsPerNode")) {
      cfg.attachmentsPerNode = sec.at("attachmentsPerNode").get<int>();
    }
    if (sec.contains("workerPlacementCriterion")) {
      cfg.workerPlacementCriterion = sec.at("workerPlacementCriterion").get<std::string>();
    }
    if (sec.contains("fogNetworkLatencyMs")) {
      cfg.fogNetworkLatencyMs = sec.at("fogNetworkLatencyMs").get<std::array<double, 2>>();
    }
    if (sec.contains("cloudNetworkLatencyMs")) {
      cfg.cloudNetworkLatencyMs = sec.at("cloudNetworkLatencyMs").get<double>();
    }
    if (sec.contains("fogDeviceResources")) {
      cfg.fogDeviceResources = sec.at("fogDeviceResources").get<std::array<int, 2>>();
    }
    if (sec.contains("gatewayPercentage")) {
      cfg.gatewayPercentage = sec.at("gatewayPercentage").get<double>();
    }
  }

  if (j.contains("application")) {
    const auto& sec = j.at("application");
    check_keys(sec, "application", {"numberOfApplications", "applicationResources"});
    if (sec.contains("numberOfApplications")) {
      cfg.numberOfApplications = sec.at("numberOfApplications").get<int>();
    }
    if (sec.contains("applicationResources")) {
      cfg.applicationResources = sec.at("applicationResources").get<std::array<int, 2>>();
    }
  }

  if (j.contains("user")) {
    const auto& sec = j.at("user");
    check_keys(sec, "user", {"interRequestTimeMs", "applicationPopularityPercent"});
    if (sec.contains("interRequestTimeMs")) {
      cfg.interRequestTimeMs = sec.at("interRequestTimeMs").get<std::array<double, 2>>();
    }
    if (sec.contains("applicationPopularityPercent")) {
      cfg.applicationPopularityPercent =
          sec.at("applicationPopularityPercent").get<std::array<double, 2>>();
    }
  }

  if (j.contains("experiment")) {
    const auto& sec = j.at("experiment");
    check_keys(sec, "experiment", {"repetitions", "seedBase", "outputDir", "mode"});
    if (sec.contains("repetitions")) cfg.repetitions = sec.at("repetitions").get<int>();
    if (sec.contains("seedBase")) cfg.seedBase = sec.at("seedBase").get<std::uint64_t>();
    if (sec.contains("outputDir")) {
      cfg.outputDir = sec.at("outputDir").get<std::string>();
      cfg.outputDirFromFile = true;
    }
    if (sec.contains("mode")) cfg.mode = sec.at("mode").get<std::string>();
  }

  return cfg;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  return from_json(nlohmann::json::parse(in));
}

std::uint64_t run_seed(const ExperimentConfig& cfg, Scenario scenario, int rep) {
  return derive_seed(cfg.seedBase, to_string(scenario) + "/rep" + std::to_string(rep));
}

PreparedInstance prepare_instance(const ExperimentConfig& cfg) {
  auto graph = std::make_shared<InfrastructureGraph>(
      generate_topology(cfg.topology_config(), cfg.seedBase));
  ProblemInstance problem = build_problem(graph, cfg.problem_config(), cfg.seedBase);
  WorkerOverlay overlay = place_workers(*graph, cfg.numberOfWorkers, cfg.neighborhoodRadiusHops);
  for (const int w : overlay.fallbackWorkers) {
    std::cerr << "worker " << w << " has no peers within " << cfg.neighborhoodRadiusHops
              << " hops; using its nearest workers instead\n";
  }
  return {std::move(graph), std::move(problem), std::move(overlay)};
}

RunPaths run_paths(const std::string& outputDir, Scenario scenario, int rep) {
  std::ostringstream name;
  name << to_string(scenario) << "_rep" << std::setw(2) << std::setfill('0') << rep;
  const std::string dir = outputDir + "/runs/" + name.str();
  return {dir, dir + "/front.csv", dir + "/snapshots.csv", dir + "/hops.csv", dir + "/run.json"};
}

void write_run_artifacts(const RunPaths& paths, const ExperimentConfig& cfg, Scenario scenario,
                         int rep, std::uint64_t seed, const RunResult& result) {
  fs::create_directories(paths.dir);

  {
    std::ofstream out = open_out(paths.frontCsv);
    out << "o1,o2,chromosome\n";
    for (const Individual& ind : result.finalFront) {
      if (!ind.chromosome) throw std::logic_error("front member without a chromosome");
      out << fmt(ind.objectives.meanInstances) << ',' << fmt(ind.objectives.meanDistance) << ','
          << ind.chromosome->to_string01() << '\n';
    }
    finish_out(out, paths.frontCsv);
  }
  {
    std::ofstream out = open_out(paths.snapshotsCsv);
    out << "generation,o1,o2\n";
    for (std::size_t g = 0; g < result.snapshots.size(); ++g) {
      for (const ObjectiveVector& p : result.snapshots[g]) {
        out << (g + 1) << ',' << fmt(p.meanInstances) << ',' << fmt(p.meanDistance) << '\n';
      }
    }
    finish_out(out, paths.snapshotsCsv);
  }
  {
    std::ofstream out = open_out(paths.hopsCsv);
    out << "seqNo,topic,srcDevice,dstDevice,hops,matingIndex\n";
    for (const LogRecord& rec : result.hopLog) {
      out << rec.seqNo << ',' << rec.topic << ',' << rec.srcDevice << ',' << rec.dstDevice << ','
          << rec.hops << ',' << rec.matingIndex << '\n';
    }
    finish_out(out, paths.hopsCsv);
  }
  {
    nlohmann::json configEcho = cfg.to_json();
    configEcho["experiment"].erase("outputDir");  // echo the experiment, not the disk location
    const nlohmann::json info = {
        {"scenario", to_string(scenario)},
        {"rep", rep},
        {"seed", seed},
        {"mode", cfg.mode},
        {"instanceKey", cfg.instance_key()},
        {"config", configEcho},
        {"counters",
         {{"childrenCreated", result.childrenCreated},
          {"matingCount", result.matingCount},
          {"messageCount", result.messageCount},
          {"protocolMessages", result.protocolMessages},
          {"protocolHops", result.protocolHops}}},
        {"frontSize", result.finalFront.size()},
        {"snapshotCount", result.snapshots.size()}};
    std::ofstream out = open_out(paths.runInfo);
    out << info.dump(2) << '\n';
    finish_out(out, paths.runInfo);
  }
}

std::vector<ObjectiveVector> read_front_csv(const std::string& path) {
  std::ifstream in = open_csv(path, "o1,o2,chromosome");
  std::vector<ObjectiveVector> front;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw std::runtime_error("malformed row in " + path);
    front.push_back({std::stod(fields[0]), std::stod(fields[1])});
  }
  return front;
}

std::vector<std::vector<ObjectiveVector>> read_snapshots_csv(const std::string& path) {
  std::ifstream in = open_csv(path, "generation,o1,o2");
  std::vector<std::vector<ObjectiveVector>> snapshots;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3) throw std::runtime_error("malformed row in " + path);
    const int generation = std::stoi(fields[0]);
    if (generation < 1) throw std::runtime_error("generation < 1 in " + path);
    if (static_cast<std::size_t>(generation) > snapshots.size()) {
      snapshots.resize(generation);
    }
    snapshots[generation - 1].push_back({std::stod(fields[1]), std::stod(fields[2])});
  }
  return snapshots;
}

std::vector<LogRecord> read_hops_csv(const std::string& path) {
  std::ifstream in = open_csv(path, "seqNo,topic,srcDevice,dstDevice,hops,matingIndex");
  std::vector<LogRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 6) throw std::runtime_error("malformed row in " + path);
    LogRecord rec;
    rec.seqNo = std::stoull(fields[0]);
    rec.topic = fields[1];
    rec.srcDevice = std::stoi(fields[2]);
    rec.dstDevice = std::stoi(fields[3]);
    rec.hops = std::stoi(fields[4]);
    rec.matingIndex = std::stoll(fields[5]);
    records.push_back(std::move(rec));
  }
  return records;
}

RunSummary read_run_summary(const std::string& runDir) {
  const nlohmann::json info = read_json_file(runDir + "/run.json");
  RunSummary s;
  s.scenario = info.at("scenario").get<std::string>();
  s.rep = info.at("rep").get<int>();
  s.seed = info.at("seed").get<std::uint64_t>();
  s.instanceKey = info.at("instanceKey").get<std::string>();
  const auto& counters = info.at("counters");
  s.matingCount = counters.at("matingCount").get<long long>();
  s.protocolMessages = counters.at("protocolMessages").get<long long>();
  s.protocolHops = counters.at("protocolHops").get<long long>();
  s.messageCount = counters.at("messageCount").get<long long>();
  s.front = read_front_csv(runDir + "/front.csv");
  return s;
}

void cmd_topology(const ExperimentConfig& cfg) {
  const PreparedInstance inst = prepare_instance(cfg);
  fs::create_directories(cfg.outputDir);

  nlohmann::json topo = inst.graph->to_json();
  topo["overlay"] = overlay_json(inst.overlay);
  {
    const std::string path = cfg.outputDir + "/topology.json";
    std::ofstream out = open_out(path);
    out << topo.dump(2) << '\n';
    finish_out(out, path);
  }
  {
    const std::string path = cfg.outputDir + "/problem.json";
    std::ofstream out = open_out(path);
    out << inst.problem.to_template_json().dump(2) << '\n';
    finish_out(out, path);
  }

  std::cout << "fog devices: " << inst.graph->fog_count() << ", links: " << inst.graph->links.size()
            << ", gateways: " << inst.graph->gateway_ids().size()
            << ", cloud attached to device " << inst.graph->cloudAttachment << ", workers on [";
  for (std::size_t w = 0; w < inst.overlay.workers.size(); ++w) {
    std::cout << (w ? " " : "") << inst.overlay.workers[w].hostDeviceId;
  }
  std::cout << "]\n";
}

RunResult cmd_run(const ExperimentConfig& cfg, Scenario scenario, int rep,
                  std::optional<std::uint64_t> seedOverride, const PreparedInstance* prepared) {
  std::optional<PreparedInstance> local;
  if (prepared == nullptr) {
    local = prepare_instance(cfg);
    prepared = &*local;
  }
  const std::uint64_t seed = seedOverride ? *seedOverride : run_seed(cfg, scenario, rep);
  const EngineConfig engineCfg = cfg.engine_config(scenario, seed);
  const RunResult result = run_engine(engineCfg, prepared->problem, prepared->overlay);
  write_run_artifacts(run_paths(cfg.outputDir, scenario, rep), cfg, scenario, rep, seed, result);
  return result;
}

void cmd_campaign(const ExperimentConfig& cfg) {
  const PreparedInstance inst = prepare_instance(cfg);
  for (const Scenario scenario : {Scenario::Traditional, Scenario::SemiDistributed,
                                  Scenario::FullyDistributed, Scenario::NeighborAware}) {
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const RunResult result = cmd_run(cfg, scenario, rep, std::nullopt, &inst);
      std::cerr << to_string(scenario) << " rep " << rep << ": front "
                << result.finalFront.size() << ", messages " << result.messageCount << ", "
                << std::fixed << std::setprecision(2) << result.wallClockSeconds << "s\n";
      std::cerr.unsetf(std::ios::fixed);
    }
  }
}

namespace {

struct LoadedRun {
  RunSummary summary;
  std::string dir;
  int populationSize = 0;
  int generations = 0;
};

}  // namespace

MetricsReport cmd_metrics(const std::string& outputDir, bool allowMixedInstances) {
  const fs::path runsDir = fs::path(outputDir) / "runs";
  if (!fs::exists(runsDir)) {
    throw std::invalid_argument("no runs directory at " + runsDir.string());
  }
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(runsDir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "run.json")) {
      dirs.push_back(entry.path().string());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  if (dirs.empty()) throw std::invalid_argument("no finished runs under " + runsDir.string());

  std::vector<LoadedRun> loaded;
  std::vector<RunSummary> summaries;
  for (const std::string& dir : dirs) {
    LoadedRun run;
    run.dir = dir;
    run.summary = read_run_summary(dir);
    const nlohmann::json info = read_json_file(dir + "/run.json");
    run.populationSize = info.at("config").at("genetic").at("populationSize").get<int>();
    run.generations = info.at("config").at("genetic").at("numberOfGenerations").get<int>();
    summaries.push_back(run.summary);
    loaded.push_back(std::move(run));
  }

  MetricsReport report = aggregate(summaries, allowMixedInstances);

  const fs::path metricsDir = fs::path(outputDir) / "metrics";
  const fs::path plotDir = metricsDir / "plotdata";
  fs::create_directories(plotDir);

  {
    const std::string path = (metricsDir / "metrics.csv").string();
    std::ofstream out = open_out(path);
    out << "scenario,rep,seed,gd,spacing,meanHopsPerMating,messageCount\n";
    for (const RunMetrics& m : report.perRun) {
      out << m.scenario << ',' << m.rep << ',' << m.seed << ',' << fmt(m.gd) << ','
          << fmt(m.spacingValue) << ',' << fmt(m.meanHopsPerMating) << ',' << m.messageCount
          << '\n';
    }
    finish_out(out, path);
  }

  {
    nlohmann::json j;
    j["referenceProvenance"] = report.referenceProvenance;
    j["warnings"] = report.warnings;
    nlohmann::json ref = nlohmann::json::array();
    for (const ObjectiveVector& p : report.referenceFront) {
      ref.push_back({p.meanInstances, p.meanDistance});
    }
    j["referenceFront"] = ref;
    nlohmann::json perRun = nlohmann::json::array();
    for (const RunMetrics& m : report.perRun) {
      perRun.push_back({{"scenario", m.scenario},
                        {"rep", m.rep},
                        {"seed", m.seed},
                        {"gd", m.gd},
                        {"spacing", m.spacingValue},
                        {"meanHopsPerMating", m.meanHopsPerMating},
                        {"messageCount", m.messageCount}});
    }
    j["perRun"] = perRun;
    nlohmann::json perScenario = nlohmann::json::array();
    for (const ScenarioStats& s : report.perScenario) {
      perScenario.push_back(
          {{"scenario", s.scenario},
           {"runCount", s.runCount},
           {"gd",
            {{"median", s.gdMedian}, {"mean", s.gdMean}, {"variance", s.gdVariance}}},
           {"spacing",
            {{"median", s.spacingMedian},
             {"mean", s.spacingMean},
             {"variance", s.spacingVariance}}},
           {"meanHopsPerMating",
            {{"median", s.hopsMedian}, {"mean", s.hopsMean}, {"variance", s.hopsVariance}}}});
    }
    j["perScenario"] = perScenario;
    const std::string path = (metricsDir / "report.json").string();
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
    finish_out(out, path);
  }

  {
    const std::string path = (plotDir / "fig4_scatter.csv").string();
    std::ofstream out = open_out(path);
    out << "scenario,rep,o1,o2\n";
    for (const LoadedRun& run : loaded) {
      for (const ObjectiveVector& p : run.summary.front) {
        out << run.summary.scenario << ',' << run.summary.rep << ',' << fmt(p.meanInstances)
            << ',' << fmt(p.meanDistance) << '\n';
      }
    }
    finish_out(out, path);
  }
  {
    const std::string path = (plotDir / "fig5_gd_box.csv").string();
    std::ofstream out = open_out(path);
    out << "scenario,rep,gd\n";
    for (const RunMetrics& m : report.perRun) {
      out << m.scenario << ',' << m.rep << ',' << fmt(m.gd) << '\n';
    }
    finish_out(out, path);
  }
  {
    const std::string path = (plotDir / "fig6_spacing_box.csv").string();
    std::ofstream out = open_out(path);
    out << "scenario,rep,spacing\n";
    for (const RunMetrics& m : report.perRun) {
      out << m.scenario << ',' << m.rep << ',' << fmt(m.spacingValue) << '\n';
    }
    finish_out(out, path);
  }

  // The evolution and overhead figures follow one run per scenario: the one
  // with the lowest repetition number.
  std::map<std::string, const LoadedRun*> firstRun;
  for (const LoadedRun& run : loaded) {
    const auto it = firstRun.find(run.summary.scenario);
    if (it == firstRun.end() || run.summary.rep < it->second->summary.rep) {
      firstRun[run.summary.scenario] = &run;
    }
  }

  {
    const std::string path = (plotDir / "fig7_evolution.csv").string();
    std::ofstream out = open_out(path);
    out << "scenario,generation,gd\n";
    for (const ScenarioStats& s : report.perScenario) {
      const LoadedRun* run = firstRun.at(s.scenario);
      const auto snapshots = read_snapshots_csv(run->dir + "/snapshots.csv");
      for (std::size_t g = 0; g < snapshots.size(); ++g) {
        out << s.scenario << ',' << (g + 1) << ','
            << fmt(generational_distance(snapshots[g], report.referenceFront)) << '\n';
      }
    }
    finish_out(out, path);
  }
  {
    const std::string path = (plotDir / "fig8_hops.csv").string();
    std::ofstream out = open_out(path);
    out << "scenario,childrenCreated,cumulativeHops\n";
    for (const ScenarioStats& s : report.perScenario) {
      const LoadedRun* run = firstRun.at(s.scenario);
      const auto records = read_hops_csv(run->dir + "/hops.csv");
      const long long matingsPerGeneration = run->populationSize / 2;
      std::vector<long long> buckets(run->generations, 0);
      for (const LogRecord& rec : records) {
        if (rec.matingIndex < 0) continue;
        const long long g = rec.matingIndex / matingsPerGeneration;
        if (g < static_cast<long long>(buckets.size())) buckets[g] += rec.hops;
      }
      long long cumulative = 0;
      for (std::size_t g = 0; g < buckets.size(); ++g) {
        cumulative += buckets[g];
        out << s.scenario << ',' << (g + 1) * static_cast<long long>(run->populationSize) << ','
            << cumulative << '\n';
      }
    }
    finish_out(out, path);
  }

  for (const ScenarioStats& s : report.perScenario) {
    std::cout << s.scenario << ": runs " << s.runCount << ", gd median " << fmt(s.gdMedian)
              << ", spacing median " << fmt(s.spacingMedian) << ", mean hops per mating median "
              << fmt(s.hopsMedian) << "\n";
  }
  for (const std::string& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return report;
}

}  // namespace fogweaver
