#include "das/simulate.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "das/error.hpp"

namespace das {

using nlohmann::ordered_json;

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

constexpr const char* kFilePrefix = "file:";

bool is_file_model(const std::string& m) { return m.rfind(kFilePrefix, 0) == 0; }

BenchmarkSpec benchmark_spec(const SimulateOptions& o) {
  BenchmarkSpec spec;
  if (o.model == "sinusoidal-ar1") {
    spec.family = ModelFamily::SinusoidalAr1;
  } else if (o.model == "iid-antipodal") {
    spec.family = ModelFamily::IidAntipodal;
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown model '" + o.model + "'");
  }
  if (o.sensors == 0) throw Error(ErrorCode::InvalidArgument, "K must be >= 1");
  spec.sensors = o.sensors;
  spec.snr_db = o.snr_db;
  spec.amplitude = o.amplitude;
  spec.variance = o.variance;
  if (!o.rho.empty()) spec.rho = o.rho;
  return spec;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::Io, "failed to write " + path.string());
}

}  // namespace

HypothesisModel resolve_model(const SimulateOptions& opts) {
  if (is_file_model(opts.model)) return load_model(opts.model.substr(std::char_traits<char>::length(kFilePrefix)));
  return build_benchmark(benchmark_spec(opts));
}

ResolvedSimulation resolve(const SimulateOptions& opts) {
  ResolvedSimulation sim;
  sim.model = std::make_shared<const HypothesisModel>(resolve_model(opts));
  const HypothesisModel& model = *sim.model;

  if (opts.strategy == "all") {
    sim.strategies = {StrategyKind::Random, StrategyKind::EntropyDas, StrategyKind::JDas};
  } else if (auto kind = parse_strategy(opts.strategy)) {
    sim.strategies = {*kind};
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + opts.strategy + "'");
  }

  if (opts.true_hyp == "all") {
    for (std::size_t q = 0; q < model.hypotheses(); ++q) sim.truths.push_back(q);
  } else {
    std::size_t pos = 0;
    long long q = 0;
    try {
      q = std::stoll(opts.true_hyp, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != opts.true_hyp.size() || q < 1 || static_cast<std::size_t>(q) > model.hypotheses())
      throw Error(ErrorCode::InvalidArgument, "--true-hyp must be 'all' or in 1.." + std::to_string(model.hypotheses()));
    sim.truths = {static_cast<std::size_t>(q - 1)};
  }

  sim.base.model = sim.model;
  sim.base.trials = opts.trials;
  sim.base.rounds = opts.rounds == 0 ? model.sensors() : opts.rounds;
  sim.base.seed = opts.seed;
  sim.base.threads = opts.threads;
  sim.base.true_hypothesis = sim.truths.front();
  sim.base.validate();
  sim.trace = opts.trace;

  ordered_json m;
  m["source"] = opts.model;
  if (!is_file_model(opts.model)) {
    const BenchmarkSpec spec = benchmark_spec(opts);
    m["K"] = spec.sensors;
    m["snr_db"] = spec.snr_db;
    m["amplitude"] = spec.resolved_amplitude();
    m["variance"] = spec.noise_variance();
    if (spec.family == ModelFamily::SinusoidalAr1) m["rho"] = spec.rho;
  } else {
    std::ostringstream text;
    write_model(text, model);
    m["K"] = model.sensors();
    m["Q"] = model.hypotheses();
    // FNV-1a of the canonical text, so an edited file is detectable on re-run.
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text.str()) h = (h ^ ch) * 0x100000001B3ULL;
    m["content_hash"] = h;
  }
  ordered_json strategies = ordered_json::array();
  for (auto s : sim.strategies) strategies.push_back(std::string(to_string(s)));
  ordered_json truths = ordered_json::array();
  for (auto q : sim.truths) truths.push_back(q + 1);

  sim.config["model"] = m;
  sim.config["strategies"] = strategies;
  sim.config["true_hyps"] = truths;
  sim.config["trials"] = sim.base.trials;
  sim.config["rounds"] = sim.base.rounds;
  sim.config["seed"] = sim.base.seed;
  sim.config["trace"] = sim.trace;
  return sim;
}

SimulateOptions options_from_config(const ordered_json& config) {
  try {
    SimulateOptions o;
    const auto& m = config.at("model");
    o.model = m.at("source").get<std::string>();
    if (!is_file_model(o.model)) {
      o.sensors = m.at("K").get<std::size_t>();
      o.snr_db = m.at("snr_db").get<double>();
      o.amplitude = m.at("amplitude").get<double>();
      o.variance = m.at("variance").get<double>();
      if (m.contains("rho")) o.rho = m.at("rho").get<std::vector<double>>();
    }
    const auto strategies = config.at("strategies").get<std::vector<std::string>>();
    if (strategies.size() == 1) {
      o.strategy = strategies.front();
    } else if (strategies == std::vector<std::string>{"random", "entropy-das", "j-das"}) {
      o.strategy = "all";
    } else {
      throw Error(ErrorCode::ParseError, "manifest lists an unsupported strategy set");
    }
    const auto truths = config.at("true_hyps").get<std::vector<std::size_t>>();
    o.true_hyp = truths.size() == 1 ? std::to_string(truths.front()) : "all";
    o.trials = config.at("trials").get<std::size_t>();
    o.rounds = config.at("rounds").get<std::size_t>();
    o.seed = config.at("seed").get<std::uint64_t>();
    o.trace = config.at("trace").get<bool>();
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
}

SimulationOutput run_simulation(const ResolvedSimulation& sim) {
  SimulationOutput out;
  std::vector<std::vector<MonteCarloRun>> by_truth;
  for (std::size_t truth : sim.truths) {
    MonteCarloConfig cfg = sim.base;
    cfg.true_hypothesis = truth;
    by_truth.push_back(compare_strategies(cfg, sim.strategies));
  }

  std::ostringstream traj;
  traj << "strategy,true_hyp,round,mean_llr,std_llr,stderr,trials\n";
  std::ostringstream trace;
  if (sim.trace) trace << "trial,round,strategy,true_hyp,chosen_node,score\n";
  for (std::size_t s = 0; s < sim.strategies.size(); ++s) {
    for (std::size_t t = 0; t < sim.truths.size(); ++t) {
      const MonteCarloRun& run = by_truth[t][s];
      const std::string name(to_string(run.strategy));
      const TrajectoryAggregate& agg = run.summary;
      for (std::size_t l = 0; l < agg.mean.size(); ++l) {
        traj << name << ',' << run.true_hypothesis + 1 << ',' << l + 1 << ',' << format_real(agg.mean[l]) << ','
             << format_real(agg.stddev[l]) << ',' << format_real(agg.stderr_at(l)) << ',' << agg.trials << '\n';
      }
      if (!sim.trace) continue;
      for (std::size_t i = 0; i < run.trials.size(); ++i) {
        const TrialResult& tr = run.trials[i];
        for (std::size_t l = 0; l < tr.order.size(); ++l)
          trace << i + 1 << ',' << l + 1 << ',' << name << ',' << run.true_hypothesis + 1 << ',' << tr.order[l] + 1
                << ',' << format_real(tr.chosen_scores[l]) << '\n';
      }
    }
  }
  out.trajectories_csv = traj.str();
  out.trace_csv = trace.str();
  for (auto& runs : by_truth)
    for (auto& r : runs) out.runs.push_back(std::move(r));
  return out;
}

std::vector<std::filesystem::path> simulate_to_directory(const ResolvedSimulation& sim,
                                                         const std::filesystem::path& out) {
  const SimulationOutput result = run_simulation(sim);

  std::vector<std::filesystem::path> written;
  try {
    std::filesystem::create_directories(out);
    const auto traj = out / "trajectories.csv";
    write_file(traj, result.trajectories_csv);
    written.push_back(traj);
    if (sim.trace) {
      const auto trace = out / "selection_trace.csv";
      write_file(trace, result.trace_csv);
      written.push_back(trace);
    }
    ordered_json manifest;
    manifest["tool"] = "das_detect";
    manifest["version"] = kToolVersion;
    manifest["command"] = "simulate";
    manifest["seed"] = sim.base.seed;
    manifest["timestamp"] = utc_timestamp();
    manifest["config"] = sim.config;
    ordered_json outputs = ordered_json::array();
    for (const auto& p : written) outputs.push_back(p.filename().string());
    manifest["outputs"] = outputs;
    const auto manifest_path = out / "manifest.json";
    write_file(manifest_path, manifest.dump(2) + "\n");
    written.push_back(manifest_path);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) std::filesystem::remove(p, ec);
    throw;
  }
  return written;
}

SimulateOptions options_from_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorCode::Io, "cannot open manifest " + manifest.string());
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  if (!doc.contains("config")) throw Error(ErrorCode::ParseError, "manifest has no config block");
  return options_from_config(doc["config"]);
}

}  // namespace das
