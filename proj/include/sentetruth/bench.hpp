#pragma once

// Experiment runner: accuracy and repetition-rate metrics, the
// model x strategy x attack x fraction matrix, and report emission.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentetruth/adversary.hpp"
#include "sentetruth/aggregation.hpp"
#include "sentetruth/dataset.hpp"
#include "sentetruth/embedding.hpp"
#include "sentetruth/epoch_series.hpp"
#include "sentetruth/error.hpp"
#include "sentetruth/log.hpp"
#include "sentetruth/oraclesim.hpp"
#include "sentetruth/text.hpp"

namespace sentetruth {

/// Fraction of results whose chosen record is unaltered: variant original and
/// produced by the requested model.
inline double score_accuracy(std::span<const AggregationResult> results,
                             std::span<const std::vector<ResponseRecord>> panels) {
  if (results.empty()) fail(ErrorCode::EmptyPanel, "no results to score");
  if (results.size() != panels.size())
    fail(ErrorCode::LengthMismatch,
         std::to_string(results.size()) + " results vs " + std::to_string(panels.size()) + " panels");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& panel = panels[i];
    const auto it = std::find_if(panel.begin(), panel.end(),
                                 [&](const ResponseRecord& r) { return r.node_id == results[i].chosen_node; });
    if (it == panel.end())
      fail(ErrorCode::InvalidArgument, "chosen node " + std::to_string(results[i].chosen_node) + " not in panel");
    if (it->variant == Variant::original && it->provenance_model == it->model) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(results.size());
}

/// Largest group of canonically identical answers divided by panel size.
inline double repetition_rate(std::span<const ResponseRecord> panel) {
  if (panel.empty()) fail(ErrorCode::EmptyPanel, "repetition rate of an empty panel");
  std::map<std::string, std::size_t> groups;
  std::size_t largest = 0;
  for (const auto& r : panel) largest = std::max(largest, ++groups[text::canonicalize(r.content)]);
  return static_cast<double>(largest) / static_cast<double>(panel.size());
}

struct ExperimentConfig {
  std::filesystem::path corpus_path;
  /// Empty means every corpus model.
  std::vector<std::string> models;
  std::vector<Strategy> strategies{Strategy::majority, Strategy::similarity_only, Strategy::similarity_td};
  EmbeddingProviderConfig provider;
  std::vector<AttackKind> attacks{AttackKind::random_response};
  std::optional<std::string> substitute_model;
  std::optional<std::filesystem::path> junk_corpus;
  /// Fixed malicious set; overrides the seeded draw and `fractions`.
  std::optional<std::set<NodeId>> malicious_nodes;
  bool allow_local_corruption = true;
  std::vector<double> fractions{0.4};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  /// Empty means every corpus question, in corpus order.
  std::vector<std::string> questions;
  int quorum = 0;
  std::filesystem::path output_dir = "bench_out";
  unsigned workers = 1;
  bool write_traces = true;
  bool write_chain_logs = true;

  void validate() const {
    for (const double f : fractions)
      if (!(f >= 0.0 && f < 0.5)) fail(ErrorCode::InvalidFraction, "fraction " + std::to_string(f) + " not in [0, 0.5)");
    if (strategies.empty()) fail(ErrorCode::InvalidArgument, "no strategies configured");
    if (attacks.empty()) fail(ErrorCode::InvalidArgument, "no attacks configured");
    if (seeds.empty()) fail(ErrorCode::InvalidArgument, "no seeds configured");
    if (fractions.empty() && !malicious_nodes) fail(ErrorCode::InvalidArgument, "no fractions configured");
    if (workers == 0) fail(ErrorCode::InvalidArgument, "workers must be >= 1");
    provider.validate();
  }
};

/// Parses a bench config. Relative paths resolve against `base_dir`.
inline ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  ExperimentConfig c;
  try {
    c.corpus_path = resolve(j.at("corpus").get<std::string>());
    c.models = j.value("models", std::vector<std::string>{});
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) {
        const auto parsed = parse_strategy(s.get<std::string>());
        if (!parsed) fail(ErrorCode::InvalidArgument, "unknown strategy " + s.get<std::string>());
        c.strategies.push_back(*parsed);
      }
    }
    if (j.contains("provider")) {
      const auto& p = j.at("provider");
      const auto kind = parse_provider_kind(p.value("kind", std::string("tfidf")));
      if (!kind) fail(ErrorCode::InvalidArgument, "unknown provider kind");
      c.provider.kind = *kind;
      if (p.contains("fixture_path")) c.provider.fixture_path = resolve(p.at("fixture_path").get<std::string>());
      if (p.contains("remote_endpoint")) c.provider.remote_endpoint = p.at("remote_endpoint").get<std::string>();
      c.provider.remote_timeout_ms = p.value("remote_timeout_ms", c.provider.remote_timeout_ms);
    }
    if (j.contains("attack")) {
      const auto& a = j.at("attack");
      std::vector<std::string> kinds;
      if (a.contains("kinds")) kinds = a.at("kinds").get<std::vector<std::string>>();
      if (a.contains("kind")) kinds.push_back(a.at("kind").get<std::string>());
      if (!kinds.empty()) c.attacks.clear();
      for (const auto& k : kinds) {
        const auto parsed = parse_attack_kind(k);
        if (!parsed) fail(ErrorCode::InvalidArgument, "unknown attack kind " + k);
        c.attacks.push_back(*parsed);
      }
      if (a.contains("substitute_model")) c.substitute_model = a.at("substitute_model").get<std::string>();
      if (a.contains("junk_corpus")) c.junk_corpus = resolve(a.at("junk_corpus").get<std::string>());
      if (a.contains("malicious_nodes"))
        c.malicious_nodes = a.at("malicious_nodes").get<std::set<NodeId>>();
      c.allow_local_corruption = a.value("allow_local_corruption", true);
    }
    c.fractions = j.value("fractions", c.fractions);
    c.seeds = j.value("seeds", c.seeds);
    c.questions = j.value("questions", c.questions);
    c.quorum = j.value("quorum", 0);
    c.output_dir = resolve(j.value("output_dir", std::string("bench_out")));
    c.workers = j.value("workers", 1u);
    c.write_traces = j.value("write_traces", true);
    c.write_chain_logs = j.value("write_chain_logs", true);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("bench config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("bench config: ") + e.what());
  }
  return config_from_json(j, path.parent_path());
}

struct AccuracyRow {
  std::string model;
  Strategy strategy = Strategy::majority;
  AttackKind attack = AttackKind::random_response;
  double fraction = 0.0;
  std::vector<double> per_seed;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t questions = 0;
};

struct CellFailure {
  std::string cell;
  std::uint64_t seed = 0;
  std::string error;
};

struct AccuracyReport {
  std::vector<AccuracyRow> rows;
  /// Keyed by trace file stem.
  std::map<std::string, std::vector<EpochTraceEntry>> traces;
  std::vector<CellFailure> failures;
};

/// Fixed-precision number formatting so report bytes do not depend on locale
/// or on shortest-round-trip printing.
inline std::string format_number(double v, int precision = 6) {
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

inline std::string cell_name(std::string_view model, Strategy s, AttackKind a, double fraction) {
  std::string name = std::string(model) + "_" + std::string(to_string(s)) + "_" + std::string(to_string(a)) + "_f" +
                     format_number(fraction, 2);
  for (char& c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) c = '-';
  return name;
}

inline constexpr std::string_view kReportCsvHeader =
    "model,strategy,attack,fraction,seed_count,accuracy_mean,accuracy_min,accuracy_max,questions";

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (const char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

inline void write_report_csv(const AccuracyReport& report, std::ostream& out) {
  out << kReportCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << csv_field(r.model) << ',' << to_string(r.strategy) << ',' << to_string(r.attack) << ','
        << format_number(r.fraction, 2) << ',' << r.per_seed.size() << ',' << format_number(r.mean) << ','
        << format_number(r.min) << ',' << format_number(r.max) << ',' << r.questions << '\n';
  }
}

namespace detail {

struct BenchJob {
  std::size_t row = 0;
  std::string model;
  Strategy strategy = Strategy::majority;
  AttackKind attack = AttackKind::random_response;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  bool first_seed = false;
};

struct BenchJobResult {
  std::optional<double> accuracy;
  std::vector<EpochTraceEntry> trace;
  std::string chain_log;
  std::string error;
};

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << body;
}

}  // namespace detail

/// Runs every (model, strategy, attack, fraction) cell over all seeds and
/// writes report.csv, report.json, trace_<cell>_s<seed>.json and, for the
/// first seed of each cell, chain_<cell>.jsonl from a full network
/// simulation. Cell errors are collected into failures.json; the remaining
/// cells still run.
inline AccuracyReport run_matrix(const ExperimentConfig& config) {
  config.validate();
  const Corpus corpus = load_corpus(config.corpus_path);
  const auto provider = make_provider(config.provider);
  std::vector<std::string> junk;
  if (config.junk_corpus) junk = load_junk_corpus(*config.junk_corpus);

  const std::vector<std::string> models = config.models.empty() ? corpus.models() : config.models;
  for (const auto& m : models)
    if (!corpus.has_model(m)) fail(ErrorCode::UnknownModel, m);
  std::vector<std::string> question_ids = config.questions;
  if (question_ids.empty())
    for (const auto& q : corpus.questions()) question_ids.push_back(q.question_id);
  for (const auto& q : question_ids) corpus.question(q);
  if (question_ids.empty()) fail(ErrorCode::InvalidArgument, "corpus has no questions");

  std::vector<double> fractions = config.fractions;
  if (config.malicious_nodes)
    fractions = {static_cast<double>(config.malicious_nodes->size()) / corpus.node_count()};

  AccuracyReport report;
  std::vector<detail::BenchJob> jobs;
  for (const auto& model : models)
    for (const auto strategy : config.strategies)
      for (const auto attack : config.attacks)
        for (const double fraction : fractions) {
          AccuracyRow row;
          row.model = model;
          row.strategy = strategy;
          row.attack = attack;
          row.fraction = fraction;
          row.questions = question_ids.size();
          for (std::size_t s = 0; s < config.seeds.size(); ++s)
            jobs.push_back({report.rows.size(), model, strategy, attack, fraction, config.seeds[s], s == 0});
          report.rows.push_back(std::move(row));
        }

  const auto make_plan = [&](const detail::BenchJob& job) {
    AttackPlan plan = config.malicious_nodes
                          ? plan_attack_with_nodes(corpus.node_count(), job.attack, *config.malicious_nodes, job.seed)
                          : plan_attack(corpus.node_count(), job.attack, job.fraction, job.seed);
    plan.substitute_model = config.substitute_model;
    plan.junk_corpus = config.junk_corpus;
    plan.junk_sentences = junk;
    plan.allow_local_corruption = config.allow_local_corruption;
    return plan;
  };

  std::vector<detail::BenchJobResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      auto& out = results[i];
      try {
        const AttackPlan plan = make_plan(job);
        const auto series = run_epoch_series(corpus, question_ids, job.model, job.strategy, *provider,
                                             init_credibility(corpus.node_count()), &plan);
        out.accuracy = score_accuracy(series.results, series.panels);
        out.trace = series.trace;
        if (config.write_chain_logs && job.first_seed) {
          SimulationConfig sim_config;
          sim_config.quorum = config.quorum;
          sim_config.strategy = job.strategy;
          sim_config.provider = provider;
          sim_config.attack = plan;
          sim_config.seed = job.seed;
          Simulation sim(corpus, sim_config);
          for (const auto& q : question_ids) sim.run_task(q, job.model);
          std::ostringstream log;
          sim.chain().export_log(log);
          out.chain_log = log.str();
        }
      } catch (const std::exception& e) {
        out.error = e.what();
      }
    }
  };
  const unsigned thread_count = std::min<unsigned>(config.workers, static_cast<unsigned>(jobs.size()));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < thread_count; ++t) pool.emplace_back(worker);
  }

  std::filesystem::create_directories(config.output_dir);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& job = jobs[i];
    auto& row = report.rows[job.row];
    const std::string cell = cell_name(job.model, job.strategy, job.attack, job.fraction);
    if (!results[i].error.empty()) {
      log::warn("bench cell " + cell + " seed " + std::to_string(job.seed) + " failed: " + results[i].error);
      report.failures.push_back({cell, job.seed, results[i].error});
      continue;
    }
    row.per_seed.push_back(*results[i].accuracy);
    const std::string stem = cell + "_s" + std::to_string(job.seed);
    if (config.write_traces) {
      detail::write_text(config.output_dir / ("trace_" + stem + ".json"),
                         trace_to_json(results[i].trace).dump(1) + "\n");
    }
    if (!results[i].chain_log.empty())
      detail::write_text(config.output_dir / ("chain_" + cell + ".jsonl"), results[i].chain_log);
    report.traces.emplace(stem, std::move(results[i].trace));
  }
  for (auto& row : report.rows) {
    if (row.per_seed.empty()) continue;
    double sum = 0.0;
    for (const double a : row.per_seed) sum += a;
    row.mean = sum / static_cast<double>(row.per_seed.size());
    row.min = *std::min_element(row.per_seed.begin(), row.per_seed.end());
    row.max = *std::max_element(row.per_seed.begin(), row.per_seed.end());
  }

  std::ostringstream csv;
  write_report_csv(report, csv);
  detail::write_text(config.output_dir / "report.csv", csv.str());

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"model", r.model},
                    {"strategy", to_string(r.strategy)},
                    {"attack", to_string(r.attack)},
                    {"fraction", r.fraction},
                    {"accuracy_per_seed", r.per_seed},
                    {"accuracy_mean", r.mean},
                    {"accuracy_min", r.min},
                    {"accuracy_max", r.max},
                    {"questions", r.questions}});
  }
  detail::write_text(config.output_dir / "report.json",
                     nlohmann::json{{"seeds", config.seeds}, {"rows", rows}}.dump(1) + "\n");

  if (!report.failures.empty()) {
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& f : report.failures) failures.push_back({{"cell", f.cell}, {"seed", f.seed}, {"error", f.error}});
    detail::write_text(config.output_dir / "failures.json", failures.dump(1) + "\n");
  } else {
    std::filesystem::remove(config.output_dir / "failures.json");  // stale from an earlier run
  }
  return report;
}

}  // namespace sentetruth
