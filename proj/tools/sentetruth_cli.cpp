// sentetruth: dataset validation, embedding cache, single-task oracle
// simulation and the accuracy benchmark matrix.
//
// Exit codes: 0 success, 1 usage error, 2 data/invariant error,
// 3 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sentetruth/sentetruth.hpp"

namespace st = sentetruth;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(st::ErrorCode code) {
  switch (code) {
    case st::ErrorCode::RemoteUnavailable:
    case st::ErrorCode::IoError:
      return kExitRuntime;
    default:
      return kExitData;
  }
}

struct Overrides {
  std::string config;
  std::string corpus;
  std::optional<std::uint64_t> seed;
  std::optional<double> fraction;
  std::string strategy;
  std::string provider;
  std::string fixture;
  std::string endpoint;
  std::string model;
  std::optional<int> quorum;
  std::string out;
  std::string attack;
  std::string junk;
  std::string substitute;
  std::optional<unsigned> workers;
};

void add_override_flags(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "JSON experiment config");
  cmd.add_option("--corpus", o.corpus, "Corpus file (line-delimited JSON)");
  cmd.add_option("--seed", o.seed, "Single seed, replaces the configured seed list");
  cmd.add_option("--fraction", o.fraction, "Malicious fraction in [0, 0.5)");
  cmd.add_option("--strategy", o.strategy, "majority | similarity_only | similarity_td");
  cmd.add_option("--provider", o.provider, "tfidf | fixture | remote");
  cmd.add_option("--fixture", o.fixture, "Embedding fixture file for --provider fixture");
  cmd.add_option("--endpoint", o.endpoint, "Embedding service URL for --provider remote");
  cmd.add_option("--model", o.model, "Requested model");
  cmd.add_option("--quorum", o.quorum, "Consensus quorum t (default floor(n/2)+1)");
  cmd.add_option("--attack", o.attack, "random_response | model_substitution | incorrect_response");
  cmd.add_option("--junk", o.junk, "Junk sentence corpus for random_response");
  cmd.add_option("--substitute", o.substitute, "Substitute model for model_substitution");
}

template <typename T>
T parse_enum(const std::string& value, std::optional<T> (*parse)(std::string_view), const char* what) {
  const auto parsed = parse(value);
  if (!parsed) throw CLI::ValidationError(what, "unknown value '" + value + "'");
  return *parsed;
}

st::ExperimentConfig build_config(const Overrides& o) {
  st::ExperimentConfig c;
  if (!o.config.empty()) c = st::load_experiment_config(o.config);
  if (!o.corpus.empty()) c.corpus_path = o.corpus;
  if (o.seed) c.seeds = {*o.seed};
  if (o.fraction) c.fractions = {*o.fraction};
  if (!o.strategy.empty()) c.strategies = {parse_enum(o.strategy, &st::parse_strategy, "--strategy")};
  if (!o.provider.empty()) c.provider.kind = parse_enum(o.provider, &st::parse_provider_kind, "--provider");
  if (!o.fixture.empty()) c.provider.fixture_path = o.fixture;
  if (!o.endpoint.empty()) c.provider.remote_endpoint = o.endpoint;
  if (const char* env = std::getenv("SENTETRUTH_EMBED_URL"); env != nullptr && *env != '\0')
    c.provider.remote_endpoint = env;
  if (!o.model.empty()) c.models = {o.model};
  if (o.quorum) c.quorum = *o.quorum;
  if (!o.out.empty()) c.output_dir = o.out;
  if (!o.attack.empty()) c.attacks = {parse_enum(o.attack, &st::parse_attack_kind, "--attack")};
  if (!o.junk.empty()) c.junk_corpus = o.junk;
  if (!o.substitute.empty()) c.substitute_model = o.substitute;
  if (o.workers) c.workers = *o.workers;
  if (!c.junk_corpus && fs::exists(SENTETRUTH_DEFAULT_JUNK)) c.junk_corpus = fs::path(SENTETRUTH_DEFAULT_JUNK);
  if (c.corpus_path.empty()) throw CLI::ValidationError("--corpus", "no corpus given (flag or config)");
  return c;
}

int cmd_validate(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw st::Error(st::ErrorCode::IoError, "cannot open corpus " + path);
  const st::Corpus corpus = st::parse_corpus(in);
  const auto gaps = corpus.gaps();
  if (!gaps.empty()) {
    std::cerr << st::format_gap_report(gaps);
    std::cerr << "corpus invalid: " << gaps.size() << " incomplete panel(s)\n";
    return kExitData;
  }
  std::cout << "ok: " << corpus.questions().size() << " questions, " << corpus.models().size() << " models, "
            << corpus.node_count() << " nodes, " << corpus.responses().size() << " responses\n";
  return kExitOk;
}

int cmd_embed_cache(const Overrides& o, const std::string& out) {
  st::ExperimentConfig c = build_config(o);
  if (out.empty()) throw CLI::ValidationError("--out", "embed-cache needs --out <fixture file>");
  const st::Corpus corpus = st::load_corpus(c.corpus_path);
  std::vector<std::string> junk;
  if (c.junk_corpus) junk = st::load_junk_corpus(*c.junk_corpus);
  const auto written = st::cache_embeddings(c.provider, corpus, out, junk);
  std::cerr << "wrote " << written << " vectors to " << out << '\n';
  return kExitOk;
}

int cmd_simulate(const Overrides& o, const std::string& question, const std::string& out,
                 const std::string& cred_in, const std::string& cred_out) {
  st::ExperimentConfig c = build_config(o);
  const st::Corpus corpus = st::load_corpus(c.corpus_path);
  const std::string model = c.models.empty() ? corpus.models().front() : c.models.front();

  st::SimulationConfig sim;
  sim.quorum = c.quorum;
  sim.strategy = o.strategy.empty() ? st::Strategy::similarity_td : c.strategies.front();
  sim.provider = st::make_provider(c.provider);
  sim.seed = c.seeds.front();
  const bool attack_requested = !o.attack.empty() || o.fraction.has_value() || !o.config.empty();
  const double fraction = c.fractions.empty() ? 0.0 : c.fractions.front();
  if (attack_requested && (fraction > 0.0 || c.malicious_nodes)) {
    st::AttackPlan plan =
        c.malicious_nodes ? st::plan_attack_with_nodes(corpus.node_count(), c.attacks.front(), *c.malicious_nodes, sim.seed)
                          : st::plan_attack(corpus.node_count(), c.attacks.front(), fraction, sim.seed);
    plan.substitute_model = c.substitute_model;
    plan.allow_local_corruption = c.allow_local_corruption;
    if (c.junk_corpus) st::with_junk_corpus(plan, *c.junk_corpus);
    sim.attack = std::move(plan);
  }

  std::optional<st::CredibilityTable> initial;
  if (!cred_in.empty()) initial = st::load_credibility(cred_in);
  st::Simulation simulation(corpus, sim, initial);
  const auto run = simulation.run_task(question, model);

  if (out.empty() || out == "-") {
    simulation.chain().export_log(std::cout);
  } else {
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw st::Error(st::ErrorCode::IoError, "cannot write " + out);
    simulation.chain().export_log(file);
  }
  for (const auto& r : run.rounds) {
    std::cerr << "round " << r.block_round << " [" << st::to_string(r.stage) << "] advanced " << r.advanced.size()
              << " node(s)";
    if (!r.message.empty()) std::cerr << ": " << r.message;
    std::cerr << '\n';
  }
  if (!cred_out.empty()) {
    const auto submitter = run.outcome.submitter.value_or(0);
    st::save_credibility(simulation.nodes()[static_cast<std::size_t>(submitter)].credibility, cred_out);
  }
  if (run.stalled) {
    std::cerr << run.rounds.back().message << '\n';
    return kExitData;
  }
  std::cerr << "consensus: " << run.outcome.supporting_nodes.size() << " supporting node(s), quorum "
            << run.outcome.quorum << '\n';
  return kExitOk;
}

int cmd_bench(const Overrides& o) {
  const st::ExperimentConfig c = build_config(o);
  const auto report = st::run_matrix(c);
  st::write_report_csv(report, std::cout);
  if (!report.failures.empty()) {
    std::cerr << report.failures.size() << " cell run(s) failed; see " << (c.output_dir / "failures.json").string()
              << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Oracle-network simulator and text-answer aggregation benchmark"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "debug | info | warn | error | off");

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check corpus invariants and print a gap report");
  validate->add_option("corpus", validate_path, "Corpus file")->required();

  Overrides embed_opts;
  std::string embed_out;
  auto* embed = app.add_subcommand("embed-cache", "Write an embedding fixture for every response in a corpus");
  add_override_flags(*embed, embed_opts);
  embed->add_option("--out", embed_out, "Fixture file to write");

  Overrides sim_opts;
  std::string question, sim_out, cred_in, cred_out;
  auto* simulate = app.add_subcommand("simulate", "Run one request through the oracle network; prints the chain log");
  add_override_flags(*simulate, sim_opts);
  simulate->add_option("--question", question, "Question id")->required();
  simulate->add_option("--out", sim_out, "Chain log file (default: standard output)");
  simulate->add_option("--credibility", cred_in, "Initial credibility table (JSON)");
  simulate->add_option("--save-credibility", cred_out, "Write the submitting node's credibility table");

  Overrides bench_opts;
  auto* bench = app.add_subcommand("bench", "Run the accuracy matrix; writes report.csv, report.json and traces");
  add_override_flags(*bench, bench_opts);
  bench->add_option("--out", bench_opts.out, "Output directory");
  bench->add_option("--workers", bench_opts.workers, "Concurrent cell runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  const std::pair<const char*, st::log::Level> levels[] = {{"debug", st::log::Level::debug},
                                                           {"info", st::log::Level::info},
                                                           {"warn", st::log::Level::warn},
                                                           {"error", st::log::Level::error},
                                                           {"off", st::log::Level::off}};
  for (const auto& [name, level] : levels)
    if (log_level == name) st::log::set_level(level);

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*embed) return cmd_embed_cache(embed_opts, embed_out);
    if (*simulate) return cmd_simulate(sim_opts, question, sim_out, cred_in, cred_out);
    if (*bench) return cmd_bench(bench_opts);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const st::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
