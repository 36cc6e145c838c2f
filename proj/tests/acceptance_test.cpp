// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>

#include "sentetruth/sentetruth.hpp"
#include "support/fixtures.hpp"

using namespace sentetruth;
namespace fs = std::filesystem;
using sentetruth::testing::read_file;
using sentetruth::testing::TempDir;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Criterion {
  std::string name;
  double time_limit_s;  // 0 = no limit
  std::function<Check()> run;
};

// cos from raw coordinates, clamped at zero; no library code involved
double clamped_cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.dim(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::max(0.0, dot / std::sqrt(na * nb));
}

Check conservation() {
  Check c;
  Rng rng(101);
  int trials = 0;
  double worst = 0.0;
  while (trials < 1000) {
    const int n = 1 + static_cast<int>(rng.below(20));
    CredibilityTable cred;
    std::map<NodeId, double> phi;
    double weighted = 0.0;
    for (NodeId i = 0; i < n; ++i) {
      cred.weights[i] = rng.unit() < 0.15 ? 0.0 : 5.0 * rng.unit();
      phi[i] = (n - 1) * rng.unit();
      weighted += cred.weights[i] * phi[i];
    }
    if (!(weighted > 0.0)) continue;
    ++trials;
    const auto up = update_credibility(cred, phi);
    worst = std::max(worst, std::abs(up.table.sum() - cred.sum()));
  }
  c.require(worst <= 1e-9, "max |sum C' - sum C| = " + std::to_string(worst));
  c.detail = c.ok ? "1000 trials, max drift " + format_number(worst, 17) : c.detail;
  return c;
}

Check argmax_oracle() {
  Check c;
  Rng rng(202);
  const std::vector<std::string> words{"oracle", "chain", "node",  "answer", "model", "vote",  "block",
                                       "trust",  "the",   "of",    "paris",  "rome",  "water", "boils"};
  TfidfProvider tfidf;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(5);
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) {
      std::string s;
      const auto len = 1 + rng.below(8);
      for (std::uint64_t w = 0; w < len; ++w) s += words[rng.below(words.size())] + " ";
      texts.push_back(s);
    }
    const auto vectors = tfidf.embed(texts);
    CredibilityTable cred;
    std::vector<double> w;
    for (std::size_t i = 0; i < n; ++i) {
      w.push_back(rng.unit());
      cred.weights[static_cast<NodeId>(i)] = w.back();
    }
    std::vector<double> score(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) score[i] += w[i] * clamped_cosine(vectors[i], vectors[j]);
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (score[i] > score[best] + 1e-9 * std::max(1.0, score[best])) best = i;
    const auto got = aggregate_sentetruth(testing::make_panel(texts), vectors, cred).result.chosen_node;
    c.require(static_cast<std::size_t>(got) == best,
              "panel " + std::to_string(t) + ": chose " + std::to_string(got) + ", oracle " + std::to_string(best));
  }
  if (c.ok) c.detail = "200 panels agree";
  return c;
}

Check random_response_accuracy() {
  Check c;
  TempDir dir("accept_table");
  save_corpus(synthetic::make_corpus(), dir / "corpus.jsonl");
  ExperimentConfig config;
  config.corpus_path = dir / "corpus.jsonl";
  config.models = {"ChatGPT"};
  config.junk_corpus = sentetruth::testing::junk_path();
  config.fractions = {0.4};
  config.seeds = {1, 2, 3};
  config.output_dir = dir / "out";
  config.write_chain_logs = false;
  const auto report = run_matrix(config);
  c.require(report.failures.empty(), "cell failures");
  c.require(fs::exists(dir / "out" / "report.csv") && fs::exists(dir / "out" / "report.json"), "report missing");
  std::map<Strategy, double> mean;
  for (const auto& row : report.rows) mean[row.strategy] = row.mean;
  c.require(mean.at(Strategy::similarity_td) == 1.0,
            "similarity_td accuracy " + format_number(mean.at(Strategy::similarity_td)));
  c.require(mean.at(Strategy::majority) <= mean.at(Strategy::similarity_td), "majority beats similarity_td");
  if (c.ok) {
    c.detail = "majority " + format_number(mean.at(Strategy::majority), 3) + ", similarity_only " +
               format_number(mean.at(Strategy::similarity_only), 3) + ", similarity_td " +
               format_number(mean.at(Strategy::similarity_td), 3);
  }
  return c;
}

Check substitution_dynamics() {
  Check c;
  const auto fx = testing::substitution_fixture(10, 20, 77, {3, 11});
  FixtureProvider provider(fx.vectors);
  AttackPlan plan = plan_attack_with_nodes(10, AttackKind::model_substitution, {6, 7, 8, 9}, 1);
  plan.substitute_model = "Gemini";
  std::vector<std::string> qids;
  for (const auto& q : fx.corpus.questions()) qids.push_back(q.question_id);
  const auto series = run_epoch_series(fx.corpus, qids, "ChatGPT", Strategy::similarity_td, provider,
                                       init_credibility(10), &plan);
  double honest = 0, malicious = 0;
  for (const auto& [node, w] : series.credibility.weights) (plan.is_malicious(node) ? malicious : honest) += w;
  honest /= 6.0;
  malicious /= 4.0;
  c.require(series.credibility.epoch >= 20, "fewer than 20 epochs");
  c.require(malicious < honest, "malicious mean " + format_number(malicious) + " >= honest " + format_number(honest));
  c.require(malicious < 1.0, "malicious mean did not fall below 1.0");
  if (c.ok) {
    c.detail = std::to_string(series.credibility.epoch) + " epochs, final mean malicious " +
               format_number(malicious, 4) + " vs honest " + format_number(honest, 4);
  }
  return c;
}

Check orthogonal_sweep() {
  Check c;
  const auto junk = load_junk_corpus(sentetruth::testing::junk_path());
  const auto fx = testing::orthogonal_junk_fixture(10, 20, junk, 5);
  FixtureProvider provider(fx.vectors);
  std::vector<std::string> qids;
  for (const auto& q : fx.corpus.questions()) qids.push_back(q.question_id);
  std::string summary;
  for (const double f : {0.0, 0.1, 0.2, 0.3, 0.4}) {
    std::map<Strategy, double> acc;
    for (const Strategy s : {Strategy::similarity_only, Strategy::similarity_td}) {
      double sum = 0.0;
      for (const std::uint64_t seed : {1, 2, 3}) {
        AttackPlan plan = plan_attack(10, AttackKind::random_response, f, seed);
        plan.junk_sentences = junk;
        const auto series = run_epoch_series(fx.corpus, qids, "ChatGPT", s, provider, init_credibility(10), &plan);
        sum += score_accuracy(series.results, series.panels);
      }
      acc[s] = sum / 3.0;
    }
    c.require(acc[Strategy::similarity_td] >= acc[Strategy::similarity_only],
              "fraction " + format_number(f, 1) + ": similarity_td below similarity_only");
    if (f == 0.0)
      c.require(acc[Strategy::similarity_td] == 1.0 && acc[Strategy::similarity_only] == 1.0,
                "accuracy below 1.0 with no attack");
    summary += format_number(f, 1) + ":" + format_number(acc[Strategy::similarity_only], 3) + "/" +
               format_number(acc[Strategy::similarity_td], 3) + " ";
  }
  if (c.ok) c.detail = "only/td " + summary;
  return c;
}

Check commit_reveal() {
  Check c;
  const Corpus corpus = synthetic::make_corpus();
  int excluded_everywhere = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const NodeId cheat = static_cast<NodeId>(rng.below(10));
    const auto& q = corpus.questions()[rng.below(corpus.questions().size())];
    const auto& model = corpus.models()[rng.below(corpus.models().size())];
    SimulationConfig config;
    config.seed = seed;
    config.freeloaders = {cheat};
    Simulation sim(corpus, config);
    const auto run = sim.run_task(q.question_id, model);
    bool all = true;
    for (const auto& n : sim.nodes()) {
      if (n.node_id == cheat) continue;
      all = all && n.excluded.contains(cheat) && n.result && n.verified.size() == 9 && !n.verified.contains(cheat);
    }
    excluded_everywhere += all ? 1 : 0;
    c.require(run.outcome.success, "seed " + std::to_string(seed) + ": consensus failed");
    c.require(run.outcome.supporting_nodes.size() == 9 && !run.outcome.supporting_nodes.contains(cheat),
              "seed " + std::to_string(seed) + ": " + std::to_string(run.outcome.supporting_nodes.size()) +
                  " supporters");
  }
  c.require(excluded_everywhere == 100, "excluded in " + std::to_string(excluded_everywhere) + "/100 runs");
  if (c.ok) c.detail = "100/100 runs excluded the cheater, 9 supporters each";
  return c;
}

Check bench_determinism() {
  Check c;
  TempDir dir("accept_det");
  save_corpus(synthetic::make_corpus({.question_count = 10, .model_count = 2}), dir / "corpus.jsonl");
  nlohmann::json config{{"corpus", "corpus.jsonl"},
                        {"attack", {{"kinds", {"random_response", "incorrect_response"}},
                                    {"junk_corpus", sentetruth::testing::junk_path().string()}}},
                        {"fractions", {0.2, 0.4}},
                        {"seeds", {1, 2}},
                        {"workers", 4}};
  std::ofstream(dir / "bench.json") << config.dump(2);
  std::vector<fs::path> outs;
  for (const char* name : {"run1", "run2"}) {
    const std::string cmd = std::string("'") + SENTETRUTH_CLI_PATH + "' bench --config '" +
                            (dir / "bench.json").string() + "' --out '" + (dir / name).string() + "' >/dev/null";
    const int status = std::system(cmd.c_str());
    c.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, std::string("bench exited non-zero for ") + name);
    outs.push_back(dir / name);
  }
  if (!c.ok) return c;
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(outs[0])) {
    const auto file = entry.path().filename().string();
    if (file != "report.csv" && file.rfind("chain_", 0) != 0) continue;
    c.require(read_file(entry.path()) == read_file(outs[1] / file), file + " differs");
    ++compared;
  }
  c.require(compared > 1, "no chain logs written");
  if (c.ok) c.detail = std::to_string(compared) + " files byte-identical";
  return c;
}

Check repetition() {
  Check c;
  std::vector<std::string> answers(7, "Water boils at 100 degrees Celsius at sea level.");
  answers[3] = "Water  boils at 100 degrees Celsius at sea level. ";  // same canonical form
  for (const char* s : {"It boils at 212 F.", "Around 100 C.", "Depends on altitude."}) answers.push_back(s);
  const double rate = repetition_rate(testing::make_panel(answers));
  c.require(rate == 0.7, "rate " + format_number(rate, 17));
  if (c.ok) c.detail = "rate 0.7";
  return c;
}

}  // namespace

int main() {
  log::set_level(log::Level::error);
  const std::vector<Criterion> criteria{
      {"credibility conservation", 1.0, conservation},
      {"argmax oracle equivalence", 5.0, argmax_oracle},
      {"accuracy under 40% random responses", 10.0, random_response_accuracy},
      {"credibility dynamics under model substitution", 10.0, substitution_dynamics},
      {"fraction sweep on orthogonal junk", 0.0, orthogonal_sweep},
      {"commit-reveal integrity", 0.0, commit_reveal},
      {"bench determinism", 0.0, bench_determinism},
      {"repetition rate", 0.0, repetition},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = cr.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (result.ok && cr.time_limit_s > 0 && secs >= cr.time_limit_s) {
      result.ok = false;
      result.detail = "took " + format_number(secs, 2) + " s, limit " + format_number(cr.time_limit_s, 0) + " s";
    }
    failed += result.ok ? 0 : 1;
    std::cout << (result.ok ? "PASS" : "FAIL") << "  " << cr.name << "  (" << result.detail << "; "
              << format_number(secs, 3) << " s)\n";
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criterion(s) failed") << '\n';
  return failed == 0 ? 0 : 1;
}
