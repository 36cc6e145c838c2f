#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentetruth/adversary.hpp"
#include "sentetruth/aggregation.hpp"
#include "sentetruth/dataset.hpp"
#include "sentetruth/embedding.hpp"

namespace sentetruth {

struct EpochTraceEntry {
  int epoch = 0;
  std::string question_id;
  /// Weights in force when the epoch's panel was aggregated.
  std::map<NodeId, double> weights;
  std::map<NodeId, double> phi;
  std::map<NodeId, double> scores;
  NodeId chosen = 0;
};

struct EpochSeries {
  std::vector<AggregationResult> results;
  /// The (possibly attacked) panel each result was computed from.
  std::vector<std::vector<ResponseRecord>> panels;
  CredibilityTable credibility;
  std::vector<EpochTraceEntry> trace;
};

/// Builds the panel a node network would see for one question: the corpus
/// originals for `model`, with the attack applied when given.
inline std::vector<ResponseRecord> attacked_panel(const Corpus& corpus, std::string_view question_id,
                                                  std::string_view model, const AttackPlan* attack) {
  auto panel = responses_for(corpus, question_id, model, Variant::original);
  if (panel.size() != static_cast<std::size_t>(corpus.node_count()))
    fail(ErrorCode::IncompletePanel, "question " + std::string(question_id) + ", model " + std::string(model) +
                                         " has " + std::to_string(panel.size()) + " of " +
                                         std::to_string(corpus.node_count()) + " responses");
  return attack != nullptr ? apply_attack(*attack, panel, corpus) : panel;
}

inline std::vector<EmbeddingVector> embed_panel(const EmbeddingProvider& provider,
                                                std::span<const ResponseRecord> panel) {
  std::vector<std::string> texts;
  texts.reserve(panel.size());
  for (const auto& r : panel) texts.push_back(r.content);
  return provider.embed(texts);
}

/// Aggregates the questions in order, one epoch each. Under similarity_td the
/// credibility table threads from one epoch into the next; the other
/// strategies leave it untouched.
inline EpochSeries run_epoch_series(const Corpus& corpus, std::span<const std::string> question_ids,
                                    std::string_view model, Strategy strategy, const EmbeddingProvider& provider,
                                    CredibilityTable credibility, const AttackPlan* attack = nullptr) {
  EpochSeries series;
  const int first_epoch = credibility.epoch;
  for (std::size_t k = 0; k < question_ids.size(); ++k) {
    auto panel = attacked_panel(corpus, question_ids[k], model, attack);
    std::vector<EmbeddingVector> vectors;
    if (strategy != Strategy::majority) vectors = embed_panel(provider, panel);

    EpochTraceEntry entry;
    entry.epoch = first_epoch + static_cast<int>(k);
    entry.question_id = question_ids[k];
    for (const auto& r : panel) entry.weights[r.node_id] = credibility.weights.contains(r.node_id)
                                                               ? credibility.weights.at(r.node_id)
                                                               : 0.0;

    auto outcome = aggregate(strategy, panel, vectors, credibility);
    credibility = std::move(outcome.credibility);

    entry.phi = outcome.result.phi;
    entry.scores = outcome.result.scores;
    entry.chosen = outcome.result.chosen_node;
    series.trace.push_back(std::move(entry));
    series.results.push_back(std::move(outcome.result));
    series.panels.push_back(std::move(panel));
  }
  series.credibility = std::move(credibility);
  return series;
}

inline nlohmann::json trace_to_json(std::span<const EpochTraceEntry> trace) {
  const auto keyed = [](const std::map<NodeId, double>& m) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [node, v] : m) obj[std::to_string(node)] = v;
    return obj;
  };
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : trace) {
    epochs.push_back({{"epoch", e.epoch},
                      {"question_id", e.question_id},
                      {"weights", keyed(e.weights)},
                      {"phi", keyed(e.phi)},
                      {"chosen", e.chosen}});
  }
  return {{"epochs", epochs}};
}

}  // namespace sentetruth
