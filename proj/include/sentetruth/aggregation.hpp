#pragma once

// Truth selection over one panel of responses: majority voting,
// relatedness-only selection, and credibility-weighted selection with the
// sum-conserving credibility update.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentetruth/dataset.hpp"
#include "sentetruth/embedding.hpp"
#include "sentetruth/error.hpp"
#include "sentetruth/log.hpp"
#include "sentetruth/relatedness.hpp"
#include "sentetruth/text.hpp"

namespace sentetruth {

enum class Strategy { majority, similarity_only, similarity_td };

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::majority: return "majority";
    case Strategy::similarity_only: return "similarity_only";
    case Strategy::similarity_td: return "similarity_td";
  }
  return "";
}

inline std::optional<Strategy> parse_strategy(std::string_view s) {
  for (auto v : {Strategy::majority, Strategy::similarity_only, Strategy::similarity_td})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

struct CredibilityTable {
  std::map<NodeId, double> weights;
  int epoch = 0;

  double sum() const {
    double s = 0.0;
    for (const auto& [_, w] : weights) s += w;
    return s;
  }

  double at(NodeId node) const {
    const auto it = weights.find(node);
    if (it == weights.end()) fail(ErrorCode::InvalidArgument, "no credibility for node " + std::to_string(node));
    return it->second;
  }

  friend bool operator==(const CredibilityTable&, const CredibilityTable&) = default;
};

/// Uniform weights of 1.0 for nodes 0..n-1, epoch 0.
inline CredibilityTable init_credibility(int n) {
  if (n < 1) fail(ErrorCode::InvalidArgument, "credibility table needs n >= 1");
  CredibilityTable table;
  for (NodeId i = 0; i < n; ++i) table.weights.emplace(i, 1.0);
  return table;
}

inline nlohmann::json to_json(const CredibilityTable& table) {
  nlohmann::json weights = nlohmann::json::object();
  for (const auto& [node, w] : table.weights) weights[std::to_string(node)] = w;
  return {{"epoch", table.epoch}, {"weights", weights}};
}

inline CredibilityTable credibility_from_json(const nlohmann::json& obj) {
  CredibilityTable table;
  try {
    table.epoch = obj.at("epoch").get<int>();
    for (const auto& [key, value] : obj.at("weights").items()) {
      const double w = value.get<double>();
      if (!std::isfinite(w) || w < 0.0) fail(ErrorCode::InvariantViolation, "credibility must be finite and >= 0");
      table.weights.emplace(std::stoi(key), w);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("credibility table: ") + e.what());
  } catch (const std::logic_error&) {
    fail(ErrorCode::ParseError, "credibility table: node keys must be integers");
  }
  if (table.epoch < 0) fail(ErrorCode::InvariantViolation, "credibility epoch must be >= 0");
  return table;
}

inline void save_credibility(const CredibilityTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  out << to_json(table).dump() << '\n';
}

inline CredibilityTable load_credibility(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return credibility_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("credibility table: ") + e.what());
  }
}

struct AggregationResult {
  Strategy strategy = Strategy::majority;
  NodeId chosen_node = 0;
  std::string chosen_content;
  std::map<NodeId, double> scores;
  std::map<NodeId, double> phi;
  bool tie = false;
  /// Credibility update skipped because every C_i * phi_i was zero.
  bool degenerate_update = false;

  friend bool operator==(const AggregationResult&, const AggregationResult&) = default;
};

inline nlohmann::json to_json(const AggregationResult& r) {
  nlohmann::json scores = nlohmann::json::object();
  nlohmann::json phi = nlohmann::json::object();
  for (const auto& [node, s] : r.scores) scores[std::to_string(node)] = s;
  for (const auto& [node, p] : r.phi) phi[std::to_string(node)] = p;
  return {{"strategy", to_string(r.strategy)}, {"chosen_node", r.chosen_node},
          {"chosen_content", r.chosen_content}, {"scores", scores},
          {"phi", phi}, {"tie", r.tie}, {"degenerate_update", r.degenerate_update}};
}

/// Scores within this relative distance of the maximum count as tied.
inline constexpr double kScoreTieTolerance = 1e-9;

struct Selection {
  std::size_t index = 0;
  bool tie = false;
};

/// Argmax over scores whose entries are ordered by ascending node id; ties
/// resolve to the earliest entry.
inline Selection select_max(std::span<const double> scores) {
  const double best = *std::max_element(scores.begin(), scores.end());
  const double tol = kScoreTieTolerance * std::max(1.0, std::abs(best));
  Selection sel;
  std::size_t candidates = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] >= best - tol) {
      if (candidates == 0) sel.index = i;
      ++candidates;
    }
  }
  sel.tie = candidates > 1;
  return sel;
}

namespace detail {

inline void check_panel_order(std::span<const ResponseRecord> responses) {
  for (std::size_t i = 1; i < responses.size(); ++i)
    if (responses[i].node_id <= responses[i - 1].node_id)
      fail(ErrorCode::InvalidArgument, "panel must be sorted by strictly increasing node_id");
}

inline void check_aligned(std::span<const ResponseRecord> responses, std::span<const EmbeddingVector> vectors) {
  if (responses.size() < 2)
    fail(ErrorCode::TooFewResponses, "need at least 2 responses, got " + std::to_string(responses.size()));
  if (responses.size() != vectors.size())
    fail(ErrorCode::LengthMismatch, std::to_string(responses.size()) + " responses vs " +
                                        std::to_string(vectors.size()) + " vectors");
  check_panel_order(responses);
}

}  // namespace detail

/// Groups by canonical content and picks the largest group. Count ties go to
/// the lexicographically smallest canonical content; the chosen node is the
/// lowest id within the winning group. Each node's score is its group size.
inline AggregationResult aggregate_majority(std::span<const ResponseRecord> responses) {
  if (responses.empty()) fail(ErrorCode::EmptyPanel, "majority vote over an empty panel");
  detail::check_panel_order(responses);

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < responses.size(); ++i) groups[text::canonicalize(responses[i].content)].push_back(i);

  std::size_t best_count = 0;
  std::size_t groups_at_best = 0;
  const std::vector<std::size_t>* winner = nullptr;
  for (const auto& [canonical, members] : groups) {  // map order = lexicographic
    if (members.size() > best_count) {
      best_count = members.size();
      groups_at_best = 1;
      winner = &members;
    } else if (members.size() == best_count) {
      ++groups_at_best;
    }
  }

  AggregationResult result;
  result.strategy = Strategy::majority;
  const auto& chosen = responses[winner->front()];
  result.chosen_node = chosen.node_id;
  result.chosen_content = chosen.content;
  result.tie = groups_at_best > 1;
  for (const auto& [_, members] : groups)
    for (const auto i : members) result.scores[responses[i].node_id] = static_cast<double>(members.size());
  return result;
}

/// argmax_i phi_i with lowest-node-id tie-break.
inline AggregationResult aggregate_similarity(std::span<const ResponseRecord> responses,
                                              std::span<const EmbeddingVector> vectors) {
  detail::check_aligned(responses, vectors);
  const auto related = relatedness_scores(vectors);
  std::vector<double> phi(related.size());
  for (std::size_t i = 0; i < related.size(); ++i) phi[i] = related[i].phi;
  const auto sel = select_max(phi);

  AggregationResult result;
  result.strategy = Strategy::similarity_only;
  result.chosen_node = responses[sel.index].node_id;
  result.chosen_content = responses[sel.index].content;
  result.tie = sel.tie;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    result.scores[responses[i].node_id] = phi[i];
    result.phi[responses[i].node_id] = phi[i];
  }
  return result;
}

struct CredibilityUpdate {
  CredibilityTable table;
  /// sum_j C_j * phi_j was zero, so the weights passed through unchanged.
  bool degenerate = false;
};

/// Rescales the credibility of every node in `phi`:
///   C_i' = (sum_j C_j / sum_j C_j * phi_j) * C_i * phi_i
/// which keeps the total weight of those nodes fixed. Nodes in the table but
/// absent from `phi` keep their weight. The epoch always advances.
inline CredibilityUpdate update_credibility(const CredibilityTable& credibility, const std::map<NodeId, double>& phi) {
  double weight_sum = 0.0;
  double score_sum = 0.0;
  for (const auto& [node, p] : phi) {
    const double c = credibility.at(node);
    weight_sum += c;
    score_sum += c * p;
  }
  CredibilityUpdate out{credibility, false};
  out.table.epoch = credibility.epoch + 1;
  if (score_sum > 0.0) {
    const double scale = weight_sum / score_sum;
    for (const auto& [node, p] : phi) out.table.weights[node] = scale * (credibility.at(node) * p);
  } else {
    out.degenerate = true;
    log::warn("credibility update skipped at epoch " + std::to_string(credibility.epoch) +
              ": all weighted relatedness scores are zero");
  }
  return out;
}

struct SenteTruthOutcome {
  AggregationResult result;
  CredibilityTable credibility;
};

/// Selects argmax_i C_i * phi_i (lowest node id on ties), then applies
/// update_credibility() over the responding nodes.
inline SenteTruthOutcome aggregate_sentetruth(std::span<const ResponseRecord> responses,
                                              std::span<const EmbeddingVector> vectors,
                                              const CredibilityTable& credibility) {
  detail::check_aligned(responses, vectors);
  const auto related = relatedness_scores(vectors);

  std::vector<double> score(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i)
    score[i] = credibility.at(responses[i].node_id) * related[i].phi;
  const auto sel = select_max(score);

  SenteTruthOutcome out;
  auto& result = out.result;
  result.strategy = Strategy::similarity_td;
  result.chosen_node = responses[sel.index].node_id;
  result.chosen_content = responses[sel.index].content;
  result.tie = sel.tie;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    result.scores[responses[i].node_id] = score[i];
    result.phi[responses[i].node_id] = related[i].phi;
  }
  auto update = update_credibility(credibility, result.phi);
  result.degenerate_update = update.degenerate;
  out.credibility = std::move(update.table);
  return out;
}

/// Dispatches on strategy. Only similarity_td touches the credibility table;
/// majority ignores `vectors` (may be empty).
inline SenteTruthOutcome aggregate(Strategy strategy, std::span<const ResponseRecord> responses,
                                   std::span<const EmbeddingVector> vectors, const CredibilityTable& credibility) {
  switch (strategy) {
    case Strategy::majority: return {aggregate_majority(responses), credibility};
    case Strategy::similarity_only: return {aggregate_similarity(responses, vectors), credibility};
    case Strategy::similarity_td: return aggregate_sentetruth(responses, vectors, credibility);
  }
  fail(ErrorCode::InvalidArgument, "unknown strategy");
}

}  // namespace sentetruth
