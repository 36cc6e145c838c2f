#pragma once

// Deterministic attack injection: random off-topic responses, cheaper-model
// substitution, and deliberately corrupted answers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sentetruth/dataset.hpp"
#include "sentetruth/error.hpp"
#include "sentetruth/rng.hpp"
#include "sentetruth/text.hpp"

namespace sentetruth {

enum class AttackKind { random_response, model_substitution, incorrect_response };

inline std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::random_response: return "random_response";
    case AttackKind::model_substitution: return "model_substitution";
    case AttackKind::incorrect_response: return "incorrect_response";
  }
  return "";
}

inline std::optional<AttackKind> parse_attack_kind(std::string_view s) {
  for (auto k : {AttackKind::random_response, AttackKind::model_substitution, AttackKind::incorrect_response})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// Provenance tag on records replaced by a junk sentence.
inline constexpr std::string_view kJunkProvenance = "junk";
/// Appended by corrupt_text when reordering cannot change the text.
inline constexpr std::string_view kCorruptionMarker = "[corrupted]";

struct AttackPlan {
  AttackKind kind = AttackKind::random_response;
  double malicious_fraction = 0.0;
  std::set<NodeId> malicious_nodes;
  std::uint64_t seed = 0;
  std::optional<std::string> substitute_model;
  std::optional<std::filesystem::path> junk_corpus;
  /// Sentences loaded from junk_corpus (see with_junk_corpus()).
  std::vector<std::string> junk_sentences;
  /// When false, incorrect_response requires a stored tampered record.
  bool allow_local_corruption = true;

  bool is_malicious(NodeId node) const { return malicious_nodes.contains(node); }
};

inline std::vector<std::string> load_junk_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::MissingJunkCorpus, "cannot open junk corpus " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) lines.push_back(line);
  }
  if (lines.empty()) fail(ErrorCode::MissingJunkCorpus, "junk corpus " + path.string() + " has no sentences");
  return lines;
}

inline AttackPlan& with_junk_corpus(AttackPlan& plan, const std::filesystem::path& path) {
  plan.junk_corpus = path;
  plan.junk_sentences = load_junk_corpus(path);
  return plan;
}

/// Picks floor(fraction * n) malicious nodes with a seeded shuffle.
inline AttackPlan plan_attack(int n, AttackKind kind, double fraction, std::uint64_t seed) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "attack planning needs n >= 3");
  if (!(fraction >= 0.0 && fraction < 0.5))
    fail(ErrorCode::InvalidFraction, "malicious fraction must be in [0, 0.5), got " + std::to_string(fraction));
  const auto count = static_cast<std::size_t>(std::floor(fraction * n + 1e-9));

  std::vector<NodeId> nodes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nodes[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(nodes);

  AttackPlan plan;
  plan.kind = kind;
  plan.malicious_fraction = fraction;
  plan.seed = seed;
  plan.malicious_nodes.insert(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(count));
  return plan;
}

/// Explicit malicious set, e.g. a fixed tail of node ids.
inline AttackPlan plan_attack_with_nodes(int n, AttackKind kind, std::set<NodeId> nodes, std::uint64_t seed) {
  if (n < 3) fail(ErrorCode::InvalidArgument, "attack planning needs n >= 3");
  for (const NodeId id : nodes)
    if (id < 0 || id >= n) fail(ErrorCode::InvalidArgument, "malicious node " + std::to_string(id) + " out of range");
  if (2 * nodes.size() >= static_cast<std::size_t>(n))
    fail(ErrorCode::InvalidFraction, "malicious nodes must be fewer than half of " + std::to_string(n));
  AttackPlan plan;
  plan.kind = kind;
  plan.malicious_fraction = static_cast<double>(nodes.size()) / n;
  plan.seed = seed;
  plan.malicious_nodes = std::move(nodes);
  return plan;
}

namespace detail {

inline std::string stream_label(std::string_view purpose, std::uint64_t seed, NodeId node, std::string_view qid) {
  return std::string(purpose) + '|' + std::to_string(seed) + '|' + std::to_string(node) + '|' + std::string(qid);
}

struct Sentence {
  std::vector<std::string> tokens;
  bool joined = false;  // CJK text without spaces: tokens are code points
  std::string trailing;  // whitespace that followed the sentence
};

inline bool is_ascii_terminal(std::string_view cp) { return cp == "." || cp == "!" || cp == "?"; }

inline bool is_cjk_terminal(std::string_view cp) {
  return cp == "\xE3\x80\x82" /* 。 */ || cp == "\xEF\xBC\x81" /* ！ */ || cp == "\xEF\xBC\x9F" /* ？ */;
}

inline bool is_space(std::string_view cp) { return cp == " " || cp == "\t" || cp == "\n" || cp == "\r"; }

// ASCII terminals end a sentence only when followed by whitespace; CJK
// terminals end it immediately.
inline std::vector<Sentence> split_sentences(std::string_view content) {
  std::vector<Sentence> out;
  Sentence cur;
  std::string word;
  bool ended = false;
  bool last_was_terminal = false;
  const auto flush_word = [&] {
    if (!word.empty()) cur.tokens.push_back(std::move(word));
    word.clear();
  };
  for (const auto& cp : text::code_points(content)) {
    if (is_space(cp)) {
      flush_word();
      if (last_was_terminal) ended = true;
      if (ended) cur.trailing += cp;
      last_was_terminal = false;
      continue;
    }
    if (ended) {
      flush_word();
      if (!cur.tokens.empty()) out.push_back(std::move(cur));
      cur = Sentence{};
      ended = false;
    }
    word += cp;
    last_was_terminal = is_ascii_terminal(cp);
    if (is_cjk_terminal(cp)) {
      flush_word();
      ended = true;
    }
  }
  flush_word();
  if (!cur.tokens.empty()) out.push_back(std::move(cur));

  for (auto& s : out) {
    if (s.tokens.size() != 1) continue;
    const auto cps = text::code_points(s.tokens.front());
    const bool has_cjk = std::any_of(cps.begin(), cps.end(), [](const std::string& c) {
      const auto u = icu::UnicodeString::fromUTF8(c);
      return text::is_cjk(u.char32At(0));
    });
    if (has_cjk && cps.size() > 1) {
      s.tokens = cps;
      s.joined = true;
    }
  }
  return out;
}

inline std::string join_sentences(const std::vector<Sentence>& sentences) {
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& s = sentences[i];
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      if (t > 0 && !s.joined) out += ' ';
      out += s.tokens[t];
    }
    if (i + 1 < sentences.size()) out += s.trailing;
  }
  return out;
}

}  // namespace detail

/// Deterministic local tampering: shuffles word order inside every sentence,
/// then swaps floor(10% of tokens) pairs between distinct sentences. The
/// overall token multiset is preserved. Output always differs from input.
inline std::string corrupt_text(std::string_view content, std::uint64_t seed, NodeId node_id,
                                std::string_view question_id) {
  if (content.empty()) fail(ErrorCode::EmptyText, "corrupt_text needs non-empty content");
  auto sentences = detail::split_sentences(content);
  std::size_t total = 0;
  for (const auto& s : sentences) total += s.tokens.size();
  const std::string marked = std::string(content) + " " + std::string(kCorruptionMarker);
  if (total <= 1) return marked;

  Rng rng = Rng::from_label(detail::stream_label("corrupt", seed, node_id, question_id));
  for (auto& s : sentences) rng.shuffle(s.tokens);

  if (sentences.size() >= 2) {
    const auto swaps = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(total)));
    for (std::size_t k = 0; k < swaps; ++k) {
      const auto a = static_cast<std::size_t>(rng.below(sentences.size()));
      auto b = static_cast<std::size_t>(rng.below(sentences.size() - 1));
      if (b >= a) ++b;
      auto& ta = sentences[a].tokens;
      auto& tb = sentences[b].tokens;
      std::swap(ta[static_cast<std::size_t>(rng.below(ta.size()))], tb[static_cast<std::size_t>(rng.below(tb.size()))]);
    }
  }

  std::string out = detail::join_sentences(sentences);
  if (out != content) return out;
  // Identity permutation drawn: rotate the first sentence with distinct tokens.
  for (auto& s : sentences) {
    const bool distinct = std::adjacent_find(s.tokens.begin(), s.tokens.end(), std::not_equal_to<>()) != s.tokens.end();
    if (distinct) {
      std::rotate(s.tokens.begin(), s.tokens.begin() + 1, s.tokens.end());
      out = detail::join_sentences(sentences);
      if (out != content) return out;
    }
  }
  return marked;
}

/// Replaces malicious nodes' records per plan.kind; honest records pass
/// through unchanged. Replaced records carry variant/provenance markers.
inline std::vector<ResponseRecord> apply_attack(const AttackPlan& plan, const std::vector<ResponseRecord>& panel,
                                                const Corpus& corpus) {
  std::vector<ResponseRecord> out;
  out.reserve(panel.size());
  for (const auto& record : panel) {
    if (!plan.is_malicious(record.node_id)) {
      out.push_back(record);
      continue;
    }
    ResponseRecord attacked = record;
    switch (plan.kind) {
      case AttackKind::random_response: {
        if (plan.junk_sentences.empty()) fail(ErrorCode::MissingJunkCorpus, "random_response needs a junk corpus");
        Rng rng = Rng::from_label(detail::stream_label("junk", plan.seed, record.node_id, record.question_id));
        attacked.content = plan.junk_sentences[static_cast<std::size_t>(rng.below(plan.junk_sentences.size()))];
        attacked.variant = Variant::tampered;
        attacked.provenance_model = std::string(kJunkProvenance);
        break;
      }
      case AttackKind::model_substitution: {
        if (!plan.substitute_model || !corpus.has_model(*plan.substitute_model))
          fail(ErrorCode::MissingSubstituteModel,
               plan.substitute_model ? "model " + *plan.substitute_model + " not in corpus" : "no substitute_model set");
        const ResponseRecord* sub =
            corpus.find_response(record.question_id, record.node_id, *plan.substitute_model, Variant::original);
        if (sub == nullptr)
          fail(ErrorCode::MissingSubstituteModel, "no " + *plan.substitute_model + " response for question " +
                                                      record.question_id + ", node " + std::to_string(record.node_id));
        attacked.content = sub->content;
        attacked.variant = Variant::substitute_model;
        attacked.provenance_model = sub->provenance_model;
        break;
      }
      case AttackKind::incorrect_response: {
        const ResponseRecord* tampered =
            corpus.find_response(record.question_id, record.node_id, record.model, Variant::tampered);
        if (tampered != nullptr && !tampered->content.empty()) {
          attacked.content = tampered->content;
          attacked.provenance_model = tampered->provenance_model;
        } else if (plan.allow_local_corruption) {
          attacked.content = corrupt_text(record.content, plan.seed, record.node_id, record.question_id);
        } else {
          fail(ErrorCode::MissingTamperedVariant, "no tampered record for question " + record.question_id +
                                                      ", node " + std::to_string(record.node_id));
        }
        attacked.variant = Variant::tampered;
        break;
      }
    }
    out.push_back(std::move(attacked));
  }
  return out;
}

}  // namespace sentetruth
