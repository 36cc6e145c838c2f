#pragma once

// Q&A corpora: questions x models x nodes, stored as line-delimited JSON.

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sentetruth/error.hpp"

namespace sentetruth {

using NodeId = int;

enum class Category { q1_fact, q2_logic, q3_open, mixed, pro };
enum class Language { zh, en, other };
enum class Variant { original, tampered, substitute_model };

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::q1_fact: return "Q1_fact";
    case Category::q2_logic: return "Q2_logic";
    case Category::q3_open: return "Q3_open";
    case Category::mixed: return "mixed";
    case Category::pro: return "pro";
  }
  return "";
}

inline std::string_view to_string(Language l) {
  switch (l) {
    case Language::zh: return "zh";
    case Language::en: return "en";
    case Language::other: return "other";
  }
  return "";
}

inline std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::original: return "original";
    case Variant::tampered: return "tampered";
    case Variant::substitute_model: return "substitute_model";
  }
  return "";
}

inline std::optional<Category> parse_category(std::string_view s) {
  for (auto c : {Category::q1_fact, Category::q2_logic, Category::q3_open, Category::mixed, Category::pro})
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline std::optional<Language> parse_language(std::string_view s) {
  for (auto l : {Language::zh, Language::en, Language::other})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  for (auto v : {Variant::original, Variant::tampered, Variant::substitute_model})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

struct Question {
  std::string question_id;
  Category category = Category::q1_fact;
  std::string text;
  Language language = Language::en;
  std::optional<std::string> expected_answer;

  friend bool operator==(const Question&, const Question&) = default;
};

struct ResponseRecord {
  std::string question_id;
  NodeId node_id = 0;
  std::string model;
  std::string content;
  Variant variant = Variant::original;
  std::string provenance_model;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

/// One (question, model) pair whose original panel is missing nodes.
struct PanelGap {
  std::string question_id;
  std::string model;
  std::vector<NodeId> missing_nodes;
};

/// Immutable validated corpus. Construction checks every invariant and
/// builds the lookup index used by responses_for().
class Corpus {
 public:
  Corpus(std::string name, int node_count, std::vector<std::string> models,
         std::vector<Question> questions, std::vector<ResponseRecord> responses)
      : name_(std::move(name)),
        node_count_(node_count),
        models_(std::move(models)),
        questions_(std::move(questions)),
        responses_(std::move(responses)) {
    validate_and_index();
  }

  const std::string& name() const { return name_; }
  int node_count() const { return node_count_; }
  /// Models in header order.
  const std::vector<std::string>& models() const { return models_; }
  const std::vector<Question>& questions() const { return questions_; }
  const std::vector<ResponseRecord>& responses() const { return responses_; }

  bool has_model(std::string_view model) const {
    return std::find(models_.begin(), models_.end(), model) != models_.end();
  }

  const Question* find_question(std::string_view question_id) const {
    const auto it = question_index_.find(std::string(question_id));
    return it == question_index_.end() ? nullptr : &questions_[it->second];
  }

  const Question& question(std::string_view question_id) const {
    const Question* q = find_question(question_id);
    if (q == nullptr) fail(ErrorCode::UnknownQuestion, std::string(question_id));
    return *q;
  }

  const ResponseRecord* find_response(std::string_view question_id, NodeId node, std::string_view model,
                                      Variant variant) const {
    const auto it = record_index_.find(Key{std::string(question_id), std::string(model), variant, node});
    return it == record_index_.end() ? nullptr : &responses_[it->second];
  }

  /// Records for one (question, model, variant) sorted by node id.
  std::vector<ResponseRecord> panel(std::string_view question_id, std::string_view model, Variant variant) const {
    std::vector<ResponseRecord> out;
    const std::string qid(question_id);
    const std::string m(model);
    auto it = record_index_.lower_bound(Key{qid, m, variant, -1});
    for (; it != record_index_.end(); ++it) {
      const auto& [kq, km, kv, node] = it->first;
      if (kq != qid || km != m || kv != variant) break;
      out.push_back(responses_[it->second]);
    }
    return out;
  }

  /// Every header model is declared complete: each (question, model) pair
  /// must have one original record per node.
  std::vector<PanelGap> gaps() const {
    std::vector<PanelGap> out;
    for (const auto& q : questions_) {
      for (const auto& m : models_) {
        PanelGap gap{q.question_id, m, {}};
        for (NodeId node = 0; node < node_count_; ++node) {
          if (find_response(q.question_id, node, m, Variant::original) == nullptr)
            gap.missing_nodes.push_back(node);
        }
        if (!gap.missing_nodes.empty()) out.push_back(std::move(gap));
      }
    }
    return out;
  }

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.name_ == b.name_ && a.node_count_ == b.node_count_ && a.models_ == b.models_ &&
           a.questions_ == b.questions_ && a.responses_ == b.responses_;
  }

 private:
  using Key = std::tuple<std::string, std::string, Variant, NodeId>;

  void validate_and_index() {
    if (node_count_ < 3)
      fail(ErrorCode::InvariantViolation, "node_count must be >= 3, got " + std::to_string(node_count_));
    std::set<std::string> model_set(models_.begin(), models_.end());
    if (model_set.size() != models_.size()) fail(ErrorCode::InvariantViolation, "duplicate model in header");

    for (std::size_t i = 0; i < questions_.size(); ++i) {
      const auto& q = questions_[i];
      if (q.text.empty()) fail(ErrorCode::InvariantViolation, "question " + q.question_id + " has empty text");
      if (!question_index_.emplace(q.question_id, i).second)
        fail(ErrorCode::DuplicateRecord, "question_id " + q.question_id);
    }
    for (std::size_t i = 0; i < responses_.size(); ++i) {
      const auto& r = responses_[i];
      const std::string where = "(" + r.question_id + ", node " + std::to_string(r.node_id) + ", " + r.model +
                                ", " + std::string(to_string(r.variant)) + ")";
      if (!question_index_.contains(r.question_id))
        fail(ErrorCode::UnknownQuestion, "response " + where + " references unknown question");
      if (!model_set.contains(r.model)) fail(ErrorCode::UnknownModel, "response " + where);
      if (r.node_id < 0 || r.node_id >= node_count_)
        fail(ErrorCode::InvariantViolation, "node_id out of range in " + where);
      if (r.variant == Variant::original && r.content.empty())
        fail(ErrorCode::InvariantViolation, "empty original content in " + where);
      if (!record_index_.emplace(Key{r.question_id, r.model, r.variant, r.node_id}, i).second)
        fail(ErrorCode::DuplicateRecord, where);
    }
  }

  std::string name_;
  int node_count_ = 0;
  std::vector<std::string> models_;
  std::vector<Question> questions_;
  std::vector<ResponseRecord> responses_;
  std::unordered_map<std::string, std::size_t> question_index_;
  std::map<Key, std::size_t> record_index_;
};

inline std::string format_gap_report(const std::vector<PanelGap>& gaps) {
  std::ostringstream out;
  for (const auto& g : gaps) {
    out << "incomplete panel: question " << g.question_id << ", model " << g.model << ", missing nodes [";
    for (std::size_t i = 0; i < g.missing_nodes.size(); ++i) out << (i ? "," : "") << g.missing_nodes[i];
    out << "]\n";
  }
  return out.str();
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end())
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": missing field \"" + key + "\"");
  return *it;
}

template <typename T>
T require_as(const nlohmann::json& obj, const char* key, std::size_t line) {
  try {
    return require(obj, key, line).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": field \"" + key + "\" has wrong type");
  }
}

}  // namespace detail

/// Parses and validates a corpus without requiring complete panels.
inline Corpus parse_corpus(std::istream& in) {
  using nlohmann::json;
  std::string line;
  std::size_t line_no = 0;
  std::optional<json> header;
  std::vector<Question> questions;
  std::vector<ResponseRecord> responses;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!obj.is_object()) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": not a JSON object");
    const auto type = detail::require_as<std::string>(obj, "type", line_no);

    if (!header) {
      if (type != "header")
        fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": first record must be the header");
      header = obj;
      continue;
    }
    if (type == "question") {
      Question q;
      q.question_id = detail::require_as<std::string>(obj, "question_id", line_no);
      const auto cat = detail::require_as<std::string>(obj, "category", line_no);
      const auto parsed_cat = parse_category(cat);
      if (!parsed_cat) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad category " + cat);
      q.category = *parsed_cat;
      q.text = detail::require_as<std::string>(obj, "text", line_no);
      const auto lang = obj.value("language", std::string("other"));
      const auto parsed_lang = parse_language(lang);
      if (!parsed_lang) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad language " + lang);
      q.language = *parsed_lang;
      if (const auto it = obj.find("expected_answer"); it != obj.end() && !it->is_null()) {
        if (!it->is_string())
          fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected_answer must be string");
        q.expected_answer = it->get<std::string>();
      }
      questions.push_back(std::move(q));
    } else if (type == "response") {
      ResponseRecord r;
      r.question_id = detail::require_as<std::string>(obj, "question_id", line_no);
      r.node_id = detail::require_as<int>(obj, "node_id", line_no);
      r.model = detail::require_as<std::string>(obj, "model", line_no);
      r.content = detail::require_as<std::string>(obj, "content", line_no);
      const auto var = obj.value("variant", std::string("original"));
      const auto parsed_var = parse_variant(var);
      if (!parsed_var) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad variant " + var);
      r.variant = *parsed_var;
      r.provenance_model = obj.value("provenance_model", r.model);
      responses.push_back(std::move(r));
    } else if (type == "header") {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": second header record");
    } else {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unknown record type " + type);
    }
  }
  if (!header) fail(ErrorCode::ParseError, "empty corpus file (no header)");
  const auto node_count = detail::require_as<int>(*header, "node_count", 1);
  const auto models = detail::require_as<std::vector<std::string>>(*header, "models", 1);
  const auto name = header->value("name", std::string{});
  return Corpus(name, node_count, models, std::move(questions), std::move(responses));
}

/// Loads a corpus file and requires every declared panel to be complete.
inline Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open corpus " + path.string());
  Corpus corpus = parse_corpus(in);
  const auto gaps = corpus.gaps();
  if (!gaps.empty()) fail(ErrorCode::IncompletePanel, "\n" + format_gap_report(gaps));
  return corpus;
}

inline void write_corpus(const Corpus& corpus, std::ostream& out) {
  using nlohmann::json;
  out << json{{"type", "header"}, {"node_count", corpus.node_count()}, {"models", corpus.models()},
              {"name", corpus.name()}}
             .dump()
      << '\n';
  for (const auto& q : corpus.questions()) {
    json obj{{"type", "question"},
             {"question_id", q.question_id},
             {"category", to_string(q.category)},
             {"text", q.text},
             {"language", to_string(q.language)},
             {"expected_answer", nullptr}};
    if (q.expected_answer) obj["expected_answer"] = *q.expected_answer;
    out << obj.dump() << '\n';
  }
  for (const auto& r : corpus.responses()) {
    out << json{{"type", "response"},
                {"question_id", r.question_id},
                {"node_id", r.node_id},
                {"model", r.model},
                {"variant", to_string(r.variant)},
                {"provenance_model", r.provenance_model},
                {"content", r.content}}
               .dump()
        << '\n';
  }
}

inline void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write corpus " + path.string());
  write_corpus(corpus, out);
}

/// Panel for one (question, model, variant), node ids ascending.
inline std::vector<ResponseRecord> responses_for(const Corpus& corpus, std::string_view question_id,
                                                 std::string_view model, Variant variant) {
  if (corpus.find_question(question_id) == nullptr) fail(ErrorCode::UnknownQuestion, std::string(question_id));
  if (!corpus.has_model(model)) fail(ErrorCode::UnknownModel, std::string(model));
  return corpus.panel(question_id, model, variant);
}

}  // namespace sentetruth
