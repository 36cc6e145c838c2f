#include <algorithm>

#include <gtest/gtest.h>

#include "sentetruth/adversary.hpp"
#include "sentetruth/synthetic.hpp"
#include "support/fixtures.hpp"

using namespace sentetruth;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

std::multiset<std::string> token_multiset(const std::string& s) {
  std::multiset<std::string> out;
  for (const auto& sentence : detail::split_sentences(s))
    for (const auto& t : sentence.tokens) out.insert(t);
  return out;
}

Corpus corpus_with_tampered() {
  Corpus base = synthetic::make_corpus({.node_count = 5, .question_count = 2, .model_count = 2});
  std::vector<ResponseRecord> rs = base.responses();
  rs.push_back({"q01", 1, base.models()[0], "stored tampered answer", Variant::tampered, base.models()[0]});
  return Corpus("t", 5, base.models(), base.questions(), std::move(rs));
}

}  // namespace

TEST(PlanAttack, FortyPercentOfTen) {
  const auto plan = plan_attack(10, AttackKind::random_response, 0.4, 7);
  EXPECT_EQ(plan.malicious_nodes.size(), 4u);
  for (const NodeId id : plan.malicious_nodes) {
    EXPECT_GE(id, 0);
    EXPECT_LT(id, 10);
  }
  EXPECT_EQ(plan_attack(10, AttackKind::random_response, 0.4, 7).malicious_nodes, plan.malicious_nodes);
}

TEST(PlanAttack, ZeroFractionIsHonest) {
  EXPECT_TRUE(plan_attack(10, AttackKind::incorrect_response, 0.0, 1).malicious_nodes.empty());
}

TEST(PlanAttack, FloorOfFraction) {
  EXPECT_EQ(plan_attack(10, AttackKind::random_response, 0.3, 1).malicious_nodes.size(), 3u);
  EXPECT_EQ(plan_attack(7, AttackKind::random_response, 0.3, 1).malicious_nodes.size(), 2u);
  EXPECT_EQ(plan_attack(3, AttackKind::random_response, 0.2, 1).malicious_nodes.size(), 0u);
}

TEST(PlanAttack, RejectsHalfOrMore) {
  EXPECT_EQ(code_of([] { plan_attack(10, AttackKind::random_response, 0.5, 1); }), ErrorCode::InvalidFraction);
  EXPECT_EQ(code_of([] { plan_attack(10, AttackKind::random_response, -0.1, 1); }), ErrorCode::InvalidFraction);
  EXPECT_EQ(code_of([] { plan_attack_with_nodes(10, AttackKind::random_response, {0, 1, 2, 3, 4}, 1); }),
            ErrorCode::InvalidFraction);
  EXPECT_EQ(code_of([] { plan_attack_with_nodes(10, AttackKind::random_response, {10}, 1); }),
            ErrorCode::InvalidArgument);
}

TEST(PlanAttack, SeedsSpreadAcrossNodes) {
  std::set<NodeId> seen;
  for (std::uint64_t seed = 0; seed < 40; ++seed)
    for (const NodeId id : plan_attack(10, AttackKind::random_response, 0.4, seed).malicious_nodes) seen.insert(id);
  EXPECT_EQ(seen.size(), 10u);
}

TEST(ApplyAttack, RandomResponseSwapsInJunk) {
  const Corpus corpus = synthetic::make_corpus();
  AttackPlan plan = plan_attack_with_nodes(10, AttackKind::random_response, {2, 5, 8}, 3);
  with_junk_corpus(plan, sentetruth::testing::junk_path());
  const auto honest = corpus.panel("q04", "ChatGPT", Variant::original);
  const auto attacked = apply_attack(plan, honest, corpus);
  ASSERT_EQ(attacked.size(), honest.size());
  for (std::size_t i = 0; i < honest.size(); ++i) {
    if (plan.is_malicious(honest[i].node_id)) {
      EXPECT_EQ(attacked[i].variant, Variant::tampered);
      EXPECT_EQ(attacked[i].provenance_model, "junk");
      EXPECT_NE(std::find(plan.junk_sentences.begin(), plan.junk_sentences.end(), attacked[i].content),
                plan.junk_sentences.end());
      EXPECT_EQ(attacked[i].model, "ChatGPT");
    } else {
      EXPECT_EQ(attacked[i], honest[i]);
    }
  }
  EXPECT_EQ(apply_attack(plan, honest, corpus), attacked);
}

TEST(ApplyAttack, ChangedRecordCountMatchesPlan) {
  const Corpus corpus = synthetic::make_corpus();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    AttackPlan plan = plan_attack(10, AttackKind::incorrect_response, 0.3, seed);
    const auto honest = corpus.panel("q02", "Llama", Variant::original);
    const auto attacked = apply_attack(plan, honest, corpus);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < honest.size(); ++i) changed += attacked[i] != honest[i] ? 1 : 0;
    EXPECT_EQ(changed, 3u);
  }
}

TEST(ApplyAttack, ModelSubstitutionUsesSameNodesOtherModel) {
  const Corpus corpus = synthetic::make_corpus();
  AttackPlan plan = plan_attack_with_nodes(10, AttackKind::model_substitution, {6, 7, 8, 9}, 1);
  plan.substitute_model = "Gemini";
  const auto attacked = apply_attack(plan, corpus.panel("q03", "ChatGPT", Variant::original), corpus);
  for (const auto& r : attacked) {
    if (r.node_id < 6) {
      EXPECT_EQ(r.provenance_model, "ChatGPT");
      continue;
    }
    EXPECT_EQ(r.variant, Variant::substitute_model);
    EXPECT_EQ(r.provenance_model, "Gemini");
    EXPECT_EQ(r.model, "ChatGPT");
    EXPECT_EQ(r.content, corpus.find_response("q03", r.node_id, "Gemini", Variant::original)->content);
  }
}

TEST(ApplyAttack, ModelSubstitutionNeedsAModel) {
  const Corpus corpus = synthetic::make_corpus();
  AttackPlan plan = plan_attack_with_nodes(10, AttackKind::model_substitution, {1}, 1);
  const auto panel = corpus.panel("q01", "ChatGPT", Variant::original);
  EXPECT_EQ(code_of([&] { apply_attack(plan, panel, corpus); }), ErrorCode::MissingSubstituteModel);
  plan.substitute_model = "Claude";
  EXPECT_EQ(code_of([&] { apply_attack(plan, panel, corpus); }), ErrorCode::MissingSubstituteModel);
}

TEST(ApplyAttack, RandomResponseNeedsJunk) {
  const Corpus corpus = synthetic::make_corpus();
  const AttackPlan plan = plan_attack_with_nodes(10, AttackKind::random_response, {1}, 1);
  EXPECT_EQ(code_of([&] { apply_attack(plan, corpus.panel("q01", "ChatGPT", Variant::original), corpus); }),
            ErrorCode::MissingJunkCorpus);
  AttackPlan missing = plan;
  EXPECT_EQ(code_of([&] { with_junk_corpus(missing, "/nonexistent/junk.txt"); }), ErrorCode::MissingJunkCorpus);
}

TEST(ApplyAttack, IncorrectResponsePrefersStoredTamperedRecord) {
  const Corpus corpus = corpus_with_tampered();
  const std::string model = corpus.models()[0];
  AttackPlan plan = plan_attack_with_nodes(5, AttackKind::incorrect_response, {1, 2}, 9);
  const auto honest = corpus.panel("q01", model, Variant::original);
  const auto attacked = apply_attack(plan, honest, corpus);
  EXPECT_EQ(attacked[1].content, "stored tampered answer");
  EXPECT_EQ(attacked[1].variant, Variant::tampered);
  EXPECT_EQ(attacked[2].variant, Variant::tampered);
  EXPECT_NE(attacked[2].content, honest[2].content);
  EXPECT_EQ(token_multiset(attacked[2].content), token_multiset(honest[2].content));

  plan.allow_local_corruption = false;
  EXPECT_EQ(code_of([&] { apply_attack(plan, honest, corpus); }), ErrorCode::MissingTamperedVariant);
  plan.malicious_nodes = {1};
  EXPECT_EQ(apply_attack(plan, honest, corpus)[1].content, "stored tampered answer");
}

TEST(CorruptText, ParagraphKeepsTokenMultiset) {
  std::string paragraph;
  Rng rng(5);
  const std::vector<std::string> words{"the", "oracle", "node", "chain", "answer", "model", "vote", "block"};
  for (int i = 0; i < 100; ++i) {
    paragraph += words[rng.below(words.size())];
    paragraph += (i % 12 == 11) ? ". " : " ";
  }
  paragraph.pop_back();
  const auto out = corrupt_text(paragraph, 1, 3, "q07");
  EXPECT_NE(out, paragraph);
  EXPECT_EQ(token_multiset(out), token_multiset(paragraph));
  EXPECT_EQ(corrupt_text(paragraph, 1, 3, "q07"), out);
  EXPECT_NE(corrupt_text(paragraph, 2, 3, "q07"), out);
}

TEST(CorruptText, AlwaysDiffersOnMultiTokenInput) {
  for (const char* s : {"a b", "one two three.", "x x y", "Hi. Yo.", "same same"}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) EXPECT_NE(corrupt_text(s, seed, 0, "q"), s) << s;
  }
}

TEST(CorruptText, SingleTokenGetsMarker) {
  EXPECT_EQ(corrupt_text("Canberra", 1, 0, "q"), "Canberra [corrupted]");
  EXPECT_EQ(code_of([] { corrupt_text("", 1, 0, "q"); }), ErrorCode::EmptyText);
}

TEST(CorruptText, ChineseSentencesShuffleByCharacter) {
  const std::string zh = "长城位于中国北方。它很长。";
  const auto out = corrupt_text(zh, 4, 2, "q17");
  EXPECT_NE(out, zh);
  auto a = text::code_points(out), b = text::code_points(zh);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  EXPECT_TRUE(text::is_valid_utf8(out));
}

TEST(SplitSentences, RoundTripsWhenUntouched) {
  for (const char* s : {"One. Two three!  Four?", "e.g. this", "长城。很长！", "a  b"}) {
    const auto parts = detail::split_sentences(s);
    std::string canon = text::canonicalize(s);
    EXPECT_EQ(text::canonicalize(detail::join_sentences(parts)), canon) << s;
  }
}
