#pragma once

// Seeded synthetic corpora in the questions x models x nodes shape, for demos
// and tests. Honest answers to one question share their core sentences and
// vary in framing and detail, the way repeated LLM answers do.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "sentetruth/dataset.hpp"
#include "sentetruth/rng.hpp"

namespace sentetruth::synthetic {

struct Topic {
  std::string_view text;
  Category category;
  Language language;
  std::array<std::string_view, 2> core;
  std::array<std::string_view, 3> details;
};

// clang-format off
inline constexpr std::array<Topic, 20> kTopics{{
  {"What is the capital of Australia?", Category::q1_fact, Language::en,
   {"The capital of Australia is Canberra.", "Canberra was chosen as a compromise between Sydney and Melbourne."},
   {"Parliament House in Canberra opened in 1988.", "Canberra is located in the Australian Capital Territory.", "Many people mistakenly assume Sydney is the capital."}},
  {"At what temperature does water boil at sea level?", Category::q1_fact, Language::en,
   {"Water boils at 100 degrees Celsius at sea level.", "That equals 212 degrees Fahrenheit under standard atmospheric pressure."},
   {"At higher altitude the boiling point of water is lower.", "Dissolved salt raises the boiling point of water slightly.", "Standard atmospheric pressure is 101.325 kilopascals."}},
  {"Who wrote the novel Pride and Prejudice?", Category::q1_fact, Language::en,
   {"Pride and Prejudice was written by Jane Austen.", "Jane Austen published the novel in 1813."},
   {"The novel follows Elizabeth Bennet and Mr Darcy.", "Austen also wrote Sense and Sensibility and Emma.", "The novel is a classic of English literature."}},
  {"What is the chemical symbol for gold?", Category::q1_fact, Language::en,
   {"The chemical symbol for gold is Au.", "The symbol Au comes from the Latin word aurum."},
   {"Gold has atomic number 79.", "Gold is a dense and highly malleable metal.", "Gold does not corrode in air."}},
  {"How many planets are in the solar system?", Category::q1_fact, Language::en,
   {"There are eight planets in the solar system.", "Pluto was reclassified as a dwarf planet in 2006."},
   {"The planets in order are Mercury, Venus, Earth, Mars, Jupiter, Saturn, Uranus and Neptune.", "Jupiter is the largest planet in the solar system.", "The International Astronomical Union defined the term planet in 2006."}},
  {"What is the largest ocean on Earth?", Category::q1_fact, Language::en,
   {"The Pacific Ocean is the largest ocean on Earth.", "The Pacific Ocean covers about one third of the surface of the Earth."},
   {"The Mariana Trench in the Pacific Ocean is the deepest point on Earth.", "The Pacific Ocean is larger than all land area combined.", "The Atlantic Ocean is the second largest ocean."}},
  {"Who developed the theory of general relativity?", Category::q1_fact, Language::en,
   {"Albert Einstein developed the theory of general relativity.", "Einstein published general relativity in 1915."},
   {"General relativity describes gravity as the curvature of spacetime.", "The theory predicted the bending of light by gravity.", "Einstein also developed special relativity in 1905."}},
  {"What gas do plants absorb for photosynthesis?", Category::q1_fact, Language::en,
   {"Plants absorb carbon dioxide for photosynthesis.", "Photosynthesis converts carbon dioxide and water into glucose and oxygen."},
   {"Photosynthesis takes place in the chloroplasts of plant cells.", "Chlorophyll captures light energy for photosynthesis.", "Oxygen is released as a byproduct of photosynthesis."}},
  {"If all bloops are razzies and all razzies are lazzies, are all bloops lazzies?", Category::q2_logic, Language::en,
   {"Yes, all bloops are lazzies.", "The conclusion follows because the subset relation is transitive."},
   {"This is a classic syllogism.", "If bloops are inside razzies and razzies are inside lazzies, bloops are inside lazzies.", "A Venn diagram makes the nesting of the sets clear."}},
  {"A bat and a ball cost 1.10 dollars and the bat costs 1 dollar more than the ball. How much is the ball?", Category::q2_logic, Language::en,
   {"The ball costs 5 cents.", "If the ball costs 0.05 dollars the bat costs 1.05 dollars and the total is 1.10 dollars."},
   {"The intuitive answer of 10 cents is wrong.", "Setting up the equation x plus x plus 1 equals 1.10 gives x equals 0.05.", "This puzzle appears in the cognitive reflection test."}},
  {"What is the next number in the sequence 2, 4, 8, 16?", Category::q2_logic, Language::en,
   {"The next number in the sequence is 32.", "Each number in the sequence is double the previous number."},
   {"The sequence consists of powers of two.", "The general term of the sequence is 2 to the power n.", "Doubling 16 gives 32."}},
  {"If today is Monday, what day will it be in 10 days?", Category::q2_logic, Language::en,
   {"In 10 days it will be Thursday.", "Ten days is one week plus three days, and three days after Monday is Thursday."},
   {"Days of the week repeat every seven days.", "Ten modulo seven equals three.", "Counting forward from Monday gives Tuesday, Wednesday, Thursday."}},
  {"Why is the sky blue?", Category::q3_open, Language::en,
   {"The sky is blue because of Rayleigh scattering of sunlight.", "Shorter blue wavelengths of sunlight are scattered more strongly by air molecules."},
   {"At sunset the light travels through more atmosphere and looks red.", "Violet light is scattered even more but our eyes are less sensitive to it.", "Rayleigh scattering strength varies with the inverse fourth power of wavelength."}},
  {"What are the benefits of regular exercise?", Category::q3_open, Language::en,
   {"Regular exercise improves cardiovascular health and strengthens muscles.", "Exercise also reduces stress and improves mood and sleep quality."},
   {"Exercise helps maintain a healthy body weight.", "Regular exercise lowers the risk of type 2 diabetes.", "Health guidelines recommend 150 minutes of moderate exercise per week."}},
  {"How does a blockchain keep records tamper resistant?", Category::q3_open, Language::en,
   {"A blockchain links blocks with cryptographic hashes so that changing a record breaks the chain.", "Consensus among many nodes makes rewriting blockchain history impractical."},
   {"Each block stores the hash of the previous block.", "Proof of work makes rewriting blocks computationally expensive.", "Every full node keeps a copy of the blockchain ledger."}},
  {"What causes the seasons on Earth?", Category::q3_open, Language::en,
   {"The seasons are caused by the tilt of the axis of the Earth.", "The axial tilt of about 23.5 degrees changes how directly sunlight hits each hemisphere."},
   {"When the northern hemisphere tilts toward the Sun it has summer.", "The distance between the Earth and the Sun is not the main cause of the seasons.", "The hemispheres have opposite seasons at the same time."}},
  {"中国的首都是哪里？", Category::q1_fact, Language::zh,
   {"中国的首都是北京。", "北京是中国的政治和文化中心。"},
   {"北京有故宫和天安门广场。", "北京是一座拥有三千多年历史的古城。", "北京曾经举办过二零零八年夏季奥运会。"}},
  {"一年有多少个月？", Category::q1_fact, Language::zh,
   {"一年有十二个月。", "公历的一年分为十二个月。"},
   {"其中大月有三十一天，小月有三十天。", "二月通常有二十八天，闰年有二十九天。", "一年一般有三百六十五天。"}},
  {"如果所有的猫都是动物，而咪咪是一只猫，那么咪咪是动物吗？", Category::q2_logic, Language::zh,
   {"是的，咪咪是动物。", "因为所有的猫都是动物，而咪咪是一只猫，所以咪咪是动物。"},
   {"这是一个典型的三段论推理。", "大前提和小前提都成立时结论必然成立。", "这种推理属于演绎推理。"}},
  {"为什么要多喝水？", Category::q3_open, Language::zh,
   {"多喝水可以维持身体的正常代谢和体温。", "水帮助身体运输营养物质并排出废物。"},
   {"成年人每天大约需要喝一千五百毫升的水。", "缺水会导致疲劳和注意力下降。", "运动后要及时补充水分。"}},
}};
// clang-format on

inline constexpr std::array<std::string_view, 5> kModels{"ChatGPT", "ChatGLM", "Llama", "Gemini", "Hunyuan"};

struct CorpusShape {
  int node_count = 10;
  int question_count = 20;
  int model_count = 5;
  std::uint64_t seed = 7;
  std::string name = "synthetic-base";
};

inline std::string question_id(int index) {
  std::string id = std::to_string(index + 1);
  return "q" + std::string(id.size() < 2 ? 2 - id.size() : 0, '0') + id;
}

/// One honest answer: optional framing, first core sentence, then possibly
/// the second core sentence, a detail sentence and a model-specific closer.
inline std::string honest_answer(const Topic& topic, std::string_view model, int node, std::uint64_t seed) {
  Rng rng = Rng::from_label("answer|" + std::to_string(seed) + "|" + std::string(topic.text) + "|" +
                            std::string(model) + "|" + std::to_string(node));
  const bool zh = topic.language == Language::zh;
  static constexpr std::array<std::string_view, 4> en_frames{"", "Answer: ", "In short, ", "Sure. "};
  static constexpr std::array<std::string_view, 3> zh_frames{"", "答案：", "简单来说，"};
  const std::string_view sep = zh ? "" : " ";

  std::string out;
  out += zh ? zh_frames[rng.below(zh_frames.size())] : en_frames[rng.below(en_frames.size())];
  out += topic.core[0];
  if (rng.unit() < 0.7) {
    out += sep;
    out += topic.core[1];
  }
  if (rng.unit() < 0.5) {
    out += sep;
    out += topic.details[rng.below(topic.details.size())];
  }
  if (rng.unit() < 0.3) {
    out += sep;
    out += zh ? std::string("（") + std::string(model) + "）" : "(" + std::string(model) + ")";
  }
  return out;
}

/// Complete corpus: every (question, model) pair has one original answer per
/// node.
inline Corpus make_corpus(const CorpusShape& shape = {}) {
  if (shape.question_count < 0 || shape.question_count > static_cast<int>(kTopics.size()))
    fail(ErrorCode::InvalidArgument, "question_count must be in [0, " + std::to_string(kTopics.size()) + "]");
  if (shape.model_count < 1 || shape.model_count > static_cast<int>(kModels.size()))
    fail(ErrorCode::InvalidArgument, "model_count must be in [1, " + std::to_string(kModels.size()) + "]");

  std::vector<std::string> models(kModels.begin(), kModels.begin() + shape.model_count);
  std::vector<Question> questions;
  std::vector<ResponseRecord> responses;
  for (int q = 0; q < shape.question_count; ++q) {
    const Topic& topic = kTopics[static_cast<std::size_t>(q)];
    questions.push_back({question_id(q), topic.category, std::string(topic.text), topic.language, std::nullopt});
    for (const auto& model : models)
      for (int node = 0; node < shape.node_count; ++node)
        responses.push_back({question_id(q), node, model, honest_answer(topic, model, node, shape.seed),
                             Variant::original, model});
  }
  return Corpus(shape.name, shape.node_count, std::move(models), std::move(questions), std::move(responses));
}

}  // namespace sentetruth::synthetic
