#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>
#include <set>
#include <string>
#include <vector>

#include "sentetruth/sentetruth.hpp"

namespace sentetruth::testing {

inline std::filesystem::path data_dir() { return SENTETRUTH_DATA_DIR; }
inline std::filesystem::path junk_path() { return data_dir() / "junk_sentences.txt"; }

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sentetruth_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << body;
}

/// Panel with node ids 0..n-1 for question "q", model "M".
inline std::vector<ResponseRecord> make_panel(const std::vector<std::string>& contents,
                                              const std::string& model = "M") {
  std::vector<ResponseRecord> panel;
  for (std::size_t i = 0; i < contents.size(); ++i)
    panel.push_back({"q", static_cast<NodeId>(i), model, contents[i], Variant::original, model});
  return panel;
}

inline EmbeddingVector basis(std::size_t index, std::size_t dim) {
  std::vector<double> v(dim, 0.0);
  v[index] = 1.0;
  return EmbeddingVector(std::move(v));
}

inline EmbeddingVector vec(std::initializer_list<double> values) { return EmbeddingVector(std::vector<double>(values)); }

/// Box-Muller normal draw from the project RNG.
inline double gaussian(Rng& rng) {
  double u1 = rng.unit();
  while (u1 <= 0.0) u1 = rng.unit();
  const double u2 = rng.unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Corpus + embedding fixture with unique content per record.
struct EmbeddedCorpus {
  Corpus corpus;
  FixtureTable vectors;
};

inline std::vector<double> noisy(const std::vector<double>& center, double sigma, Rng& rng) {
  std::vector<double> v = center;
  for (double& x : v) x += sigma * gaussian(rng);
  return v;
}

/// Substitution scenario: answers requested from "ChatGPT"; "Gemini" answers
/// to the same questions form their own tight cluster. Honest ChatGPT answers
/// are looser, and on the epochs listed in `noisy_honest_epochs` they are
/// scattered enough that a Gemini answer has the higher relatedness.
inline EmbeddedCorpus substitution_fixture(int nodes, int questions, std::uint64_t seed,
                                           std::set<int> noisy_honest_epochs = {}) {
  constexpr std::size_t dim = 24;
  Rng rng(seed);
  std::vector<Question> qs;
  std::vector<ResponseRecord> rs;
  FixtureTable table;
  for (int q = 0; q < questions; ++q) {
    const std::string qid = synthetic::question_id(q);
    qs.push_back({qid, Category::q3_open, "open question " + qid, Language::en, std::nullopt});
    // honest center on coordinates 0..11, substitute center mostly on 12..23
    std::vector<double> honest(dim, 0.0), substitute(dim, 0.0);
    for (std::size_t k = 0; k < 12; ++k) honest[k] = 1.0 + 0.3 * gaussian(rng);
    for (std::size_t k = 0; k < dim; ++k) substitute[k] = (k < 12 ? 0.25 : 1.0) + 0.3 * gaussian(rng);
    const double honest_sigma = noisy_honest_epochs.contains(q) ? 1.6 : 0.35;
    for (int node = 0; node < nodes; ++node) {
      const std::string a = "ChatGPT answer to " + qid + " from node " + std::to_string(node);
      const std::string b = "Gemini answer to " + qid + " from node " + std::to_string(node);
      rs.push_back({qid, node, "ChatGPT", a, Variant::original, "ChatGPT"});
      rs.push_back({qid, node, "Gemini", b, Variant::original, "Gemini"});
      table.emplace(sha256_hex(a), EmbeddingVector(noisy(honest, honest_sigma, rng)));
      table.emplace(sha256_hex(b), EmbeddingVector(noisy(substitute, 0.05, rng)));
    }
  }
  return {Corpus("substitution", nodes, {"ChatGPT", "Gemini"}, std::move(qs), std::move(rs)), std::move(table)};
}

/// Worst case for relatedness: every junk sentence embeds to its own basis
/// direction, orthogonal to every honest answer and to every other junk
/// sentence. Honest answers cluster on the first 8 coordinates.
inline EmbeddedCorpus orthogonal_junk_fixture(int nodes, int questions, const std::vector<std::string>& junk,
                                              std::uint64_t seed) {
  constexpr std::size_t honest_dims = 8;
  const std::size_t dim = honest_dims + junk.size();
  Rng rng(seed);
  std::vector<Question> qs;
  std::vector<ResponseRecord> rs;
  FixtureTable table;
  for (std::size_t j = 0; j < junk.size(); ++j) table.emplace(sha256_hex(junk[j]), basis(honest_dims + j, dim));
  for (int q = 0; q < questions; ++q) {
    const std::string qid = synthetic::question_id(q);
    qs.push_back({qid, Category::q1_fact, "fact question " + qid, Language::en, std::nullopt});
    std::vector<double> center(dim, 0.0);
    for (std::size_t k = 0; k < honest_dims; ++k) center[k] = 1.0;
    for (int node = 0; node < nodes; ++node) {
      const std::string a = "answer to " + qid + " from node " + std::to_string(node);
      rs.push_back({qid, node, "ChatGPT", a, Variant::original, "ChatGPT"});
      auto v = center;
      for (std::size_t k = 0; k < honest_dims; ++k) v[k] = std::abs(v[k] + 0.4 * gaussian(rng));
      table.emplace(sha256_hex(a), EmbeddingVector(std::move(v)));
    }
  }
  return {Corpus("orthogonal-junk", nodes, {"ChatGPT"}, std::move(qs), std::move(rs)), std::move(table)};
}

}  // namespace sentetruth::testing
