// Writes the synthetic demo corpora used by the README examples.
//
//   make-fixtures <output-dir>

#include <filesystem>
#include <iostream>

#include "sentetruth/dataset.hpp"
#include "sentetruth/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make-fixtures <output-dir>\n";
    return 1;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  try {
    sentetruth::save_corpus(sentetruth::synthetic::make_corpus(), dir / "base_corpus.jsonl");
    sentetruth::synthetic::CorpusShape minimal;
    minimal.node_count = 3;
    minimal.question_count = 1;
    minimal.model_count = 1;
    minimal.name = "synthetic-minimal";
    sentetruth::save_corpus(sentetruth::synthetic::make_corpus(minimal), dir / "minimal_corpus.jsonl");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
