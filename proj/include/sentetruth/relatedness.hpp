#pragma once

// Pairwise cosine similarity and per-response semantic relatedness.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "sentetruth/embedding.hpp"
#include "sentetruth/error.hpp"
#include "sentetruth/log.hpp"

namespace sentetruth {

inline double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim())
    fail(ErrorCode::DimMismatch, std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) fail(ErrorCode::ZeroVector, "cosine of a zero-norm vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) dot += a[i] * b[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

struct RelatednessScore {
  int index = 0;
  /// Sum over peers of max(0, cosine).
  double phi = 0.0;
  /// Raw cosine against every input (self entry is 1, or 0 for a zero vector).
  std::vector<double> pairwise;
  /// Sum of the unclamped peer cosines.
  double raw_sum = 0.0;
  bool zero_vector = false;
};

/// One score per input, index-aligned. Negative cosines are clamped to zero
/// before summing; a zero-norm vector is scored 0 against every peer.
inline std::vector<RelatednessScore> relatedness_scores(std::span<const EmbeddingVector> vectors) {
  const std::size_t n = vectors.size();
  if (n < 2) fail(ErrorCode::TooFewVectors, "need at least 2 vectors, got " + std::to_string(n));
  for (std::size_t i = 1; i < n; ++i)
    if (vectors[i].dim() != vectors[0].dim())
      fail(ErrorCode::DimMismatch, "vector #" + std::to_string(i) + " has dim " + std::to_string(vectors[i].dim()) +
                                       ", expected " + std::to_string(vectors[0].dim()));

  std::vector<bool> zero(n);
  for (std::size_t i = 0; i < n; ++i) {
    zero[i] = vectors[i].norm() == 0.0;
    if (zero[i]) log::warn("relatedness: vector #" + std::to_string(i) + " has zero norm; scoring phi = 0");
  }

  std::vector<RelatednessScore> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    scores[i].index = static_cast<int>(i);
    scores[i].zero_vector = zero[i];
    scores[i].pairwise.assign(n, 0.0);
    scores[i].pairwise[i] = zero[i] ? 0.0 : 1.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = (zero[i] || zero[j]) ? 0.0 : cosine(vectors[i], vectors[j]);
      scores[i].pairwise[j] = c;
      scores[j].pairwise[i] = c;
    }
  }
  for (auto& s : scores) {
    for (std::size_t j = 0; j < n; ++j) {
      if (static_cast<int>(j) == s.index) continue;
      s.phi += std::max(0.0, s.pairwise[j]);
      s.raw_sum += s.pairwise[j];
    }
  }
  return scores;
}

}  // namespace sentetruth
