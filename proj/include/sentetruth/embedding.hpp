#pragma once

// Text -> fixed-length vector providers: in-process TF-IDF, a content-addressed
// fixture cache, and a remote sentence-embedding service over HTTP/JSON.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sentetruth/dataset.hpp"
#include "sentetruth/error.hpp"
#include "sentetruth/sha256.hpp"
#include "sentetruth/text.hpp"

namespace sentetruth {

/// Dense embedding of one response. All entries are finite.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) fail(ErrorCode::InvalidArgument, "embedding must have dim >= 1");
    for (const double v : values_)
      if (!std::isfinite(v)) fail(ErrorCode::InvalidArgument, "embedding contains a non-finite value");
  }

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double norm() const {
    double sum = 0.0;
    for (const double v : values_) sum += v * v;
    return std::sqrt(sum);
  }

  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

 private:
  std::vector<double> values_;
};

enum class ProviderKind { tfidf, fixture, remote };

inline std::string_view to_string(ProviderKind k) {
  switch (k) {
    case ProviderKind::tfidf: return "tfidf";
    case ProviderKind::fixture: return "fixture";
    case ProviderKind::remote: return "remote";
  }
  return "";
}

inline std::optional<ProviderKind> parse_provider_kind(std::string_view s) {
  for (auto k : {ProviderKind::tfidf, ProviderKind::fixture, ProviderKind::remote})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct EmbeddingProviderConfig {
  ProviderKind kind = ProviderKind::tfidf;
  std::optional<std::filesystem::path> fixture_path;
  std::optional<std::string> remote_endpoint;
  int remote_timeout_ms = 30000;
  std::size_t remote_batch_size = 64;

  void validate() const {
    if (kind == ProviderKind::fixture && !fixture_path)
      fail(ErrorCode::InvalidArgument, "fixture provider requires fixture_path");
    if (kind == ProviderKind::remote && !remote_endpoint)
      fail(ErrorCode::InvalidArgument, "remote provider requires remote_endpoint");
    if (remote_timeout_ms <= 0) fail(ErrorCode::InvalidArgument, "remote_timeout_ms must be positive");
    if (remote_batch_size == 0) fail(ErrorCode::InvalidArgument, "remote_batch_size must be positive");
  }
};

/// TF-IDF over the given batch only. Vocabulary is sorted so coordinates are
/// independent of input order; tf = count / doc tokens,
/// idf = ln((1 + N) / (1 + df)) + 1, rows L2-normalized. A text with no
/// tokens yields the zero vector.
inline std::vector<EmbeddingVector> tfidf_vectorize(std::span<const std::string> texts) {
  if (texts.empty()) fail(ErrorCode::InvalidArgument, "tfidf_vectorize needs at least one text");

  std::vector<std::map<std::string, int>> counts(texts.size());
  std::vector<int> doc_tokens(texts.size(), 0);
  std::map<std::string, int> df;
  for (std::size_t d = 0; d < texts.size(); ++d) {
    if (texts[d].empty()) fail(ErrorCode::EmptyText, "text #" + std::to_string(d) + " is empty");
    for (auto& tok : text::tokenize(texts[d])) {
      ++counts[d][tok];
      ++doc_tokens[d];
    }
    for (const auto& [tok, _] : counts[d]) ++df[tok];
  }

  std::unordered_map<std::string, std::size_t> column;
  std::vector<double> idf;
  idf.reserve(df.size());
  const double n_docs = static_cast<double>(texts.size());
  for (const auto& [tok, freq] : df) {
    column.emplace(tok, idf.size());
    idf.push_back(std::log((1.0 + n_docs) / (1.0 + freq)) + 1.0);
  }
  const std::size_t dim = std::max<std::size_t>(1, idf.size());

  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t d = 0; d < texts.size(); ++d) {
    std::vector<double> row(dim, 0.0);
    double sq = 0.0;
    for (const auto& [tok, count] : counts[d]) {
      const std::size_t col = column.at(tok);
      row[col] = (static_cast<double>(count) / doc_tokens[d]) * idf[col];
      sq += row[col] * row[col];
    }
    if (sq > 0.0) {
      const double inv = 1.0 / std::sqrt(sq);
      for (double& v : row) v *= inv;
    }
    out.emplace_back(std::move(row));
  }
  return out;
}

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// Index-aligned vectors sharing one dim. Texts must be non-empty.
  virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const = 0;
  virtual ProviderKind kind() const = 0;
};

namespace detail {
inline void check_texts(std::span<const std::string> texts) {
  if (texts.empty()) fail(ErrorCode::InvalidArgument, "embed_batch needs at least one text");
  for (std::size_t i = 0; i < texts.size(); ++i)
    if (texts[i].empty()) fail(ErrorCode::EmptyText, "text #" + std::to_string(i) + " is empty");
}
}  // namespace detail

class TfidfProvider final : public EmbeddingProvider {
 public:
  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    detail::check_texts(texts);
    return tfidf_vectorize(texts);
  }
  ProviderKind kind() const override { return ProviderKind::tfidf; }
};

/// Map from SHA-256 hex of content to its vector.
using FixtureTable = std::map<std::string, EmbeddingVector>;

inline FixtureTable read_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open fixture " + path.string());
  FixtureTable table;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> dim;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      auto key = obj.at("sha256").get<std::string>();
      EmbeddingVector v(obj.at("values").get<std::vector<double>>());
      if (obj.at("dim").get<std::size_t>() != v.dim())
        fail(ErrorCode::ParseError, "fixture line " + std::to_string(line_no) + ": dim disagrees with values");
      if (dim && *dim != v.dim())
        fail(ErrorCode::DimMismatch, "fixture line " + std::to_string(line_no) + ": inconsistent dim");
      dim = v.dim();
      table.insert_or_assign(std::move(key), std::move(v));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, "fixture line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

/// Writes entries sorted by key, so identical tables produce identical bytes.
inline void write_fixture(const FixtureTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write fixture " + path.string());
  for (const auto& [key, v] : table) {
    nlohmann::json obj{{"sha256", key},
                       {"dim", v.dim()},
                       {"values", std::vector<double>(v.values().begin(), v.values().end())}};
    out << obj.dump() << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

class FixtureProvider final : public EmbeddingProvider {
 public:
  explicit FixtureProvider(FixtureTable table) : table_(std::move(table)) {}
  explicit FixtureProvider(const std::filesystem::path& path) : table_(read_fixture(path)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    detail::check_texts(texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
      const auto key = sha256_hex(t);
      const auto it = table_.find(key);
      if (it == table_.end()) fail(ErrorCode::FixtureMiss, "no cached vector for sha256 " + key);
      out.push_back(it->second);
    }
    return out;
  }
  ProviderKind kind() const override { return ProviderKind::fixture; }
  const FixtureTable& table() const { return table_; }

 private:
  FixtureTable table_;
};

/// Client for the embedding sidecar: POST {base}/embed with {"texts":[...]},
/// expects {"dim":D,"vectors":[[...],...]}. Batches larger than
/// `batch_size` are split into several requests.
class RemoteProvider final : public EmbeddingProvider {
 public:
  RemoteProvider(std::string endpoint, int timeout_ms, std::size_t batch_size = 64)
      : timeout_ms_(timeout_ms), batch_size_(batch_size) {
    const auto scheme_end = endpoint.find("://");
    const auto path_start = endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    origin_ = endpoint.substr(0, path_start);
    std::string base = path_start == std::string::npos ? std::string{} : endpoint.substr(path_start);
    while (!base.empty() && base.back() == '/') base.pop_back();
    path_ = base.ends_with("/embed") ? base : base + "/embed";
  }

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) const override {
    detail::check_texts(texts);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
      const auto chunk = texts.subspan(start, std::min(batch_size_, texts.size() - start));
      auto vectors = request(chunk);
      if (!out.empty() && vectors.front().dim() != out.front().dim())
        fail(ErrorCode::DimMismatch, "remote service changed dim between batches");
      for (auto& v : vectors) out.push_back(std::move(v));
    }
    return out;
  }
  ProviderKind kind() const override { return ProviderKind::remote; }

 private:
  std::vector<EmbeddingVector> request(std::span<const std::string> texts) const {
    httplib::Client client(origin_);
    const auto sec = timeout_ms_ / 1000;
    const auto usec = (timeout_ms_ % 1000) * 1000;
    client.set_connection_timeout(sec, usec);
    client.set_read_timeout(sec, usec);
    client.set_write_timeout(sec, usec);

    const nlohmann::json body{{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto res = client.Post(path_, body.dump(), "application/json");
    if (!res)
      fail(ErrorCode::RemoteUnavailable, origin_ + path_ + ": " + httplib::to_string(res.error()));
    if (res->status >= 400 && res->status < 500) {
      std::string detail = res->body;
      try {
        detail = nlohmann::json::parse(res->body).at("error").get<std::string>();
      } catch (const nlohmann::json::exception&) {
      }
      fail(ErrorCode::InvalidArgument, "embedding service rejected request (" + std::to_string(res->status) +
                                           "): " + detail);
    }
    if (res->status != 200)
      fail(ErrorCode::RemoteUnavailable, "embedding service returned status " + std::to_string(res->status));

    std::vector<EmbeddingVector> out;
    try {
      const auto reply = nlohmann::json::parse(res->body);
      const auto dim = reply.at("dim").get<std::size_t>();
      const auto& rows = reply.at("vectors");
      if (!rows.is_array() || rows.size() != texts.size())
        fail(ErrorCode::LengthMismatch, "embedding service returned " + std::to_string(rows.size()) +
                                            " vectors for " + std::to_string(texts.size()) + " texts");
      for (const auto& row : rows) {
        EmbeddingVector v(row.get<std::vector<double>>());
        if (v.dim() != dim) fail(ErrorCode::DimMismatch, "vector length differs from reported dim");
        out.push_back(std::move(v));
      }
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::ParseError, std::string("malformed embedding service reply: ") + e.what());
    }
    return out;
  }

  std::string origin_;
  std::string path_;
  int timeout_ms_;
  std::size_t batch_size_;
};

inline std::shared_ptr<const EmbeddingProvider> make_provider(const EmbeddingProviderConfig& config) {
  config.validate();
  switch (config.kind) {
    case ProviderKind::tfidf: return std::make_shared<TfidfProvider>();
    case ProviderKind::fixture: return std::make_shared<FixtureProvider>(*config.fixture_path);
    case ProviderKind::remote:
      return std::make_shared<RemoteProvider>(*config.remote_endpoint, config.remote_timeout_ms,
                                              config.remote_batch_size);
  }
  fail(ErrorCode::InvalidArgument, "unknown provider kind");
}

inline std::vector<EmbeddingVector> embed_batch(const EmbeddingProviderConfig& config,
                                                std::span<const std::string> texts) {
  return make_provider(config)->embed(texts);
}

/// Embeds every distinct response content in the corpus and writes a fixture
/// file. The TF-IDF provider treats the distinct contents as one document
/// set so all cached vectors share a vocabulary. Returns entries written.
/// `extra_texts` (e.g. junk sentences an attack will inject) are embedded in
/// the same batch so a fixture replay can serve them too.
inline std::size_t cache_embeddings(const EmbeddingProviderConfig& config, const Corpus& corpus,
                                    const std::filesystem::path& out_path,
                                    std::span<const std::string> extra_texts = {}) {
  if (config.kind == ProviderKind::fixture)
    fail(ErrorCode::InvalidArgument, "cache_embeddings needs a tfidf or remote provider");
  std::map<std::string, std::string> by_hash;
  for (const auto& r : corpus.responses())
    if (!r.content.empty()) by_hash.emplace(sha256_hex(r.content), r.content);
  for (const auto& t : extra_texts)
    if (!t.empty()) by_hash.emplace(sha256_hex(t), t);

  FixtureTable table;
  if (!by_hash.empty()) {
    std::vector<std::string> texts;
    texts.reserve(by_hash.size());
    for (const auto& [_, content] : by_hash) texts.push_back(content);
    auto vectors = make_provider(config)->embed(texts);
    std::size_t i = 0;
    for (const auto& [key, _] : by_hash) table.emplace(key, std::move(vectors[i++]));
  }
  write_fixture(table, out_path);
  return table.size();
}

}  // namespace sentetruth
