#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "skillmix/keywords.hpp"

namespace skillmix {

using EmbeddingVector = std::vector<double>;

struct KeywordMatch {
  SkillKeyword test_keyword;
  std::optional<SkillKeyword> profile_keyword;  // none iff similarity < threshold
  double similarity = -1.0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const std::string& id() const = 0;
  virtual std::size_t dimension() const = 0;
  // Deterministic per (provider, text). Throws BackendError on failure.
  virtual EmbeddingVector embed(const std::string& text) = 0;
};

// Offline fallback: character-trigram feature hashing over the text padded
// with single-space boundaries, followed by unit normalization. Counts are
// nonnegative, so all cosines land in [0, 1].
class HashedTrigramProvider final : public EmbeddingProvider {
 public:
  explicit HashedTrigramProvider(std::size_t dimension = 256);

  const std::string& id() const override { return id_; }
  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(const std::string& text) override;

 private:
  std::size_t dimension_;
  std::string id_;
};

// Client for an HTTP embeddings endpoint:
//   POST {"input": [text], "model": m} -> {"data": [{"embedding": [...]}]}
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(std::string endpoint, std::string model,
                          std::string api_key_env = "SKILLMIX_API_KEY");

  const std::string& id() const override { return id_; }
  // Declared dimension is learned from the first successful call.
  std::size_t dimension() const override { return dimension_; }
  EmbeddingVector embed(const std::string& text) override;

 private:
  std::string endpoint_;
  std::string model_;
  std::string api_key_env_;
  std::string id_;
  std::size_t dimension_ = 0;
};

// Keyed by (provider id, text). Concurrent reads, serialized insertion.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::shared_ptr<EmbeddingProvider> provider);

  const EmbeddingVector& get(const std::string& text);
  std::size_t size() const;
  EmbeddingProvider& provider() { return *provider_; }

 private:
  std::shared_ptr<EmbeddingProvider> provider_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, EmbeddingVector> entries_;
};

// Throws std::invalid_argument on dimension mismatch or zero-norm input.
double cosine(std::span<const double> u, std::span<const double> v);

// Maps every test keyword to its single best vocabulary keyword, or to none
// when the best similarity falls below the threshold. Exact string equality
// short-circuits to similarity 1.0. Similarity ties resolve to the
// lexicographically smallest vocabulary keyword, so results do not depend on
// vocabulary ordering.
std::vector<KeywordMatch> match_keywords(const SkillSet& test,
                                         const std::set<SkillKeyword>& vocabulary,
                                         double threshold, EmbeddingCache& cache);

}  // namespace skillmix
