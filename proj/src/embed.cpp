#include "skillmix/embed.hpp"

#include <cmath>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "skillmix/util.hpp"

namespace skillmix {

HashedTrigramProvider::HashedTrigramProvider(std::size_t dimension)
    : dimension_(dimension), id_("trigram:" + std::to_string(dimension)) {
  if (dimension_ == 0) {
    throw ConfigError("embedding dimension must be positive");
  }
}

EmbeddingVector HashedTrigramProvider::embed(const std::string& text) {
  if (text.empty()) {
    throw BackendError("cannot embed empty text");
  }
  EmbeddingVector v(dimension_, 0.0);
  std::string padded = " " + text + " ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    std::uint64_t h = fnv1a64(std::string_view(padded).substr(i, 3));
    v[h % dimension_] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::string endpoint, std::string model,
                                                 std::string api_key_env)
    : endpoint_(std::move(endpoint)),
      model_(std::move(model)),
      api_key_env_(std::move(api_key_env)),
      id_("remote:" + endpoint_ + ":" + model_) {}

EmbeddingVector RemoteEmbeddingProvider::embed(const std::string& text) {
  if (text.empty()) {
    throw BackendError("cannot embed empty text");
  }
  std::size_t scheme_end = endpoint_.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("invalid embeddings endpoint: " + endpoint_);
  }
  std::size_t path_start = endpoint_.find('/', scheme_end + 3);
  std::string base = path_start == std::string::npos ? endpoint_ : endpoint_.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/v1/embeddings" : endpoint_.substr(path_start);

  nlohmann::json body{{"input", nlohmann::json::array({text})}, {"model", model_}};
  httplib::Headers headers;
  if (const char* key = std::getenv(api_key_env_.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  httplib::Client client(base);
  client.set_read_timeout(120, 0);
  client.set_connection_timeout(10, 0);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res || res->status < 200 || res->status >= 300) {
    throw BackendError("embeddings endpoint failure for provider " + id_);
  }
  auto parsed = nlohmann::json::parse(res->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("data") || parsed["data"].empty() ||
      !parsed["data"][0].contains("embedding")) {
    throw BackendError("malformed embeddings response from " + id_);
  }
  EmbeddingVector v = parsed["data"][0]["embedding"].get<EmbeddingVector>();
  if (v.empty()) {
    throw BackendError("empty embedding from " + id_);
  }
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw BackendError("non-finite embedding entry from " + id_);
    }
  }
  if (dimension_ == 0) {
    dimension_ = v.size();
  } else if (v.size() != dimension_) {
    throw BackendError("embedding dimension changed mid-run for " + id_);
  }
  return v;
}

EmbeddingCache::EmbeddingCache(std::shared_ptr<EmbeddingProvider> provider)
    : provider_(std::move(provider)) {
  if (!provider_) {
    throw ConfigError("embedding cache requires a provider");
  }
}

const EmbeddingVector& EmbeddingCache::get(const std::string& text) {
  const std::string key = provider_->id() + "\x1f" + text;
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      return it->second;
    }
  }
  EmbeddingVector v = provider_->embed(text);
  std::unique_lock lock(mutex_);
  // Another thread may have inserted meanwhile; keep the first value.
  auto [it, inserted] = entries_.emplace(key, std::move(v));
  return it->second;
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("cosine: dimension mismatch");
  }
  double dot = 0.0;
  double nu = 0.0;
  double nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) {
    throw std::invalid_argument("cosine: zero-norm input");
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<KeywordMatch> match_keywords(const SkillSet& test,
                                         const std::set<SkillKeyword>& vocabulary,
                                         double threshold, EmbeddingCache& cache) {
  std::vector<KeywordMatch> out;
  out.reserve(test.keywords.size());
  for (const SkillKeyword& kw : test.keywords) {
    KeywordMatch match;
    match.test_keyword = kw;
    std::optional<SkillKeyword> best;
    double best_sim = -1.0;
    if (vocabulary.contains(kw)) {
      best = kw;
      best_sim = 1.0;
    } else if (!vocabulary.empty()) {
      const EmbeddingVector& test_vec = cache.get(kw.text());
      for (const SkillKeyword& candidate : vocabulary) {
        double sim = cosine(test_vec, cache.get(candidate.text()));
        if (sim > best_sim) {
          best_sim = sim;
          best = candidate;
        }
      }
    }
    match.similarity = best_sim;
    if (best && best_sim >= threshold) {
      match.profile_keyword = best;
    }
    out.push_back(std::move(match));
  }
  return out;
}

}  // namespace skillmix
