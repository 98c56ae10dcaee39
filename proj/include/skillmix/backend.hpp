#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skillmix/util.hpp"

namespace skillmix {

enum class AnswerKind { multiple_choice, numeric };

std::string_view answer_kind_name(AnswerKind kind);
AnswerKind answer_kind_from_name(std::string_view name);

enum class PromptKind { keyword, cot_multiple_choice, cot_math, aggregate, discuss };

// Renders the template for `kind` with {placeholder} substitution. Required
// fields: keyword/cot kinds take "question"; aggregate and discuss take
// "question", "responses" (the expert bodies already joined in assignment
// order) and "answer_kind". A missing required field throws, naming it.
std::string render_prompt(PromptKind kind, const std::map<std::string, std::string>& fields);

// Raw template text, as shipped under data/prompts/.
std::string_view prompt_template(PromptKind kind, AnswerKind answer_kind = AnswerKind::multiple_choice);

// Final-answer extraction. Multiple choice: the letter of the last
// "The answer is (X)" (bare letter accepted as a fallback). Numeric: the
// normalized contents of the last \boxed{...}, falling back to the last
// "The answer is <token>". Returns nullopt when nothing matches.
std::optional<std::string> extract_answer(std::string_view text, AnswerKind kind);

// Canonical numeric-answer form: whitespace stripped, surrounding brace pairs
// removed, leading zeros dropped.
std::string normalize_numeric_answer(std::string_view raw);

enum class FinishReason { stop, length, error };

std::string_view finish_reason_name(FinishReason reason);

struct GenerationResult {
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
  std::size_t prompt_tokens = 0;
  std::size_t completion_tokens = 0;
};

struct BackendConfig {
  std::string model_id;
  // "mock:<script-path>" or an http(s) chat-completions URL.
  std::string endpoint;
  double temperature = 0.7;
  int max_tokens = 4096;
  int retry_limit = 2;
  int retry_backoff_ms = 100;
  int in_flight_limit = 1;
  std::string api_key_env = "SKILLMIX_API_KEY";
};

// Uniform generation interface. generate() is safe for concurrent invocation;
// an internal admission gate caps in-flight calls at config.in_flight_limit.
class Backend {
 public:
  explicit Backend(BackendConfig config);
  virtual ~Backend() = default;

  GenerationResult generate(const std::string& prompt);

  const BackendConfig& config() const noexcept { return config_; }
  const std::string& model_id() const noexcept { return config_.model_id; }

  std::size_t calls() const;
  std::size_t prompt_tokens() const;
  std::size_t completion_tokens() const;

 protected:
  virtual GenerationResult do_generate(const std::string& prompt) = 0;

 private:
  BackendConfig config_;
  Semaphore gate_;
  mutable std::mutex stats_mutex_;
  std::size_t calls_ = 0;
  std::size_t prompt_tokens_ = 0;
  std::size_t completion_tokens_ = 0;
};

// Stable fingerprint of (model_id, prompt) used by exact-mode mock scripts.
std::string mock_fingerprint(std::string_view model_id, std::string_view prompt);

// Deterministic scripted backend. Script files are JSON:
//   {"mode": "ordinal", "models": {"m": ["reply", {"error": true}, ...]}}
//   {"mode": "exact",   "models": {"m": {"<fingerprint>": "reply", ...}}}
// Ordinal entries cycle, so lookups are total; exact mode yields an error
// result on a fingerprint miss. Entry objects accept "text", "error",
// "finish" ("stop"|"length"), and "delay_ms".
class MockBackend final : public Backend {
 public:
  MockBackend(BackendConfig config, const std::filesystem::path& script_path);

 protected:
  GenerationResult do_generate(const std::string& prompt) override;

 private:
  struct Entry {
    std::string text;
    FinishReason finish = FinishReason::stop;
    int delay_ms = 0;
  };

  static Entry parse_entry(const nlohmann::json& value);

  bool ordinal_ = true;
  std::vector<Entry> entries_;
  std::map<std::string, Entry> exact_entries_;
  std::mutex mutex_;
  std::size_t cursor_ = 0;
};

// Chat-completions client. POSTs {"model", "messages", "temperature",
// "max_tokens"} and reads the first choice's message content. Transport and
// malformed-body failures are retried with exponential backoff up to
// retry_limit; exhaustion yields a FinishReason::error result.
class RemoteBackend final : public Backend {
 public:
  explicit RemoteBackend(BackendConfig config);

 protected:
  GenerationResult do_generate(const std::string& prompt) override;

 private:
  std::string base_url_;
  std::string path_;
};

// Picks MockBackend or RemoteBackend from the endpoint scheme.
std::unique_ptr<Backend> make_backend(const BackendConfig& config);

}  // namespace skillmix
