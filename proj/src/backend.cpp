#include "skillmix/backend.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace skillmix {

std::string_view answer_kind_name(AnswerKind kind) {
  return kind == AnswerKind::numeric ? "numeric" : "multiple_choice";
}

AnswerKind answer_kind_from_name(std::string_view name) {
  if (name == "multiple_choice") return AnswerKind::multiple_choice;
  if (name == "numeric") return AnswerKind::numeric;
  throw std::invalid_argument("unknown answer kind: " + std::string(name));
}

std::string_view finish_reason_name(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop:
      return "stop";
    case FinishReason::length:
      return "length";
    case FinishReason::error:
      return "error";
  }
  return "error";
}

namespace {

constexpr std::string_view kAnswerPhrase = "the answer is";

bool phrase_at(std::string_view text, std::size_t pos) {
  if (pos + kAnswerPhrase.size() > text.size()) return false;
  for (std::size_t i = 0; i < kAnswerPhrase.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[pos + i])) != kAnswerPhrase[i]) return false;
  }
  return true;
}

std::vector<std::size_t> phrase_occurrences(std::string_view text) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i + kAnswerPhrase.size() <= text.size(); ++i) {
    if (phrase_at(text, i)) out.push_back(i);
  }
  return out;
}

std::size_t skip_spaces(std::string_view text, std::size_t pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  return pos;
}

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

// Strips one or more brace pairs that enclose the whole string, e.g. "{42}".
// "{1}{2}" is left alone: its first brace does not close at the end.
std::string strip_surrounding_braces(std::string s) {
  while (s.size() >= 2 && s.front() == '{' && s.back() == '}') {
    int depth = 0;
    bool wraps = true;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}') --depth;
      if (depth == 0) {
        wraps = false;
        break;
      }
    }
    if (!wraps) break;
    s = s.substr(1, s.size() - 2);
  }
  return s;
}

std::optional<std::string> last_boxed_contents(std::string_view text) {
  constexpr std::string_view marker = "\\boxed{";
  std::size_t search_end = text.size();
  while (true) {
    std::size_t pos = text.rfind(marker, search_end == 0 ? 0 : search_end - 1);
    if (pos == std::string_view::npos) return std::nullopt;
    std::size_t start = pos + marker.size();
    int depth = 1;
    for (std::size_t i = start; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}') {
        if (--depth == 0) {
          return std::string(text.substr(start, i - start));
        }
      }
    }
    // Unbalanced (truncated output); try an earlier occurrence.
    if (pos == 0) return std::nullopt;
    search_end = pos;
  }
}

}  // namespace

std::string normalize_numeric_answer(std::string_view raw) {
  std::string s;
  s.reserve(raw.size());
  for (unsigned char c : raw) {
    if (!std::isspace(c)) s += static_cast<char>(c);
  }
  s = strip_surrounding_braces(std::move(s));
  std::size_t sign = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
  std::size_t zeros_end = sign;
  while (zeros_end + 1 < s.size() && s[zeros_end] == '0' &&
         std::isdigit(static_cast<unsigned char>(s[zeros_end + 1]))) {
    ++zeros_end;
  }
  s.erase(sign, zeros_end - sign);
  return s;
}

std::optional<std::string> extract_answer(std::string_view text, AnswerKind kind) {
  if (kind == AnswerKind::multiple_choice) {
    std::optional<std::string> last_paren;
    std::optional<std::string> last_bare;
    for (std::size_t pos : phrase_occurrences(text)) {
      std::size_t i = skip_spaces(text, pos + kAnswerPhrase.size());
      if (i < text.size() && text[i] == '(') {
        if (i + 2 < text.size() && is_upper(text[i + 1]) && text[i + 2] == ')') {
          last_paren = std::string(1, text[i + 1]);
        }
        continue;
      }
      if (i < text.size() && is_upper(text[i])) {
        bool boundary = i + 1 >= text.size() ||
                        !std::isalnum(static_cast<unsigned char>(text[i + 1]));
        if (boundary) last_bare = std::string(1, text[i]);
      }
    }
    return last_paren ? last_paren : last_bare;
  }

  if (auto boxed = last_boxed_contents(text)) {
    std::string normalized = normalize_numeric_answer(*boxed);
    if (!normalized.empty()) return normalized;
  }
  auto occurrences = phrase_occurrences(text);
  for (auto it = occurrences.rbegin(); it != occurrences.rend(); ++it) {
    std::size_t i = skip_spaces(text, *it + kAnswerPhrase.size());
    std::size_t end = i;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    std::string token(text.substr(i, end - i));
    while (!token.empty() && std::string_view(".,;:!?").find(token.back()) != std::string_view::npos) {
      token.pop_back();
    }
    std::string normalized = normalize_numeric_answer(token);
    if (!normalized.empty()) return normalized;
  }
  return std::nullopt;
}

Backend::Backend(BackendConfig config)
    : config_(std::move(config)), gate_(std::max(1, config_.in_flight_limit)) {}

GenerationResult Backend::generate(const std::string& prompt) {
  SemaphoreGuard guard(gate_);
  GenerationResult result = do_generate(prompt);
  std::lock_guard lock(stats_mutex_);
  ++calls_;
  prompt_tokens_ += result.prompt_tokens;
  completion_tokens_ += result.completion_tokens;
  return result;
}

std::size_t Backend::calls() const {
  std::lock_guard lock(stats_mutex_);
  return calls_;
}

std::size_t Backend::prompt_tokens() const {
  std::lock_guard lock(stats_mutex_);
  return prompt_tokens_;
}

std::size_t Backend::completion_tokens() const {
  std::lock_guard lock(stats_mutex_);
  return completion_tokens_;
}

std::string mock_fingerprint(std::string_view model_id, std::string_view prompt) {
  std::string key;
  key.reserve(model_id.size() + prompt.size() + 1);
  key += model_id;
  key += '\n';
  key += prompt;
  return to_hex(fnv1a64(key));
}

MockBackend::MockBackend(BackendConfig config, const std::filesystem::path& script_path)
    : Backend(std::move(config)) {
  nlohmann::json script = read_json_file(script_path);
  std::string mode = script.value("mode", "ordinal");
  if (mode != "ordinal" && mode != "exact") {
    throw ConfigError("mock script " + script_path.string() + ": unknown mode '" + mode + "'");
  }
  ordinal_ = mode == "ordinal";
  const auto& models = script.at("models");
  auto it = models.find(model_id());
  if (it == models.end()) {
    throw ConfigError("mock script " + script_path.string() + " has no entries for model '" +
                      model_id() + "'");
  }
  if (ordinal_) {
    for (const auto& value : *it) {
      entries_.push_back(parse_entry(value));
    }
    if (entries_.empty()) {
      throw ConfigError("mock script " + script_path.string() + ": model '" + model_id() +
                        "' has no responses to cycle");
    }
  } else {
    for (const auto& [fingerprint, value] : it->items()) {
      exact_entries_[fingerprint] = parse_entry(value);
    }
  }
}

MockBackend::Entry MockBackend::parse_entry(const nlohmann::json& value) {
  Entry entry;
  if (value.is_string()) {
    entry.text = value.get<std::string>();
    return entry;
  }
  entry.text = value.value("text", std::string());
  if (value.value("error", false)) {
    entry.finish = FinishReason::error;
    entry.text.clear();
  } else if (value.value("finish", "stop") == std::string("length")) {
    entry.finish = FinishReason::length;
  }
  entry.delay_ms = value.value("delay_ms", 0);
  return entry;
}

GenerationResult MockBackend::do_generate(const std::string& prompt) {
  Entry entry;
  {
    std::lock_guard lock(mutex_);
    if (ordinal_) {
      entry = entries_[cursor_ % entries_.size()];
      ++cursor_;
    } else {
      auto it = exact_entries_.find(mock_fingerprint(model_id(), prompt));
      if (it == exact_entries_.end()) {
        log_debug("mock fingerprint miss for model " + model_id());
        return {"", FinishReason::error, count_tokens(prompt), 0};
      }
      entry = it->second;
    }
  }
  if (entry.delay_ms > 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(entry.delay_ms));
  }
  if (entry.finish == FinishReason::error) {
    return {"", FinishReason::error, count_tokens(prompt), 0};
  }
  return {entry.text, entry.finish, count_tokens(prompt), count_tokens(entry.text)};
}

RemoteBackend::RemoteBackend(BackendConfig config) : Backend(std::move(config)) {
  const std::string& endpoint = this->config().endpoint;
  std::size_t scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("invalid backend endpoint: " + endpoint);
  }
  std::size_t path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    base_url_ = endpoint;
    path_ = "/v1/chat/completions";
  } else {
    base_url_ = endpoint.substr(0, path_start);
    path_ = endpoint.substr(path_start);
  }
}

GenerationResult RemoteBackend::do_generate(const std::string& prompt) {
  nlohmann::json body{
      {"model", config().model_id},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", config().temperature},
      {"max_tokens", config().max_tokens},
  };
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv(config().api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  for (int attempt = 0; attempt <= config().retry_limit; ++attempt) {
    if (attempt > 0) {
      auto delay = std::chrono::milliseconds(config().retry_backoff_ms) * (1 << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(base_url_);
    client.set_read_timeout(300, 0);
    client.set_connection_timeout(10, 0);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res || res->status < 200 || res->status >= 300) {
      log_debug("backend " + config().model_id + ": transport failure, attempt " +
                std::to_string(attempt + 1));
      continue;
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty() ||
        !parsed["choices"][0].contains("message") ||
        !parsed["choices"][0]["message"].contains("content") ||
        !parsed["choices"][0]["message"]["content"].is_string()) {
      log_debug("backend " + config().model_id + ": malformed response body");
      continue;
    }
    GenerationResult result;
    result.text = parsed["choices"][0]["message"]["content"].get<std::string>();
    std::string finish = parsed["choices"][0].value("finish_reason", "stop");
    result.finish_reason = finish == "length" ? FinishReason::length : FinishReason::stop;
    if (parsed.contains("usage") && parsed["usage"].is_object()) {
      result.prompt_tokens = parsed["usage"].value("prompt_tokens", 0u);
      result.completion_tokens = parsed["usage"].value("completion_tokens", 0u);
    }
    if (result.prompt_tokens == 0) result.prompt_tokens = count_tokens(prompt);
    if (result.completion_tokens == 0) result.completion_tokens = count_tokens(result.text);
    return result;
  }
  return {"", FinishReason::error, count_tokens(prompt), 0};
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.endpoint.rfind("mock:", 0) == 0) {
    return std::make_unique<MockBackend>(config, config.endpoint.substr(5));
  }
  if (config.endpoint.rfind("http://", 0) == 0 || config.endpoint.rfind("https://", 0) == 0) {
    return std::make_unique<RemoteBackend>(config);
  }
  throw ConfigError("unsupported backend endpoint for model '" + config.model_id +
                    "': " + config.endpoint);
}

}  // namespace skillmix
