#include "skillmix/util.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace skillmix {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string to_hex(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("Rng::below requires n > 0");
  }
  auto idx = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
  return idx < n ? idx : n - 1;
}

std::size_t Rng::pick_weighted(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) {
      throw std::invalid_argument("pick_weighted: negative weight");
    }
    sum += w;
  }
  if (!(sum > 0.0)) {
    throw std::invalid_argument("pick_weighted: weights sum to zero");
  }
  double u = uniform01() * sum;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) {
      return i;
    }
    u -= weights[i];
  }
  // Rounding can very occasionally exhaust u; take the last positive weight.
  for (std::size_t i = weights.size(); i > 0; --i) {
    if (weights[i - 1] > 0.0) {
      return i - 1;
    }
  }
  return weights.size() - 1;
}

void Semaphore::acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [this] { return permits_ > 0; });
  --permits_;
}

void Semaphore::release() {
  {
    std::lock_guard lock(mutex_);
    ++permits_;
  }
  cv_.notify_one();
}

namespace {

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("SKILLMIX_LOG");
    if (env == nullptr) return 0;
    std::string_view v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

std::mutex& log_mutex() {
  static std::mutex m;
  return m;
}

void log_at(int level, std::string_view tag, std::string_view message) {
  if (log_level() < level) return;
  std::lock_guard lock(log_mutex());
  std::clog << "[skillmix " << tag << "] " << message << '\n';
}

}  // namespace

void log_debug(std::string_view message) { log_at(2, "debug", message); }
void log_info(std::string_view message) { log_at(1, "info", message); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw InputError("cannot write file: " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw InputError("short write: " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open file: " + path.string());
  }
  std::vector<nlohmann::json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto parsed = nlohmann::json::parse(line, nullptr, false);
    if (parsed.is_discarded()) {
      throw InputError("malformed JSON at " + path.string() + ":" + std::to_string(lineno));
    }
    rows.push_back(std::move(parsed));
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path, std::span<const nlohmann::json> rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump();
    out += '\n';
  }
  write_text_file(path, out);
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  auto parsed = nlohmann::json::parse(read_text_file(path), nullptr, false);
  if (parsed.is_discarded()) {
    throw InputError("malformed JSON in " + path.string());
  }
  return parsed;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

std::size_t count_tokens(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_token = false;
    } else if (!in_token) {
      in_token = true;
      ++count;
    }
  }
  return count;
}

}  // namespace skillmix
