#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace skillmix {

// Error categories. The CLI maps these onto its documented exit codes:
// InputError -> 2, MissingArtifactError -> 3, ConfigError -> 4, BackendError -> 5.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingArtifactError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BackendError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);
std::string to_hex(std::uint64_t value);

// Seeded RNG wrapper. All derived draws (uniform01, pick_weighted, shuffle) are
// built from raw engine output only, so a given seed yields the same sequence
// on every platform the same binary runs on.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  // Index draw proportional to weights; weights must be nonnegative with a
  // positive sum.
  std::size_t pick_weighted(std::span<const double> weights);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Counting semaphore; used as the per-backend in-flight admission gate.
class Semaphore {
 public:
  explicit Semaphore(int permits) : permits_(permits) {}

  void acquire();
  void release();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int permits_;
};

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(Semaphore& sem) : sem_(sem) { sem_.acquire(); }
  ~SemaphoreGuard() { sem_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  Semaphore& sem_;
};

// Logging is off unless SKILLMIX_LOG is set to "debug" or "info".
void log_debug(std::string_view message);
void log_info(std::string_view message);

std::string read_text_file(const std::filesystem::path& path);
// Writes via a sibling temp file and renames, so readers never see a partial file.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const nlohmann::json> rows);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);

std::size_t count_tokens(std::string_view text);

}  // namespace skillmix
