#pragma once

#include <compare>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace skillmix {

class Backend;

// A skill label ("algebra", "property law"). Construction normalizes the raw
// text: ASCII lowercasing, trimming, and collapsing internal whitespace runs
// to single spaces. Text that is empty after normalization has no keyword.
class SkillKeyword {
 public:
  SkillKeyword() = default;

  static std::optional<SkillKeyword> parse(std::string_view raw);
  static std::string normalize(std::string_view raw);

  const std::string& text() const noexcept { return text_; }

  friend auto operator<=>(const SkillKeyword&, const SkillKeyword&) = default;

 private:
  explicit SkillKeyword(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

void to_json(nlohmann::json& j, const SkillKeyword& kw);
void from_json(const nlohmann::json& j, SkillKeyword& kw);

// One question's repeated keyword generations, one keyword list per pass.
struct AnnotationRun {
  std::string question_id;
  std::vector<std::vector<SkillKeyword>> repeats;
};

// The consolidated keyword set a question requires.
struct SkillSet {
  std::string question_id;
  std::set<SkillKeyword> keywords;
};

struct ConsolidateOptions {
  // Count each keyword at most once per (question, repeat) pair, so a single
  // verbose completion cannot self-validate a keyword. When false, raw
  // occurrences are counted instead.
  bool per_pass_dedup = true;
};

// Extracts the keyword list from one model completion: the text after the last
// "Keywords:" marker (case-insensitive), split on commas and normalized, with
// duplicates dropped. A completion without the marker yields an empty list.
std::vector<SkillKeyword> parse_keyword_line(std::string_view raw);

// Runs `repeats` independent generations of the keyword prompt and parses each.
// A failed generation records an empty list for that pass.
AnnotationRun annotate_question(const std::string& question_id, const std::string& question,
                                Backend& backend, int repeats);

// Validation-set consolidation: a keyword survives for a question iff it
// appears in that question's repeats and its occurrence count across all runs
// is greater than one.
std::map<std::string, SkillSet> consolidate(const std::vector<AnnotationRun>& runs,
                                            const ConsolidateOptions& options = {});

// Test-time consolidation for a single question: no cross-question pool exists
// at inference time, so a keyword survives iff it appears more than once
// within the question's own repeats.
SkillSet consolidate_single(const AnnotationRun& run, const ConsolidateOptions& options = {});

void write_skillsets_jsonl(const std::filesystem::path& path,
                           const std::map<std::string, SkillSet>& skillsets);
std::map<std::string, SkillSet> read_skillsets_jsonl(const std::filesystem::path& path);

}  // namespace skillmix
