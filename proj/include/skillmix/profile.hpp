#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skillmix/backend.hpp"
#include "skillmix/keywords.hpp"

namespace skillmix {

struct Choice {
  std::string label;
  std::string text;
};

struct ValidationRecord {
  std::string question_id;
  std::string question;
  AnswerKind kind = AnswerKind::multiple_choice;
  std::vector<Choice> choices;               // multiple choice only
  std::optional<std::string> gold_answer;    // optional for test queries
};

// JSONL ingestion. Each line: {"question_id", "question", "kind",
// "choices": [{"label","text"}...], "gold_answer"}. With require_gold the
// loader also enforces the answer-key invariants (>=2 choices, gold is a
// choice label for multiple choice).
std::vector<ValidationRecord> load_records_jsonl(const std::filesystem::path& path,
                                                 bool require_gold);

// The question as presented to a model: the stem plus "(A) ..." choice lines.
std::string format_question(const ValidationRecord& record);

// Comparison rule per kind: labels case-insensitively, numeric answers after
// canonical normalization.
bool answers_equal(std::string_view extracted, std::string_view gold, AnswerKind kind);

struct CotRecord {
  std::string question_id;
  std::string model_id;
  std::string cot_text;
  std::optional<std::string> extracted_answer;
  bool correct = false;
};

struct ModelProfile {
  std::string model_id;
  std::map<SkillKeyword, int> skill_scores;
  int total_score = 0;
};

struct AggregatorProfile {
  std::string model_id;
  double aggregation_accuracy = 0.0;
  int items_evaluated = 0;
};

// One synthetic aggregation-task item: a question with three chain-of-thought
// candidates, exactly one of which is correct.
struct AggregationItem {
  std::string question_id;
  std::string question;  // formatted, choices included
  AnswerKind kind = AnswerKind::multiple_choice;
  std::string gold_answer;
  std::array<std::string, 3> cots;
  int correct_index = 0;
};

// Runs the zero-shot CoT prompt for every record and scores the extracted
// answers against gold. Generation failures yield incorrect records with no
// extracted answer.
std::vector<CotRecord> evaluate_model(Backend& backend, std::span<const ValidationRecord> records);

// Folds +-1 per record into the skills of that record's question. Keywords the
// model was never scored on stay absent.
ModelProfile build_profile(const std::string& model_id, std::span<const CotRecord> records,
                           const std::map<std::string, SkillSet>& skillsets);

// Builds one item per eligible question (>=1 correct and >=2 incorrect CoTs
// across all models), sampling candidates uniformly without replacement and
// shuffling their order. Throws InputError("aggregation task empty") when no
// question qualifies.
std::vector<AggregationItem> build_aggregation_items(std::span<const CotRecord> all_records,
                                                     std::span<const ValidationRecord> records,
                                                     Rng& rng);

AggregatorProfile benchmark_aggregator(Backend& backend, std::span<const AggregationItem> items);

// Argmax by accuracy; ties break to the higher profile total, then to the
// lexicographically smaller model id.
std::string select_aggregator(std::span<const AggregatorProfile> reports,
                              std::span<const ModelProfile> profiles);

std::set<SkillKeyword> profile_vocabulary(std::span<const ModelProfile> profiles);

void write_profile_json(const std::filesystem::path& path, const ModelProfile& profile);
ModelProfile read_profile_json(const std::filesystem::path& path);

void write_cot_records_jsonl(const std::filesystem::path& path, std::span<const CotRecord> records);
std::vector<CotRecord> read_cot_records_jsonl(const std::filesystem::path& path);

void write_aggregation_items_jsonl(const std::filesystem::path& path,
                                   std::span<const AggregationItem> items);
std::vector<AggregationItem> read_aggregation_items_jsonl(const std::filesystem::path& path);

}  // namespace skillmix
