#include "skillmix/keywords.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

#include "skillmix/backend.hpp"
#include "skillmix/util.hpp"

namespace skillmix {

std::string SkillKeyword::normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::optional<SkillKeyword> SkillKeyword::parse(std::string_view raw) {
  std::string text = normalize(raw);
  if (text.empty()) {
    return std::nullopt;
  }
  return SkillKeyword(std::move(text));
}

void to_json(nlohmann::json& j, const SkillKeyword& kw) { j = kw.text(); }

void from_json(const nlohmann::json& j, SkillKeyword& kw) {
  auto parsed = SkillKeyword::parse(j.get<std::string>());
  if (!parsed) {
    throw InputError("empty skill keyword in JSON");
  }
  kw = *parsed;
}

std::vector<SkillKeyword> parse_keyword_line(std::string_view raw) {
  static constexpr std::string_view marker = "keywords:";
  std::string lowered(raw);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::size_t pos = lowered.rfind(marker);
  if (pos == std::string::npos) {
    log_debug("keyword parse miss: no 'Keywords:' marker");
    return {};
  }
  std::string_view tail = raw.substr(pos + marker.size());

  std::vector<SkillKeyword> out;
  std::set<SkillKeyword> seen;
  std::size_t start = 0;
  while (start <= tail.size()) {
    std::size_t comma = tail.find(',', start);
    std::string_view piece =
        tail.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (auto kw = SkillKeyword::parse(piece); kw && seen.insert(*kw).second) {
      out.push_back(*kw);
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

AnnotationRun annotate_question(const std::string& question_id, const std::string& question,
                                Backend& backend, int repeats) {
  if (repeats < 1) {
    throw ConfigError("annotation repeats must be >= 1");
  }
  AnnotationRun run;
  run.question_id = question_id;
  run.repeats.reserve(static_cast<std::size_t>(repeats));
  const std::string prompt = render_prompt(PromptKind::keyword, {{"question", question}});
  for (int i = 0; i < repeats; ++i) {
    GenerationResult result = backend.generate(prompt);
    if (result.finish_reason == FinishReason::error) {
      log_debug("annotation pass failed for question " + question_id);
      run.repeats.emplace_back();
    } else {
      run.repeats.push_back(parse_keyword_line(result.text));
    }
  }
  return run;
}

namespace {

void count_run(const AnnotationRun& run, const ConsolidateOptions& options,
               std::map<SkillKeyword, int>& counts) {
  for (const auto& repeat : run.repeats) {
    if (options.per_pass_dedup) {
      std::set<SkillKeyword> unique(repeat.begin(), repeat.end());
      for (const auto& kw : unique) ++counts[kw];
    } else {
      for (const auto& kw : repeat) ++counts[kw];
    }
  }
}

}  // namespace

std::map<std::string, SkillSet> consolidate(const std::vector<AnnotationRun>& runs,
                                            const ConsolidateOptions& options) {
  if (runs.empty()) {
    throw InputError("consolidate: no annotation runs");
  }
  std::map<SkillKeyword, int> global_counts;
  for (const auto& run : runs) {
    count_run(run, options, global_counts);
  }

  std::map<std::string, SkillSet> out;
  for (const auto& run : runs) {
    SkillSet& set = out[run.question_id];
    set.question_id = run.question_id;
    for (const auto& repeat : run.repeats) {
      for (const auto& kw : repeat) {
        if (global_counts.at(kw) > 1) {
          set.keywords.insert(kw);
        }
      }
    }
  }
  return out;
}

SkillSet consolidate_single(const AnnotationRun& run, const ConsolidateOptions& options) {
  std::map<SkillKeyword, int> counts;
  count_run(run, options, counts);
  SkillSet set;
  set.question_id = run.question_id;
  for (const auto& [kw, count] : counts) {
    if (count > 1) {
      set.keywords.insert(kw);
    }
  }
  return set;
}

void write_skillsets_jsonl(const std::filesystem::path& path,
                           const std::map<std::string, SkillSet>& skillsets) {
  std::vector<nlohmann::json> rows;
  rows.reserve(skillsets.size());
  for (const auto& [id, set] : skillsets) {
    nlohmann::json row;
    row["question_id"] = id;
    row["keywords"] = set.keywords;
    rows.push_back(std::move(row));
  }
  write_jsonl(path, rows);
}

std::map<std::string, SkillSet> read_skillsets_jsonl(const std::filesystem::path& path) {
  std::map<std::string, SkillSet> out;
  for (const auto& row : read_jsonl(path)) {
    SkillSet set;
    set.question_id = row.at("question_id").get<std::string>();
    for (const auto& kw : row.at("keywords")) {
      set.keywords.insert(kw.get<SkillKeyword>());
    }
    out[set.question_id] = std::move(set);
  }
  return out;
}

}  // namespace skillmix
