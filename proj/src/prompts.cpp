#include <array>
#include <map>
#include <stdexcept>
#include <string>

#include "skillmix/backend.hpp"

namespace skillmix {

namespace {

constexpr std::string_view kKeywordTemplate =
    R"(Question: {question}

What are the core knowledge, subjects or skills needed to solve this problem? List 2-5 keywords separated in comma. Example keywords: psychology, virology, behavioral theory, microbiology, diplomacy, political science, property law, finance, business. Give ONLY the keywords, no other words or explanation.

Follow this format: Keywords: <keyword1>, <keyword2>...)";

constexpr std::string_view kAnswerLineMc =
    R"(Provide your step-by-step reasoning first, and then print "The answer is (X)" where X is the answer choice (one capital letter), at the end of your response.)";

constexpr std::string_view kAnswerLineMath =
    R"(Provide your step-by-step reasoning first, and then print "The answer is \\boxed{X}", where X is the final answer, at the end of your response.)";

constexpr std::string_view kCotMcTemplate =
    R"(Question: {question}

Provide your step-by-step reasoning first, and then print "The answer is (X)" where X is the answer choice (one capital letter), at the end of your response.)";

constexpr std::string_view kCotMathTemplate =
    R"(Question: {question}

Provide your step-by-step reasoning first, and then print "The answer is \\boxed{X}", where X is the final answer, at the end of your response.)";

constexpr std::string_view kAggregateHeader =
    R"(You have been provided with a set of responses from various open-source models to the latest user query. Your task is to synthesize these responses into a single, high-quality response. It is crucial to critically evaluate the information provided in these responses, recognizing that some of it may be biased or incorrect. Your response should not simply replicate the given answers but should offer a refined, accurate, and comprehensive reply to the instruction. Ensure your response is well-structured, coherent, and adheres to the highest standards of accuracy and reliability.

Responses from models:

{responses}

Question: {question}

)";

constexpr std::string_view kDiscussHeader =
    R"(You have been provided with a set of responses from several models, including your own earlier response, to the latest user query. Critically evaluate the information in these responses, recognizing that some of it may be biased or incorrect. Then reconsider the problem and provide your own revised response to the query.

Responses from models:

{responses}

Question: {question}

)";

const std::string kAggregateMc = std::string(kAggregateHeader) + std::string(kAnswerLineMc);
const std::string kAggregateMath = std::string(kAggregateHeader) + std::string(kAnswerLineMath);
const std::string kDiscussMc = std::string(kDiscussHeader) + std::string(kAnswerLineMc);
const std::string kDiscussMath = std::string(kDiscussHeader) + std::string(kAnswerLineMath);

const std::string& require_field(const std::map<std::string, std::string>& fields,
                                 const char* name) {
  auto it = fields.find(name);
  if (it == fields.end()) {
    throw std::invalid_argument(std::string("render_prompt: missing field '") + name + "'");
  }
  return it->second;
}

// Single pass: substituted values are never rescanned, and {tokens} that are
// not supplied fields (e.g. the literal {X} in the boxed-answer instruction)
// pass through untouched.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        std::string name(tmpl.substr(i + 1, close - i - 1));
        if (auto it = values.find(name); it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

}  // namespace

std::string_view prompt_template(PromptKind kind, AnswerKind answer_kind) {
  switch (kind) {
    case PromptKind::keyword:
      return kKeywordTemplate;
    case PromptKind::cot_multiple_choice:
      return kCotMcTemplate;
    case PromptKind::cot_math:
      return kCotMathTemplate;
    case PromptKind::aggregate:
      return answer_kind == AnswerKind::numeric ? kAggregateMath : kAggregateMc;
    case PromptKind::discuss:
      return answer_kind == AnswerKind::numeric ? kDiscussMath : kDiscussMc;
  }
  throw std::invalid_argument("unknown prompt kind");
}

std::string render_prompt(PromptKind kind, const std::map<std::string, std::string>& fields) {
  switch (kind) {
    case PromptKind::keyword:
    case PromptKind::cot_multiple_choice:
    case PromptKind::cot_math: {
      const std::string& question = require_field(fields, "question");
      return substitute(prompt_template(kind), {{"question", question}});
    }
    case PromptKind::aggregate:
    case PromptKind::discuss: {
      const std::string& question = require_field(fields, "question");
      const std::string& responses = require_field(fields, "responses");
      AnswerKind answer_kind = answer_kind_from_name(require_field(fields, "answer_kind"));
      return substitute(prompt_template(kind, answer_kind),
                        {{"question", question}, {"responses", responses}});
    }
  }
  throw std::invalid_argument("unknown prompt kind");
}

}  // namespace skillmix
