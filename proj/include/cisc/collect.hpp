#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cisc/confidence.hpp"
#include "cisc/records.hpp"

namespace cisc {

/// Wire dialect of the endpoint. `completions` sends raw prompt text to
/// /completions; `chat` sends messages to /chat/completions and continues the
/// assistant turn for the confidence step (continue_final_message).
enum class ApiMode { completions, chat };

std::string_view to_string(ApiMode mode);
ApiMode parse_api_mode(std::string_view name);

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{20000};
  double jitter = 0.5;  // delay scaled by a uniform factor in [1 - jitter, 1 + jitter]

  std::chrono::milliseconds delay_for(int attempt, double unit_random) const;
};

struct CollectorConfig {
  std::string endpoint = "http://localhost:8000/v1";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  ApiMode api = ApiMode::completions;
  int samples_per_question = 30;
  double sampling_temperature = 1.0;
  int max_tokens = 1024;
  int max_concurrent_requests = 4;
  RetryPolicy retry;
  bool request_logprobs = true;
  int top_candidates_at_confidence = 5;
  /// Which confidence prompt to append; p_true uses the binary prompt and
  /// response_probability skips the confidence step.
  ConfidenceKind confidence = ConfidenceKind::p_true;
  std::chrono::seconds timeout{120};
  std::uint64_t seed = 0;
};

struct QuestionInput {
  std::string question_id;
  DatasetKind dataset_kind = DatasetKind::generic;
  std::string question_text;
  std::string gold_answer;
};

/// JSONL with question_id, dataset_kind, question_text, gold_answer per line.
std::vector<QuestionInput> load_questions(const std::filesystem::path& path);

struct PromptPair {
  std::string question_prompt;
  /// Appended verbatim after the generated answer; ends with "(".
  std::string confidence_prompt;
};

PromptPair render_prompts(std::string_view question, DatasetKind kind, ConfidenceKind method);

/// The step-two transcript: the step-one prompt, the generated answer and
/// the confidence prompt, concatenated without alteration.
std::string confidence_transcript(std::string_view question_prompt, std::string_view completion,
                                  std::string_view confidence_prompt);

class CollectError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AuthenticationError : public CollectError {
 public:
  using CollectError::CollectError;
};

struct CollectSummary {
  int records = 0;
  int generation_failures = 0;
  int confidence_failures = 0;
};

/// Samples `samples_per_question` answers per question, then asks for the
/// confidence token on the same transcript. Each finished record is passed to
/// `sink` as one dump line (without the trailing newline); calls to `sink`
/// are serialized. Throws AuthenticationError on 401/403 and CollectError on
/// responses that do not follow the wire format.
CollectSummary collect_responses(std::span<const QuestionInput> questions, const CollectorConfig& config,
                                 const std::function<void(const std::string&)>& sink);

}  // namespace cisc
