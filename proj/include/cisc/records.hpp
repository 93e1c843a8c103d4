#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cisc {

enum class DatasetKind { gsm8k, math, mmlu_pro, bbh_options, bbh_free, generic };

std::string_view to_string(DatasetKind kind);
/// Throws std::invalid_argument for unknown names.
DatasetKind parse_dataset_kind(std::string_view name);

/// Answer class used for responses whose final answer could not be recovered.
/// Never equal to a gold answer.
inline constexpr std::string_view kSentinelAnswer = "\xE2\x88\x85";  // U+2205

namespace flag {
inline constexpr std::string_view kAnswerExtractionFailed = "answer-extraction-failed";
inline constexpr std::string_view kAnswerCanonicalizationFailed = "answer-canonicalization-failed";
inline constexpr std::string_view kInvalidLogprob = "invalid-logprob";
inline constexpr std::string_view kInvalidCandidateProbability = "invalid-candidate-probability";
inline constexpr std::string_view kConfidenceParseFailed = "confidence-parse-failed";
inline constexpr std::string_view kConfidenceClamped = "confidence-clamped";
inline constexpr std::string_view kConfidenceTokenMissing = "confidence-token-missing";
inline constexpr std::string_view kConfidenceSignalMissing = "confidence-signal-missing";
inline constexpr std::string_view kGenerationFailed = "generation-failed";
inline constexpr std::string_view kConfidenceRequestFailed = "confidence-request-failed";
}  // namespace flag

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;  // natural log, <= 0

  friend bool operator==(const TokenLogprob&, const TokenLogprob&) = default;
};

struct ResponseRecord {
  int response_index = 0;
  std::string response_text;
  std::optional<std::string> raw_answer;
  std::optional<std::string> canonical_answer;
  std::optional<std::vector<TokenLogprob>> reasoning_logprobs;
  std::optional<std::string> confidence_continuation;
  std::optional<std::map<std::string, double>> confidence_token_candidates;
  std::set<std::string> flags;

  /// The answer class this response votes for: its canonical answer, or the
  /// sentinel when extraction or canonicalization failed.
  std::string_view vote_answer() const;

  friend bool operator==(const ResponseRecord&, const ResponseRecord&) = default;
};

struct QuestionBundle {
  std::string question_id;
  DatasetKind dataset_kind = DatasetKind::generic;
  std::string question_text;
  std::string gold_answer;  // canonical
  std::vector<ResponseRecord> responses;

  bool is_correct(const ResponseRecord& r) const { return r.vote_answer() == gold_answer; }

  friend bool operator==(const QuestionBundle&, const QuestionBundle&) = default;
};

/// Structural problem in a response dump. `line()` is 1-based, 0 when the
/// error is not tied to a single line.
class DumpError : public std::runtime_error {
 public:
  DumpError(std::size_t line, const std::string& what);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct LoadOptions {
  /// Overrides the per-line dataset_kind when set.
  std::optional<DatasetKind> dataset_kind;
};

std::vector<QuestionBundle> load_dump(const std::filesystem::path& path, const LoadOptions& options = {});
std::vector<QuestionBundle> parse_dump(std::istream& in, const LoadOptions& options = {});

/// Writes bundles back in the line-per-response dump format.
void write_dump(std::ostream& out, std::span<const QuestionBundle> bundles);

/// Payload of the last `Proposed answer: ...` marker, or nullopt.
std::optional<std::string> extract_answer(std::string_view response_text, DatasetKind kind);

/// Normalizes an answer string so equal answers compare byte-equal.
/// Throws std::invalid_argument when nothing is left after normalization.
std::string canonicalize_answer(std::string_view raw, DatasetKind kind);

/// Fills raw_answer / canonical_answer and the matching failure flags.
void derive_answer(ResponseRecord& record, DatasetKind kind);

std::size_t total_responses(std::span<const QuestionBundle> bundles);
std::size_t total_flags(std::span<const QuestionBundle> bundles);

}  // namespace cisc
