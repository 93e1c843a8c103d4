#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cisc/records.hpp"

namespace cisc {

enum class ConfidenceKind { response_probability, verbal_binary, verbal_0_100, p_true };

std::string_view to_string(ConfidenceKind kind);
ConfidenceKind parse_confidence_kind(std::string_view name);

struct ConfidenceMethod {
  ConfidenceKind kind = ConfidenceKind::p_true;
  /// Only read for p_true: use P("1") / (P("1") + P("0")) instead of P("1").
  bool p_true_renormalize = false;

  friend bool operator==(const ConfidenceMethod&, const ConfidenceMethod&) = default;
};

std::string describe(const ConfidenceMethod& method);

/// One score per response of a bundle, all in [0, 1]. `flags[i]` lists the
/// diagnostics raised while scoring response i (fallbacks, clamping).
struct ConfidenceVector {
  std::vector<double> scores;
  ConfidenceMethod method;
  std::vector<std::set<std::string>> flags;
};

/// A per-response score plus the diagnostic it raised, if any.
struct ScoreResult {
  double value = 0.0;
  std::optional<std::string> flag;
};

/// Length-normalized sequence probability exp(mean logprob).
/// Throws std::invalid_argument on an empty list or a positive logprob.
double response_probability(std::span<const TokenLogprob> logprobs);

/// Parses the text generated after a verbal confidence prompt. Unparseable
/// input yields 0.0 with `confidence-parse-failed`.
ScoreResult parse_verbal(std::string_view continuation, ConfidenceKind kind);

/// Probability of the "1" token among the recorded candidates.
/// Throws std::invalid_argument on an empty map or probabilities outside [0, 1].
ScoreResult p_true(const std::map<std::string, double>& candidates, bool renormalize);

/// Never throws for per-response problems: they become fallback values plus flags.
ConfidenceVector score_bundle(const QuestionBundle& bundle, const ConfidenceMethod& method);

}  // namespace cisc
