#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cisc/confidence.hpp"
#include "cisc/records.hpp"

namespace cisc {

enum class Strategy { self_consistency, cisc, max_confidence, tie_break };
enum class Normalization { softmax, none };
enum class TiePolicy { first_occurrence, highest_raw_confidence_sum_then_first };

std::string_view to_string(Strategy s);
std::string_view to_string(Normalization n);
std::string_view to_string(TiePolicy p);
Strategy parse_strategy(std::string_view name);
Normalization parse_normalization(std::string_view name);
TiePolicy parse_tie_policy(std::string_view name);

struct StrategyConfig {
  Strategy strategy = Strategy::cisc;
  /// Softmax temperature; +infinity is allowed and yields uniform weights.
  double temperature = 1.0;
  Normalization normalization = Normalization::softmax;
  TiePolicy tie_policy = TiePolicy::highest_raw_confidence_sum_then_first;

  friend bool operator==(const StrategyConfig&, const StrategyConfig&) = default;
};

struct WeightVector {
  std::vector<double> weights;
};

struct VoteOutcome {
  std::string selected_answer;
  std::map<std::string, double> per_answer_mass;
  bool was_tie = false;
};

/// Temperature-scaled softmax over the scores (max-subtracted), or the raw
/// scores when normalization is `none`. Throws std::invalid_argument for T <= 0.
WeightVector normalize(std::span<const double> scores, double temperature, Normalization normalization);

/// Confidence-weighted majority vote. `raw_scores` feeds the
/// highest_raw_confidence_sum_then_first tie policy; when empty, ties fall
/// back to first occurrence. The sentinel answer is only selected when no
/// other answer carries positive mass.
VoteOutcome vote(std::span<const std::string> answers, std::span<const double> weights, TiePolicy tie_policy,
                 std::span<const double> raw_scores = {});

VoteOutcome run_strategy(std::span<const std::string> answers, std::span<const double> scores,
                         const StrategyConfig& config);
VoteOutcome run_strategy(const QuestionBundle& bundle, const ConfidenceVector& scores, const StrategyConfig& config);

namespace detail {

/// Answers interned to dense class ids; the hot path of the bootstrap works
/// on these instead of strings.
struct IdVote {
  int selected = -1;
  bool was_tie = false;
};

/// Reusable buffers for the id-based voting routines.
struct VoteScratch {
  std::vector<double> mass;
  std::vector<double> raw_sum;
  std::vector<int> first_pos;
  std::vector<double> weights;
  std::vector<int> touched;
};

IdVote vote_ids(std::span<const int> ids, std::span<const double> weights, std::span<const double> raw_scores,
                int num_classes, int sentinel_id, TiePolicy tie_policy, VoteScratch& scratch);

IdVote run_strategy_ids(std::span<const int> ids, std::span<const double> scores, int num_classes, int sentinel_id,
                        const StrategyConfig& config, VoteScratch& scratch);

}  // namespace detail

}  // namespace cisc
