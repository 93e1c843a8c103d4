#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cisc/aggregate.hpp"
#include "cisc/confidence.hpp"
#include "cisc/grid.hpp"
#include "cisc/metrics.hpp"
#include "cisc/records.hpp"

namespace cisc {

enum class Replacement { without, with };

std::string_view to_string(Replacement r);
Replacement parse_replacement(std::string_view name);

struct BootstrapConfig {
  std::vector<int> budgets{5, 10};
  int resamples = 500;
  std::uint64_t base_seed = 0;
  Replacement replacement = Replacement::without;
  /// Worker threads; 0 = hardware concurrency. Never affects results.
  unsigned jobs = 1;
};

struct AccuracyCurve {
  std::map<int, double> mean;
  /// Resampling standard error of the mean (Monte Carlo noise of the
  /// bootstrap, questions held fixed).
  std::map<int, double> std_error;
  std::vector<std::string> warnings;
};

/// Mean accuracy of one strategy at each budget: for every question and
/// resample draw b responses (seeded by question id and resample index),
/// vote, then average over resamples and questions.
AccuracyCurve bootstrap_accuracy(std::span<const QuestionBundle> bundles, std::span<const ConfidenceVector> scores,
                                 const StrategyConfig& config, const BootstrapConfig& bcfg);

/// Smallest budget at which self-consistency reaches `target_accuracy`;
/// one past the curve's last budget (31 for the usual 1..30 curve) if never.
int comparable_sc_samples(double target_accuracy, const AccuracyCurve& sc_curve);

/// 100 * (1 - budget / comparable).
double cost_reduction(int cisc_budget, int comparable);

/// 100 * (cisc / sc - 1). Throws std::invalid_argument when sc_acc == 0.
double accuracy_improvement(double cisc_acc, double sc_acc);

struct HeldoutSplit {
  std::vector<std::size_t> tuning;      // indices into the input, ascending
  std::vector<std::size_t> evaluation;  // indices into the input, ascending
};

/// Question-level split: floor(fraction * n) tuning questions (at least one).
HeldoutSplit split_heldout(std::span<const QuestionBundle> bundles, double fraction, std::uint64_t seed);

struct TuningResult {
  double temperature = 1.0;
  int budget = 10;
  std::vector<std::pair<double, double>> grid_accuracy;  // (T, accuracy)
};

/// Grid search for the CISC softmax temperature maximizing bootstrap accuracy
/// at `budget`. Ties go to the larger temperature.
TuningResult tune_temperature(std::span<const QuestionBundle> bundles, std::span<const ConfidenceVector> scores,
                              int budget, const GridSpec& grid, const BootstrapConfig& bcfg,
                              TiePolicy tie_policy = TiePolicy::highest_raw_confidence_sum_then_first);

struct StrategySpec {
  std::string label;
  StrategyConfig config;
};

struct EvalOptions {
  ConfidenceMethod method;
  std::vector<StrategySpec> strategies;
  BootstrapConfig bootstrap;
  double temperature = 1.0;
  std::string temperature_source = "fixed";  // "fixed" or "tuned"
  std::optional<TuningResult> tuning;
  int calibration_bins = 10;
  /// Question-level bootstrap sets for accuracy-improvement intervals; 0 disables.
  int ci_resamples = 0;
};

struct CurvePointReport {
  int budget = 0;
  double accuracy = 0.0;
  double std_error = 0.0;
  int questions = 0;
};

struct ComparisonPoint {
  int budget = 0;
  int comparable_sc_samples = 0;
  double cost_reduction_pct = 0.0;
  double accuracy_improvement_pct = 0.0;        // micro: pooled questions
  double accuracy_improvement_macro_pct = 0.0;  // mean over dataset kinds
  std::optional<double> ci_low;
  std::optional<double> ci_high;
};

struct StrategyReport {
  std::string label;
  StrategyConfig config;
  std::vector<CurvePointReport> curve;
  std::vector<ComparisonPoint> vs_self_consistency;  // empty for self-consistency itself
};

struct WqdSummary {
  double strict = 0.0;
  double half_credit = 0.0;
  long long pair_count = 0;
  int questions_contributing = 0;
  double tie_pair_fraction = 0.0;
};

struct EvalReport {
  int schema_version = 1;
  std::string confidence_method;
  double temperature = 1.0;
  std::string temperature_source;
  std::optional<TuningResult> tuning;
  std::vector<int> budgets;
  int resamples = 0;
  std::uint64_t base_seed = 0;
  std::string replacement;
  int questions = 0;
  int responses = 0;
  std::vector<std::string> dataset_kinds;
  std::vector<StrategyReport> strategies;
  std::vector<CurvePointReport> sc_reference;
  std::optional<WqdSummary> wqd;
  std::optional<CalibrationReport> calibration;
  std::vector<std::string> warnings;
};

std::vector<ConfidenceVector> score_all(std::span<const QuestionBundle> bundles, const ConfidenceMethod& method);

EvalReport evaluate(std::span<const QuestionBundle> bundles, std::span<const ConfidenceVector> scores,
                    const EvalOptions& options);

/// Default strategy set: self-consistency plus CISC at `temperature`, with
/// the softmax(T=1) / no-normalization ablations when requested.
std::vector<StrategySpec> standard_strategies(std::span<const Strategy> strategies, double temperature,
                                              TiePolicy tie_policy, bool normalization_ablation);

}  // namespace cisc
