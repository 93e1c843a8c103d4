#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cisc/confidence.hpp"
#include "cisc/records.hpp"

namespace cisc {

struct ScoredOutcome {
  std::string question_id;
  double confidence = 0.0;
  bool correct = false;
};

enum class WqdTieMode { strict, half_credit };

struct WqdReport {
  double wqd = 0.0;
  long long pair_count = 0;
  int questions_contributing = 0;
  double tie_pair_fraction = 0.0;
};

/// Within-question discrimination: over all (correct, incorrect) response
/// pairs of the same question, the fraction where the correct response has
/// the higher confidence. Throws std::domain_error when there are no pairs.
WqdReport wqd(std::span<const ScoredOutcome> outcomes, WqdTieMode tie_mode = WqdTieMode::strict);

/// Equal-width-bin expected calibration error on [0, 1].
double ece(std::span<const ScoredOutcome> outcomes, int bin_count = 10);
double brier(std::span<const ScoredOutcome> outcomes);

/// Log-odds temperature scaling: c_T = sigmoid(logit(c) / T), with c clamped
/// to [1e-6, 1 - 1e-6].
double scale_confidence(double confidence, double temperature);

/// Mean negative log-likelihood of the labels under temperature-scaled confidences.
double calibration_nll(std::span<const ScoredOutcome> outcomes, double temperature);

struct CalibrationFit {
  double temperature = 1.0;
  std::optional<std::string> warning;
};

/// NLL-minimizing temperature: 80-point log grid on [1e-4, 1e4] refined by a
/// golden-section pass. Never worse than T = 1 on the fitting data.
CalibrationFit fit_calibration_temperature(std::span<const ScoredOutcome> outcomes);

struct CalibrationReport {
  double ece = 0.0;
  double brier = 0.0;
  double fitted_temperature = 1.0;
  double ece_t = 0.0;
  double brier_t = 0.0;
  int bin_count = 10;
  std::vector<std::string> warnings;
};

CalibrationReport calibration_report(std::span<const ScoredOutcome> outcomes, int bin_count = 10);

struct GapBin {
  double gap_low = 0.0;
  double gap_high = 0.0;
  long long pair_count = 0;
  double wqd = 0.0;  // strict
};

struct GapAnalysis {
  std::vector<GapBin> bins;
  std::optional<std::string> warning;
};

/// Strict WQD within equal-count bins of the confidence gap |c+ - c-|.
GapAnalysis confidence_gap_analysis(std::span<const ScoredOutcome> outcomes, int percentile_bins = 10);

/// Flattens scored bundles into (question, confidence, correct) triples.
std::vector<ScoredOutcome> scored_outcomes(std::span<const QuestionBundle> bundles,
                                           std::span<const ConfidenceVector> scores);

}  // namespace cisc
