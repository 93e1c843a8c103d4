#pragma once

#include <cstdint>
#include <vector>

#include "cisc/records.hpp"

namespace cisc {

/// Generator for response dumps with a controllable confidence signal.
///
/// Each question draws a per-response accuracy uniformly from
/// [min_accuracy, max_accuracy]; wrong responses spread over `distractors`
/// wrong answers with geometrically decaying frequency. A response's latent
/// confidence logit is
///
///   question_offset + signal * [correct] + noise,
///
/// with question_offset ~ N(0, question_offset_sd) shared by the question and
/// noise ~ N(0, noise_sd). The confidence is floor + (1 - floor) * sigmoid(logit)
/// and is written as P("1") at the confidence position, as a binary verbal
/// rating, and as per-token log-probabilities.
///
/// With `calibrated` set, correctness is instead drawn after the confidence,
/// with P(correct) equal to it (the accuracy range and signal are ignored).
struct SyntheticSpec {
  int questions = 20;
  int responses_per_question = 30;
  DatasetKind kind = DatasetKind::gsm8k;
  std::uint64_t seed = 1;
  double min_accuracy = 0.3;
  double max_accuracy = 0.9;
  int distractors = 3;
  double distractor_decay = 0.5;
  double signal = 0.45;
  double noise_sd = 1.0;
  double question_offset_sd = 0.5;
  double floor = 0.0;
  bool calibrated = false;
};

std::vector<QuestionBundle> make_synthetic_bundles(const SyntheticSpec& spec);

}  // namespace cisc
