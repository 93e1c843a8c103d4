#include "cisc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "cisc/random.hpp"

namespace cisc {

namespace {

double normal(Rng& rng) {
  // Box-Muller; avoids std::normal_distribution so fixtures are identical
  // across standard libraries.
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string answer_label(DatasetKind kind, int value) {
  if (kind == DatasetKind::mmlu_pro || kind == DatasetKind::bbh_options)
    return std::string(1, static_cast<char>('A' + value % 10));
  if (kind == DatasetKind::math) return fmt::format("${}$", value);
  return std::to_string(value);
}

}  // namespace

std::vector<QuestionBundle> make_synthetic_bundles(const SyntheticSpec& spec) {
  if (spec.questions < 1 || spec.responses_per_question < 1)
    throw std::invalid_argument("synthetic: need at least one question and one response");
  if (spec.distractors < 1) throw std::invalid_argument("synthetic: need at least one distractor");
  const bool lettered = spec.kind == DatasetKind::mmlu_pro || spec.kind == DatasetKind::bbh_options;
  if (lettered && spec.distractors > 9) throw std::invalid_argument("synthetic: at most 9 distractors for option kinds");

  Rng rng(mix64(spec.seed));
  std::vector<QuestionBundle> out;
  out.reserve(spec.questions);
  for (int q = 0; q < spec.questions; ++q) {
    QuestionBundle b;
    b.question_id = fmt::format("syn-{:05d}", q);
    b.dataset_kind = spec.kind;
    b.question_text = fmt::format("Synthetic question {}.", q);

    const int gold_value = lettered ? static_cast<int>(uniform_index(rng, 10)) : 10 + static_cast<int>(uniform_index(rng, 990));
    const double accuracy = spec.min_accuracy + (spec.max_accuracy - spec.min_accuracy) * uniform01(rng);
    const double offset = spec.question_offset_sd * normal(rng);
    b.gold_answer = canonicalize_answer(answer_label(spec.kind, gold_value), spec.kind);

    std::vector<double> distractor_weight(spec.distractors);
    double total = 0.0;
    for (int d = 0; d < spec.distractors; ++d) total += distractor_weight[d] = std::pow(spec.distractor_decay, d);

    for (int i = 0; i < spec.responses_per_question; ++i) {
      double confidence = 0.0;
      bool correct = false;
      if (spec.calibrated) {
        confidence = spec.floor + (1.0 - spec.floor) / (1.0 + std::exp(-(offset + spec.noise_sd * normal(rng))));
        correct = uniform01(rng) < confidence;
      } else {
        correct = uniform01(rng) < accuracy;
      }
      int value = gold_value;
      if (!correct) {
        double u = uniform01(rng) * total;
        int d = 0;
        while (d + 1 < spec.distractors && u >= distractor_weight[d]) u -= distractor_weight[d++];
        value = gold_value + d + 1;
      }
      if (!spec.calibrated) {
        const double logit = offset + (correct ? spec.signal : 0.0) + spec.noise_sd * normal(rng);
        confidence = spec.floor + (1.0 - spec.floor) / (1.0 + std::exp(-logit));
      }
      confidence = std::clamp(confidence, 1e-9, 1.0);

      ResponseRecord r;
      r.response_index = i;
      r.response_text = fmt::format("Working through the problem step by step.\nProposed answer: ({}).",
                                    answer_label(spec.kind, value));
      const double lp = std::log(confidence);
      r.reasoning_logprobs = std::vector<TokenLogprob>{{"Working", lp}, {" through", lp}, {" Proposed", lp}, {" answer", lp}};
      r.confidence_continuation = confidence >= 0.5 ? "1" : "0";
      r.confidence_token_candidates = std::map<std::string, double>{{"1", confidence}, {"0", (1.0 - confidence) * 0.95}};
      derive_answer(r, spec.kind);
      b.responses.push_back(std::move(r));
    }
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace cisc
