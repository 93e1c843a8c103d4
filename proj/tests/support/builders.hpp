#pragma once

#include <string>
#include <vector>

#include "cisc/records.hpp"

namespace cisc::testing {

// Bundle whose responses vote `answers`, carrying `scores` as P("1") and as
// constant per-token logprobs.
inline QuestionBundle make_bundle(const std::string& id, const std::string& gold, const std::vector<std::string>& answers,
                                  const std::vector<double>& scores, DatasetKind kind = DatasetKind::generic) {
  QuestionBundle b;
  b.question_id = id;
  b.dataset_kind = kind;
  b.question_text = "q " + id;
  b.gold_answer = gold;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    ResponseRecord r;
    r.response_index = static_cast<int>(i);
    r.response_text = "Proposed answer: (" + answers[i] + ").";
    r.raw_answer = answers[i];
    r.canonical_answer = answers[i];
    const double c = scores.empty() ? 0.5 : scores[i];
    r.confidence_token_candidates = std::map<std::string, double>{{"1", c}, {"0", 1.0 - c}};
    b.responses.push_back(std::move(r));
  }
  return b;
}

}  // namespace cisc::testing
