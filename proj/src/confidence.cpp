#include "cisc/confidence.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace cisc {

namespace {

struct KindName {
  ConfidenceKind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {ConfidenceKind::response_probability, "response_probability"},
    {ConfidenceKind::verbal_binary, "verbal_binary"},
    {ConfidenceKind::verbal_0_100, "verbal_0_100"},
    {ConfidenceKind::p_true, "p_true"},
};

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::string_view strip_token(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

ScoreResult parse_failure() { return {0.0, std::string(flag::kConfidenceParseFailed)}; }

}  // namespace

std::string_view to_string(ConfidenceKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "p_true";
}

ConfidenceKind parse_confidence_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown confidence method: " + std::string(name));
}

std::string describe(const ConfidenceMethod& method) {
  std::string out(to_string(method.kind));
  if (method.kind == ConfidenceKind::p_true && method.p_true_renormalize) out += "+renormalized";
  return out;
}

double response_probability(std::span<const TokenLogprob> logprobs) {
  if (logprobs.empty()) throw std::invalid_argument("response_probability: empty logprob list");
  double sum = 0.0;
  for (const auto& t : logprobs) {
    if (!(t.logprob <= 0.0)) throw std::invalid_argument("response_probability: logprob > 0 for token `" + t.token + "`");
    sum += t.logprob;
  }
  return std::exp(sum / static_cast<double>(logprobs.size()));
}

ScoreResult parse_verbal(std::string_view continuation, ConfidenceKind kind) {
  std::string_view s = continuation;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  if (!s.empty() && s.front() == '(') s.remove_prefix(1);

  if (kind == ConfidenceKind::verbal_binary) {
    if (s.empty() || (s[0] != '0' && s[0] != '1')) return parse_failure();
    if (s.size() > 1 && is_digit(s[1])) return parse_failure();
    return {s[0] == '1' ? 1.0 : 0.0, std::nullopt};
  }
  if (kind != ConfidenceKind::verbal_0_100) throw std::invalid_argument("parse_verbal: not a verbal method");

  std::size_t digits = 0;
  while (digits < s.size() && is_digit(s[digits])) ++digits;
  if (digits == 0) return parse_failure();
  std::string_view number = s.substr(0, digits);
  while (number.size() > 1 && number.front() == '0') number.remove_prefix(1);
  // Anything past three significant digits is over the scale anyway.
  int value = number.size() > 3 ? 1000 : std::stoi(std::string(number));
  if (value > 100) return {1.0, std::string(flag::kConfidenceClamped)};
  return {value / 100.0, std::nullopt};
}

ScoreResult p_true(const std::map<std::string, double>& candidates, bool renormalize) {
  if (candidates.empty()) throw std::invalid_argument("p_true: empty candidate map");
  double one = 0.0, zero = 0.0;
  bool has_one = false, has_zero = false;
  for (const auto& [token, prob] : candidates) {
    if (!(prob >= 0.0 && prob <= 1.0)) throw std::invalid_argument("p_true: probability outside [0,1] for `" + token + "`");
    // Tokenizers may report " 1" and "1" as distinct candidates.
    std::string_view t = strip_token(token);
    if (t == "1") {
      one += prob;
      has_one = true;
    } else if (t == "0") {
      zero += prob;
      has_zero = true;
    }
  }
  one = std::min(one, 1.0);
  zero = std::min(zero, 1.0);
  if (!renormalize) {
    if (!has_one) return {0.0, std::string(flag::kConfidenceTokenMissing)};
    return {one, std::nullopt};
  }
  if (!has_one && !has_zero) return {0.5, std::string(flag::kConfidenceTokenMissing)};
  if (one + zero <= 0.0) return {0.5, std::string(flag::kConfidenceTokenMissing)};
  return {one / (one + zero), std::nullopt};
}

ConfidenceVector score_bundle(const QuestionBundle& bundle, const ConfidenceMethod& method) {
  ConfidenceVector out;
  out.method = method;
  out.scores.reserve(bundle.responses.size());
  out.flags.resize(bundle.responses.size());

  const std::string missing(flag::kConfidenceSignalMissing);
  for (std::size_t i = 0; i < bundle.responses.size(); ++i) {
    const ResponseRecord& r = bundle.responses[i];
    ScoreResult result{0.0, std::nullopt};
    switch (method.kind) {
      case ConfidenceKind::response_probability:
        if (!r.reasoning_logprobs || r.reasoning_logprobs->empty()) {
          result.flag = missing;
        } else {
          try {
            result.value = response_probability(*r.reasoning_logprobs);
          } catch (const std::invalid_argument&) {
            result = {0.0, std::string(flag::kInvalidLogprob)};
          }
        }
        break;
      case ConfidenceKind::verbal_binary:
      case ConfidenceKind::verbal_0_100:
        if (!r.confidence_continuation)
          result.flag = missing;
        else
          result = parse_verbal(*r.confidence_continuation, method.kind);
        break;
      case ConfidenceKind::p_true:
        if (!r.confidence_token_candidates || r.confidence_token_candidates->empty()) {
          result.flag = missing;
        } else {
          try {
            result = p_true(*r.confidence_token_candidates, method.p_true_renormalize);
          } catch (const std::invalid_argument&) {
            result = {0.0, std::string(flag::kInvalidCandidateProbability)};
          }
        }
        break;
    }
    out.scores.push_back(result.value);
    if (result.flag) out.flags[i].insert(*result.flag);
  }
  return out;
}

}  // namespace cisc
