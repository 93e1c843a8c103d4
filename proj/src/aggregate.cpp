#include "cisc/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace cisc {

namespace {

constexpr double kTieTolerance = 1e-12;

template <typename E>
struct EnumName {
  E value;
  std::string_view name;
};

constexpr EnumName<Strategy> kStrategyNames[] = {
    {Strategy::self_consistency, "self_consistency"},
    {Strategy::cisc, "cisc"},
    {Strategy::max_confidence, "max_confidence"},
    {Strategy::tie_break, "tie_break"},
};
constexpr EnumName<Normalization> kNormalizationNames[] = {
    {Normalization::softmax, "softmax"},
    {Normalization::none, "none"},
};
constexpr EnumName<TiePolicy> kTiePolicyNames[] = {
    {TiePolicy::first_occurrence, "first_occurrence"},
    {TiePolicy::highest_raw_confidence_sum_then_first, "highest_raw_confidence_sum_then_first"},
};

template <typename E, std::size_t N>
std::string_view name_of(const EnumName<E> (&table)[N], E value) {
  for (const auto& entry : table)
    if (entry.value == value) return entry.name;
  return {};
}

template <typename E, std::size_t N>
E value_of(const EnumName<E> (&table)[N], std::string_view name, const char* what) {
  for (const auto& entry : table)
    if (entry.name == name) return entry.value;
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(name));
}

void check_temperature(double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
}

void softmax_into(std::span<const double> scores, double temperature, std::vector<double>& out) {
  out.resize(scores.size());
  double top = -std::numeric_limits<double>::infinity();
  for (double s : scores) top = std::max(top, s);
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp((scores[i] - top) / temperature);
    total += out[i];
  }
  for (double& w : out) w /= total;
}

// Picks among tied classes: highest raw-confidence sum first (if requested
// and available), then earliest first occurrence.
int break_tie(std::span<const int> tied, const detail::VoteScratch& s, TiePolicy policy, bool have_raw) {
  int best = tied.front();
  for (int c : tied.subspan(1)) {
    if (policy == TiePolicy::highest_raw_confidence_sum_then_first && have_raw) {
      double diff = s.raw_sum[c] - s.raw_sum[best];
      if (diff > kTieTolerance) {
        best = c;
        continue;
      }
      if (diff < -kTieTolerance) continue;
    }
    if (s.first_pos[c] < s.first_pos[best]) best = c;
  }
  return best;
}

void accumulate(std::span<const int> ids, std::span<const double> weights, std::span<const double> raw,
                int num_classes, detail::VoteScratch& s) {
  s.mass.assign(num_classes, 0.0);
  s.raw_sum.assign(num_classes, 0.0);
  s.first_pos.assign(num_classes, -1);
  s.touched.clear();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    int c = ids[i];
    if (s.first_pos[c] < 0) {
      s.first_pos[c] = static_cast<int>(i);
      s.touched.push_back(c);
    }
    s.mass[c] += weights[i];
    if (!raw.empty()) s.raw_sum[c] += raw[i];
  }
}

}  // namespace

std::string_view to_string(Strategy s) { return name_of(kStrategyNames, s); }
std::string_view to_string(Normalization n) { return name_of(kNormalizationNames, n); }
std::string_view to_string(TiePolicy p) { return name_of(kTiePolicyNames, p); }
Strategy parse_strategy(std::string_view name) { return value_of(kStrategyNames, name, "strategy"); }
Normalization parse_normalization(std::string_view name) {
  return value_of(kNormalizationNames, name, "normalization");
}
TiePolicy parse_tie_policy(std::string_view name) { return value_of(kTiePolicyNames, name, "tie policy"); }

WeightVector normalize(std::span<const double> scores, double temperature, Normalization normalization) {
  check_temperature(temperature);
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("normalize: non-finite confidence score");
  WeightVector out;
  if (normalization == Normalization::none) {
    out.weights.assign(scores.begin(), scores.end());
    return out;
  }
  if (!scores.empty()) softmax_into(scores, temperature, out.weights);
  return out;
}

namespace detail {

IdVote vote_ids(std::span<const int> ids, std::span<const double> weights, std::span<const double> raw_scores,
                int num_classes, int sentinel_id, TiePolicy tie_policy, VoteScratch& s) {
  if (ids.empty()) throw std::invalid_argument("vote: empty input");
  if (ids.size() != weights.size() || (!raw_scores.empty() && raw_scores.size() != ids.size()))
    throw std::invalid_argument("vote: length mismatch");
  accumulate(ids, weights, raw_scores, num_classes, s);

  bool positive_real_answer = false;
  bool any_real_answer = false;
  for (int c : s.touched) {
    if (c == sentinel_id) continue;
    any_real_answer = true;
    if (s.mass[c] > 0.0) positive_real_answer = true;
  }

  double best = -std::numeric_limits<double>::infinity();
  for (int c : s.touched) {
    if (positive_real_answer && c == sentinel_id) continue;
    best = std::max(best, s.mass[c]);
  }
  std::vector<int>& tied = s.touched;  // reused in place: filtered to the tied classes
  std::size_t kept = 0;
  for (int c : s.touched) {
    if (positive_real_answer && c == sentinel_id) continue;
    if (s.mass[c] >= best - kTieTolerance) tied[kept++] = c;
  }
  tied.resize(kept);
  if (any_real_answer && tied.size() > 1)
    tied.erase(std::remove(tied.begin(), tied.end(), sentinel_id), tied.end());

  IdVote out;
  out.was_tie = tied.size() > 1;
  out.selected = break_tie(tied, s, tie_policy, !raw_scores.empty());
  return out;
}

IdVote run_strategy_ids(std::span<const int> ids, std::span<const double> scores, int num_classes, int sentinel_id,
                        const StrategyConfig& config, VoteScratch& s) {
  if (ids.empty()) throw std::invalid_argument("run_strategy: empty response set");
  if (ids.size() != scores.size()) throw std::invalid_argument("run_strategy: scores not aligned with responses");

  auto self_consistency = [&] {
    s.weights.assign(ids.size(), 1.0 / static_cast<double>(ids.size()));
    return vote_ids(ids, s.weights, scores, num_classes, sentinel_id, config.tie_policy, s);
  };
  auto weighted = [&] {
    check_temperature(config.temperature);
    if (config.normalization == Normalization::none)
      s.weights.assign(scores.begin(), scores.end());
    else
      softmax_into(scores, config.temperature, s.weights);
    return vote_ids(ids, s.weights, scores, num_classes, sentinel_id, config.tie_policy, s);
  };

  switch (config.strategy) {
    case Strategy::self_consistency:
      return self_consistency();
    case Strategy::cisc:
      return weighted();
    case Strategy::tie_break: {
      IdVote sc = self_consistency();
      return sc.was_tie ? weighted() : sc;
    }
    case Strategy::max_confidence: {
      // Per-class raw sums and first positions, for tie-breaking.
      s.weights.assign(ids.size(), 1.0);
      accumulate(ids, s.weights, scores, num_classes, s);
      bool any_real = std::any_of(ids.begin(), ids.end(), [&](int c) { return c != sentinel_id; });
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < ids.size(); ++i)
        if (!any_real || ids[i] != sentinel_id) top = std::max(top, scores[i]);
      std::vector<int> tied;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (any_real && ids[i] == sentinel_id) continue;
        if (scores[i] >= top - kTieTolerance && std::find(tied.begin(), tied.end(), ids[i]) == tied.end())
          tied.push_back(ids[i]);
      }
      IdVote out;
      out.was_tie = tied.size() > 1;
      out.selected = break_tie(tied, s, config.tie_policy, true);
      return out;
    }
  }
  throw std::logic_error("run_strategy: unhandled strategy");
}

}  // namespace detail

namespace {

struct Interned {
  std::vector<int> ids;
  std::vector<std::string> classes;
  int sentinel_id = -1;
};

template <typename Range>
Interned intern(const Range& answers) {
  Interned out;
  std::unordered_map<std::string_view, int> index;
  for (const auto& a : answers) {
    std::string_view view(a);
    auto [it, inserted] = index.try_emplace(view, static_cast<int>(out.classes.size()));
    if (inserted) {
      out.classes.emplace_back(view);
      if (view == kSentinelAnswer) out.sentinel_id = it->second;
    }
    out.ids.push_back(it->second);
  }
  return out;
}

}  // namespace

VoteOutcome vote(std::span<const std::string> answers, std::span<const double> weights, TiePolicy tie_policy,
                 std::span<const double> raw_scores) {
  Interned in = intern(answers);
  detail::VoteScratch scratch;
  detail::IdVote v = detail::vote_ids(in.ids, weights, raw_scores, static_cast<int>(in.classes.size()),
                                      in.sentinel_id, tie_policy, scratch);
  VoteOutcome out;
  out.selected_answer = in.classes[v.selected];
  out.was_tie = v.was_tie;
  for (std::size_t c = 0; c < in.classes.size(); ++c) out.per_answer_mass[in.classes[c]] = scratch.mass[c];
  return out;
}

VoteOutcome run_strategy(std::span<const std::string> answers, std::span<const double> scores,
                         const StrategyConfig& config) {
  Interned in = intern(answers);
  detail::VoteScratch scratch;
  detail::IdVote v = detail::run_strategy_ids(in.ids, scores, static_cast<int>(in.classes.size()), in.sentinel_id,
                                              config, scratch);
  VoteOutcome out;
  out.selected_answer = in.classes[v.selected];
  out.was_tie = v.was_tie;
  // Report the mass the final decision was taken on.
  for (std::size_t c = 0; c < in.classes.size(); ++c) out.per_answer_mass[in.classes[c]] = scratch.mass[c];
  return out;
}

VoteOutcome run_strategy(const QuestionBundle& bundle, const ConfidenceVector& scores, const StrategyConfig& config) {
  if (scores.scores.size() != bundle.responses.size())
    throw std::invalid_argument("run_strategy: confidence vector length differs from bundle size");
  std::vector<std::string> answers;
  answers.reserve(bundle.responses.size());
  for (const auto& r : bundle.responses) answers.emplace_back(r.vote_answer());
  return run_strategy(answers, scores.scores, config);
}

}  // namespace cisc
