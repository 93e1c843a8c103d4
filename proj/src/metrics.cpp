#include "cisc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "cisc/grid.hpp"

namespace cisc {

namespace {

constexpr double kClampEps = 1e-6;

void require_nonempty(std::span<const ScoredOutcome> outcomes, const char* what) {
  if (outcomes.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
}

// Calls fn(correct_confidences, incorrect_confidences) once per question, in
// order of first appearance. Only one question's data is alive at a time
// beyond the index.
template <typename Fn>
void for_each_question(std::span<const ScoredOutcome> outcomes, Fn&& fn) {
  std::unordered_map<std::string_view, std::size_t> slot;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto [it, inserted] = slot.try_emplace(outcomes[i].question_id, members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(i);
  }
  std::vector<double> pos, neg;
  for (const auto& group : members) {
    pos.clear();
    neg.clear();
    for (std::size_t i : group) (outcomes[i].correct ? pos : neg).push_back(outcomes[i].confidence);
    if (pos.empty() || neg.empty()) continue;
    fn(pos, neg);
  }
}

double log_sigmoid(double x) { return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

double clamped_logit(double c) {
  c = std::clamp(c, kClampEps, 1.0 - kClampEps);
  return std::log(c) - std::log1p(-c);
}

std::vector<ScoredOutcome> scaled(std::span<const ScoredOutcome> outcomes, double temperature) {
  std::vector<ScoredOutcome> out(outcomes.begin(), outcomes.end());
  for (auto& o : out) o.confidence = scale_confidence(o.confidence, temperature);
  return out;
}

}  // namespace

std::vector<double> temperature_grid(const GridSpec& spec) {
  if (spec.points < 1 || !(spec.lo > 0.0) || !(spec.hi >= spec.lo))
    throw std::invalid_argument("temperature grid: need points >= 1 and 0 < lo <= hi");
  std::vector<double> out;
  out.reserve(spec.points);
  if (spec.points == 1) {
    out.push_back(spec.lo);
    return out;
  }
  const double a = std::log10(spec.lo), b = std::log10(spec.hi);
  for (int k = 0; k < spec.points; ++k) out.push_back(std::pow(10.0, a + (b - a) * k / (spec.points - 1)));
  out.back() = spec.hi;
  out.front() = spec.lo;
  return out;
}

WqdReport wqd(std::span<const ScoredOutcome> outcomes, WqdTieMode tie_mode) {
  long long pairs = 0, wins = 0, ties = 0;
  int questions = 0;
  for_each_question(outcomes, [&](std::vector<double>& pos, std::vector<double>& neg) {
    std::sort(neg.begin(), neg.end());
    for (double c : pos) {
      auto lo = std::lower_bound(neg.begin(), neg.end(), c);
      auto hi = std::upper_bound(lo, neg.end(), c);
      wins += lo - neg.begin();
      ties += hi - lo;
    }
    pairs += static_cast<long long>(pos.size()) * static_cast<long long>(neg.size());
    ++questions;
  });
  if (pairs == 0) throw std::domain_error("wqd: no discriminating pairs");

  WqdReport report;
  report.pair_count = pairs;
  report.questions_contributing = questions;
  report.tie_pair_fraction = static_cast<double>(ties) / static_cast<double>(pairs);
  double credit = static_cast<double>(wins) + (tie_mode == WqdTieMode::half_credit ? 0.5 * ties : 0.0);
  report.wqd = credit / static_cast<double>(pairs);
  return report;
}

double ece(std::span<const ScoredOutcome> outcomes, int bin_count) {
  require_nonempty(outcomes, "ece");
  if (bin_count < 1) throw std::invalid_argument("ece: bin_count must be >= 1");
  std::vector<double> conf_sum(bin_count, 0.0), hits(bin_count, 0.0);
  std::vector<long long> count(bin_count, 0);
  for (const auto& o : outcomes) {
    int b = std::min(bin_count - 1, static_cast<int>(std::floor(o.confidence * bin_count)));
    b = std::max(b, 0);
    conf_sum[b] += o.confidence;
    hits[b] += o.correct ? 1.0 : 0.0;
    ++count[b];
  }
  double total = 0.0;
  const double n = static_cast<double>(outcomes.size());
  for (int b = 0; b < bin_count; ++b) {
    if (count[b] == 0) continue;
    double nb = static_cast<double>(count[b]);
    total += nb / n * std::abs(hits[b] / nb - conf_sum[b] / nb);
  }
  return total;
}

double brier(std::span<const ScoredOutcome> outcomes) {
  require_nonempty(outcomes, "brier");
  double total = 0.0;
  for (const auto& o : outcomes) {
    double d = o.confidence - (o.correct ? 1.0 : 0.0);
    total += d * d;
  }
  return total / static_cast<double>(outcomes.size());
}

double scale_confidence(double confidence, double temperature) {
  double z = clamped_logit(confidence) / temperature;
  return 1.0 / (1.0 + std::exp(-z));
}

double calibration_nll(std::span<const ScoredOutcome> outcomes, double temperature) {
  require_nonempty(outcomes, "calibration_nll");
  double total = 0.0;
  for (const auto& o : outcomes) {
    double z = clamped_logit(o.confidence) / temperature;
    total -= o.correct ? log_sigmoid(z) : log_sigmoid(-z);
  }
  return total / static_cast<double>(outcomes.size());
}

CalibrationFit fit_calibration_temperature(std::span<const ScoredOutcome> outcomes) {
  require_nonempty(outcomes, "fit_calibration_temperature");
  bool any_correct = false, any_incorrect = false;
  double max_abs_logit = 0.0;
  for (const auto& o : outcomes) {
    (o.correct ? any_correct : any_incorrect) = true;
    max_abs_logit = std::max(max_abs_logit, std::abs(clamped_logit(o.confidence)));
  }
  if (!any_correct || !any_incorrect)
    return {1.0, "all labels identical; negative log-likelihood is degenerate, using T=1"};

  const std::vector<double> grid = temperature_grid();
  if (max_abs_logit == 0.0)
    return {grid.front(), "all confidences are 0.5; every temperature gives the same scaled values"};

  std::size_t best = 0;
  double best_nll = calibration_nll(outcomes, grid[0]);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    double v = calibration_nll(outcomes, grid[k]);
    if (v < best_nll) {
      best_nll = v;
      best = k;
    }
  }

  // Golden-section refinement in log-temperature between the grid neighbours.
  double a = std::log(grid[best == 0 ? 0 : best - 1]);
  double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = calibration_nll(outcomes, std::exp(x1)), f2 = calibration_nll(outcomes, std::exp(x2));
  for (int iter = 0; iter < 80 && b - a > 1e-10; ++iter) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = calibration_nll(outcomes, std::exp(x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = calibration_nll(outcomes, std::exp(x2));
    }
  }
  double refined = std::exp(f1 <= f2 ? x1 : x2);
  double refined_nll = std::min(f1, f2);

  CalibrationFit fit{grid[best], std::nullopt};
  if (refined_nll < best_nll) {
    fit.temperature = refined;
    best_nll = refined_nll;
  }
  if (calibration_nll(outcomes, 1.0) < best_nll) fit.temperature = 1.0;
  return fit;
}

CalibrationReport calibration_report(std::span<const ScoredOutcome> outcomes, int bin_count) {
  CalibrationReport report;
  report.bin_count = bin_count;
  report.ece = ece(outcomes, bin_count);
  report.brier = brier(outcomes);
  CalibrationFit fit = fit_calibration_temperature(outcomes);
  if (fit.warning) report.warnings.push_back(*fit.warning);
  report.fitted_temperature = fit.temperature;
  auto scaled_outcomes = scaled(outcomes, fit.temperature);
  report.ece_t = ece(scaled_outcomes, bin_count);
  report.brier_t = brier(scaled_outcomes);
  return report;
}

GapAnalysis confidence_gap_analysis(std::span<const ScoredOutcome> outcomes, int percentile_bins) {
  if (percentile_bins < 1) throw std::invalid_argument("confidence_gap_analysis: need at least one bin");
  struct Pair {
    double gap;
    std::uint8_t win;
  };
  std::vector<Pair> pairs;
  for_each_question(outcomes, [&](const std::vector<double>& pos, const std::vector<double>& neg) {
    for (double cp : pos)
      for (double cn : neg) pairs.push_back({std::abs(cp - cn), static_cast<std::uint8_t>(cp > cn ? 1 : 0)});
  });
  if (pairs.empty()) throw std::domain_error("confidence_gap_analysis: no discriminating pairs");

  GapAnalysis out;
  std::size_t bins = static_cast<std::size_t>(percentile_bins);
  if (pairs.size() < bins) {
    out.warning = "only " + std::to_string(pairs.size()) + " pairs; reducing bin count from " +
                  std::to_string(percentile_bins);
    bins = pairs.size();
  }
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.gap < y.gap; });
  for (std::size_t b = 0; b < bins; ++b) {
    std::size_t lo = b * pairs.size() / bins, hi = (b + 1) * pairs.size() / bins;
    long long wins = 0;
    for (std::size_t i = lo; i < hi; ++i) wins += pairs[i].win;
    GapBin bin;
    bin.gap_low = pairs[lo].gap;
    bin.gap_high = pairs[hi - 1].gap;
    bin.pair_count = static_cast<long long>(hi - lo);
    bin.wqd = static_cast<double>(wins) / static_cast<double>(hi - lo);
    out.bins.push_back(bin);
  }
  return out;
}

std::vector<ScoredOutcome> scored_outcomes(std::span<const QuestionBundle> bundles,
                                           std::span<const ConfidenceVector> scores) {
  if (bundles.size() != scores.size()) throw std::invalid_argument("scored_outcomes: one confidence vector per bundle");
  std::vector<ScoredOutcome> out;
  for (std::size_t q = 0; q < bundles.size(); ++q) {
    const auto& b = bundles[q];
    if (scores[q].scores.size() != b.responses.size())
      throw std::invalid_argument("scored_outcomes: confidence vector length differs from bundle size");
    for (std::size_t i = 0; i < b.responses.size(); ++i)
      out.push_back({b.question_id, scores[q].scores[i], b.is_correct(b.responses[i])});
  }
  return out;
}

}  // namespace cisc
