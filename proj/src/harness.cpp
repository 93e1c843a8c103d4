#include "cisc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "cisc/parallel.hpp"
#include "cisc/random.hpp"

namespace cisc {

namespace {

constexpr int kMaxComparableBudget = 30;

// A bundle with answers interned to class ids.
struct Prepared {
  std::string_view question_id;
  DatasetKind kind = DatasetKind::generic;
  std::vector<int> ids;
  int num_classes = 0;
  int sentinel = -1;
  int gold = -1;
  std::span<const double> scores;
};

std::vector<Prepared> prepare(std::span<const QuestionBundle> bundles, std::span<const ConfidenceVector> scores) {
  if (bundles.empty()) throw std::invalid_argument("bootstrap: empty bundle set");
  if (bundles.size() != scores.size()) throw std::invalid_argument("bootstrap: one confidence vector per bundle required");
  std::vector<Prepared> out;
  out.reserve(bundles.size());
  for (std::size_t q = 0; q < bundles.size(); ++q) {
    const QuestionBundle& b = bundles[q];
    if (scores[q].scores.size() != b.responses.size())
      throw std::invalid_argument("bootstrap: confidence vector length differs for question " + b.question_id);
    Prepared p;
    p.question_id = b.question_id;
    p.kind = b.dataset_kind;
    p.scores = scores[q].scores;
    std::unordered_map<std::string_view, int> index;
    for (const auto& r : b.responses) {
      auto [it, inserted] = index.try_emplace(r.vote_answer(), p.num_classes);
      if (inserted) ++p.num_classes;
      p.ids.push_back(it->second);
    }
    if (auto it = index.find(kSentinelAnswer); it != index.end()) p.sentinel = it->second;
    if (auto it = index.find(b.gold_answer); it != index.end()) p.gold = it->second;
    out.push_back(std::move(p));
  }
  return out;
}

// Hit counts of one question: hits[s * budgets + bi], -1 where the budget
// could not be drawn from this question.
struct QuestionTable {
  std::vector<int> hits;
};

struct EnginePlan {
  std::vector<StrategyConfig> configs;
  std::vector<int> budgets;               // ascending, unique
  std::vector<std::vector<char>> active;  // [strategy][budget index]
};

QuestionTable run_question(const Prepared& q, const EnginePlan& plan, const BootstrapConfig& bcfg) {
  const std::size_t S = plan.configs.size(), B = plan.budgets.size();
  const int m = static_cast<int>(q.ids.size());
  QuestionTable table;
  table.hits.assign(S * B, -1);

  int max_budget = 0;
  for (std::size_t bi = 0; bi < B; ++bi) {
    int b = plan.budgets[bi];
    if (bcfg.replacement == Replacement::with || b <= m) {
      max_budget = std::max(max_budget, b);
      for (std::size_t s = 0; s < S; ++s)
        if (plan.active[s][bi]) table.hits[s * B + bi] = 0;
    }
  }
  if (max_budget == 0) return table;

  const std::uint64_t question_seed = combine_seed(bcfg.base_seed, stable_hash(q.question_id));
  std::vector<int> order(m);
  std::vector<int> sub_ids(max_budget);
  std::vector<double> sub_scores(max_budget);
  detail::VoteScratch scratch;

  for (int r = 0; r < bcfg.resamples; ++r) {
    Rng rng(combine_seed(question_seed, static_cast<std::uint64_t>(r)));
    if (bcfg.replacement == Replacement::without) {
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < max_budget; ++i) {
        int j = i + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(m - i)));
        std::swap(order[i], order[j]);
        sub_ids[i] = q.ids[order[i]];
        sub_scores[i] = q.scores[order[i]];
      }
    } else {
      for (int i = 0; i < max_budget; ++i) {
        int j = static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(m)));
        sub_ids[i] = q.ids[j];
        sub_scores[i] = q.scores[j];
      }
    }
    for (std::size_t bi = 0; bi < B; ++bi) {
      const int b = plan.budgets[bi];
      if (b > max_budget) break;
      std::span<const int> ids(sub_ids.data(), b);
      std::span<const double> sc(sub_scores.data(), b);
      for (std::size_t s = 0; s < S; ++s) {
        int& slot = table.hits[s * B + bi];
        if (slot < 0) continue;
        detail::IdVote v = detail::run_strategy_ids(ids, sc, q.num_classes, q.sentinel, plan.configs[s], scratch);
        if (v.selected == q.gold && q.gold >= 0) ++slot;
      }
    }
  }
  return table;
}

std::vector<QuestionTable> run_engine(std::span<const Prepared> questions, const EnginePlan& plan,
                                      const BootstrapConfig& bcfg) {
  if (bcfg.resamples < 1) throw std::invalid_argument("bootstrap: resamples must be >= 1");
  for (int b : plan.budgets)
    if (b < 1) throw std::invalid_argument("bootstrap: budgets must be >= 1");
  std::vector<QuestionTable> tables(questions.size());
  parallel_for(questions.size(), bcfg.jobs, [&](std::size_t q) { tables[q] = run_question(questions[q], plan, bcfg); });
  return tables;
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

struct CellStats {
  double mean = 0.0;
  double std_error = 0.0;
  int questions = 0;
};

// Macro average over the questions that could draw this budget. `include`
// optionally restricts the question set.
CellStats cell_stats(std::span<const QuestionTable> tables, std::size_t cell, int resamples,
                     const std::vector<char>* include = nullptr) {
  double sum = 0.0, var = 0.0;
  int used = 0;
  for (std::size_t q = 0; q < tables.size(); ++q) {
    if (include && !(*include)[q]) continue;
    int hits = tables[q].hits[cell];
    if (hits < 0) continue;
    double p = static_cast<double>(hits) / resamples;
    sum += p;
    var += p * (1.0 - p) / resamples;
    ++used;
  }
  CellStats out;
  out.questions = used;
  if (used > 0) {
    out.mean = sum / used;
    out.std_error = std::sqrt(var) / used;
  }
  return out;
}

std::string skipped_warning(int budget, int skipped) {
  return "budget " + std::to_string(budget) + ": skipped " + std::to_string(skipped) +
         " question(s) with fewer responses than the budget";
}

}  // namespace

std::string_view to_string(Replacement r) { return r == Replacement::with ? "with" : "without"; }

Replacement parse_replacement(std::string_view name) {
  if (name == "with") return Replacement::with;
  if (name == "without") return Replacement::without;
  throw std::invalid_argument("unknown replacement mode: " + std::string(name));
}

AccuracyCurve bootstrap_accuracy(std::span<const QuestionBundle> bundles, std::span<const ConfidenceVector> scores,
                                 const StrategyConfig& config, const BootstrapConfig& bcfg) {
  auto questions = prepare(bundles, scores);
  EnginePlan plan;
  plan.configs = {config};
  plan.budgets = sorted_unique(bcfg.budgets);
  if (plan.budgets.empty()) throw std::invalid_argument("bootstrap: no budgets configured");
  plan.active = {std::vector<char>(plan.budgets.size(), 1)};
  auto tables = run_engine(questions, plan, bcfg);

  AccuracyCurve curve;
  for (std::size_t bi = 0; bi < plan.budgets.size(); ++bi) {
    CellStats stats = cell_stats(tables, bi, bcfg.resamples);
    int b = plan.budgets[bi];
    if (stats.questions == 0)
      throw std::invalid_argument("bootstrap: no question has at least " + std::to_string(b) + " responses");
    if (stats.questions < static_cast<int>(questions.size()))
      curve.warnings.push_back(skipped_warning(b, static_cast<int>(questions.size()) - stats.questions));
    curve.mean[b] = stats.mean;
    curve.std_error[b] = stats.std_error;
  }
  return curve;
}

int comparable_sc_samples(double target_accuracy, const AccuracyCurve& sc_curve) {
  if (sc_curve.mean.empty()) throw std::invalid_argument("comparable_sc_samples: empty self-consistency curve");
  const int last = sc_curve.mean.rbegin()->first;
  if (sc_curve.mean.begin()->first != 1 || last != static_cast<int>(sc_curve.mean.size()))
    throw std::invalid_argument("comparable_sc_samples: curve must cover budgets 1..K contiguously");
  for (const auto& [b, acc] : sc_curve.mean)
    if (acc >= target_accuracy) return b;
  return last + 1;
}

double cost_reduction(int cisc_budget, int comparable) {
  if (comparable < 1) throw std::invalid_argument("cost_reduction: comparable must be >= 1");
  return 100.0 * (1.0 - static_cast<double>(cisc_budget) / static_cast<double>(comparable));
}

double accuracy_improvement(double cisc_acc, double sc_acc) {
  if (sc_acc == 0.0) throw std::invalid_argument("accuracy_improvement: self-consistency accuracy is zero");
  return 100.0 * (cisc_acc / sc_acc - 1.0);
}

HeldoutSplit split_heldout(std::span<const QuestionBundle> bundles, double fraction, std::uint64_t seed) {
  if (bundles.size() < 2) throw std::invalid_argument("split_heldout: need at least 2 questions");
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("split_heldout: fraction must lie in (0, 1)");
  const std::size_t n = bundles.size();
  std::size_t n_tune = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  n_tune = std::clamp<std::size_t>(n_tune, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix64(seed));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);

  HeldoutSplit split;
  split.tuning.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_tune));
  split.evaluation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_tune), order.end());
  std::sort(split.tuning.begin(), split.tuning.end());
  std::sort(split.evaluation.begin(), split.evaluation.end());
  return split;
}

TuningResult tune_temperature(std::span<const QuestionBundle> bundles, std::span<const ConfidenceVector> scores,
                              int budget, const GridSpec& grid, const BootstrapConfig& bcfg, TiePolicy tie_policy) {
  if (bundles.empty()) throw std::invalid_argument("tune_temperature: empty tuning set");
  auto questions = prepare(bundles, scores);
  const std::vector<double> temps = temperature_grid(grid);

  EnginePlan plan;
  plan.budgets = {budget};
  for (double t : temps) {
    plan.configs.push_back({Strategy::cisc, t, Normalization::softmax, tie_policy});
    plan.active.push_back({1});
  }
  auto tables = run_engine(questions, plan, bcfg);

  TuningResult result;
  result.budget = budget;
  double best = -1.0;
  for (std::size_t k = 0; k < temps.size(); ++k) {
    CellStats stats = cell_stats(tables, k, bcfg.resamples);
    if (stats.questions == 0)
      throw std::invalid_argument("tune_temperature: no tuning question has " + std::to_string(budget) + " responses");
    result.grid_accuracy.emplace_back(temps[k], stats.mean);
    if (stats.mean >= best) {
      best = stats.mean;
      result.temperature = temps[k];
    }
  }
  return result;
}

std::vector<ConfidenceVector> score_all(std::span<const QuestionBundle> bundles, const ConfidenceMethod& method) {
  std::vector<ConfidenceVector> out;
  out.reserve(bundles.size());
  for (const auto& b : bundles) out.push_back(score_bundle(b, method));
  return out;
}

std::vector<StrategySpec> standard_strategies(std::span<const Strategy> strategies, double temperature,
                                              TiePolicy tie_policy, bool normalization_ablation) {
  std::vector<StrategySpec> out;
  for (Strategy s : strategies) {
    StrategyConfig config{s, temperature, Normalization::softmax, tie_policy};
    out.push_back({std::string(to_string(s)), config});
    if (s == Strategy::cisc && normalization_ablation) {
      out.push_back({"cisc_softmax_t1", {Strategy::cisc, 1.0, Normalization::softmax, tie_policy}});
      out.push_back({"cisc_no_normalization", {Strategy::cisc, temperature, Normalization::none, tie_policy}});
    }
  }
  return out;
}

EvalReport evaluate(std::span<const QuestionBundle> bundles, std::span<const ConfidenceVector> scores,
                    const EvalOptions& options) {
  if (options.strategies.empty()) throw std::invalid_argument("evaluate: no strategies configured");
  auto questions = prepare(bundles, scores);
  const BootstrapConfig& bcfg = options.bootstrap;
  const std::vector<int> budgets = sorted_unique(bcfg.budgets);
  if (budgets.empty()) throw std::invalid_argument("evaluate: no budgets configured");

  std::size_t min_m = bundles.front().responses.size();
  for (const auto& b : bundles) min_m = std::min(min_m, b.responses.size());
  const int reference_max = bcfg.replacement == Replacement::with
                                ? kMaxComparableBudget
                                : std::min<int>(kMaxComparableBudget, static_cast<int>(min_m));

  EnginePlan plan;
  std::vector<int> all_budgets = budgets;
  for (int b = 1; b <= reference_max; ++b) all_budgets.push_back(b);
  plan.budgets = sorted_unique(all_budgets);
  auto budget_index = [&](int b) {
    return static_cast<std::size_t>(std::lower_bound(plan.budgets.begin(), plan.budgets.end(), b) - plan.budgets.begin());
  };
  const std::size_t B = plan.budgets.size();
  for (const auto& spec : options.strategies) {
    plan.configs.push_back(spec.config);
    std::vector<char> act(B, 0);
    for (int b : budgets) act[budget_index(b)] = 1;
    plan.active.push_back(std::move(act));
  }
  const std::size_t ref = plan.configs.size();
  plan.configs.push_back({Strategy::self_consistency, 1.0, Normalization::softmax,
                          options.strategies.front().config.tie_policy});
  plan.active.emplace_back(B, 1);

  auto tables = run_engine(questions, plan, bcfg);

  EvalReport report;
  report.confidence_method = describe(options.method);
  report.temperature = options.temperature;
  report.temperature_source = options.temperature_source;
  report.tuning = options.tuning;
  report.budgets = budgets;
  report.resamples = bcfg.resamples;
  report.base_seed = bcfg.base_seed;
  report.replacement = std::string(to_string(bcfg.replacement));
  report.questions = static_cast<int>(bundles.size());
  report.responses = static_cast<int>(total_responses(bundles));
  std::set<std::string> kinds;
  for (const auto& b : bundles) kinds.insert(std::string(to_string(b.dataset_kind)));
  report.dataset_kinds.assign(kinds.begin(), kinds.end());

  const int n = bcfg.resamples;
  for (int b : budgets) {
    CellStats stats = cell_stats(tables, ref * B + budget_index(b), n);
    if (stats.questions == 0)
      throw std::invalid_argument("evaluate: no question has at least " + std::to_string(b) + " responses");
    if (stats.questions < report.questions) report.warnings.push_back(skipped_warning(b, report.questions - stats.questions));
  }

  AccuracyCurve sc_curve;
  for (int b = 1; b <= reference_max; ++b) {
    CellStats stats = cell_stats(tables, ref * B + budget_index(b), n);
    sc_curve.mean[b] = stats.mean;
    sc_curve.std_error[b] = stats.std_error;
    report.sc_reference.push_back({b, stats.mean, stats.std_error, stats.questions});
  }

  // Per-kind masks for the macro average.
  std::map<DatasetKind, std::vector<char>> kind_masks;
  for (std::size_t q = 0; q < questions.size(); ++q) {
    auto& mask = kind_masks[questions[q].kind];
    mask.resize(questions.size(), 0);
    mask[q] = 1;
  }

  std::vector<std::vector<std::size_t>> ci_draws;
  if (options.ci_resamples > 0) {
    Rng rng(combine_seed(bcfg.base_seed, stable_hash("accuracy-improvement-ci")));
    ci_draws.resize(options.ci_resamples);
    for (auto& draw : ci_draws) {
      draw.resize(questions.size());
      for (auto& q : draw) q = uniform_index(rng, questions.size());
    }
  }

  for (std::size_t s = 0; s < options.strategies.size(); ++s) {
    const StrategySpec& spec = options.strategies[s];
    StrategyReport sr;
    sr.label = spec.label;
    sr.config = spec.config;
    for (int b : budgets) {
      const std::size_t cell = s * B + budget_index(b), sc_cell = ref * B + budget_index(b);
      CellStats stats = cell_stats(tables, cell, n);
      sr.curve.push_back({b, stats.mean, stats.std_error, stats.questions});
      if (spec.config.strategy == Strategy::self_consistency) continue;

      ComparisonPoint cp;
      cp.budget = b;
      cp.comparable_sc_samples = comparable_sc_samples(stats.mean, sc_curve);
      cp.cost_reduction_pct = cost_reduction(b, cp.comparable_sc_samples);
      double sc_acc = cell_stats(tables, sc_cell, n).mean;
      if (sc_acc > 0.0) {
        cp.accuracy_improvement_pct = accuracy_improvement(stats.mean, sc_acc);
      } else {
        report.warnings.push_back(spec.label + " budget " + std::to_string(b) +
                                  ": self-consistency accuracy is zero; accuracy improvement reported as 0");
      }
      double macro = 0.0;
      int kinds_used = 0;
      for (const auto& [kind, mask] : kind_masks) {
        double k_sc = cell_stats(tables, sc_cell, n, &mask).mean;
        if (k_sc <= 0.0) continue;
        macro += accuracy_improvement(cell_stats(tables, cell, n, &mask).mean, k_sc);
        ++kinds_used;
      }
      cp.accuracy_improvement_macro_pct = kinds_used > 0 ? macro / kinds_used : 0.0;

      if (!ci_draws.empty()) {
        std::vector<double> estimates;
        estimates.reserve(ci_draws.size());
        for (const auto& draw : ci_draws) {
          double a = 0.0, c = 0.0;
          for (std::size_t q : draw) {
            int h = tables[q].hits[cell], hc = tables[q].hits[sc_cell];
            if (h < 0 || hc < 0) continue;
            a += h;
            c += hc;
          }
          if (c > 0.0) estimates.push_back(100.0 * (a / c - 1.0));
        }
        if (!estimates.empty()) {
          std::sort(estimates.begin(), estimates.end());
          auto at = [&](double q) {
            auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(estimates.size() - 1) + 0.5));
            return estimates[idx];
          };
          cp.ci_low = at(0.025);
          cp.ci_high = at(0.975);
        }
      }
      sr.vs_self_consistency.push_back(cp);
    }
    report.strategies.push_back(std::move(sr));
  }

  auto outcomes = scored_outcomes(bundles, scores);
  try {
    WqdReport strict = wqd(outcomes, WqdTieMode::strict);
    WqdReport half = wqd(outcomes, WqdTieMode::half_credit);
    report.wqd = WqdSummary{strict.wqd, half.wqd, strict.pair_count, strict.questions_contributing,
                            strict.tie_pair_fraction};
  } catch (const std::domain_error&) {
    report.warnings.push_back("wqd: no question has both correct and incorrect responses");
  }
  report.calibration = calibration_report(outcomes, options.calibration_bins);
  for (const auto& w : report.calibration->warnings) report.warnings.push_back("calibration: " + w);
  return report;
}

}  // namespace cisc
