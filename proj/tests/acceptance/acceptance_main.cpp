// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "cisc/aggregate.hpp"
#include "cisc/binomial.hpp"
#include "cisc/cli.hpp"
#include "cisc/harness.hpp"
#include "cisc/metrics.hpp"
#include "cisc/synthetic.hpp"

using namespace cisc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const ConfidenceMethod kPTrue{ConfidenceKind::p_true, false};

StrategyConfig strategy(Strategy s, double t = 1.0, Normalization n = Normalization::softmax) {
  StrategyConfig c;
  c.strategy = s;
  c.temperature = t;
  c.normalization = n;
  return c;
}

BootstrapConfig boot(std::vector<int> budgets, int resamples = 500, std::uint64_t seed = 2024) {
  BootstrapConfig b;
  b.budgets = std::move(budgets);
  b.resamples = resamples;
  b.base_seed = seed;
  b.jobs = 0;
  return b;
}

std::vector<int> one_to(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i + 1;
  return v;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// --- 1 ---------------------------------------------------------------------
Outcome binomial_reproduction() {
  auto t0 = Clock::now();
  double acc40 = weighted_majority_accuracy({40, 0.6, 1.0});
  int n_w2 = min_samples_for_accuracy(0.6, 2.0, 0.90);
  double secs = seconds_since(t0);
  bool pass = acc40 >= 0.88 && acc40 <= 0.92 && n_w2 < 10 && n_w2 == 5 && secs < 1.0;
  return {pass, fmt::format("acc(n=40,p=.6,w=1)={:.6f} min_n(p=.6,w=2,.9)={} ({:.3f}s)", acc40, n_w2, secs)};
}

// --- 2 and 3 ---------------------------------------------------------------
struct RandomBundle {
  std::vector<std::string> answers;
  std::vector<double> scores;
};

std::vector<RandomBundle> random_bundles(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RandomBundle> out(count);
  for (auto& b : out) {
    int n = 3 + static_cast<int>(rng() % 28);
    int classes = 2 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) {
      b.answers.push_back(std::to_string(rng() % classes));
      b.scores.push_back(u(rng));
    }
  }
  return out;
}

Outcome collapse_limit(const std::vector<RandomBundle>& bundles) {
  auto t0 = Clock::now();
  int eligible = 0, agree = 0;
  for (const auto& b : bundles) {
    auto sc = run_strategy(b.answers, b.scores, strategy(Strategy::self_consistency));
    if (sc.was_tie) continue;
    ++eligible;
    agree += run_strategy(b.answers, b.scores, strategy(Strategy::cisc, 1e6)).selected_answer == sc.selected_answer;
  }
  double secs = seconds_since(t0);
  bool pass = eligible >= 1000 && agree == eligible && secs < 5.0;
  return {pass, fmt::format("T=1e6 agrees with SC on {}/{} unique-majority bundles ({:.3f}s)", agree, eligible, secs)};
}

Outcome sharp_limit(const std::vector<RandomBundle>& bundles) {
  int eligible = 0, agree = 0;
  for (const auto& b : bundles) {
    auto top = std::max_element(b.scores.begin(), b.scores.end());
    if (std::count(b.scores.begin(), b.scores.end(), *top) != 1) continue;
    ++eligible;
    agree += run_strategy(b.answers, b.scores, strategy(Strategy::cisc, 1e-6)).selected_answer ==
             b.answers[top - b.scores.begin()];
  }
  return {eligible >= 1000 && agree == eligible,
          fmt::format("T=1e-6 picks the top-confidence answer on {}/{} bundles", agree, eligible)};
}

// --- 4 ---------------------------------------------------------------------
Outcome wqd_oracles() {
  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::vector<ScoredOutcome> oracle, independent, easy_hard;
  for (int q = 0; q < 200; ++q)
    for (int i = 0; i < 10; ++i) {
      bool correct = u(rng) < 0.5;
      oracle.push_back({"o" + std::to_string(q), correct ? 1.0 : 0.0, correct});
    }
  // 1000 questions x (10 correct, 10 incorrect) = 100k pairs.
  for (int q = 0; q < 1000; ++q)
    for (int i = 0; i < 20; ++i) independent.push_back({"i" + std::to_string(q), u(rng), i < 10});
  // Easy questions: 95% of answers correct, every answer rated 0.95; hard: 5% / 0.05.
  for (int q = 0; q < 4000; ++q) {
    const double c = q % 2 == 0 ? 0.95 : 0.05;
    for (int i = 0; i < 30; ++i) easy_hard.push_back({"e" + std::to_string(q), c, u(rng) < c});
  }

  double w_oracle = wqd(oracle).wqd;
  auto ind = wqd(independent);
  double w_easy_hard = wqd(easy_hard).wqd;
  double e_easy_hard = ece(easy_hard, 10);
  bool pass = w_oracle == 1.0 && ind.pair_count >= 100000 && std::abs(ind.wqd - 0.5) <= 0.02 && w_easy_hard == 0.0 &&
              e_easy_hard <= 0.02;
  return {pass, fmt::format("oracle={} independent={:.4f} ({} pairs) easy/hard wqd={} ece={:.4f}", w_oracle, ind.wqd,
                            ind.pair_count, w_easy_hard, e_easy_hard)};
}

// --- 5 ---------------------------------------------------------------------
Outcome calibration_recovery() {
  std::string detail;
  bool pass = true;
  for (double t_star : {0.5, 2.0, 5.0}) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(t_star * 1000));
    std::normal_distribution<double> z(0.0, 1.5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<ScoredOutcome> data;
    for (int i = 0; i < 50000; ++i) {
      double logit = z(rng);
      data.push_back({"q", sigmoid(logit * t_star), u(rng) < sigmoid(logit)});
    }
    double fitted = fit_calibration_temperature(data).temperature;
    pass = pass && std::abs(fitted - t_star) <= 0.05 * t_star;
    detail += fmt::format("T*={} fit={:.4f} ", t_star, fitted);
  }
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ScoredOutcome> calibrated;
  for (int i = 0; i < 100000; ++i) {
    double c = u(rng);
    calibrated.push_back({"q", c, u(rng) < c});
  }
  double e = ece(calibrated, 10);
  pass = pass && e <= 0.02;
  return {pass, detail + fmt::format("calibrated ece={:.4f}", e)};
}

// --- 6 ---------------------------------------------------------------------
// Exact majority accuracy of a uniformly drawn b-subset, averaged over the
// realized questions (hypergeometric); separates bootstrap error from the
// sampling noise of the synthetic population itself.
double subset_majority(const std::vector<QuestionBundle>& bundles, int b) {
  auto log_choose = [](int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); };
  double total = 0.0;
  for (const auto& q : bundles) {
    const int m = static_cast<int>(q.responses.size());
    int k = 0;
    for (const auto& r : q.responses) k += q.is_correct(r);
    for (int x = b / 2 + 1; x <= std::min(b, k); ++x)
      if (b - x <= m - k) total += std::exp(log_choose(k, x) + log_choose(m - k, b - x) - log_choose(m, b));
  }
  return total / bundles.size();
}

Outcome bootstrap_vs_binomial() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<QuestionBundle> bundles;
  for (int q = 0; q < 5000; ++q) {
    QuestionBundle b;
    b.question_id = "bin-" + std::to_string(q);
    b.gold_answer = "1";
    for (int i = 0; i < 30; ++i) {
      ResponseRecord r;
      r.response_index = i;
      r.canonical_answer = u(rng) < 0.6 ? "1" : "2";
      r.confidence_token_candidates = std::map<std::string, double>{{"1", 0.5}};
      b.responses.push_back(std::move(r));
    }
    bundles.push_back(std::move(b));
  }
  auto scores = score_all(bundles, kPTrue);
  auto curve = bootstrap_accuracy(bundles, scores, strategy(Strategy::self_consistency), boot({5, 9, 15}));
  double secs = seconds_since(t0);
  bool pass = secs < 30.0;
  std::string detail;
  for (int b : {5, 9, 15}) {
    double exact = weighted_majority_accuracy({b, 0.6, 1.0});
    pass = pass && std::abs(curve.mean.at(b) - exact) <= 0.02;
    detail += fmt::format("b={} boot={:.4f} exact={:.4f} given-draws={:.4f}  ", b, curve.mean.at(b), exact,
                          subset_majority(bundles, b));
  }
  return {pass, detail + fmt::format("({:.2f}s)", secs)};
}

// --- 7 and 8 ---------------------------------------------------------------
struct TunedRun {
  double temperature = 1.0;
  double wqd = 0.0;
  std::vector<QuestionBundle> eval;
  std::vector<ConfidenceVector> scores;
};

TunedRun tuned_population(const SyntheticSpec& spec, int budget) {
  auto bundles = make_synthetic_bundles(spec);
  auto split = split_heldout(bundles, 0.10, spec.seed);
  std::vector<QuestionBundle> tune;
  TunedRun run;
  for (auto i : split.tuning) tune.push_back(bundles[i]);
  for (auto i : split.evaluation) run.eval.push_back(bundles[i]);
  auto tune_scores = score_all(tune, kPTrue);
  run.temperature = tune_temperature(tune, tune_scores, budget, GridSpec{}, boot({budget}, 500, spec.seed)).temperature;
  run.scores = score_all(run.eval, kPTrue);
  run.wqd = wqd(scored_outcomes(run.eval, run.scores)).wqd;
  return run;
}

Outcome direction_check() {
  SyntheticSpec spec;
  spec.questions = 1000;
  spec.responses_per_question = 30;
  spec.seed = 77;
  std::string detail;
  bool pass = true;
  for (double signal : {0.45, 0.0}) {
    spec.signal = signal;
    TunedRun run = tuned_population(spec, 10);
    auto sc = bootstrap_accuracy(run.eval, run.scores, strategy(Strategy::self_consistency), boot(one_to(30)));
    auto cisc = bootstrap_accuracy(run.eval, run.scores, strategy(Strategy::cisc, run.temperature), boot({10}));
    double acc = cisc.mean.at(10), se = cisc.std_error.at(10);
    double cr = cost_reduction(10, comparable_sc_samples(acc, sc));
    double cr_lo = cost_reduction(10, comparable_sc_samples(acc - 3 * se, sc));
    double cr_hi = cost_reduction(10, comparable_sc_samples(acc + 3 * se, sc));
    if (signal > 0) {
      pass = pass && std::abs(run.wqd - 0.62) <= 0.02 && cr > 0.0;
    } else {
      pass = pass && std::abs(run.wqd - 0.5) <= 0.01 && cr_lo <= 0.0 && 0.0 <= cr_hi;
    }
    detail += fmt::format("[wqd={:.3f} T={:.3g} sc10={:.4f} cisc10={:.4f}±{:.4f} cost_red={:.1f}% band=[{:.1f},{:.1f}]] ",
                          run.wqd, run.temperature, sc.mean.at(10), acc, se, cr, cr_lo, cr_hi);
  }
  return {pass, detail};
}

Outcome normalization_ablation() {
  SyntheticSpec spec;
  spec.questions = 1000;
  spec.seed = 88;
  spec.floor = 0.85;
  TunedRun run = tuned_population(spec, 10);
  auto b = boot({10});
  double tuned = bootstrap_accuracy(run.eval, run.scores, strategy(Strategy::cisc, run.temperature), b).mean.at(10);
  double none =
      bootstrap_accuracy(run.eval, run.scores, strategy(Strategy::cisc, 1.0, Normalization::none), b).mean.at(10);
  double t1 = bootstrap_accuracy(run.eval, run.scores, strategy(Strategy::cisc, 1.0), b).mean.at(10);
  return {tuned >= none && none >= t1,
          fmt::format("b=10 softmax(T={:.3g})={:.4f} none={:.4f} softmax(T=1)={:.4f} (wqd={:.3f})", run.temperature, tuned,
                      none, t1, run.wqd)};
}

// --- 9 ---------------------------------------------------------------------
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cisc_acceptance_determinism";
  fs::create_directories(dir);
  const std::string input = std::string(CISC_FIXTURE_DIR) + "/synthetic_20.jsonl";
  std::vector<std::string> outputs;
  int i = 0;
  for (const char* jobs : {"1", "1", "2", "4", "0"}) {
    const std::string json = (dir / fmt::format("r{}.json", i)).string();
    const std::string csv = (dir / fmt::format("r{}.csv", i)).string();
    ++i;
    std::vector<std::string> args{"cisc", "eval", input, "--strategy", "self_consistency", "--strategy", "cisc",
                                  "--strategy", "tie_break", "--ablation", "--tune", "--heldout-fraction", "0.2",
                                  "--seed", "11", "--jobs", jobs, "--out-json", json, "--out-csv", csv};
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    if (run_cli(static_cast<int>(argv.size()), argv.data(), out, err) != 0) return {false, "eval failed: " + err.str()};
    outputs.push_back(out.str() + "\x1f" + slurp(json) + "\x1f" + slurp(csv));
  }
  fs::remove_all(dir);
  bool same = std::all_of(outputs.begin(), outputs.end(), [&](const std::string& o) { return o == outputs[0]; });
  return {same, fmt::format("{} runs (jobs 1,1,2,4,all) produced {} outputs", outputs.size(),
                            same ? "byte-identical" : "DIFFERING")};
}

// --- 10 --------------------------------------------------------------------
Outcome metric_formulas() {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    int budget = 1 + static_cast<int>(rng() % 30);
    int comparable = 1 + static_cast<int>(rng() % 31);
    double cisc = u(rng), sc = u(rng);
    double cr_hand = 100.0 * (comparable - budget) / comparable;
    double ai_hand = 100.0 * (cisc - sc) / sc;
    worst = std::max(worst, std::abs(cost_reduction(budget, comparable) - cr_hand));
    worst = std::max(worst, std::abs(accuracy_improvement(cisc, sc) - ai_hand));
  }
  return {worst <= 1e-12, fmt::format("20 triples, max abs deviation {:.3g}", worst)};
}

}  // namespace

int main() {
  const auto bundles = random_bundles(3000, 2023);
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"binomial voting model", binomial_reproduction},
      {"high-temperature collapse to SC", [&] { return collapse_limit(bundles); }},
      {"low-temperature max-confidence limit", [&] { return sharp_limit(bundles); }},
      {"WQD oracles", wqd_oracles},
      {"calibration temperature recovery", calibration_recovery},
      {"bootstrap vs exact binomial", bootstrap_vs_binomial},
      {"cost reduction tracks WQD", direction_check},
      {"normalization ablation ordering", normalization_ablation},
      {"eval determinism", determinism},
      {"metric formulas", metric_formulas},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << fmt::format("[{}] {:>2}. {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail);
    std::cout.flush();
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
