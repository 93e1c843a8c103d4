#include "cisc/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "cisc/binomial.hpp"
#include "cisc/collect.hpp"
#include "cisc/harness.hpp"
#include "cisc/metrics.hpp"
#include "cisc/records.hpp"
#include "cisc/report.hpp"
#include "cisc/synthetic.hpp"

namespace cisc {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

// Input problems the user can fix by changing flags or files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string utc_now() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string join(const std::vector<int>& items) {
  std::string out;
  for (int v : items) out += (out.empty() ? "" : ",") + std::to_string(v);
  return out;
}

std::string number(double v) { return fmt::format("{}", v); }

template <typename Enum, typename Parser>
std::map<std::string, Enum> choices(std::initializer_list<const char*> names, Parser parse) {
  std::map<std::string, Enum> out;
  for (const char* n : names) out.emplace(n, parse(n));
  return out;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

// --- shared input handling -------------------------------------------------

struct MethodOptions {
  std::string method = "p_true";
  bool renormalize = false;

  void add(CLI::App* cmd) {
    cmd->add_option("--method", method, "Confidence method")
        ->check(CLI::IsMember({"response_probability", "verbal_binary", "verbal_0_100", "p_true"}))
        ->capture_default_str();
    cmd->add_flag("--p-true-renormalize", renormalize, "Renormalize P(True) over the tokens 0 and 1");
  }
  ConfidenceMethod get() const { return {parse_confidence_kind(method), renormalize}; }
};

std::vector<QuestionBundle> load_input(const std::string& path, std::optional<DatasetKind> kind = std::nullopt) {
  LoadOptions options;
  options.dataset_kind = kind;
  return load_dump(path, options);
}

// --- ingest ----------------------------------------------------------------

struct IngestOptions {
  std::string input;
  std::string dataset_kind;
  std::string out;
};

int cmd_ingest(const IngestOptions& o, std::ostream& out) {
  std::optional<DatasetKind> kind;
  if (!o.dataset_kind.empty()) kind = parse_dataset_kind(o.dataset_kind);
  auto bundles = load_input(o.input, kind);
  std::map<std::string, int> by_flag;
  for (const auto& b : bundles)
    for (const auto& r : b.responses)
      for (const auto& f : r.flags) ++by_flag[f];
  out << bundles.size() << " questions, " << total_responses(bundles) << " responses, " << total_flags(bundles)
      << " flags\n";
  for (const auto& [f, n] : by_flag) out << "  " << f << ": " << n << '\n';
  if (!o.out.empty()) {
    auto file = open_output(o.out);
    write_dump(file, bundles);
  }
  return kExitOk;
}

// --- eval ------------------------------------------------------------------

struct EvalCliOptions {
  std::string input;
  MethodOptions method;
  std::vector<std::string> strategies{"self_consistency", "cisc"};
  std::vector<int> budgets{5, 10};
  int resamples = 500;
  std::uint64_t seed = 0;
  bool tune = false;
  std::optional<double> temperature;
  double heldout_fraction = 0.10;
  int tune_budget = 10;
  int grid_points = 80;
  double grid_min = 1e-4;
  double grid_max = 1e4;
  std::string replacement = "without";
  std::string tie_policy = "highest_raw_confidence_sum_then_first";
  bool ablation = false;
  int ci_resamples = 0;
  int bins = 10;
  unsigned jobs = 1;
  std::string out_json;
  std::string out_csv;
  bool record_time = false;
};

RunManifest eval_manifest(const EvalCliOptions& o) {
  RunManifest m;
  m.command = "eval";
  m.base_seed = o.seed;
  m.input_hash = hash_file(o.input);
  // Settings that cannot change results (worker count, output paths) are
  // left out so reruns compare byte-for-byte.
  m.config = {{"method", o.method.method},
              {"p_true_renormalize", o.method.renormalize ? "true" : "false"},
              {"strategies", join(o.strategies)},
              {"budgets", join(o.budgets)},
              {"resamples", std::to_string(o.resamples)},
              {"seed", std::to_string(o.seed)},
              {"tune", o.tune ? "true" : "false"},
              {"temperature", o.temperature ? number(*o.temperature) : ""},
              {"heldout_fraction", number(o.heldout_fraction)},
              {"tune_budget", std::to_string(o.tune_budget)},
              {"grid", fmt::format("{}:{}:{}", o.grid_points, number(o.grid_min), number(o.grid_max))},
              {"replacement", o.replacement},
              {"tie_policy", o.tie_policy},
              {"ablation", o.ablation ? "true" : "false"},
              {"ci_resamples", std::to_string(o.ci_resamples)},
              {"bins", std::to_string(o.bins)}};
  return m;
}

int cmd_eval(const EvalCliOptions& o, std::ostream& out, std::ostream& err) {
  if (o.tune && o.temperature) throw InputError("--tune and --temperature are mutually exclusive");
  const std::string started = utc_now();
  const ConfidenceMethod method = o.method.get();
  auto bundles = load_input(o.input);
  if (bundles.empty()) throw InputError("input contains no questions");

  BootstrapConfig bcfg;
  bcfg.budgets = o.budgets;
  bcfg.resamples = o.resamples;
  bcfg.base_seed = o.seed;
  bcfg.replacement = parse_replacement(o.replacement);
  bcfg.jobs = o.jobs;
  const TiePolicy tie = parse_tie_policy(o.tie_policy);

  std::vector<Strategy> strategies;
  for (const auto& s : o.strategies) strategies.push_back(parse_strategy(s));

  EvalOptions options;
  options.method = method;
  options.bootstrap = bcfg;
  options.calibration_bins = o.bins;
  options.ci_resamples = o.ci_resamples;

  std::vector<QuestionBundle> evaluation;
  if (o.tune) {
    HeldoutSplit split = split_heldout(bundles, o.heldout_fraction, o.seed);
    std::vector<QuestionBundle> tuning;
    for (auto i : split.tuning) tuning.push_back(bundles[i]);
    for (auto i : split.evaluation) evaluation.push_back(bundles[i]);
    auto tuning_scores = score_all(tuning, method);
    TuningResult tuned = tune_temperature(tuning, tuning_scores, o.tune_budget,
                                          GridSpec{o.grid_points, o.grid_min, o.grid_max}, bcfg, tie);
    options.temperature = tuned.temperature;
    options.temperature_source = "tuned";
    options.tuning = tuned;
    err << fmt::format("tuned temperature {:.6g} on {} held-out questions\n", tuned.temperature, tuning.size());
  } else {
    evaluation = std::move(bundles);
    options.temperature = o.temperature.value_or(1.0);
    options.temperature_source = "fixed";
  }
  options.strategies = standard_strategies(strategies, options.temperature, tie, o.ablation);

  auto scores = score_all(evaluation, method);
  EvalReport report = evaluate(evaluation, scores, options);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';

  RunManifest manifest = eval_manifest(o);
  if (o.record_time) {
    manifest.started_at = started;
    manifest.finished_at = utc_now();
  }
  if (!o.out_json.empty()) {
    auto file = open_output(o.out_json);
    file << report_to_json(report, manifest).dump(2) << '\n';
  }
  if (!o.out_csv.empty()) {
    auto file = open_output(o.out_csv);
    write_report_csv(file, report);
  }
  write_headline(out, report);
  return kExitOk;
}

// --- wqd / calibrate -------------------------------------------------------

struct WqdCliOptions {
  std::string input;
  MethodOptions method;
  std::string tie_mode = "strict";
  int gap_bins = 0;
};

int cmd_wqd(const WqdCliOptions& o, std::ostream& out, std::ostream& err) {
  auto bundles = load_input(o.input);
  auto scores = score_all(bundles, o.method.get());
  auto outcomes = scored_outcomes(bundles, scores);
  WqdReport report;
  try {
    report = wqd(outcomes, o.tie_mode == "half_credit" ? WqdTieMode::half_credit : WqdTieMode::strict);
  } catch (const std::domain_error& e) {
    throw InputError(e.what());
  }
  out << fmt::format("wqd {:.6f}\npairs {}\nquestions_contributing {}\ntie_pair_fraction {:.6f}\n", report.wqd,
                     report.pair_count, report.questions_contributing, report.tie_pair_fraction);
  if (o.gap_bins > 0) {
    GapAnalysis gaps = confidence_gap_analysis(outcomes, o.gap_bins);
    if (gaps.warning) err << "warning: " << *gaps.warning << '\n';
    out << "gap_bin,gap_low,gap_high,pairs,wqd\n";
    for (std::size_t i = 0; i < gaps.bins.size(); ++i) {
      const auto& b = gaps.bins[i];
      out << fmt::format("{},{:.6f},{:.6f},{},{:.6f}\n", i, b.gap_low, b.gap_high, b.pair_count, b.wqd);
    }
  }
  return kExitOk;
}

struct CalibrateCliOptions {
  std::string input;
  MethodOptions method;
  int bins = 10;
};

int cmd_calibrate(const CalibrateCliOptions& o, std::ostream& out, std::ostream& err) {
  auto bundles = load_input(o.input);
  auto scores = score_all(bundles, o.method.get());
  auto outcomes = scored_outcomes(bundles, scores);
  if (outcomes.empty()) throw InputError("input contains no responses");
  CalibrationReport c = calibration_report(outcomes, o.bins);
  for (const auto& w : c.warnings) err << "warning: " << w << '\n';
  out << fmt::format("ece {:.6f}\nbrier {:.6f}\ntemperature {:.6f}\nece_t {:.6f}\nbrier_t {:.6f}\nbins {}\n", c.ece,
                     c.brier, c.fitted_temperature, c.ece_t, c.brier_t, c.bin_count);
  return kExitOk;
}

// --- binomial --------------------------------------------------------------

struct BinomialCliOptions {
  double p = 0.6;
  double w = 2.0;
  std::optional<double> target;
  std::optional<int> n_max;
  std::optional<int> n;
  std::string out;
};

int cmd_binomial(const BinomialCliOptions& o, std::ostream& out) {
  if (!o.target && !o.n_max && !o.n) throw InputError("binomial: give --target, --n or --n-max");
  if (o.n) out << fmt::format("accuracy {:.10f}\n", weighted_majority_accuracy({*o.n, o.p, o.w}));
  if (o.target) out << "min_samples " << min_samples_for_accuracy(o.p, o.w, *o.target) << '\n';
  if (o.n_max) {
    if (o.out.empty()) {
      write_accuracy_curve_csv(out, o.p, o.w, *o.n_max);
    } else {
      auto file = open_output(o.out);
      write_accuracy_curve_csv(file, o.p, o.w, *o.n_max);
    }
  }
  return kExitOk;
}

// --- collect ---------------------------------------------------------------

struct CollectCliOptions {
  std::string questions;
  std::string out;
  CollectorConfig config;
  std::string api = "completions";
  std::string confidence = "p_true";
  long long backoff_ms = 500;
  long long timeout_s = 120;
  bool no_logprobs = false;
};

int cmd_collect(CollectCliOptions o, std::ostream& out, std::ostream& err) {
  o.config.api = parse_api_mode(o.api);
  o.config.confidence = parse_confidence_kind(o.confidence);
  o.config.retry.base_delay = std::chrono::milliseconds(o.backoff_ms);
  o.config.timeout = std::chrono::seconds(o.timeout_s);
  o.config.request_logprobs = !o.no_logprobs;
  auto questions = load_questions(o.questions);
  std::ofstream file(o.out, std::ios::binary | std::ios::app);
  if (!file) throw InputError("cannot write " + o.out);
  CollectSummary s = collect_responses(questions, o.config, [&](const std::string& line) {
    file << line << '\n';
    file.flush();
  });
  out << s.records << " records written, " << s.generation_failures << " generation failures, "
      << s.confidence_failures << " confidence failures\n";
  if (s.generation_failures + s.confidence_failures > 0) {
    err << "warning: some requests failed after retries; affected records are flagged\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// --- synth -----------------------------------------------------------------

struct SynthCliOptions {
  SyntheticSpec spec;
  std::string kind = "gsm8k";
  std::string out;
};

int cmd_synth(SynthCliOptions o, std::ostream& out) {
  o.spec.kind = parse_dataset_kind(o.kind);
  auto bundles = make_synthetic_bundles(o.spec);
  if (o.out.empty()) {
    write_dump(out, bundles);
  } else {
    auto file = open_output(o.out);
    write_dump(file, bundles);
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence-informed self-consistency: scoring, voting and evaluation of recorded LLM samples", "cisc"};
  app.set_config("--config", "", "Key-value configuration file; command-line flags take precedence");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  const std::vector<std::string> kinds{"gsm8k", "math", "mmlu_pro", "bbh_options", "bbh_free", "generic"};

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a response dump and summarize it");
  ingest_cmd->add_option("input", ingest.input, "Response dump (JSONL)")->required();
  ingest_cmd->add_option("--dataset-kind", ingest.dataset_kind, "Override every record's dataset_kind")
      ->check(CLI::IsMember(kinds));
  ingest_cmd->add_option("--out", ingest.out, "Write the normalized dump here");

  EvalCliOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Bootstrap accuracy curves, cost reduction and confidence metrics");
  eval_cmd->add_option("input", eval.input, "Response dump (JSONL)")->required();
  eval.method.add(eval_cmd);
  eval_cmd->add_option("--strategy", eval.strategies, "Strategies to evaluate (repeatable)")
      ->check(CLI::IsMember({"self_consistency", "cisc", "max_confidence", "tie_break"}))
      ->capture_default_str();
  eval_cmd->add_option("--budgets", eval.budgets, "Sample budgets")->delimiter(',')->capture_default_str();
  eval_cmd->add_option("--resamples", eval.resamples, "Bootstrap sets per question and budget")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval.seed, "Base seed")->capture_default_str();
  auto* tune_flag = eval_cmd->add_flag("--tune", eval.tune, "Tune the temperature on a held-out split");
  auto* temp_opt = eval_cmd->add_option("--temperature", eval.temperature, "Fixed softmax temperature (default 1)")
                       ->check(CLI::PositiveNumber);
  tune_flag->excludes(temp_opt);
  eval_cmd->add_option("--heldout-fraction", eval.heldout_fraction, "Fraction of questions used for tuning")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  eval_cmd->add_option("--tune-budget", eval.tune_budget, "Budget at which tuning accuracy is measured")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  eval_cmd->add_option("--grid-points", eval.grid_points, "Temperature grid size")->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--grid-min", eval.grid_min, "Smallest grid temperature")->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--grid-max", eval.grid_max, "Largest grid temperature")->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--replacement", eval.replacement, "Draw bootstrap sets with or without replacement")
      ->check(CLI::IsMember({"with", "without"}))
      ->capture_default_str();
  eval_cmd->add_option("--tie-policy", eval.tie_policy, "Tie-break rule for votes")
      ->check(CLI::IsMember({"first_occurrence", "highest_raw_confidence_sum_then_first"}))
      ->capture_default_str();
  eval_cmd->add_flag("--ablation", eval.ablation, "Add softmax(T=1) and no-normalization CISC variants");
  eval_cmd->add_option("--ci-resamples", eval.ci_resamples, "Question-level bootstrap sets for improvement intervals")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  eval_cmd->add_option("--bins", eval.bins, "ECE bins")->check(CLI::PositiveNumber)->capture_default_str();
  eval_cmd->add_option("--jobs", eval.jobs, "Worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();
  eval_cmd->add_option("--out-json", eval.out_json, "Report JSON path");
  eval_cmd->add_option("--out-csv", eval.out_csv, "Report CSV path");
  eval_cmd->add_flag("--record-time", eval.record_time, "Store start/finish timestamps in the manifest");

  WqdCliOptions wqd_opts;
  auto* wqd_cmd = app.add_subcommand("wqd", "Within-question discrimination of a confidence method");
  wqd_cmd->add_option("input", wqd_opts.input, "Response dump (JSONL)")->required();
  wqd_opts.method.add(wqd_cmd);
  wqd_cmd->add_option("--tie-mode", wqd_opts.tie_mode, "How equal-confidence pairs count")
      ->check(CLI::IsMember({"strict", "half_credit"}))
      ->capture_default_str();
  wqd_cmd->add_option("--gap-bins", wqd_opts.gap_bins, "Also report WQD per confidence-gap percentile bin")
      ->check(CLI::NonNegativeNumber);

  CalibrateCliOptions cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "ECE and Brier score before and after temperature scaling");
  cal_cmd->add_option("input", cal.input, "Response dump (JSONL)")->required();
  cal.method.add(cal_cmd);
  cal_cmd->add_option("--bins", cal.bins, "ECE bins")->check(CLI::PositiveNumber)->capture_default_str();

  BinomialCliOptions bin;
  auto* bin_cmd = app.add_subcommand("binomial", "Exact accuracy of weighted majority voting with two answers");
  bin_cmd->add_option("--p", bin.p, "Probability that a sample is correct")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  bin_cmd->add_option("--w", bin.w, "Weight of correct samples relative to incorrect ones")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bin_cmd->add_option("--target", bin.target, "Report the smallest n reaching this accuracy");
  bin_cmd->add_option("--n", bin.n, "Report the accuracy at this n")->check(CLI::PositiveNumber);
  bin_cmd->add_option("--n-max", bin.n_max, "Emit the accuracy curve for n = 1..n-max as CSV")->check(CLI::PositiveNumber);
  bin_cmd->add_option("--out", bin.out, "CSV path for --n-max (default stdout)");

  CollectCliOptions col;
  auto* col_cmd = app.add_subcommand("collect", "Sample responses and confidence signals from an OpenAI-compatible endpoint");
  col_cmd->add_option("--questions", col.questions, "Questions JSONL")->required();
  col_cmd->add_option("--out", col.out, "Dump to append to")->required();
  col_cmd->add_option("--endpoint", col.config.endpoint, "Base URL including the API prefix")->capture_default_str();
  col_cmd->add_option("--model", col.config.model, "Model name")->required();
  col_cmd->add_option("--api", col.api, "Wire dialect")->check(CLI::IsMember({"completions", "chat"}))->capture_default_str();
  col_cmd->add_option("--api-key-env", col.config.api_key_env, "Environment variable holding the API key")
      ->capture_default_str();
  col_cmd->add_option("--samples", col.config.samples_per_question, "Responses per question")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  col_cmd->add_option("--sampling-temperature", col.config.sampling_temperature, "Generation temperature")
      ->capture_default_str();
  col_cmd->add_option("--max-tokens", col.config.max_tokens, "Generation length limit")->capture_default_str();
  col_cmd->add_option("--concurrency", col.config.max_concurrent_requests, "Maximum requests in flight")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  col_cmd->add_option("--retries", col.config.retry.max_attempts, "Attempts per request")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  col_cmd->add_option("--backoff-ms", col.backoff_ms, "Initial retry delay")->capture_default_str();
  col_cmd->add_option("--timeout", col.timeout_s, "Per-request timeout in seconds")->capture_default_str();
  col_cmd->add_option("--top-candidates", col.config.top_candidates_at_confidence, "Candidates kept at the confidence token")
      ->check(CLI::Range(2, 20))
      ->capture_default_str();
  col_cmd->add_option("--confidence", col.confidence, "Confidence prompt to append")
      ->check(CLI::IsMember({"response_probability", "verbal_binary", "verbal_0_100", "p_true"}))
      ->capture_default_str();
  col_cmd->add_flag("--no-logprobs", col.no_logprobs, "Do not request token log-probabilities");
  col_cmd->add_option("--seed", col.config.seed, "Seed for retry jitter")->capture_default_str();

  SynthCliOptions syn;
  auto* syn_cmd = app.add_subcommand("synth", "Write a synthetic response dump with a controllable confidence signal");
  syn_cmd->add_option("--questions", syn.spec.questions, "Number of questions")->check(CLI::PositiveNumber)->capture_default_str();
  syn_cmd->add_option("--responses", syn.spec.responses_per_question, "Responses per question")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  syn_cmd->add_option("--kind", syn.kind, "Dataset kind")->check(CLI::IsMember(kinds))->capture_default_str();
  syn_cmd->add_option("--seed", syn.spec.seed, "Generator seed")->capture_default_str();
  syn_cmd->add_option("--min-accuracy", syn.spec.min_accuracy, "Lowest per-question accuracy")->capture_default_str();
  syn_cmd->add_option("--max-accuracy", syn.spec.max_accuracy, "Highest per-question accuracy")->capture_default_str();
  syn_cmd->add_option("--distractors", syn.spec.distractors, "Wrong answers per question")->capture_default_str();
  syn_cmd->add_option("--signal", syn.spec.signal, "Confidence logit shift of correct responses")->capture_default_str();
  syn_cmd->add_option("--noise", syn.spec.noise_sd, "Per-response logit noise")->capture_default_str();
  syn_cmd->add_option("--offset-sd", syn.spec.question_offset_sd, "Per-question logit offset")->capture_default_str();
  syn_cmd->add_option("--floor", syn.spec.floor, "Lowest attainable confidence")->capture_default_str();
  syn_cmd->add_flag("--calibrated", syn.spec.calibrated, "Draw correctness with probability equal to the confidence");
  syn_cmd->add_option("--out", syn.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out);
    if (*eval_cmd) return cmd_eval(eval, out, err);
    if (*wqd_cmd) return cmd_wqd(wqd_opts, out, err);
    if (*cal_cmd) return cmd_calibrate(cal, out, err);
    if (*bin_cmd) return cmd_binomial(bin, out);
    if (*col_cmd) return cmd_collect(col, out, err);
    if (*syn_cmd) return cmd_synth(syn, out);
  } catch (const DumpError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace cisc
