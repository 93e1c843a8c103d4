#include "cisc/report.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "cisc/random.hpp"

namespace cisc {

using json = nlohmann::json;

namespace {

// JSON has no infinity; an infinite temperature (the uniform-weight limit)
// is written as the string "inf".
json temperature_to_json(double t) { return std::isfinite(t) ? json(t) : json("inf"); }

double temperature_from_json(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

json to_json(const CurvePointReport& p) {
  return {{"budget", p.budget}, {"accuracy", p.accuracy}, {"std_error", p.std_error}, {"questions", p.questions}};
}

CurvePointReport curve_point_from_json(const json& j) {
  return {j.at("budget").get<int>(), j.at("accuracy").get<double>(), j.at("std_error").get<double>(),
          j.at("questions").get<int>()};
}

template <typename T>
json optional_to_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> optional_from_json(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::string cell(double v) { return fmt::format("{:.6f}", v); }

}  // namespace

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fmt::format("{:016x}", stable_hash(bytes));
}

json report_to_json(const EvalReport& r, const std::optional<RunManifest>& manifest) {
  json doc;
  doc["schema_version"] = r.schema_version;
  doc["confidence_method"] = r.confidence_method;
  doc["temperature"] = temperature_to_json(r.temperature);
  doc["temperature_source"] = r.temperature_source;
  if (r.tuning) {
    json grid = json::array();
    for (const auto& [t, acc] : r.tuning->grid_accuracy) grid.push_back({{"temperature", t}, {"accuracy", acc}});
    doc["tuning"] = {{"temperature", r.tuning->temperature}, {"budget", r.tuning->budget}, {"grid", grid}};
  } else {
    doc["tuning"] = nullptr;
  }
  doc["budgets"] = r.budgets;
  doc["resamples"] = r.resamples;
  doc["base_seed"] = r.base_seed;
  doc["replacement"] = r.replacement;
  doc["questions"] = r.questions;
  doc["responses"] = r.responses;
  doc["dataset_kinds"] = r.dataset_kinds;

  json strategies = json::array();
  for (const auto& s : r.strategies) {
    json curve = json::array();
    for (const auto& p : s.curve) curve.push_back(to_json(p));
    json comparisons = json::array();
    for (const auto& c : s.vs_self_consistency) {
      comparisons.push_back({{"budget", c.budget},
                             {"comparable_sc_samples", c.comparable_sc_samples},
                             {"cost_reduction_pct", c.cost_reduction_pct},
                             {"accuracy_improvement_pct", c.accuracy_improvement_pct},
                             {"accuracy_improvement_macro_pct", c.accuracy_improvement_macro_pct},
                             {"ci_low", optional_to_json(c.ci_low)},
                             {"ci_high", optional_to_json(c.ci_high)}});
    }
    strategies.push_back({{"label", s.label},
                          {"strategy", to_string(s.config.strategy)},
                          {"temperature", temperature_to_json(s.config.temperature)},
                          {"normalization", to_string(s.config.normalization)},
                          {"tie_policy", to_string(s.config.tie_policy)},
                          {"curve", curve},
                          {"vs_self_consistency", comparisons}});
  }
  doc["strategies"] = strategies;

  json reference = json::array();
  for (const auto& p : r.sc_reference) reference.push_back(to_json(p));
  doc["sc_reference"] = reference;

  if (r.wqd) {
    doc["wqd"] = {{"strict", r.wqd->strict},
                  {"half_credit", r.wqd->half_credit},
                  {"pair_count", r.wqd->pair_count},
                  {"questions_contributing", r.wqd->questions_contributing},
                  {"tie_pair_fraction", r.wqd->tie_pair_fraction}};
  } else {
    doc["wqd"] = nullptr;
  }
  if (r.calibration) {
    const auto& c = *r.calibration;
    doc["calibration"] = {{"ece", c.ece},
                          {"brier", c.brier},
                          {"fitted_temperature", c.fitted_temperature},
                          {"ece_t", c.ece_t},
                          {"brier_t", c.brier_t},
                          {"bin_count", c.bin_count},
                          {"warnings", c.warnings}};
  } else {
    doc["calibration"] = nullptr;
  }
  doc["warnings"] = r.warnings;

  if (manifest) {
    json m = {{"tool_version", manifest->tool_version},
              {"command", manifest->command},
              {"config", manifest->config},
              {"base_seed", manifest->base_seed},
              {"input_hash", manifest->input_hash},
              {"input_hash_algorithm", "fnv1a64"}};
    if (manifest->started_at) m["started_at"] = *manifest->started_at;
    if (manifest->finished_at) m["finished_at"] = *manifest->finished_at;
    doc["manifest"] = m;
  }
  return doc;
}

EvalReport report_from_json(const json& doc) {
  try {
    EvalReport r;
    r.schema_version = doc.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
      throw std::invalid_argument("unsupported report schema_version " + std::to_string(r.schema_version));
    r.confidence_method = doc.at("confidence_method").get<std::string>();
    r.temperature = temperature_from_json(doc.at("temperature"));
    r.temperature_source = doc.at("temperature_source").get<std::string>();
    if (const json& t = doc.at("tuning"); !t.is_null()) {
      TuningResult tr;
      tr.temperature = t.at("temperature").get<double>();
      tr.budget = t.at("budget").get<int>();
      for (const auto& g : t.at("grid"))
        tr.grid_accuracy.emplace_back(g.at("temperature").get<double>(), g.at("accuracy").get<double>());
      r.tuning = tr;
    }
    r.budgets = doc.at("budgets").get<std::vector<int>>();
    r.resamples = doc.at("resamples").get<int>();
    r.base_seed = doc.at("base_seed").get<std::uint64_t>();
    r.replacement = doc.at("replacement").get<std::string>();
    r.questions = doc.at("questions").get<int>();
    r.responses = doc.at("responses").get<int>();
    r.dataset_kinds = doc.at("dataset_kinds").get<std::vector<std::string>>();
    for (const auto& s : doc.at("strategies")) {
      StrategyReport sr;
      sr.label = s.at("label").get<std::string>();
      sr.config.strategy = parse_strategy(s.at("strategy").get<std::string>());
      sr.config.temperature = temperature_from_json(s.at("temperature"));
      sr.config.normalization = parse_normalization(s.at("normalization").get<std::string>());
      sr.config.tie_policy = parse_tie_policy(s.at("tie_policy").get<std::string>());
      for (const auto& p : s.at("curve")) sr.curve.push_back(curve_point_from_json(p));
      for (const auto& c : s.at("vs_self_consistency")) {
        ComparisonPoint cp;
        cp.budget = c.at("budget").get<int>();
        cp.comparable_sc_samples = c.at("comparable_sc_samples").get<int>();
        cp.cost_reduction_pct = c.at("cost_reduction_pct").get<double>();
        cp.accuracy_improvement_pct = c.at("accuracy_improvement_pct").get<double>();
        cp.accuracy_improvement_macro_pct = c.at("accuracy_improvement_macro_pct").get<double>();
        cp.ci_low = optional_from_json<double>(c, "ci_low");
        cp.ci_high = optional_from_json<double>(c, "ci_high");
        sr.vs_self_consistency.push_back(cp);
      }
      r.strategies.push_back(std::move(sr));
    }
    for (const auto& p : doc.at("sc_reference")) r.sc_reference.push_back(curve_point_from_json(p));
    if (const json& w = doc.at("wqd"); !w.is_null()) {
      r.wqd = WqdSummary{w.at("strict").get<double>(), w.at("half_credit").get<double>(),
                         w.at("pair_count").get<long long>(), w.at("questions_contributing").get<int>(),
                         w.at("tie_pair_fraction").get<double>()};
    }
    if (const json& c = doc.at("calibration"); !c.is_null()) {
      CalibrationReport cr;
      cr.ece = c.at("ece").get<double>();
      cr.brier = c.at("brier").get<double>();
      cr.fitted_temperature = c.at("fitted_temperature").get<double>();
      cr.ece_t = c.at("ece_t").get<double>();
      cr.brier_t = c.at("brier_t").get<double>();
      cr.bin_count = c.at("bin_count").get<int>();
      cr.warnings = c.at("warnings").get<std::vector<std::string>>();
      r.calibration = cr;
    }
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    return r;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

std::optional<RunManifest> manifest_from_json(const json& doc) {
  auto it = doc.find("manifest");
  if (it == doc.end() || it->is_null()) return std::nullopt;
  RunManifest m;
  m.tool_version = it->at("tool_version").get<std::string>();
  m.command = it->at("command").get<std::string>();
  m.config = it->at("config").get<std::map<std::string, std::string>>();
  m.base_seed = it->at("base_seed").get<std::uint64_t>();
  m.input_hash = it->at("input_hash").get<std::string>();
  m.started_at = optional_from_json<std::string>(*it, "started_at");
  m.finished_at = optional_from_json<std::string>(*it, "finished_at");
  return m;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
  out << "strategy,budget,accuracy,std_error,questions,comparable_sc_samples,cost_reduction_pct,"
         "accuracy_improvement_pct,accuracy_improvement_macro_pct\n";
  for (const auto& s : report.strategies) {
    for (const auto& p : s.curve) {
      out << s.label << ',' << p.budget << ',' << cell(p.accuracy) << ',' << cell(p.std_error) << ',' << p.questions;
      auto it = std::find_if(s.vs_self_consistency.begin(), s.vs_self_consistency.end(),
                             [&](const ComparisonPoint& c) { return c.budget == p.budget; });
      if (it != s.vs_self_consistency.end()) {
        out << ',' << it->comparable_sc_samples << ',' << cell(it->cost_reduction_pct) << ','
            << cell(it->accuracy_improvement_pct) << ',' << cell(it->accuracy_improvement_macro_pct);
      } else {
        out << ",,,,";
      }
      out << '\n';
    }
  }
}

void write_headline(std::ostream& out, const EvalReport& report) {
  const StrategyReport* sc = nullptr;
  for (const auto& s : report.strategies)
    if (s.config.strategy == Strategy::self_consistency) sc = &s;

  out << fmt::format("method {}  temperature {} ({})  questions {}  resamples {}\n", report.confidence_method,
                     std::isfinite(report.temperature) ? fmt::format("{:.6g}", report.temperature) : "inf",
                     report.temperature_source, report.questions, report.resamples);
  for (const auto& s : report.strategies) {
    if (s.config.strategy == Strategy::self_consistency) continue;
    out << fmt::format("\n{}\n{:>6} {:>8} {:>8} {:>10} {:>12} {:>10}\n", s.label, "budget", "sc_acc", "acc",
                       "sc_needed", "cost_red_%", "acc_imp_%");
    for (std::size_t i = 0; i < s.curve.size(); ++i) {
      const auto& p = s.curve[i];
      const auto& c = s.vs_self_consistency[i];
      double sc_acc = 0.0;
      for (const auto& r : report.sc_reference)
        if (r.budget == p.budget) sc_acc = r.accuracy;
      if (sc)
        for (const auto& r : sc->curve)
          if (r.budget == p.budget) sc_acc = r.accuracy;
      out << fmt::format("{:>6} {:>8.4f} {:>8.4f} {:>10} {:>12.1f} {:>10.2f}\n", p.budget, sc_acc, p.accuracy,
                         c.comparable_sc_samples, c.cost_reduction_pct, c.accuracy_improvement_pct);
    }
  }
  if (sc && report.strategies.size() == 1) {
    out << fmt::format("\n{}\n{:>6} {:>8}\n", sc->label, "budget", "acc");
    for (const auto& p : sc->curve) out << fmt::format("{:>6} {:>8.4f}\n", p.budget, p.accuracy);
  }
  if (report.wqd) out << fmt::format("\nwqd {:.4f} (half-credit {:.4f}, {} pairs)\n", report.wqd->strict,
                                     report.wqd->half_credit, report.wqd->pair_count);
}

bool operator==(const EvalReport& a, const EvalReport& b) { return report_to_json(a) == report_to_json(b); }

}  // namespace cisc
