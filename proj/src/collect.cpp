#include "cisc/collect.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

#include "cisc/random.hpp"

namespace cisc {

using json = nlohmann::json;

namespace {

constexpr std::string_view kGeneralInstructions =
    "Before giving your answer, provide a step-by-step explanation of your thought process. Then on a new line, "
    "give your proposed answer adhering to this precise format: 'Proposed answer: (X).', where X is your proposed "
    "answer.";

constexpr std::string_view kAnswerIntro = "You will be given a question and your goal is to answer it correctly.";

constexpr std::string_view kVerbal0To100Prompt =
    "Now I will rate my confidence in the proposed answer on a scale of 0-100.\nProposed confidence: (";
constexpr std::string_view kVerbalBinaryPrompt =
    "Now I will rate my confidence in the proposed answer as either 0 or 1.\nProposed confidence: (";

std::string instructions_for(DatasetKind kind) {
  const std::string general(kGeneralInstructions);
  switch (kind) {
    case DatasetKind::mmlu_pro:
      return "You will be given a single-choice question. Answer the question by selecting the letter of the\n"
             "best fitting option.\n\n" +
             general +
             "\n\nThe answer MUST ALWAYS\nbe the letter of one of the available options; it CANNOT be \"None of the "
             "Above\".";
    case DatasetKind::math:
      return std::string(kAnswerIntro) +
             "\nYour proposed answer should be a TeX expression, such as '$5$', '$3.14$', or '$\\\\sqrt{8}$'\n\n" +
             general;
    case DatasetKind::bbh_options:
      return std::string(kAnswerIntro) + "\n\n" + general +
             "\n\nSelect the letter of the best fitting option. The answer CANNOT be \"None of the Above\".";
    case DatasetKind::bbh_free:
    case DatasetKind::gsm8k:
    case DatasetKind::generic:
      return std::string(kAnswerIntro) + "\n\n" + general;
  }
  throw std::invalid_argument("render_prompts: unsupported dataset kind");
}

struct Endpoint {
  std::string base;    // scheme://host[:port]
  std::string prefix;  // e.g. /v1
};

Endpoint parse_endpoint(const std::string& url) {
  auto scheme = url.find("://");
  if (scheme == std::string::npos) throw CollectError("endpoint must look like http(s)://host[:port][/path]: " + url);
  auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.base = url.substr(0, slash);
  e.prefix = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

struct HttpOutcome {
  std::optional<json> body;  // parsed on success
  std::string error;         // last failure, when body is empty
};

class Client {
 public:
  Client(const CollectorConfig& config, std::uint64_t seed)
      : config_(config), endpoint_(parse_endpoint(config.endpoint)), http_(endpoint_.base), rng_(mix64(seed)) {
    auto t = std::chrono::duration_cast<std::chrono::seconds>(config.timeout).count();
    http_.set_connection_timeout(t, 0);
    http_.set_read_timeout(t, 0);
    http_.set_write_timeout(t, 0);
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key)
      headers_.emplace("Authorization", std::string("Bearer ") + key);
  }

  // POSTs with retries. Returns an empty body once attempts are exhausted on
  // transient failures; throws on authentication or client errors.
  HttpOutcome post(const std::string& path, const json& payload) {
    const std::string body = payload.dump();
    HttpOutcome out;
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
      auto res = http_.Post(endpoint_.prefix + path, headers_, body, "application/json");
      if (res) {
        if (res->status == 401 || res->status == 403)
          throw AuthenticationError("endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
        if (res->status >= 200 && res->status < 300) {
          try {
            out.body = json::parse(res->body);
            return out;
          } catch (const json::parse_error&) {
            throw CollectError("endpoint returned a non-JSON body");
          }
        }
        out.error = "HTTP " + std::to_string(res->status);
        if (res->status != 408 && res->status != 429 && res->status < 500)
          throw CollectError("endpoint refused the request (" + out.error + "): " + res->body.substr(0, 200));
      } else {
        out.error = httplib::to_string(res.error());
      }
      if (attempt < config_.retry.max_attempts) std::this_thread::sleep_for(config_.retry.delay_for(attempt, uniform01(rng_)));
    }
    return out;
  }

 private:
  const CollectorConfig& config_;
  Endpoint endpoint_;
  httplib::Client http_;
  httplib::Headers headers_;
  Rng rng_;
};

[[noreturn]] void schema_error(const std::string& what) {
  throw CollectError("schema-invalid endpoint response: " + what);
}

const json& first_choice(const json& body) {
  if (!body.is_object() || !body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
    schema_error("missing choices");
  return body["choices"][0];
}

double clamp_logprob(double lp, bool& invalid) {
  // Servers occasionally report log(1) as a tiny positive number.
  if (lp > 0.0 && lp <= 1e-6) return 0.0;
  if (!(lp <= 0.0)) invalid = true;
  return lp;
}

struct Generation {
  std::string text;
  std::vector<TokenLogprob> tokens;
  std::map<std::string, double> first_candidates;  // top candidates at the first generated position
  bool invalid_logprob = false;
};

void add_candidate(std::map<std::string, double>& out, const std::string& token, double logprob) {
  double& p = out[token];
  p = std::min(1.0, p + std::exp(std::min(0.0, logprob)));
}

Generation parse_completion(const json& body) {
  const json& choice = first_choice(body);
  if (!choice.contains("text") || !choice["text"].is_string()) schema_error("choice without text");
  Generation g;
  g.text = choice["text"].get<std::string>();
  auto lp = choice.find("logprobs");
  if (lp == choice.end() || lp->is_null()) return g;
  if (!lp->contains("tokens") || !lp->contains("token_logprobs")) schema_error("logprobs without tokens");
  const json& tokens = (*lp)["tokens"];
  const json& values = (*lp)["token_logprobs"];
  if (!tokens.is_array() || !values.is_array() || tokens.size() != values.size()) schema_error("token/logprob mismatch");
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (values[i].is_null()) continue;
    g.tokens.push_back({tokens[i].get<std::string>(), clamp_logprob(values[i].get<double>(), g.invalid_logprob)});
  }
  if (auto top = lp->find("top_logprobs"); top != lp->end() && top->is_array() && !top->empty() && (*top)[0].is_object())
    for (const auto& [token, value] : (*top)[0].items()) add_candidate(g.first_candidates, token, value.get<double>());
  return g;
}

Generation parse_chat(const json& body) {
  const json& choice = first_choice(body);
  if (!choice.contains("message") || !choice["message"].contains("content") || !choice["message"]["content"].is_string())
    schema_error("choice without message content");
  Generation g;
  g.text = choice["message"]["content"].get<std::string>();
  auto lp = choice.find("logprobs");
  if (lp == choice.end() || lp->is_null()) return g;
  if (!lp->contains("content") || !(*lp)["content"].is_array()) schema_error("logprobs without content");
  const json& content = (*lp)["content"];
  for (const auto& entry : content) {
    if (!entry.contains("token") || !entry.contains("logprob")) schema_error("logprob entry without token/logprob");
    g.tokens.push_back({entry["token"].get<std::string>(), clamp_logprob(entry["logprob"].get<double>(), g.invalid_logprob)});
  }
  if (!content.empty())
    if (auto top = content[0].find("top_logprobs"); top != content[0].end() && top->is_array())
      for (const auto& cand : *top)
        add_candidate(g.first_candidates, cand.at("token").get<std::string>(), cand.at("logprob").get<double>());
  return g;
}

struct Task {
  std::size_t question;
  int response_index;
};

}  // namespace

std::string_view to_string(ApiMode mode) { return mode == ApiMode::chat ? "chat" : "completions"; }

ApiMode parse_api_mode(std::string_view name) {
  if (name == "chat") return ApiMode::chat;
  if (name == "completions") return ApiMode::completions;
  throw std::invalid_argument("unknown api mode: " + std::string(name));
}

std::chrono::milliseconds RetryPolicy::delay_for(int attempt, double unit_random) const {
  double base = static_cast<double>(base_delay.count()) * std::pow(2.0, std::max(0, attempt - 1));
  base = std::min(base, static_cast<double>(max_delay.count()));
  double factor = 1.0 + jitter * (2.0 * unit_random - 1.0);
  return std::chrono::milliseconds(static_cast<long long>(std::max(0.0, base * factor)));
}

std::vector<QuestionInput> load_questions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DumpError(0, "cannot read " + path.string());
  std::vector<QuestionInput> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json obj = json::parse(text);
      QuestionInput q;
      q.question_id = obj.at("question_id").get<std::string>();
      q.dataset_kind = parse_dataset_kind(obj.at("dataset_kind").get<std::string>());
      q.question_text = obj.at("question_text").get<std::string>();
      q.gold_answer = obj.at("gold_answer").get<std::string>();
      out.push_back(std::move(q));
    } catch (const std::exception& e) {
      throw DumpError(line, "line " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

PromptPair render_prompts(std::string_view question, DatasetKind kind, ConfidenceKind method) {
  PromptPair out;
  out.question_prompt = instructions_for(kind) + "\n\n" + std::string(question) + "\n";
  switch (method) {
    case ConfidenceKind::verbal_0_100:
      out.confidence_prompt = "\n" + std::string(kVerbal0To100Prompt);
      break;
    case ConfidenceKind::verbal_binary:
    case ConfidenceKind::p_true:
      out.confidence_prompt = "\n" + std::string(kVerbalBinaryPrompt);
      break;
    case ConfidenceKind::response_probability:
      break;
  }
  return out;
}

std::string confidence_transcript(std::string_view question_prompt, std::string_view completion,
                                  std::string_view confidence_prompt) {
  std::string out;
  out.reserve(question_prompt.size() + completion.size() + confidence_prompt.size());
  out.append(question_prompt).append(completion).append(confidence_prompt);
  return out;
}

CollectSummary collect_responses(std::span<const QuestionInput> questions, const CollectorConfig& config,
                                 const std::function<void(const std::string&)>& sink) {
  if (config.samples_per_question < 1) throw std::invalid_argument("collect: samples_per_question must be >= 1");
  if (config.max_concurrent_requests < 1) throw std::invalid_argument("collect: max concurrent requests must be >= 1");
  if (config.top_candidates_at_confidence < 2) throw std::invalid_argument("collect: need at least 2 top candidates");
  if (config.retry.max_attempts < 1) throw std::invalid_argument("collect: retry attempts must be >= 1");
  parse_endpoint(config.endpoint);

  // Indices are fixed before dispatch; completion order is not.
  std::vector<Task> tasks;
  for (std::size_t q = 0; q < questions.size(); ++q)
    for (int i = 0; i < config.samples_per_question; ++i) tasks.push_back({q, i});

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex sink_mutex;
  std::exception_ptr fatal;
  CollectSummary summary;

  auto worker = [&](unsigned worker_id) {
    Client client(config, combine_seed(config.seed, worker_id));
    for (;;) {
      if (abort.load()) return;
      std::size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const QuestionInput& q = questions[tasks[t].question];
      try {
        PromptPair prompts = render_prompts(q.question_text, q.dataset_kind, config.confidence);
        ResponseRecord record;
        record.response_index = tasks[t].response_index;

        json step1 = {{"model", config.model}, {"max_tokens", config.max_tokens},
                      {"temperature", config.sampling_temperature}};
        if (config.api == ApiMode::completions) {
          step1["prompt"] = prompts.question_prompt;
          if (config.request_logprobs) step1["logprobs"] = 1;
        } else {
          step1["messages"] = json::array({{{"role", "user"}, {"content", prompts.question_prompt}}});
          if (config.request_logprobs) step1["logprobs"] = true;
        }
        HttpOutcome gen = client.post(config.api == ApiMode::completions ? "/completions" : "/chat/completions", step1);
        bool generation_failed = !gen.body;
        bool confidence_failed = false;
        if (gen.body) {
          Generation g = config.api == ApiMode::completions ? parse_completion(*gen.body) : parse_chat(*gen.body);
          record.response_text = g.text;
          if (config.request_logprobs && !g.tokens.empty()) record.reasoning_logprobs = g.tokens;
          if (g.invalid_logprob) record.flags.emplace(flag::kInvalidLogprob);

          if (config.confidence != ConfidenceKind::response_probability) {
            json step2 = {{"model", config.model}, {"max_tokens", 1}, {"temperature", 0.0}};
            if (config.api == ApiMode::completions) {
              step2["prompt"] = confidence_transcript(prompts.question_prompt, g.text, prompts.confidence_prompt);
              step2["logprobs"] = config.top_candidates_at_confidence;
            } else {
              step2["messages"] = json::array({{{"role", "user"}, {"content", prompts.question_prompt}},
                                               {{"role", "assistant"}, {"content", g.text + prompts.confidence_prompt}}});
              step2["continue_final_message"] = true;
              step2["add_generation_prompt"] = false;
              step2["logprobs"] = true;
              step2["top_logprobs"] = config.top_candidates_at_confidence;
            }
            HttpOutcome conf =
                client.post(config.api == ApiMode::completions ? "/completions" : "/chat/completions", step2);
            if (conf.body) {
              Generation c = config.api == ApiMode::completions ? parse_completion(*conf.body) : parse_chat(*conf.body);
              record.confidence_continuation = c.text;
              if (!c.first_candidates.empty()) record.confidence_token_candidates = c.first_candidates;
            } else {
              confidence_failed = true;
              record.flags.emplace(flag::kConfidenceRequestFailed);
            }
          }
        } else {
          record.flags.emplace(flag::kGenerationFailed);
        }
        derive_answer(record, q.dataset_kind);

        QuestionBundle line;
        line.question_id = q.question_id;
        line.dataset_kind = q.dataset_kind;
        line.question_text = q.question_text;
        line.gold_answer = q.gold_answer;
        line.responses.push_back(std::move(record));
        std::ostringstream os;
        write_dump(os, std::span<const QuestionBundle>(&line, 1));
        std::string text = os.str();
        if (!text.empty() && text.back() == '\n') text.pop_back();

        std::lock_guard lock(sink_mutex);
        sink(text);
        ++summary.records;
        summary.generation_failures += generation_failed ? 1 : 0;
        summary.confidence_failures += confidence_failed ? 1 : 0;
      } catch (...) {
        std::lock_guard lock(sink_mutex);
        if (!fatal) fatal = std::current_exception();
        abort.store(true);
        return;
      }
    }
  };

  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(static_cast<std::size_t>(config.max_concurrent_requests), tasks.size()));
  std::vector<std::thread> threads;
  for (unsigned w = 0; w < workers; ++w) threads.emplace_back(worker, w);
  for (auto& t : threads) t.join();
  if (fatal) std::rethrow_exception(fatal);
  return summary;
}

}  // namespace cisc
