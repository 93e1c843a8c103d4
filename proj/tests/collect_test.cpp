#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "cisc/collect.hpp"
#include "cisc/confidence.hpp"

using namespace cisc;
using nlohmann::json;

namespace {

const std::string kAnswerText = "Six times seven is 42, minus 41 gives 1.\nProposed answer: (A). ";

// In-process OpenAI-compatible endpoint. Generation requests get a fixed
// answer; single-token requests get "1" with P("1") = 0.7, P("0") = 0.2.
class MockServer {
 public:
  MockServer() {
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, false);
    });
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      handle(req, res, true);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  std::atomic<int> max_in_flight{0};
  std::atomic<int> fail_first{0};      // respond 503 to this many requests
  std::atomic<int> status_always{0};   // respond with this status forever when nonzero
  std::atomic<int> requests{0};
  std::mutex mutex;
  std::vector<json> bodies;
  std::vector<std::string> auth_headers;

 private:
  void handle(const httplib::Request& req, httplib::Response& res, bool chat) {
    int now = ++in_flight_;
    int seen = max_in_flight.load();
    while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(15));
    ++requests;
    json body = json::parse(req.body);
    {
      std::lock_guard lock(mutex);
      bodies.push_back(body);
      auth_headers.push_back(req.get_header_value("Authorization"));
    }
    --in_flight_;
    if (int s = status_always.load()) {
      res.status = s;
      res.set_content(R"({"error":"nope"})", "application/json");
      return;
    }
    if (fail_first.fetch_sub(1) > 0) {
      res.status = 503;
      return;
    }
    const bool confidence_step = body.at("max_tokens").get<int>() == 1;
    const std::string text = confidence_step ? "1" : kAnswerText;
    json choice;
    if (!chat) {
      choice["text"] = text;
      if (confidence_step)
        choice["logprobs"] = {{"tokens", {"1"}},
                              {"token_logprobs", {std::log(0.7)}},
                              {"top_logprobs", json::array({{{"1", std::log(0.7)}, {"0", std::log(0.2)}}})}};
      else
        choice["logprobs"] = {{"tokens", {"Six", " times", " seven"}}, {"token_logprobs", {-0.1, -0.2, -0.3}}};
    } else {
      choice["message"] = {{"role", "assistant"}, {"content", text}};
      if (confidence_step)
        choice["logprobs"] = {{"content", json::array({{{"token", "1"},
                                                          {"logprob", std::log(0.7)},
                                                          {"top_logprobs", json::array({{{"token", "1"}, {"logprob", std::log(0.7)}},
                                                                                        {{"token", "0"}, {"logprob", std::log(0.2)}}})}}})}};
      else
        choice["logprobs"] = {{"content", json::array({{{"token", "Six"}, {"logprob", -0.1}}, {{"token", " times"}, {"logprob", -0.2}}})}};
    }
    res.set_content(json{{"choices", json::array({choice})}}.dump(), "application/json");
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> in_flight_{0};
};

CollectorConfig base_config(const MockServer& server) {
  CollectorConfig c;
  c.endpoint = server.endpoint();
  c.model = "mock";
  c.api_key_env = "CISC_TEST_KEY";
  c.samples_per_question = 2;
  c.max_concurrent_requests = 1;
  c.retry.base_delay = std::chrono::milliseconds(1);
  c.retry.max_delay = std::chrono::milliseconds(5);
  c.timeout = std::chrono::seconds(10);
  return c;
}

std::vector<QuestionInput> one_question() {
  return {{"q1", DatasetKind::mmlu_pro, "Which letter comes first?\n(A) a\n(B) b", "A"}};
}

std::vector<QuestionBundle> collect_to_bundles(const std::vector<QuestionInput>& qs, const CollectorConfig& c,
                                               CollectSummary* summary = nullptr) {
  std::ostringstream out;
  auto s = collect_responses(qs, c, [&](const std::string& line) { out << line << '\n'; });
  if (summary) *summary = s;
  std::istringstream in(out.str());
  return parse_dump(in);
}

}  // namespace

TEST(Prompts, Templates) {
  auto mmlu = render_prompts("Q?", DatasetKind::mmlu_pro, ConfidenceKind::p_true);
  EXPECT_NE(mmlu.question_prompt.find("Answer the question by selecting the letter"), std::string::npos);
  EXPECT_NE(mmlu.question_prompt.find("Q?"), std::string::npos);
  auto verbal = render_prompts("Q?", DatasetKind::gsm8k, ConfidenceKind::verbal_0_100);
  EXPECT_TRUE(verbal.confidence_prompt.ends_with("Proposed confidence: ("));
  auto binary = render_prompts("Q?", DatasetKind::gsm8k, ConfidenceKind::verbal_binary);
  EXPECT_NE(binary.confidence_prompt.find("either 0 or 1"), std::string::npos);
  EXPECT_TRUE(binary.confidence_prompt.ends_with("("));
  EXPECT_EQ(render_prompts("Q?", DatasetKind::gsm8k, ConfidenceKind::p_true).confidence_prompt, binary.confidence_prompt);
  EXPECT_TRUE(render_prompts("Q?", DatasetKind::gsm8k, ConfidenceKind::response_probability).confidence_prompt.empty());
  for (auto kind : {DatasetKind::gsm8k, DatasetKind::math, DatasetKind::bbh_options, DatasetKind::bbh_free,
                    DatasetKind::generic})
    EXPECT_NE(render_prompts("Q?", kind, ConfidenceKind::p_true).question_prompt.find("Proposed answer"), std::string::npos);
}

TEST(Prompts, TranscriptIsPlainConcatenation) {
  EXPECT_EQ(confidence_transcript("a", "b", "c"), "abc");
}

TEST(Retry, BackoffGrowsAndCaps) {
  RetryPolicy p;
  p.jitter = 0.0;
  EXPECT_EQ(p.delay_for(1, 0.5).count(), 500);
  EXPECT_EQ(p.delay_for(2, 0.5).count(), 1000);
  EXPECT_EQ(p.delay_for(20, 0.5).count(), 20000);
  p.jitter = 0.5;
  EXPECT_EQ(p.delay_for(1, 0.0).count(), 250);
}

TEST(Collect, WritesOneLinePerSampleWithVerbatimCandidates) {
  MockServer server;
  setenv("CISC_TEST_KEY", "secret", 1);
  CollectSummary summary;
  auto bundles = collect_to_bundles(one_question(), base_config(server), &summary);
  unsetenv("CISC_TEST_KEY");
  EXPECT_EQ(summary.records, 2);
  ASSERT_EQ(bundles.size(), 1u);
  ASSERT_EQ(bundles[0].responses.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    const auto& r = bundles[0].responses[i];
    EXPECT_EQ(r.response_index, i);
    EXPECT_EQ(r.response_text, kAnswerText);
    EXPECT_EQ(*r.canonical_answer, "A");
    EXPECT_TRUE(r.flags.empty());
    ASSERT_TRUE(r.confidence_token_candidates);
    EXPECT_NEAR(r.confidence_token_candidates->at("1"), 0.7, 1e-12);
    EXPECT_NEAR(r.confidence_token_candidates->at("0"), 0.2, 1e-12);
    EXPECT_EQ(*r.confidence_continuation, "1");
    ASSERT_TRUE(r.reasoning_logprobs);
    EXPECT_EQ(r.reasoning_logprobs->size(), 3u);
  }
  auto scores = score_bundle(bundles[0], {ConfidenceKind::p_true, false});
  EXPECT_NEAR(scores.scores[0], 0.7, 1e-12);
  for (const auto& h : server.auth_headers) EXPECT_EQ(h, "Bearer secret");
}

TEST(Collect, ConfidenceRequestExtendsTheSameTranscript) {
  MockServer server;
  collect_to_bundles(one_question(), base_config(server));
  PromptPair prompts = render_prompts(one_question()[0].question_text, DatasetKind::mmlu_pro, ConfidenceKind::p_true);
  int checked = 0;
  for (const auto& body : server.bodies) {
    std::string prompt = body.at("prompt");
    if (body.at("max_tokens") == 1) {
      EXPECT_EQ(prompt, prompts.question_prompt + kAnswerText + prompts.confidence_prompt);
      EXPECT_EQ(body.at("logprobs"), 5);
      ++checked;
    } else {
      EXPECT_EQ(prompt, prompts.question_prompt);
    }
  }
  EXPECT_EQ(checked, 2);
}

TEST(Collect, ChatModeContinuesTheAssistantTurn) {
  MockServer server;
  auto c = base_config(server);
  c.api = ApiMode::chat;
  auto bundles = collect_to_bundles(one_question(), c);
  ASSERT_EQ(bundles[0].responses.size(), 2u);
  EXPECT_NEAR(bundles[0].responses[0].confidence_token_candidates->at("1"), 0.7, 1e-12);
  for (const auto& body : server.bodies)
    if (body.at("max_tokens") == 1) {
      EXPECT_TRUE(body.at("continue_final_message").get<bool>());
      EXPECT_TRUE(body.at("messages").back().at("content").get<std::string>().starts_with(kAnswerText));
    }
}

TEST(Collect, RespectsConcurrencyLimit) {
  MockServer server;
  auto c = base_config(server);
  c.samples_per_question = 12;
  c.max_concurrent_requests = 3;
  std::vector<QuestionInput> qs = one_question();
  qs.push_back({"q2", DatasetKind::gsm8k, "1+1?", "2"});
  auto bundles = collect_to_bundles(qs, c);
  EXPECT_EQ(bundles.size(), 2u);
  EXPECT_EQ(server.requests.load(), 48);
  EXPECT_LE(server.max_in_flight.load(), 3);
  EXPECT_GE(server.max_in_flight.load(), 2);
}

TEST(Collect, RetriesTransientFailures) {
  MockServer server;
  server.fail_first = 3;
  CollectSummary summary;
  auto bundles = collect_to_bundles(one_question(), base_config(server), &summary);
  EXPECT_EQ(summary.generation_failures + summary.confidence_failures, 0);
  EXPECT_EQ(bundles[0].responses.size(), 2u);
}

TEST(Collect, ExhaustedRetriesAreFlagged) {
  MockServer server;
  server.status_always = 503;
  auto c = base_config(server);
  c.retry.max_attempts = 2;
  CollectSummary summary;
  auto bundles = collect_to_bundles(one_question(), c, &summary);
  EXPECT_EQ(summary.generation_failures, 2);
  for (const auto& r : bundles[0].responses) EXPECT_TRUE(r.flags.count(std::string(flag::kGenerationFailed)));
}

TEST(Collect, AuthenticationFailureIsFatal) {
  MockServer server;
  server.status_always = 401;
  EXPECT_THROW(collect_to_bundles(one_question(), base_config(server)), AuthenticationError);
}

TEST(Collect, ClientErrorIsFatal) {
  MockServer server;
  server.status_always = 400;
  EXPECT_THROW(collect_to_bundles(one_question(), base_config(server)), CollectError);
}
