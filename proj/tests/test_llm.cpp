#include <gtest/gtest.h>
#include <httplib.h>

#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <thread>

#include "promptevo/llm/cassette.hpp"
#include "promptevo/llm/openai_gateway.hpp"
#include "promptevo/llm/retry.hpp"
#include "promptevo/llm/scripted_gateway.hpp"

using namespace promptevo;
using namespace promptevo::llm;
using nlohmann::json;

namespace {

Transcript hello() { return {Message::system("be brief"), Message::user("say hi")}; }

CallTag tag() { return {Phase::kEvaluation, "p1", 0}; }

}  // namespace

TEST(Transcript, RejectsMalformed) {
  ScriptedGateway g;
  g.register_script(ScriptedGateway::any(), "ok");
  TokenLedger ledger;
  EXPECT_THROW(g.complete({}, DecodingParams::greedy(), tag(), ledger), GatewayError);
  EXPECT_THROW(g.complete({Message::user("x"), Message::system("late")}, DecodingParams::greedy(), tag(), ledger),
               GatewayError);
  EXPECT_THROW(g.complete({Message::user("")}, DecodingParams::greedy(), tag(), ledger), GatewayError);
  EXPECT_EQ(ledger.size(), 0u);
}

TEST(ScriptedGateway, FirstMatchWinsAndLedgerGrowsByOne) {
  ScriptedGateway g;
  g.register_script(ScriptedGateway::last_contains("hi"), "hello there");
  g.register_script(ScriptedGateway::any(), "fallback");
  TokenLedger ledger;
  auto call = g.complete(hello(), DecodingParams::greedy(), tag(), ledger);
  EXPECT_EQ(call.result.content, "hello there");
  EXPECT_EQ(call.ledger_index, 0u);
  ASSERT_EQ(ledger.size(), 1u);
  // word counts: "be brief" + "say hi" = 4, "hello there" = 2
  EXPECT_EQ(ledger.at(0).prompt_tokens, 4);
  EXPECT_EQ(ledger.at(0).completion_tokens, 2);
  EXPECT_EQ(ledger.at(0).prompt_id, "p1");
  EXPECT_EQ(g.calls().front().transcript, hello());
}

TEST(ScriptedGateway, UnscriptedFailsWithoutLedgerEntry) {
  ScriptedGateway g;
  g.register_script(ScriptedGateway::last_contains("nothing like this"), "x");
  TokenLedger ledger;
  try {
    g.complete(hello(), DecodingParams::greedy(), tag(), ledger);
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::kUnscripted);
    EXPECT_NE(std::string(e.what()).find("unscripted transcript"), std::string::npos);
    EXPECT_FALSE(e.retryable());
  }
  EXPECT_EQ(ledger.size(), 0u);
}

TEST(ScriptedGateway, SequenceRepeatsLastAndFreezeLocks) {
  ScriptedGateway g;
  g.register_sequence(ScriptedGateway::any(), {"a", "b"}, Usage{7, 3});
  g.freeze();
  EXPECT_THROW(g.register_script(ScriptedGateway::any(), "c"), std::logic_error);
  TokenLedger ledger;
  std::vector<std::string> got;
  for (int i = 0; i < 4; ++i) got.push_back(g.complete(hello(), DecodingParams::greedy(), tag(), ledger).result.content);
  EXPECT_EQ(got, (std::vector<std::string>{"a", "b", "b", "b"}));
  EXPECT_EQ(ledger.total().prompt_tokens, 28);
  EXPECT_EQ(ledger.total().completion_tokens, 12);
}

TEST(Retry, BacksOffExponentiallyOnRetryableErrors) {
  std::vector<std::chrono::milliseconds> sleeps;
  RetryPolicy policy{4, std::chrono::milliseconds(100), 2.0};
  int calls = 0;
  auto value = with_retry(policy, [&](auto d) { sleeps.push_back(d); }, [&](int) {
    if (++calls < 3) throw GatewayError(GatewayErrorKind::kRateLimit, "slow down");
    return 5;
  });
  EXPECT_EQ(value, 5);
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(100),
                                                             std::chrono::milliseconds(200)}));
}

TEST(Retry, GivesUpAfterMaxAttemptsAndSkipsPermanentErrors) {
  RetryPolicy policy{3, std::chrono::milliseconds(1), 2.0};
  int calls = 0;
  auto noop = [](auto) {};
  EXPECT_THROW(with_retry(policy, noop, [&](int) -> int {
                 ++calls;
                 throw GatewayError(GatewayErrorKind::kTransport, "down");
               }),
               GatewayError);
  EXPECT_EQ(calls, 3);
  calls = 0;
  EXPECT_THROW(with_retry(policy, noop, [&](int) -> int {
                 ++calls;
                 throw GatewayError(GatewayErrorKind::kContextLength, "too long");
               }),
               GatewayError);
  EXPECT_EQ(calls, 1);
}

TEST(Cassette, RecordThenReplayServesSameResponses) {
  auto path = std::filesystem::temp_directory_path() / "promptevo_cassette_test.jsonl";
  std::filesystem::remove(path);
  ScriptedGateway inner;
  inner.register_sequence(ScriptedGateway::any(), {"first", "second"});
  TokenLedger recorded;
  {
    RecordingGateway rec(inner, path);
    rec.complete(hello(), DecodingParams::greedy(), tag(), recorded);
    rec.complete(hello(), DecodingParams::greedy(), tag(), recorded);
    rec.complete({Message::user("other")}, DecodingParams::sampled(0.5, 9), tag(), recorded);
  }
  auto records = read_cassette(path);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].hash, transcript_hash(hello(), DecodingParams::greedy()));
  EXPECT_EQ(parse_cassette_line(to_jsonl(records[2])), records[2]);

  auto replay = ReplayGateway::from_file(path);
  TokenLedger replayed;
  EXPECT_EQ(replay.complete(hello(), DecodingParams::greedy(), tag(), replayed).result.content, "first");
  EXPECT_EQ(replay.complete(hello(), DecodingParams::greedy(), tag(), replayed).result.content, "second");
  EXPECT_EQ(replay.complete(hello(), DecodingParams::greedy(), tag(), replayed).result.content, "second");
  EXPECT_EQ(replay.complete({Message::user("other")}, DecodingParams::sampled(0.5, 9), tag(), replayed)
                .result.content,
            "second");
  EXPECT_EQ(replayed.total_range(0, 2), recorded.total_range(0, 2));
  EXPECT_THROW(replay.complete({Message::user("never seen")}, DecodingParams::greedy(), tag(), replayed),
               GatewayError);
  std::filesystem::remove(path);
}

TEST(TranscriptHash, SensitiveToDecodingAndContent) {
  auto a = transcript_hash(hello(), DecodingParams::greedy());
  EXPECT_EQ(a, transcript_hash(hello(), DecodingParams::greedy()));
  EXPECT_NE(a, transcript_hash(hello(), DecodingParams::sampled(0.5, 1)));
  EXPECT_NE(transcript_hash(hello(), DecodingParams::sampled(0.5, 1)),
            transcript_hash(hello(), DecodingParams::sampled(0.5, 2)));
  EXPECT_NE(a, transcript_hash({Message::system("be brief"), Message::user("say hi!")},
                               DecodingParams::greedy()));
}

// A local chat-completions stub: the first request is rate limited, the rest
// answer with (or without) usage depending on the model name.
class OpenAiStub : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = json::parse(req.body);
      bodies_.push_back(body);
      auth_.push_back(req.get_header_value("Authorization"));
      const auto model = body["model"].get<std::string>();
      if (model == "flaky" && hits_++ == 0) {
        res.status = 429;
        res.set_content(R"({"error":"rate"})", "application/json");
        return;
      }
      if (model == "long") {
        res.status = 400;
        res.set_content(R"({"error":{"code":"context_length_exceeded"}})", "application/json");
        return;
      }
      json out = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "Hi there!"}}}}}}};
      if (model != "no-usage") out["usage"] = {{"prompt_tokens", 11}, {"completion_tokens", 3}};
      res.set_content(out.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  OpenAiConfig config(const std::string& model) {
    OpenAiConfig c;
    c.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
    c.model = model;
    c.retry = {3, std::chrono::milliseconds(50), 2.0};
    c.timeout = std::chrono::seconds(5);
    return c;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  int hits_ = 0;
  std::vector<json> bodies_;
  std::vector<std::string> auth_;
};

TEST_F(OpenAiStub, RetriesRateLimitThenRecordsUsage) {
  std::vector<std::chrono::milliseconds> sleeps;
  ::setenv("PROMPTEVO_TEST_KEY", "sk-test", 1);
  auto c = config("flaky");
  c.api_key_env = "PROMPTEVO_TEST_KEY";
  OpenAiGateway g(c, [&](auto d) { sleeps.push_back(d); });
  TokenLedger ledger;
  auto call = g.complete(hello(), DecodingParams::sampled(0.5, 17, 64), tag(), ledger);
  EXPECT_EQ(call.result.content, "Hi there!");
  EXPECT_EQ(call.result.attempt_latencies.size(), 2u);
  EXPECT_EQ(sleeps, std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(50)});
  ASSERT_EQ(ledger.size(), 1u);
  EXPECT_EQ(ledger.at(0).prompt_tokens, 11);
  EXPECT_EQ(ledger.at(0).completion_tokens, 3);
  ASSERT_EQ(bodies_.size(), 2u);
  EXPECT_EQ(bodies_[1]["temperature"], 0.5);
  EXPECT_EQ(bodies_[1]["seed"], 17);
  EXPECT_EQ(bodies_[1]["max_tokens"], 64);
  EXPECT_EQ(bodies_[1]["messages"][0]["role"], "system");
  EXPECT_EQ(auth_[1], "Bearer sk-test");
}

TEST_F(OpenAiStub, EstimatesUsageWhenMissing) {
  OpenAiGateway g(config("no-usage"), [](auto) {});
  TokenLedger ledger;
  g.complete(hello(), DecodingParams::greedy(), tag(), ledger);
  // ceil(chars / 4): "be brief" + "say hi" = 14 chars -> 4, "Hi there!" = 9 chars -> 3
  EXPECT_EQ(ledger.at(0).prompt_tokens, 4);
  EXPECT_EQ(ledger.at(0).completion_tokens, 3);
  EXPECT_EQ(bodies_[0]["temperature"], 0.0);
  EXPECT_FALSE(bodies_[0].contains("seed"));
}

TEST_F(OpenAiStub, ContextLengthIsNotRetried) {
  int sleeps = 0;
  OpenAiGateway g(config("long"), [&](auto) { ++sleeps; });
  TokenLedger ledger;
  try {
    g.complete(hello(), DecodingParams::greedy(), tag(), ledger);
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::kContextLength) << e.what();
  }
  EXPECT_EQ(sleeps, 0);
  EXPECT_EQ(bodies_.size(), 1u);
  EXPECT_EQ(ledger.size(), 0u);
}

TEST(OpenAiGateway, UnreachableEndpointIsTransportError) {
  OpenAiConfig c;
  c.base_url = "http://127.0.0.1:1/v1";
  c.model = "m";
  c.retry = {2, std::chrono::milliseconds(1), 2.0};
  c.timeout = std::chrono::seconds(2);
  OpenAiGateway g(c, [](auto) {});
  TokenLedger ledger;
  try {
    g.complete(hello(), DecodingParams::greedy(), tag(), ledger);
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.kind(), GatewayErrorKind::kTransport);
  }
}

TEST(OpenAiGateway, ParsesOrRejectsBodies) {
  EXPECT_THROW(parse_chat_completion("not json", hello()), GatewayError);
  EXPECT_THROW(parse_chat_completion(R"({"choices":[]})", hello()), GatewayError);
  auto r = parse_chat_completion(
      R"({"choices":[{"message":{"content":"x"}}],"usage":{"prompt_tokens":2,"completion_tokens":1}})",
      hello());
  EXPECT_EQ(r.content, "x");
  EXPECT_EQ(r.usage, (Usage{2, 1}));
}
