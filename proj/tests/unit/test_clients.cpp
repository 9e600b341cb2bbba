#include <atomic>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "doctest.h"
#include "ebi/clients/http_backend.hpp"
#include "ebi/clients/prompt_context.hpp"
#include "ebi/clients/rate_limiter.hpp"
#include "ebi/clients/replay_cache.hpp"
#include "ebi/clients/scripted_backend.hpp"
#include "ebi/clients/synthetic_judge.hpp"
#include "ebi/core/error.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace ebi;
using namespace ebi::clients;

namespace {

CompletionRequest request(const std::string& text, std::int64_t call = 0) {
  CompletionRequest r;
  r.model = "m";
  r.messages = {{"user", text}};
  r.call_index = call;
  return r;
}

class CountingBackend : public ModelBackend {
 public:
  std::string complete(const CompletionRequest& req) override {
    ++calls;
    return "reply " + std::to_string(req.call_index);
  }
  std::atomic<int> calls{0};
};

std::string type1_prompt(const std::vector<int>& a_ids, int b) {
  std::string s = "##Output Format\nid_B:{id_B number}, id_A:{matching candidate id_A number}\n##Aptitude\n";
  for (int a : a_ids) s += "id_A:" + std::to_string(a) + ", text\n";
  s += "##Personnel\nid_B:" + std::to_string(b) + ", text\n";
  return s;
}

}  // namespace

TEST_CASE("request key covers every field") {
  auto r = request("hello", 3);
  const auto k = request_key(r);
  CHECK(k.size() == 64);
  CHECK(request_key(r) == k);
  auto r2 = r;
  r2.call_index = 4;
  CHECK(request_key(r2) != k);
  r2 = r;
  r2.model = "other";
  CHECK(request_key(r2) != k);
  r2 = r;
  r2.params.temperature = 0.7;
  CHECK(request_key(r2) != k);
  r2 = r;
  r2.messages.push_back({"assistant", "x"});
  CHECK(request_key(r2) != k);
}

TEST_CASE("invalid requests are rejected") {
  CompletionRequest r;
  r.model = "m";
  CHECK_THROWS_AS(validate(r), ValidationError);
  r = request("x", -1);
  CHECK_THROWS_AS(validate(r), ValidationError);
}

TEST_CASE("replay cache: record, hit, strict miss") {
  auto dir = testing_util::temp_dir("replay");
  auto inner = std::make_shared<CountingBackend>();
  auto cache = std::make_shared<ReplayCache>(dir);

  CachingBackend rec(inner, cache, ReplayMode::record);
  CHECK(rec.complete(request("a", 1)) == "reply 1");
  CHECK(inner->calls == 1);

  CachingBackend rep(inner, cache, ReplayMode::strict);
  CHECK(rep.complete(request("a", 1)) == "reply 1");
  CHECK(inner->calls == 1);
  CHECK(rep.hits() == 1);

  const auto missing = request("b", 1);
  try {
    rep.complete(missing);
    FAIL("expected a cache miss");
  } catch (const CacheMissError& e) {
    CHECK(std::string(e.what()).find(request_key(missing)) != std::string::npos);
  }
  CHECK(inner->calls == 1);

  CachingBackend lazy(inner, cache, ReplayMode::replay);
  CHECK(lazy.complete(missing) == "reply 1");
  CHECK(inner->calls == 2);
  CHECK(cache->lookup(request_key(missing)).has_value());
  CHECK_THROWS_AS(parse_replay_mode("sometimes"), ValidationError);
}

TEST_CASE("http backend retries 429 twice then succeeds") {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string seen_auth;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    if (++hits <= 2) {
      res.status = 429;
      res.set_content("slow down", "text/plain");
      return;
    }
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"id_B:1, id_A:25"}}]})",
                    "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("EBI_TEST_API_KEY", "sekrit", 1);
  HttpBackendConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  cfg.api_key_env = "EBI_TEST_API_KEY";
  cfg.initial_backoff = std::chrono::milliseconds(1);
  HttpChatBackend backend(cfg);
  CHECK(backend.complete(request("hi")) == "id_B:1, id_A:25");
  const auto attempts = backend.attempts();
  REQUIRE(attempts.size() == 3);
  CHECK(attempts[0].status == 429);
  CHECK(attempts[1].status == 429);
  CHECK(attempts[2].status == 200);
  CHECK(seen_auth == "Bearer sekrit");

  cfg.max_retries = 0;
  hits = 0;
  HttpChatBackend impatient(cfg);
  CHECK_THROWS_AS(impatient.complete(request("hi")), BackendError);

  server.stop();
  t.join();
}

TEST_CASE("http backend reports a missing key and malformed replies") {
  HttpBackendConfig cfg;
  cfg.base_url = "http://127.0.0.1:9/v1";
  cfg.api_key_env = "EBI_SURELY_UNSET_KEY";
  HttpChatBackend backend(cfg);
  CHECK_THROWS_AS(backend.complete(request("hi")), BackendError);
  CHECK_THROWS_AS(extract_completion_text("{}"), BackendError);
  CHECK_THROWS_AS(extract_completion_text("not json"), BackendError);
  CHECK(extract_completion_text(R"({"choices":[{"message":{"content":"ok"}}]})") == "ok");
}

TEST_CASE("rate limiter spaces requests") {
  RateLimiter rl(60.0);  // one per second
  const auto t0 = RateLimiter::Clock::now();
  CHECK(rl.try_acquire(t0) == RateLimiter::Clock::duration::zero());
  const auto wait = rl.try_acquire(t0);
  CHECK(wait > std::chrono::milliseconds(900));
  CHECK(rl.try_acquire(t0 + std::chrono::seconds(2)) == RateLimiter::Clock::duration::zero());
  RateLimiter off(0.0);
  CHECK(off.try_acquire(t0) == RateLimiter::Clock::duration::zero());
  CHECK(off.try_acquire(t0) == RateLimiter::Clock::duration::zero());
}

TEST_CASE("prompt context reads rows and inline id lists") {
  auto ctx = extract_context(type1_prompt({3, 7, 12}, 5));
  CHECK(ctx.kind == PromptKind::type1);
  CHECK(ctx.candidates == std::vector<IdA>{IdA{3}, IdA{7}, IdA{12}});
  CHECK(ctx.targets == std::vector<IdB>{IdB{5}});

  ctx = extract_context("Output the certainty level.\nid_A:1, x\nid_A:2, y\nid_B:8, z\nid_B:9, w\n");
  CHECK(ctx.kind == PromptKind::type2);
  CHECK(ctx.targets.size() == 2);

  ctx = extract_context("Please evaluate `id_B=4`. {\"thought\": str, \"id_A\": int}\nThe target for evaluation is id_A=[2, 6]. The information was provided earlier.");
  CHECK(ctx.kind == PromptKind::seq_step);
  CHECK(ctx.targets == std::vector<IdB>{IdB{4}});
  CHECK(ctx.candidates == std::vector<IdA>{IdA{2}, IdA{6}});

  ctx = extract_context("Please evaluate `id_B=[3, 4]`. targets `id_A=[1]`. S0=id_A[1, 2, 5].\ninclude all previous `id_B=[1, 2, 3, 4]`.");
  CHECK(ctx.kind == PromptKind::seq_recursion);
  CHECK(ctx.candidates == std::vector<IdA>{IdA{1}, IdA{2}, IdA{5}});
  CHECK(ctx.targets == std::vector<IdB>{IdB{3}, IdB{4}});
  CHECK(ctx.earlier_targets == std::vector<IdB>{IdB{1}, IdB{2}});

  ctx = extract_context("tags <count>\nid_B:1, id_A:4\nid_B:2, id_A:4\n");
  CHECK(ctx.kind == PromptKind::seq_review);
  REQUIRE(ctx.pairs.size() == 2);
  CHECK(ctx.pairs[1] == std::pair{IdB{2}, IdA{4}});
}

TEST_CASE("synthetic judge extremes") {
  SyntheticJudgeConfig cfg;
  cfg.truth = {{IdB{1}, IdA{10}}, {IdB{2}, IdA{20}}};
  cfg.accuracy = 1.0;
  const auto ctx = extract_context(type1_prompt({10, 20}, 1));
  for (int k = 0; k < 50; ++k) {
    CHECK(synthetic_judge_respond(cfg, ctx, k).find("id_B:1, id_A:10") != std::string::npos);
  }
  cfg.accuracy = 0.0;
  for (int k = 0; k < 50; ++k) {
    CHECK(synthetic_judge_respond(cfg, ctx, k).find("id_B:1, id_A:20") != std::string::npos);
  }
  // Pure function of its inputs.
  cfg.accuracy = 0.5;
  CHECK(synthetic_judge_respond(cfg, ctx, 7) == synthetic_judge_respond(cfg, ctx, 7));

  const auto outside = extract_context(type1_prompt({10, 20}, 99));
  CHECK_THROWS_AS(synthetic_judge_respond(cfg, outside, 0), ValidationError);
  cfg.accuracy = 1.5;
  CHECK_THROWS_AS(validate(cfg), ValidationError);
}

TEST_CASE("synthetic judge hits its configured accuracy") {
  SyntheticJudgeConfig cfg;
  std::vector<int> block;
  for (int k = 1; k <= 7; ++k) {
    cfg.truth[IdB{k}] = IdA{100 + k};
    block.push_back(100 + k);
  }
  cfg.accuracy = 0.45;
  cfg.seed = 2024;
  const int calls = 10000;
  int correct = 0;
  for (int k = 0; k < calls; ++k) {
    const int b = 1 + k % 7;
    const auto ctx = extract_context(type1_prompt(block, b));
    const auto text = synthetic_judge_respond(cfg, ctx, k);
    correct += text.find("id_B:" + std::to_string(b) + ", id_A:" + std::to_string(100 + b)) != std::string::npos;
  }
  const double rate = static_cast<double>(correct) / calls;
  CHECK(std::abs(rate - 0.45) <= 0.015);
}

TEST_CASE("synthetic judge type 2 ranks every candidate") {
  SyntheticJudgeConfig cfg;
  cfg.truth = {{IdB{1}, IdA{10}}, {IdB{2}, IdA{20}}, {IdB{3}, IdA{30}}};
  cfg.accuracy = 1.0;
  const auto ctx = extract_context("certainty\nid_A:10, a\nid_A:20, b\nid_A:30, c\nid_B:1, x\nid_B:2, y\nid_B:3, z\n");
  const auto text = synthetic_judge_respond(cfg, ctx, 0);
  CHECK(text.find("1. id_B:1, id_A:10 ") != std::string::npos);
  CHECK(text.find("1. id_B:2, id_A:20 ") != std::string::npos);
  CHECK(text.find("3. id_B:3, id_A:") != std::string::npos);
}

TEST_CASE("scripted backend fires rules once in order") {
  ScriptedBackend sb({{"alpha", "first"}, {"alpha", "second"}, {"", "anything"}}, std::nullopt);
  CHECK(sb.complete(request("alpha")) == "first");
  CHECK(sb.complete(request("alpha")) == "second");
  CHECK(sb.remaining() == 1);
  CHECK(sb.complete(request("beta")) == "anything");
  CHECK_THROWS_AS(sb.complete(request("beta")), BackendError);
}
