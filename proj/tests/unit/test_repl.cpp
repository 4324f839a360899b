#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "leanrl/common/rng.hpp"
#include "leanrl/repl/header_key.hpp"
#include "leanrl/repl/lru_cache.hpp"
#include "leanrl/repl/pool.hpp"
#include "leanrl/repl/protocol.hpp"
#include "support.hpp"

using namespace leanrl;
using namespace leanrl::repl;
using nlohmann::json;

namespace {

// Move-to-front list, capacity-bounded.
struct RefLru {
  std::size_t cap;
  std::vector<int> order;  // most recent first
  bool access(int key) {
    auto it = std::find(order.begin(), order.end(), key);
    const bool hit = it != order.end();
    if (hit) order.erase(it);
    order.insert(order.begin(), key);
    if (order.size() > cap) order.pop_back();
    return hit;
  }
};

std::string header_src(int h, const std::string& body = "theorem t : True := trivial") {
  return "import Mod" + std::to_string(h) + "\n" + body;
}

}  // namespace

TEST_SUITE("repl") {

TEST_CASE("header canonicalization sorts imports") {
  const auto s = canonicalize_header(
      "import Mathlib\nimport Aesop\nset_option maxHeartbeats 0\ntheorem t : True := trivial");
  CHECK(s.key.imports == std::vector<std::string>{"import Aesop", "import Mathlib"});
  CHECK(s.key.options == std::vector<std::string>{"set_option maxHeartbeats 0"});
  CHECK(s.body == "theorem t : True := trivial");
}

TEST_CASE("no header leaves body untouched") {
  const std::string src = "theorem t : True := trivial";
  const auto s = canonicalize_header(src);
  CHECK(s.key.empty());
  CHECK(s.body == src);
}

TEST_CASE("import order and duplicates do not change the key") {
  const auto a = canonicalize_header("import B\nimport A\n-- note\n\nimport A\ntheorem t : 1 = 1 := rfl");
  const auto b = canonicalize_header("import A\n  import B  \ntheorem t : 1 = 1 := rfl");
  CHECK(a.key == b.key);
  CHECK(ImportHeaderKeyHash{}(a.key) == ImportHeaderKeyHash{}(b.key));
  const auto c = canonicalize_header("import A\nset_option x 1\nset_option y 2\nexample : True := trivial");
  const auto d = canonicalize_header("import A\nset_option y 2\nset_option x 1\nexample : True := trivial");
  CHECK_FALSE(c.key == d.key);
}

TEST_CASE("recompose reproduces header then body") {
  const auto s = canonicalize_header("import B\nimport A\nopen Nat\ntheorem t : True := trivial");
  CHECK(s.body == "open Nat\ntheorem t : True := trivial");
  CHECK(recompose(s) == "import A\nimport B\n\nopen Nat\ntheorem t : True := trivial");
  CHECK(canonicalize_header(recompose(s)).key == s.key);
}

TEST_CASE("lru evicts least recently used") {
  LruCache<std::string, int> c(2);
  c.put("A", 1);
  c.put("B", 2);
  auto ev = c.put("C", 3);
  REQUIRE(ev);
  CHECK(ev->first == "A");
  CHECK(c.get("B") == 2);
  ev = c.put("A", 4);
  REQUIRE(ev);
  CHECK(ev->first == "C");
  CHECK(c.keys_by_recency() == std::vector<std::string>{"A", "B"});
}

TEST_CASE("lru matches reference simulation on random sequences") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t cap = 1 + rng.below(6);
    LruCache<int, int> c(cap);
    RefLru ref{cap, {}};
    for (int step = 0; step < 200; ++step) {
      const int key = static_cast<int>(rng.below(10));
      const bool hit = c.get(key).has_value();
      if (!hit) c.put(key, key);
      REQUIRE(hit == ref.access(key));
      REQUIRE(c.keys_by_recency() == ref.order);
    }
  }
}

TEST_CASE("command frame ends in a blank line") {
  CHECK(encode_command("theorem t", std::nullopt) == "{\"cmd\":\"theorem t\"}\n\n");
  const auto f = encode_command("x", 3);
  CHECK(json::parse(f.substr(0, f.size() - 2)) == json{{"cmd", "x"}, {"env", 3}});
}

TEST_CASE("response decoding") {
  const auto r = decode_response(
      "{\n  \"env\": 2,\n  \"messages\": [{\"severity\": \"warning\", \"pos\": {\"line\": 3, \"column\": 4},"
      " \"data\": \"w\"}],\n  \"sorries\": [{\"pos\": {\"line\": 1, \"column\": 0}, \"goal\": \"⊢ P\"}]\n}");
  CHECK(r.env == 2);
  REQUIRE(r.messages.size() == 1);
  CHECK(r.messages[0].severity == Severity::warning);
  CHECK(r.messages[0].pos == Position{3, 4});
  CHECK_FALSE(r.has_errors());
  REQUIRE(r.sorries.size() == 1);
  CHECK(r.sorries[0].goal == "⊢ P");

  const auto bare = decode_response("{\"message\": \"Unknown environment.\"}");
  CHECK(bare.has_errors());
  CHECK_FALSE(bare.env);
  CHECK_THROWS_AS(decode_response("not json"), ParseError);
  CHECK(severity_from_string("weird") == Severity::error);
}

TEST_CASE("response json round trip") {
  ReplResponse r;
  r.env = 5;
  r.messages.push_back({Severity::error, {1, 2}, "bad"});
  r.sorries.push_back({{4, 0}, "⊢ True"});
  auto back = decode_response(to_json(r).dump());
  back.elapsed_ms = r.elapsed_ms;
  CHECK(back == r);
}

TEST_CASE("pool construction") {
  ReplPool pool(test::mock_pool(4));
  const auto ws = pool.workers();
  REQUIRE(ws.size() == 4);
  for (const auto& w : ws) CHECK(w.state == WorkerState::idle);
  const auto m = pool.metrics();
  CHECK(m.submissions == 0);
  CHECK(m.completed == 0);
  CHECK(m.cache_hits == 0);
  CHECK(m.timeouts == 0);
  CHECK(m.crashes == 0);
  CHECK(m.live_workers == 4);
  CHECK(pool.queue_depth() == 0);
}

TEST_CASE("invalid binary raises SpawnFailure") {
  PoolOptions opt;
  opt.launch.argv = {"/nonexistent/lean-repl"};
  opt.worker_count = 1;
  CHECK_THROWS_AS(ReplPool{opt}, SpawnFailure);
  PoolOptions zero = test::mock_pool(0);
  CHECK_THROWS_AS(ReplPool{zero}, InvalidArgument);
}

TEST_CASE("verdicts pass through") {
  ReplPool pool(test::mock_pool(1));
  auto ok = pool.submit(test::kStdHeader + "theorem t : True := trivial");
  CHECK(ok.kind == OutcomeKind::ok);
  CHECK_FALSE(ok.response.has_errors());
  auto err = pool.submit(test::kStdHeader + "theorem t : True := MOCK_ERROR");
  CHECK(err.response.has_errors());
  auto s = pool.submit(test::kStdHeader + "theorem t : True := by sorry");
  CHECK(s.response.sorries.size() == 1);
}

TEST_CASE("second submission with the same header skips the header load") {
  test::TempDir dir;
  const auto tr = dir / "t.jsonl";
  ReplPool pool(test::mock_pool(1, {"--transcript", tr.string()}));
  auto first = pool.submit(test::kStdHeader + "theorem a : True := trivial");
  auto second = pool.submit(test::kStdHeader + "theorem b : True := trivial");
  CHECK_FALSE(first.cache_hit);
  CHECK(second.cache_hit);
  const auto rows = test::read_transcript(tr);
  REQUIRE(rows.size() == 3);
  CHECK(test::count_header_loads(rows) == 1);
  CHECK(rows[2]["cmd"] == "theorem b : True := trivial");
  CHECK(rows[2]["env"] == rows[1]["env"]);
}

TEST_CASE("capacity 2: A B C A reloads A") {
  test::TempDir dir;
  const auto tr = dir / "t.jsonl";
  auto opt = test::mock_pool(1, {"--transcript", tr.string()});
  opt.cache_capacity = 2;
  ReplPool pool(opt);
  std::vector<bool> hits;
  for (int h : {0, 1, 2, 0}) hits.push_back(pool.submit(header_src(h)).cache_hit);
  CHECK(hits == std::vector<bool>{false, false, false, false});
  CHECK(test::count_header_loads(test::read_transcript(tr)) == 4);
  const auto keys = pool.workers()[0].cached_keys;
  REQUIRE(keys.size() == 2);
  CHECK(keys[0].imports[0] == "import Mod0");
  CHECK(keys[1].imports[0] == "import Mod2");
}

TEST_CASE("pool cache equals reference lru per worker") {
  auto opt = test::mock_pool(1);
  opt.cache_capacity = 3;
  ReplPool pool(opt);
  RefLru ref{3, {}};
  Rng rng(5);
  for (int i = 0; i < 60; ++i) {
    const int h = static_cast<int>(rng.below(6));
    const bool hit = pool.submit(header_src(h)).cache_hit;
    REQUIRE(hit == ref.access(h));
    std::vector<int> keys;
    const auto snap = pool.workers();
    for (const auto& k : snap[0].cached_keys)
      keys.push_back(std::stoi(k.imports[0].substr(std::string("import Mod").size())));
    REQUIRE(keys == ref.order);
  }
}

TEST_CASE("header with errors is not cached") {
  ReplPool pool(test::mock_pool(1));
  auto r = pool.submit("import MOCK_ERROR\ntheorem t : True := trivial");
  CHECK(r.response.has_errors());
  CHECK(pool.workers()[0].cached_keys.empty());
}

TEST_CASE("cache hit rate with one dominant header") {
  ReplPool pool(test::mock_pool(1));
  for (int i = 0; i < 100; ++i) {
    pool.submit(i < 90 ? header_src(0, "theorem t" + std::to_string(i) + " : True := trivial")
                       : header_src(i));
  }
  const auto m = pool.metrics();
  CHECK(m.submissions == 100);
  CHECK(m.completed == 100);
  CHECK(m.cache_hits == 89);
  CHECK(m.cache_hit_rate == doctest::Approx(0.89));
}

TEST_CASE("timeout kills and respawns the worker") {
  ReplPool pool(test::mock_pool(1));
  const auto before = pool.workers()[0].spawn_time;
  auto r = pool.submit("theorem t : True := MOCK_STALL", std::chrono::milliseconds(300));
  CHECK(r.kind == OutcomeKind::timeout);
  CHECK(pool.metrics().timeouts == 1);
  const auto w = pool.workers()[0];
  CHECK(w.state == WorkerState::idle);
  CHECK(w.spawn_time >= before);
  CHECK(w.cached_keys.empty());
  auto next = pool.submit("theorem t : True := trivial");
  CHECK(next.kind == OutcomeKind::ok);
}

TEST_CASE("crash is retried once on another worker") {
  ReplPool pool(test::mock_pool(2));
  auto r = pool.submit("theorem t : True := MOCK_CRASH");
  CHECK(r.kind == OutcomeKind::crash);
  CHECK(r.attempts == 2);
  CHECK(pool.metrics().crashes == 2);
  CHECK(pool.metrics().live_workers == 2);
  CHECK(pool.submit("theorem t : True := trivial").kind == OutcomeKind::ok);
}

TEST_CASE("crash does not disturb other in-flight commands") {
  ReplPool pool(test::mock_pool(4, {"--latency-ms", "20"}));
  std::atomic<int> ok{0}, crashed{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        const bool crash = t == 0 && i % 3 == 0;
        auto r = pool.submit(test::kStdHeader + (crash ? "theorem c : True := MOCK_CRASH"
                                                       : "theorem t : True := trivial"));
        if (crash) crashed += r.kind == OutcomeKind::crash;
        else ok += r.kind == OutcomeKind::ok && !r.response.has_errors();
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(ok == 76);
  CHECK(crashed == 4);
}

TEST_CASE("load spreads evenly across workers") {
  ReplPool pool(test::mock_pool(8, {"--latency-ms", "10"}));
  std::vector<std::thread> threads;
  for (int t = 0; t < 16; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 50; ++i) pool.submit(test::kStdHeader + "theorem t : True := trivial");
    });
  }
  for (auto& th : threads) th.join();
  std::uint64_t total = 0;
  for (const auto& w : pool.workers()) {
    total += w.commands_served;
    CHECK(w.commands_served >= 70);
    CHECK(w.commands_served <= 130);
  }
  CHECK(total == 800);
}

TEST_CASE("transcripts never interleave") {
  auto opt = test::mock_pool(2, {"--latency-ms", "2"});
  opt.record_transcripts = true;
  ReplPool pool(opt);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 20; ++i) pool.submit(header_src(t % 3));
    });
  }
  for (auto& th : threads) th.join();
  std::size_t frames = 0;
  for (int w = 0; w < 2; ++w) {
    for (const auto& f : pool.transcript(w)) {
      REQUIRE(f.size() > 2);
      CHECK(f.substr(f.size() - 2) == "\n\n");
      CHECK(f.find("\n\n") == f.size() - 2);
      json::parse(f.substr(0, f.size() - 2));
      ++frames;
    }
  }
  const auto m = pool.metrics();
  CHECK(frames == 80 + m.cache_misses);
}

TEST_CASE("shutdown rejects later submissions") {
  ReplPool pool(test::mock_pool(2));
  pool.shutdown();
  CHECK_FALSE(pool.alive());
  CHECK_THROWS_AS(pool.submit("theorem t : True := trivial"), PoolShutdown);
}

}
