#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "leanrl/common/jsonl.hpp"
#include "leanrl/rl/objective.hpp"
#include "leanrl/rl/pipeline.hpp"
#include "leanrl/rl/policy.hpp"
#include "leanrl/verify/verifier.hpp"
#include "support.hpp"

using namespace leanrl;
using namespace leanrl::rl;

namespace {

std::unique_ptr<curation::ProblemStore> make_store(int n) {
  auto store = std::make_unique<curation::ProblemStore>();
  for (int i = 0; i < n; ++i) {
    curation::ProblemRecord r;
    r.problem_id = "p" + std::to_string(i);
    r.source_id = r.problem_id;
    r.statement = "theorem p" + std::to_string(i) + " : True := by\n  sorry";
    store->add(std::move(r));
  }
  return store;
}

std::string good_trace(const std::string& proof) {
  return "<think>\n```lean\n" + proof + "\n```\n</think>\n```lean\n" + proof + "\n```\n";
}

const std::string kProofOk = "theorem x : True := by\n  trivial\n  norm_num";
const std::string kProofBad = "theorem x : True := by\n  trivial\n  norm_num MOCK_ERROR";

RolloutSample sample(int reward, bool format_ok, double lp_new = -1.0, double lp_old = -1.0) {
  RolloutSample s;
  s.reward = reward;
  s.format.passes_filter = format_ok;
  s.logp_new = lp_new;
  s.logp_old = lp_old;
  return s;
}

// Returns a fixed number of completions regardless of k.
class ShortPolicy : public PolicyClient {
 public:
  std::vector<Completion> generate(const GenerationRequest&) override { return {{good_trace(kProofOk), 0.0}}; }
  std::vector<double> score(const std::string&, std::span<const std::string> t) override {
    return std::vector<double>(t.size(), 0.0);
  }
};

}  // namespace

TEST_SUITE("rl") {

TEST_CASE("objective arithmetic") {
  CHECK(objective_term(1, 0.5, 0.4, -3.0, -3.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(objective_term(0, 0.0, 0.4, 1.0, 0.0) == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(objective_term(1, 0.7, 0.0, 9.0, -2.0) == 1.0);
  CHECK(objective_term(0, 0.7, 0.0, 9.0, -2.0) == 0.0);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(objective_term(1, 0.5, 0.4, nan, 0.0), NonFiniteLogProb);
  CHECK_THROWS_AS(objective_term(1, 0.5, 0.4, 0.0, -inf), NonFiniteLogProb);
}

TEST_CASE("objective fixture table") {
  const auto rows = read_jsonl(test::fixture("objective_cases.jsonl"));
  REQUIRE(rows.size() == 50);
  for (const auto& r : rows) {
    std::vector<int> rewards(r["k"].get<int>(), 0);
    for (int i = 0; i < r["successes"].get<int>(); ++i) rewards[i] = 1;
    const double z = log_z_hat(rewards);
    const double got = objective_term(r["reward"], z, r["tau"], r["logp_new"], r["logp_old"]);
    CHECK(std::abs(got - r["expected"].get<double>()) <= 1e-12);
  }
}

TEST_CASE("log Z is the mean reward") {
  CHECK(log_z_hat(std::vector<int>{1, 1, 0, 0}) == 0.5);
  CHECK(log_z_hat(std::vector<int>{}) == 0.0);
  CHECK(log_z_hat(std::vector<int>{1, 1, 1}) == 1.0);
}

TEST_CASE("log Z scope") {
  RolloutGroup g;
  g.samples = {sample(1, true), sample(1, false), sample(0, false), sample(0, true)};
  RolloutConfig cfg;
  estimate_log_z(g, cfg);
  CHECK(g.log_z_hat == 0.5);
  cfg.log_z_scope = LogZScope::format_passing;
  estimate_log_z(g, cfg);
  CHECK(g.log_z_hat == 0.5);
  g.samples[3].reward = 1;
  estimate_log_z(g, cfg);
  CHECK(g.log_z_hat == 1.0);
}

TEST_CASE("batch sampling: exhaustive and deterministic") {
  auto store = make_store(5);
  Rng a(3), b(3);
  const auto x = sample_batch(*store, 5, a);
  const auto y = sample_batch(*store, 5, b);
  REQUIRE(x.problems.size() == 5);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < 5; ++i) {
    ids.insert(x.problems[i].problem_id);
    CHECK(x.problems[i].problem_id == y.problems[i].problem_id);
  }
  CHECK(ids.size() == 5);
  CHECK_FALSE(x.with_replacement);

  Rng c(3);
  const auto z = sample_batch(*store, 8, c);
  CHECK(z.with_replacement);
  CHECK(z.problems.size() == 8);

  curation::ProblemStore empty;
  CHECK_THROWS_AS(sample_batch(empty, 1, c), EmptyProblemSet);
  CHECK_THROWS_AS(sample_batch(*store, 0, c), InvalidArgument);
}

TEST_CASE("batch sampling is uniform") {
  // 10000 problems, N=1000, 10000 trials: each inclusion count ~ Binomial(1e4, 0.1).
  auto store = make_store(10000);
  std::unordered_map<std::string, int> hits;
  Rng rng(17);
  const int trials = 10000;
  for (int t = 0; t < trials; ++t)
    for (const auto& p : sample_batch(*store, 1000, rng).problems) ++hits[p.problem_id];
  const double sigma = std::sqrt(trials * 0.1 * 0.9);
  int outside3 = 0;
  double worst = 0;
  for (const auto& [id, h] : hits) {
    const double dev = std::abs(h - trials * 0.1) / sigma;
    worst = std::max(worst, dev);
    outside3 += dev > 3.0;
  }
  CHECK(hits.size() == 10000);
  // 0.27% of 10000 problems are expected beyond 3 sigma by chance.
  CHECK(outside3 <= 60);
  CHECK(worst < 5.0);
}

TEST_CASE("filters: all good samples retained") {
  RolloutGroup g;
  for (int i = 0; i < 8; ++i) g.samples.push_back(sample(1, true));
  RolloutConfig cfg;
  estimate_log_z(g, cfg);
  apply_filters(g, cfg, {1, 0, 0});
  for (const auto& s : g.samples) {
    CHECK(s.retained);
    REQUIRE(s.objective_term);
    CHECK(*s.objective_term == doctest::Approx(1.0 - 0.4));
  }
}

TEST_CASE("filters: format failures excluded, omega drops negatives") {
  RolloutGroup g;
  g.samples = {sample(1, false), sample(0, false)};
  for (int i = 0; i < 10000; ++i) g.samples.push_back(sample(0, true));
  RolloutConfig cfg;
  apply_filters(g, cfg, {99, 2, 5});
  CHECK_FALSE(g.samples[0].retained);
  CHECK(g.samples[0].drop_reason == "format");
  CHECK_FALSE(g.samples[0].objective_term);
  CHECK(g.samples[1].drop_reason == "format");
  std::size_t kept = 0;
  for (std::size_t i = 2; i < g.samples.size(); ++i) {
    const auto& s = g.samples[i];
    kept += s.retained;
    CHECK(s.retained == s.objective_term.has_value());
    if (!s.retained) CHECK(s.drop_reason == "negative");
  }
  const double frac = static_cast<double>(kept) / 10000.0;
  CHECK(frac >= 0.48);
  CHECK(frac <= 0.52);

  auto again = g;
  apply_filters(again, cfg, {99, 2, 5});
  for (std::size_t i = 0; i < g.samples.size(); ++i) CHECK(again.samples[i].retained == g.samples[i].retained);

  cfg.drop_prob = 1.0;
  apply_filters(g, cfg, {99, 2, 5});
  for (std::size_t i = 2; i < g.samples.size(); ++i) REQUIRE_FALSE(g.samples[i].retained);
}

TEST_CASE("config validation and json") {
  RolloutConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = cfg;
  bad.drop_prob = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.rollouts_per_problem = 0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = cfg;
  bad.tau = -1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);

  cfg.seed = 77;
  cfg.log_z_scope = LogZScope::format_passing;
  cfg.verify_timeout_ms = 5000;
  const auto j = to_json(cfg);
  CHECK(j["log_z_scope"] == "format_passing");
  const auto back = rollout_config_from_json(j);
  CHECK(to_json(back) == j);
  CHECK(back.tau == 0.4);
  CHECK(back.max_tokens == 32768);
}

TEST_CASE("iteration stats") {
  RolloutGroup g;
  g.samples = {sample(0, true), sample(0, true)};
  CHECK(iteration_stats({g}, 0).pass_rate == 0.0);
  g.samples[0].reward = 1;
  CHECK(iteration_stats({g}, 0).pass_rate == 0.5);
  g.samples[0].trace.token_count = 2500;
  g.samples[1].trace.token_count = 10000;
  const auto st = iteration_stats({g}, 4);
  CHECK(st.mean_token_length == 6250.0);
  CHECK(st.samples == 2);
  CHECK(st.iteration == 4);
}

TEST_CASE("scripted k=4 with two verifying gives log Z 0.5") {
  auto store = make_store(1);
  ScriptedPolicy policy;
  for (const auto& p : {kProofOk, kProofOk, kProofBad, kProofBad}) policy.add("*", {good_trace(p), -2.0, -2.0});
  test::MarkerVerifier verifier;
  RolloutConfig cfg;
  cfg.batch_problems = 1;
  cfg.rollouts_per_problem = 4;
  const auto res = run_iteration(cfg, *store, policy, verifier, 0);
  REQUIRE(res.groups.size() == 1);
  CHECK(res.groups[0].log_z_hat == 0.5);
  CHECK(res.groups[0].successes() == 2);
  CHECK(res.groups[0].samples[2].verdict == "compile_error");
}

TEST_CASE("malformed traces still earn rewards") {
  auto store = make_store(1);
  ScriptedPolicy policy;
  policy.add("*", {"no reasoning here\n```lean\n" + kProofOk + "\n```\n", 0.0, 0.0});
  test::MarkerVerifier verifier;
  RolloutConfig cfg;
  cfg.batch_problems = 1;
  cfg.rollouts_per_problem = 3;
  const auto res = run_iteration(cfg, *store, policy, verifier, 0);
  for (const auto& s : res.groups[0].samples) {
    CHECK_FALSE(s.format.passes_filter);
    CHECK(s.reward == 1);
    CHECK_FALSE(s.retained);
    CHECK(s.drop_reason == "format");
  }
  CHECK(res.stats.retained == 0);
}

TEST_CASE("completion without a final proof gets reward 0") {
  auto store = make_store(1);
  ScriptedPolicy policy;
  policy.add("*", {"<think>\nhmm\n</think>\nno code", 0.0, 0.0});
  test::MarkerVerifier verifier;
  RolloutConfig cfg;
  cfg.batch_problems = 1;
  cfg.rollouts_per_problem = 2;
  const auto res = run_iteration(cfg, *store, policy, verifier, 0);
  CHECK(res.groups[0].samples[0].verdict == kNoFinalProof);
  CHECK(res.groups[0].samples[0].reward == 0);
}

TEST_CASE("N=2 k=2 against mock pool") {
  auto store = make_store(6);
  repl::ReplPool pool(test::mock_pool(2));
  verify::Verifier verifier(pool);
  SyntheticPolicy policy({0.5, 1.0, 0.0, 5});
  RolloutConfig cfg;
  cfg.batch_problems = 2;
  cfg.rollouts_per_problem = 2;
  cfg.seed = 5;
  const auto res = run_iteration(cfg, *store, policy, verifier, 3);
  REQUIRE(res.groups.size() == 2);
  std::size_t samples = 0, retained = 0, rewards = 0;
  for (const auto& g : res.groups) {
    CHECK(g.samples.size() == 2);
    for (const auto& s : g.samples) {
      ++samples;
      retained += s.retained;
      rewards += s.reward;
      CHECK(s.attempt_id.rfind("3:", 0) == 0);
      CHECK(s.format.passes_filter);
      CHECK((s.reward == 1) == (s.verdict == "none"));
      if (s.reward == 1) CHECK(s.retained);
    }
  }
  CHECK(res.stats.samples == samples);
  CHECK(res.stats.retained == retained);
  CHECK(res.stats.pass_rate == static_cast<double>(rewards) / 4.0);
  CHECK(res.stats.problems == 2);

  test::TempDir dir;
  write_retained_samples(dir / "r.jsonl", res.groups);
  const auto rows = read_jsonl(dir / "r.jsonl");
  CHECK(rows.size() == retained);
  for (const auto& r : rows) {
    for (const char* k : {"problem_id", "attempt_id", "reward", "log_Z_hat", "logp_new", "logp_old",
                          "objective_term", "coverage_ratio"})
      CHECK(r.contains(k));
  }
  append_iteration_log(dir / "log.jsonl", res.stats);
  append_iteration_log(dir / "log.jsonl", res.stats);
  CHECK(read_jsonl(dir / "log.jsonl").size() == 2);

  record_solves(*store, res.groups, 3);
  for (const auto& g : res.groups) {
    const auto rec = store->get(g.problem_id);
    REQUIRE(rec.solve_history.size() == 1);
    CHECK(rec.solve_history.back().iteration == 3);
    CHECK(rec.solve_history.back().attempts == 2);
    CHECK(rec.solve_history.back().successes == g.successes());
  }
}

TEST_CASE("short policy response is an error") {
  auto store = make_store(2);
  ShortPolicy policy;
  test::MarkerVerifier verifier;
  RolloutConfig cfg;
  cfg.batch_problems = 2;
  cfg.rollouts_per_problem = 4;
  CHECK_THROWS_AS(run_iteration(cfg, *store, policy, verifier, 0), PolicyUnavailable);
}

TEST_CASE("iteration is reproducible") {
  auto store = make_store(30);
  test::MarkerVerifier verifier;
  RolloutConfig cfg;
  cfg.batch_problems = 10;
  cfg.rollouts_per_problem = 4;
  cfg.seed = 123;
  SyntheticPolicy p1({0.3, 0.8, 0.1, 9}), p2({0.3, 0.8, 0.1, 9});
  const auto a = run_iteration(cfg, *store, p1, verifier, 1);
  const auto b = run_iteration(cfg, *store, p2, verifier, 1);
  CHECK(retained_rows(a.groups) == retained_rows(b.groups));
}

TEST_CASE("scripted policy") {
  ScriptedPolicy p;
  CHECK_THROWS_AS(p.generate({"x", "prompt", 1}), PolicyUnavailable);
  p.add("x", {"a", -1, -2});
  p.add("x", {"b", -3, -4});
  const auto out = p.generate({"x", "prompt", 3});
  REQUIRE(out.size() == 3);
  CHECK(out[0].text == "a");
  CHECK(out[1].text == "b");
  CHECK(out[2].text == "a");
  std::vector<std::string> texts{"b"};
  CHECK(p.score("prompt", texts) == std::vector<double>{-4});
  std::vector<std::string> unknown{"zzz"};
  CHECK_THROWS_AS(p.score("prompt", unknown), PolicyUnavailable);
}

TEST_CASE("synthetic policy") {
  SyntheticPolicy p({1.0, 1.0, 0.25, 1});
  const auto prompt = build_prompt("Show it.", "theorem t : True := by\n  sorry");
  CHECK(prompt.rfind("-- Show it.\n", 0) == 0);
  const auto out = p.generate({"t", prompt, 3});
  REQUIRE(out.size() == 3);
  for (const auto& c : out) {
    const auto t = pattern::parse_trace(c.text);
    CHECK(pattern::check_format(t).passes_filter);
    CHECK(t.final_proof->code.find("sorry") == std::string::npos);
    CHECK(c.logp_old == SyntheticPolicy::logp_of(c.text));
  }
  std::vector<std::string> texts{out[0].text};
  CHECK(p.score(prompt, texts)[0] == doctest::Approx(out[0].logp_old + 0.25));
}

}
