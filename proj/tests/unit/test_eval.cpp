#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "leanrl/common/jsonl.hpp"
#include "leanrl/common/rng.hpp"
#include "leanrl/eval/benchmark.hpp"
#include "leanrl/eval/decontam.hpp"
#include "leanrl/eval/evaluate.hpp"
#include "leanrl/eval/ledger.hpp"
#include "leanrl/eval/passk.hpp"
#include "leanrl/eval/report.hpp"
#include "leanrl/kernels/decontam_kernels.hpp"
#include "leanrl/rl/policy.hpp"
#include "support.hpp"

using namespace leanrl;
using namespace leanrl::eval;
using nlohmann::json;

namespace {

// Counts k-subsets of n attempts (c of them correct) that contain a success.
std::pair<std::uint64_t, std::uint64_t> brute_force(int n, int c, int k) {
  std::uint64_t hit = 0, total = 0;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != k) continue;
    ++total;
    if (mask & ((1u << c) - 1)) ++hit;
  }
  return {hit, total};
}

AttemptLedger ledger_of(const std::vector<std::pair<std::string, std::vector<bool>>>& rows) {
  AttemptLedger l;
  for (const auto& [name, outcomes] : rows) {
    l.ensure(name);
    for (bool ok : outcomes) l.append(name, ok, 100);
  }
  return l;
}

std::vector<BenchmarkStatement> bench_named(const std::vector<std::string>& names) {
  std::vector<BenchmarkStatement> b;
  for (const auto& n : names) b.push_back({n, "theorem " + n + " : True := by\n  sorry", "", {}, false});
  return b;
}

std::string words(int from, int count) {
  std::string s;
  for (int i = 0; i < count; ++i) s += (i ? " w" : "w") + std::to_string(from + i);
  return s;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("pass@k boundary values") {
  CHECK(unbiased_pass_at_k(5, 2, 2) == 0.7);
  CHECK(brute_force(5, 2, 2) == std::pair<std::uint64_t, std::uint64_t>{7, 10});
  CHECK(unbiased_pass_at_k(10, 0, 3) == 0.0);
  CHECK(unbiased_pass_at_k(10, 10, 3) == 1.0);
  CHECK(unbiased_pass_at_k(10, 8, 3) == 1.0);
  CHECK_THROWS_AS(unbiased_pass_at_k(3, 1, 4), InsufficientAttempts);
  CHECK_THROWS_AS(unbiased_pass_at_k(3, 4, 1), InvalidArgument);
  CHECK_THROWS_AS(unbiased_pass_at_k(3, 1, 0), InvalidArgument);
}

TEST_CASE("pass@k equals subset enumeration for n <= 12") {
  for (int n = 1; n <= 12; ++n)
    for (int c = 0; c <= n; ++c)
      for (int k = 1; k <= n; ++k) {
        const auto [hit, total] = brute_force(n, c, k);
        REQUIRE(unbiased_pass_at_k(n, c, k) == static_cast<double>(hit) / static_cast<double>(total));
      }
}

TEST_CASE("pass@k for large budgets stays in range and matches the product form") {
  const std::int64_t n = 10000, c = 10, k = 8192;
  double miss = 1.0;
  for (std::int64_t i = 0; i < k; ++i) miss *= double(n - c - i) / double(n - i);
  const double v = unbiased_pass_at_k(n, c, k);
  CHECK(v == doctest::Approx(1.0 - miss).epsilon(1e-12));
  CHECK(v <= 1.0);
  CHECK(unbiased_pass_at_k(8192, 1, 8192) == 1.0);
}

TEST_CASE("ledger pass@k and permutation invariance") {
  auto l = ledger_of({{"a", {false, false, true, false, true}}, {"b", {false, false, false, false, false}}});
  CHECK(unbiased_pass_at_k(l, 2) == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(cumulative_pass_at_k(l, 2) == 0.0);
  CHECK(cumulative_pass_at_k(l, 3) == 0.5);
  auto p = ledger_of({{"a", {true, true, false, false, false}}, {"b", {false, false, false, false, false}}});
  CHECK(unbiased_pass_at_k(p, 2) == unbiased_pass_at_k(l, 2));
  CHECK(pass_at_k(l, 2).unbiased == unbiased_pass_at_k(l, 2));
  CHECK_THROWS_AS(unbiased_pass_at_k(l, 6), InsufficientAttempts);
}

TEST_CASE("cumulative pass@k is nondecreasing") {
  Rng rng(8);
  AttemptLedger l;
  for (int s = 0; s < 50; ++s)
    for (int a = 0; a < 32; ++a) l.append("s" + std::to_string(s), rng.bernoulli(0.05), 10);
  double prev = 0.0;
  for (int k = 1; k <= 32; ++k) {
    const double v = cumulative_pass_at_k(l, k);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("ledger io and density") {
  test::TempDir dir;
  auto l = ledger_of({{"b", {false, true}}, {"a", {true}}, {"c", {}}});
  CHECK(l.first_success("b") == 2);
  CHECK(l.first_success("c") == 0);
  CHECK(l.min_attempts() == 0);
  CHECK(l.attempt_count() == 3);
  save_ledger(dir / "l.jsonl", l);
  auto back = load_ledger(dir / "l.jsonl");
  l = ledger_of({{"b", {false, true}}, {"a", {true}}});
  CHECK(back == l);

  write_text_file(dir / "shuffled.jsonl",
                  "{\"name\":\"x\",\"attempt_index\":2,\"correct\":true}\n"
                  "{\"name\":\"x\",\"attempt_index\":1,\"correct\":false}\n");
  CHECK(load_ledger(dir / "shuffled.jsonl").first_success("x") == 2);
  write_text_file(dir / "gap.jsonl", "{\"name\":\"x\",\"attempt_index\":2,\"correct\":true}\n");
  CHECK_THROWS_AS(load_ledger(dir / "gap.jsonl"), LedgerCorrupt);
  write_text_file(dir / "bad.jsonl", "{\"name\":\"x\"}\n");
  CHECK_THROWS_AS(load_ledger(dir / "bad.jsonl"), LedgerCorrupt);
  CHECK_THROWS_AS(l.insert("a", {5, true, 0}), LedgerCorrupt);
}

TEST_CASE("benchmark loading and patches") {
  const auto plain = load_benchmark(test::fixture("bench_small.jsonl"));
  REQUIRE(plain.size() == 3);
  for (const auto& s : plain) CHECK_FALSE(s.corrected);

  const auto patched = load_benchmark(test::fixture("bench_small.jsonl"), test::fixture("patches_small.jsonl"));
  const auto it = std::find_if(patched.begin(), patched.end(),
                               [](const auto& s) { return s.name == "mathd_algebra_342"; });
  REQUIRE(it != patched.end());
  CHECK(it->corrected);
  CHECK(it->statement.find("a = 14") != std::string::npos);
  CHECK(std::count_if(patched.begin(), patched.end(), [](const auto& s) { return s.corrected; }) == 1);

  CHECK_THROWS_AS(load_benchmark(test::fixture("bench_duplicate.jsonl")), DuplicateName);
  const auto rows = read_jsonl(test::fixture("bench_small.jsonl"));
  CHECK_THROWS_AS(build_benchmark(rows, {json{{"name", "nope"}, {"corrected_statement", "x"}}}), MalformedStatement);
  const json patch{{"name", "mathd_algebra_342"}, {"corrected_statement", "theorem x : True := by sorry"}};
  CHECK_THROWS_AS(build_benchmark(rows, {patch, patch}), DuplicateName);
  auto mismatched = patch;
  mismatched["original_statement"] = "something else";
  CHECK_THROWS_AS(build_benchmark(rows, {mismatched}), MalformedStatement);

  const auto imo = filter_subset(plain, "IMO");
  REQUIRE(imo.size() == 1);
  CHECK(imo[0].name == "imo_1968_p5_1");
}

TEST_CASE("ngram tokens") {
  CHECK(kernels::ngram_tokens("The  7th term, is 30!") ==
        kernels::Tokens{"the", "7th", "term", "is", "30"});
  CHECK(kernels::ngram_tokens("f(x) = 1/2 + x") == kernels::Tokens{"fx", "12", "x"});
  CHECK(kernels::ngram_tokens("Ünïcode ≤") == kernels::Tokens{"Ünïcode", "≤"});
}

TEST_CASE("decontamination") {
  std::vector<BenchmarkStatement> bench{{"b1", "theorem b1 : True := by sorry", words(0, 30), {}, false}};
  std::vector<CorpusText> corpus{
      {"planted", "prefix text " + words(5, 13) + " suffix", "web"},
      {"twelve", "prefix " + words(5, 12) + " other " + words(18, 12), "web"},
      {"aime", "nothing shared here at all", "AIME"},
      {"clean", "completely unrelated training text", ""},
      {"case", "PREFIX " + words(10, 13) + "!!!", "web"},
  };
  for (bool parallel : {false, true}) {
    DecontamOptions opt;
    opt.parallel = parallel;
    const auto r = decontaminate(corpus, bench, opt);
    REQUIRE(r.removed.size() == 3);
    CHECK(r.removed[0].id == "planted");
    CHECK(r.removed[0].reason == "ngram");
    CHECK(r.removed[0].evidence == words(5, 13));
    CHECK(r.removed[0].benchmark == "b1");
    CHECK(r.removed[1].id == "aime");
    CHECK(r.removed[1].reason == "source_tag");
    CHECK(r.removed[1].evidence == "AIME");
    CHECK(r.removed[2].id == "case");
    REQUIRE(r.kept.size() == 2);
    CHECK(r.kept[0].id == "twelve");
    CHECK(r.kept[1].id == "clean");
    CHECK(count_overlapping(r.kept, bench, 13) == 0);
  }
  CHECK(count_overlapping(corpus, bench, 13) == 2);
  CHECK(count_overlapping(corpus, bench, 12) == 3);
  DecontamOptions zero;
  zero.n = 0;
  CHECK_THROWS_AS(decontaminate(corpus, bench, zero), InvalidArgument);
}

TEST_CASE("reference text falls back to the statement") {
  BenchmarkStatement s{"x", "theorem x : True", "", {}, false};
  CHECK(reference_text(s) == "theorem x : True");
  s.informal_text = "informal";
  CHECK(reference_text(s) == "informal");
}

TEST_CASE("report: table layout with the published percentage") {
  std::vector<std::pair<std::string, std::vector<bool>>> rows;
  std::vector<BenchmarkStatement> bench;
  for (int i = 0; i < 244; ++i) {
    const auto name = "s" + std::to_string(1000 + i);
    rows.push_back({name, {i < 197}});
    bench.push_back({name, "theorem x : True := by sorry", "", {}, false});
    if (i < 20) bench.back().subset_tags.insert("IMO");
    else if (i < 35) bench.back().subset_tags.insert("AIME");
  }
  // IMO: 8 of 20 solved; AIME: 13 of 15.
  for (int i = 8; i < 20; ++i) rows[i].second = {false};
  for (int i = 33; i < 35; ++i) rows[i].second = {false};
  for (int i = 197; i < 211; ++i) rows[i].second = {true};
  const auto ledger = ledger_of(rows);
  ReportMeta meta;
  meta.system = "prover";
  meta.model_size = "7B";
  const auto r = compute_report(ledger, bench, {8192}, meta);
  CHECK(r.rows[0].solved == 197);
  CHECK(format_percent(r.rows[0].cumulative) == "80.74%");
  CHECK_FALSE(r.rows[0].unbiased);
  const std::string expected =
      "| Prover system | Model size | Sample budget | miniF2F-test |\n"
      "| --- | --- | --- | --- |\n"
      "| prover | 7B | 8192 | 80.74% |\n"
      "\n"
      "| Benchmark | Sample budget | miniF2F | miniF2F/IMO | miniF2F/AIME |\n"
      "| --- | --- | --- | --- | --- |\n"
      "| prover | 8192 | 80.74% | 40.00% | 86.67% |\n";
  CHECK(render_report(r, ReportFormat::markdown_table) == expected);
}

TEST_CASE("report: one row gives header plus row") {
  const auto ledger = ledger_of({{"a", {false, true}}, {"b", {false, false}}});
  const auto r = compute_report(ledger, bench_named({"a", "b"}), {2});
  const auto csv = render_report(r, ReportFormat::csv);
  CHECK(csv ==
        "system,model_size,benchmark,subset,statements,sample_budget,solved,cumulative,unbiased\n"
        "leanrl,-,miniF2F,all,2,2,1,0.5,0.5\n");
  const auto md = render_report(r, ReportFormat::markdown_table);
  CHECK(std::count(md.begin(), md.end(), '\n') == 3);
}

TEST_CASE("report: json round trip") {
  test::TempDir dir;
  const auto ledger = ledger_of({{"a", {false, true, true}}, {"b", {true}}});
  auto bench = bench_named({"a", "b"});
  bench[0].subset_tags.insert("IMO");
  const auto r = compute_report(ledger, bench, default_ks(ledger));
  CHECK(default_ks(ledger) == std::vector<std::int64_t>{1, 2, 3});
  emit_report(r, ReportFormat::json, dir / "r.json");
  CHECK(load_report(dir / "r.json") == r);
  CHECK(report_from_json(to_json(r)) == r);
  CHECK(r.rows[0].unbiased == (2.0 / 3.0 + 1.0) / 2.0);
  CHECK_FALSE(r.rows[1].unbiased);
  CHECK(report_format_from_string("md") == ReportFormat::markdown_table);
  CHECK_THROWS_AS(report_format_from_string("xml"), InvalidArgument);
  CHECK_THROWS_AS(compute_report(ledger, bench, {0}), InvalidArgument);
}

TEST_CASE("evaluate: always-correct policy solves at attempt 1") {
  rl::ScriptedPolicy policy;
  policy.add("*", {"<think>\n```lean\n  simp\n```\n</think>\n```lean\ntheorem t : True := by\n  simp\n```\n", 0, 0});
  test::MarkerVerifier verifier;
  EvalConfig cfg;
  cfg.budget = 4;
  const auto bench = load_benchmark(test::fixture("bench_small.jsonl"));
  const auto l = evaluate(bench, policy, verifier, cfg);
  CHECK(l.statement_count() == 3);
  for (const auto& s : bench) {
    CHECK(l.first_success(s.name) == 1);
    CHECK(l.attempts(s.name).size() == 4);
  }
  cfg.early_stop = true;
  const auto early = evaluate(bench, policy, verifier, cfg);
  for (const auto& s : bench) CHECK(early.attempts(s.name).size() == 1);
  cfg.subset = "IMO";
  CHECK(evaluate(bench, policy, verifier, cfg).statement_count() == 1);
}

TEST_CASE("evaluate: half-likely success matches 1 - 0.5^8") {
  std::vector<BenchmarkStatement> bench;
  for (int i = 0; i < 1000; ++i) {
    const auto n = "t" + std::to_string(i);
    bench.push_back({n, "theorem " + n + " : True := by\n  sorry", "", {}, false});
  }
  rl::SyntheticPolicy policy({0.5, 1.0, 0.0, 31});
  test::MarkerVerifier verifier;
  EvalConfig cfg;
  cfg.budget = 8;
  test::TempDir dir;
  cfg.ledger_path = dir / "ledger.jsonl";
  const auto l = evaluate(bench, policy, verifier, cfg);
  CHECK(l.attempt_count() == 8000);
  const double p = 1.0 - std::pow(0.5, 8);
  const double sigma = std::sqrt(p * (1 - p) / 1000.0);
  CHECK(std::abs(cumulative_pass_at_k(l, 8) - p) <= 3 * sigma);
  CHECK(load_ledger(dir / "ledger.jsonl") == l);
}

TEST_CASE("evaluate: budget must be positive") {
  rl::ScriptedPolicy policy;
  test::MarkerVerifier verifier;
  EvalConfig cfg;
  cfg.budget = 0;
  CHECK_THROWS_AS(evaluate(bench_named({"a"}), policy, verifier, cfg), InvalidArgument);
}

TEST_CASE("eval config json") {
  EvalConfig cfg;
  cfg.subset = "IMO";
  cfg.early_stop = true;
  const auto back = eval_config_from_json(to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.subset == "IMO");
}

}
