#include <doctest.h>

#include <algorithm>

#include "leanrl/common/jsonl.hpp"
#include "leanrl/common/rng.hpp"
#include "leanrl/pattern/format.hpp"
#include "leanrl/pattern/normalize.hpp"
#include "leanrl/pattern/trace.hpp"
#include "support.hpp"

using namespace leanrl;
using namespace leanrl::pattern;

namespace {

std::string fenced(const std::string& code) { return "```lean\n" + code + "\n```\n"; }

std::string make_trace(const std::vector<std::string>& snippets, const std::string& proof) {
  std::string t = "<think>\nLet me work this out.\n";
  for (const auto& s : snippets) t += fenced(s) + "Some prose.\n";
  t += "</think>\nFinal:\n" + fenced(proof);
  return t;
}

std::string lines_of(int from, int to) {
  std::string s;
  for (int i = from; i < to; ++i) s += "  have h" + std::to_string(i) + " : x = x := rfl\n";
  return s;
}

}  // namespace

TEST_SUITE("pattern") {

TEST_CASE("format corpus matches hand-computed verdicts") {
  const auto rows = read_jsonl(test::fixture("format_corpus.jsonl"));
  REQUIRE(rows.size() == 20);
  for (const auto& row : rows) {
    const std::string name = row["name"];
    CAPTURE(name);
    const auto v = check_format(parse_trace(row["text"]));
    CHECK(v.passes_filter == row["passes_filter"].get<bool>());
    CHECK(v.well_formed == row["well_formed"].get<bool>());
    CHECK(v.has_tactic_block == row["has_tactic_block"].get<bool>());
    const double expect = row["coverage"][0].get<double>() / row["coverage"][1].get<double>();
    CHECK(v.coverage_ratio == expect);
    CHECK(v.reasons == row["reasons"].get<std::vector<std::string>>());
  }
}

TEST_CASE("worked example decomposition") {
  const auto text = read_text_file(test::fixture("arith_sequence_trace.txt"));
  const auto t = parse_trace(text);
  CHECK(t.think_shape == ThinkShape::balanced);
  REQUIRE(t.think_block());
  CHECK_FALSE(t.think_block()->empty());
  CHECK(t.snippets.size() == 4);
  REQUIRE(t.final_proof);
  CHECK(t.final_proof->span.end < text.size());
  CHECK(text.find("```", t.final_proof->span.end) == t.final_proof->span.end);
  CHECK(text.find("```", t.final_proof->span.end + 3) == std::string::npos);
  CHECK(t.final_proof->code.find("theorem mathd_algebra_354") != std::string::npos);
  const auto v = check_format(t);
  CHECK(v.passes_filter);
  CHECK(v.coverage_ratio == 1.0);
  CHECK(t.token_count == whitespace_tokenizer(text));
}

TEST_CASE("no delimiters and no code") {
  const auto t = parse_trace("just some prose, no code at all");
  CHECK(t.think_shape == ThinkShape::absent);
  CHECK_FALSE(t.think_block());
  CHECK_FALSE(t.final_proof);
  CHECK_THROWS_AS(coverage_ratio(t), MissingFinalProof);
}

TEST_CASE("unclosed think is not well formed") {
  const auto v = check_format(parse_trace("<think>\n" + fenced("  simp") + "never closed"));
  CHECK_FALSE(v.well_formed);
  CHECK_FALSE(v.passes_filter);
}

TEST_CASE("identical snippet and proof give full coverage") {
  const std::string proof = "theorem t : 1 + 1 = 2 := by\n  norm_num";
  CHECK(coverage_ratio(parse_trace(make_trace({proof}, proof))) == 1.0);
}

TEST_CASE("six of ten lines covered") {
  const std::string proof = lines_of(0, 10);
  const auto t = parse_trace(make_trace({lines_of(0, 6)}, proof));
  CHECK(coverage_ratio(t) == 0.6);
  CHECK(check_format(t).passes_filter);
  FormatConfig strict;
  strict.coverage_threshold = 0.61;
  CHECK_FALSE(check_format(t, strict).passes_filter);
}

TEST_CASE("prose-only think block") {
  const auto t = parse_trace("<think>\nI think the answer is 135.\n</think>\n" + fenced("  norm_num"));
  const auto v = check_format(t);
  CHECK_FALSE(v.has_tactic_block);
  CHECK_FALSE(v.passes_filter);
}

TEST_CASE("normalization") {
  CHECK(normalize_lines("  a   b  -- c\n\n\t x /- y -/ z\n") == std::vector<std::string>{"a b", "x z"});
  CHECK(normalize_lines("s \"-- not a comment\"") == std::vector<std::string>{"s \"-- not a comment\""});
  CHECK(normalize_lines("/- a /- b -/ c -/ d") == std::vector<std::string>{"d"});
  CHECK(normalize_lines("x /- multi\nline -/ y") == std::vector<std::string>{"x", "y"});
  CHECK(join_lines({"a", "b"}) == "a\nb");
}

TEST_CASE("tactic block detection") {
  const auto kw = default_tactic_keywords();
  CHECK(is_tactic_block("  nlinarith [sq_nonneg x]", kw));
  CHECK(is_tactic_block("theorem t : P := by simp", kw));
  CHECK(is_tactic_block("theorem t : P := by\n  foo_tactic", kw));
  CHECK(is_tactic_block("  · exact h", kw));
  CHECK(is_tactic_block("  <;> linarith", kw));
  CHECK(is_tactic_block("  case inl => omega", kw));
  CHECK_FALSE(is_tactic_block("theorem t : P := h", kw));
  CHECK_FALSE(is_tactic_block("-- simp\ndef f := 1", kw));
  CHECK_FALSE(is_tactic_block("def baby := 1", kw));
  CHECK(is_tactic_block("mytac", {"mytac"}));
}

TEST_CASE("snippet reuse is reported but does not gate") {
  const auto t = parse_trace(make_trace({"  simp\n  ring_nf\n  omega\n  linarith"}, "  simp"));
  const auto v = check_format(t);
  CHECK(v.coverage_ratio == 1.0);
  CHECK(v.snippet_reuse_ratio == 0.25);
  CHECK(v.passes_filter);
}

TEST_CASE("custom delimiters") {
  Delimiters d;
  d.think_open = "[[";
  d.think_close = "]]";
  d.fence = "~~~";
  const auto t = parse_trace("[[\n~~~\n  simp\n~~~\n]]\n~~~\n  simp\n~~~\n", d);
  CHECK(t.think_shape == ThinkShape::balanced);
  CHECK(t.snippets.size() == 1);
  CHECK(check_format(t).passes_filter);
}

TEST_CASE("property: covering an uncovered line never lowers coverage") {
  Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> proof_lines, snippet_lines;
    const int np = 1 + static_cast<int>(rng.below(12));
    for (int i = 0; i < np; ++i) proof_lines.push_back("  have h" + std::to_string(rng.below(8)) + " := rfl");
    for (int i = 0; i < static_cast<int>(rng.below(8)); ++i)
      snippet_lines.push_back("  have h" + std::to_string(rng.below(8)) + " := rfl");
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& l : v) s += l + "\n";
      return s.empty() ? std::string("  simp\n") : s;
    };
    const std::string proof = join(proof_lines);
    const auto before = parse_trace(make_trace({join(snippet_lines)}, proof));
    const double c0 = coverage_ratio(before);
    const auto norm = normalize_lines(join(snippet_lines));
    for (const auto& l : proof_lines) {
      if (std::find(norm.begin(), norm.end(), normalize_lines(l)[0]) == norm.end()) {
        snippet_lines.push_back(l);
        break;
      }
    }
    const double c1 = coverage_ratio(parse_trace(make_trace({join(snippet_lines)}, proof)));
    REQUIRE(c1 >= c0);
  }
}

TEST_CASE("property: parser is total on arbitrary bytes") {
  Rng rng(4);
  const std::vector<std::string> pieces{"<think>", "</think>", "```", "```lean\n", "\n", "by", " simp",
                                        "-- ", "/-", "-/", "\"", "\xff", "\xe2\x8a\xa2", "x"};
  for (int trial = 0; trial < 3000; ++trial) {
    std::string s;
    const int len = static_cast<int>(rng.below(40));
    for (int i = 0; i < len; ++i) {
      if (rng.bernoulli(0.3)) s += static_cast<char>(rng.below(256));
      else s += pieces[rng.below(pieces.size())];
    }
    ReasoningTrace t;
    REQUIRE_NOTHROW(t = parse_trace(s));
    REQUIRE_NOTHROW(check_format(t));
    const auto v = check_format(t);
    REQUIRE(v.passes_filter == (v.well_formed && v.has_tactic_block && v.coverage_ratio >= 0.6));
    REQUIRE(v.coverage_ratio >= 0.0);
    REQUIRE(v.coverage_ratio <= 1.0);
  }
}

TEST_CASE("trace record json") {
  const auto r = trace_record_from_json({{"attempt_id", "a"}, {"problem_id", "p"}, {"text", "t"}});
  CHECK(r.attempt_id == "a");
  CHECK(to_json(r)["text"] == "t");
  CHECK_THROWS(trace_record_from_json({{"attempt_id", "a"}}));
}

}
