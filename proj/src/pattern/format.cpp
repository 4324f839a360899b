#include "leanrl/pattern/format.hpp"

#include <optional>
#include <unordered_set>

#include "leanrl/pattern/normalize.hpp"

namespace leanrl::pattern {

std::vector<std::string> default_tactic_keywords() {
  return {"have",    "rw",       "nlinarith",  "linarith", "intro",   "use",
          "exact",   "apply",    "constructor", "rcases",  "omega",   "norm_num",
          "field_simp", "ring_nf", "by_contra", "simp"};
}

namespace {

std::unordered_set<std::string> snippet_line_set(const ReasoningTrace& trace) {
  std::unordered_set<std::string> lines;
  for (const auto& s : trace.snippets)
    for (auto& l : normalize_lines(s.code)) lines.insert(std::move(l));
  return lines;
}

bool ident_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '\'' || c == '?' || c == '!' || c >= 0x80;
}

std::size_t indent_of(std::string_view line) {
  std::size_t n = 0;
  while (n < line.size() && (line[n] == ' ' || line[n] == '\t')) ++n;
  return n;
}

std::string_view trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Skips leading focusing bullets and combinators.
std::string_view strip_bullets(std::string_view s) {
  for (;;) {
    s = trim(s);
    if (s.starts_with("·")) s.remove_prefix(std::string_view("·").size());
    else if (s.starts_with("<;>")) s.remove_prefix(3);
    else if (s.starts_with(". ")) s.remove_prefix(1);
    else if (s.starts_with("case ") || s.starts_with("next ")) {
      auto arrow = s.find("=>");
      if (arrow == std::string_view::npos) return s;
      s.remove_prefix(arrow + 2);
    } else return s;
  }
}

std::string_view first_word(std::string_view s) {
  std::size_t n = 0;
  while (n < s.size() && ident_char(static_cast<unsigned char>(s[n]))) ++n;
  return s.substr(0, n);
}

// Position just past a standalone `by` token, or npos.
std::size_t find_by(std::string_view line) {
  for (auto pos = line.find("by"); pos != std::string_view::npos; pos = line.find("by", pos + 1)) {
    const bool left = pos == 0 || !ident_char(static_cast<unsigned char>(line[pos - 1]));
    const bool right = pos + 2 >= line.size() || !ident_char(static_cast<unsigned char>(line[pos + 2]));
    if (left && right) return pos + 2;
  }
  return std::string_view::npos;
}

}  // namespace

double coverage_ratio(const ReasoningTrace& trace) {
  if (!trace.final_proof) throw MissingFinalProof("trace has no final proof block");
  const auto proof_lines = normalize_lines(trace.final_proof->code);
  if (proof_lines.empty()) return 0.0;
  const auto snippets = snippet_line_set(trace);
  std::size_t covered = 0;
  for (const auto& line : proof_lines) covered += snippets.count(line);
  return static_cast<double>(covered) / static_cast<double>(proof_lines.size());
}

double snippet_reuse_ratio(const ReasoningTrace& trace) {
  if (!trace.final_proof) return 0.0;
  const auto proof = normalize_lines(trace.final_proof->code);
  const std::unordered_set<std::string> proof_set(proof.begin(), proof.end());
  std::size_t total = 0, reused = 0;
  for (const auto& s : trace.snippets) {
    for (const auto& line : normalize_lines(s.code)) {
      ++total;
      reused += proof_set.count(line);
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(reused) / static_cast<double>(total);
}

bool is_tactic_block(std::string_view code, const std::vector<std::string>& keywords) {
  const std::unordered_set<std::string_view> kw(keywords.begin(), keywords.end());
  const auto lines = strip_comments(code);
  std::optional<std::size_t> by_indent;  // indentation of an open `by` block's head line

  for (const auto& raw : lines) {
    const std::string_view line = raw;
    const auto body = trim(line);
    if (body.empty()) continue;
    const std::size_t indent = indent_of(line);

    if (by_indent && indent > *by_indent) return true;
    by_indent.reset();

    if (kw.count(first_word(strip_bullets(body)))) return true;

    const auto after_by = find_by(body);
    if (after_by != std::string_view::npos) {
      if (!trim(body.substr(after_by)).empty()) return true;
      by_indent = indent;
    }
  }
  return false;
}

FormatVerdict check_format(const ReasoningTrace& trace, const FormatConfig& config) {
  FormatVerdict v;
  switch (trace.think_shape) {
    case ThinkShape::absent: v.reasons.emplace_back(kMissingThink); break;
    case ThinkShape::unclosed: v.reasons.emplace_back(kUnclosedThink); break;
    case ThinkShape::misordered: v.reasons.emplace_back(kMisorderedThink); break;
    case ThinkShape::repeated: v.reasons.emplace_back(kRepeatedThink); break;
    case ThinkShape::balanced: break;
  }
  if (!trace.final_proof) v.reasons.emplace_back(kMissingFinalProof);
  v.well_formed = trace.think_shape == ThinkShape::balanced && trace.final_proof.has_value();

  for (const auto& s : trace.snippets) {
    if (is_tactic_block(s.code, config.tactic_keywords)) {
      v.has_tactic_block = true;
      break;
    }
  }
  if (!v.has_tactic_block) v.reasons.emplace_back(kNoTacticBlock);

  if (trace.final_proof) {
    v.coverage_ratio = coverage_ratio(trace);
    v.snippet_reuse_ratio = snippet_reuse_ratio(trace);
  }
  const bool covered = trace.final_proof && v.coverage_ratio >= config.coverage_threshold;
  if (trace.final_proof && !covered) v.reasons.emplace_back(kLowCoverage);

  v.passes_filter = v.well_formed && v.has_tactic_block && covered;
  return v;
}

}  // namespace leanrl::pattern
