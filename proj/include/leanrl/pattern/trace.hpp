#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace leanrl::pattern {

// Byte range [begin, end) into ReasoningTrace::raw_text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

struct CodeBlock {
  Span span;          // the code itself, fences excluded
  std::string code;
  std::string language;
  bool terminated = true;
};

struct Delimiters {
  std::string think_open = "<think>";
  std::string think_close = "</think>";
  std::string fence = "```";
};

// Counts tokens of a completion; feeds length statistics only.
using Tokenizer = std::function<std::size_t(std::string_view)>;
std::size_t whitespace_tokenizer(std::string_view text);

enum class ThinkShape {
  absent,      // no delimiters at all
  balanced,    // exactly one open followed by one close
  unclosed,    // open without close
  misordered,  // close without a preceding open
  repeated,    // more than one open or close
};

struct ReasoningTrace {
  std::string raw_text;
  ThinkShape think_shape = ThinkShape::absent;
  std::optional<Span> think_span;  // content between the delimiters
  std::vector<CodeBlock> snippets;   // code blocks inside the think block
  std::optional<CodeBlock> final_proof;  // last code block after think close
  std::size_t token_count = 0;

  std::optional<std::string_view> think_block() const;
};

// Best-effort decomposition; never throws. Without think delimiters the last
// code block in the text is taken as the final proof, so bare proofs can
// still be verified; such traces are reported as not well-formed.
ReasoningTrace parse_trace(std::string raw_text, const Delimiters& delimiters = {},
                           const Tokenizer& tokenizer = whitespace_tokenizer);

// Trace JSONL rows: {"attempt_id", "problem_id", "text"}.
struct TraceRecord {
  std::string attempt_id;
  std::string problem_id;
  std::string text;
};
TraceRecord trace_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TraceRecord& r);

}  // namespace leanrl::pattern
