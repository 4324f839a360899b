#include "leanrl/pattern/trace.hpp"

namespace leanrl::pattern {

std::size_t whitespace_tokenizer(std::string_view text) {
  std::size_t count = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

std::optional<std::string_view> ReasoningTrace::think_block() const {
  if (!think_span) return std::nullopt;
  return std::string_view(raw_text).substr(think_span->begin, think_span->end - think_span->begin);
}

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size()))
    ++count;
  return count;
}

// Fenced blocks fully inside [begin, end). A fence is a line whose first
// non-blank characters are the fence marker; the opening fence may carry a
// language tag. An unterminated block runs to `end`.
std::vector<CodeBlock> find_code_blocks(std::string_view text, std::size_t begin, std::size_t end,
                                        std::string_view fence) {
  std::vector<CodeBlock> blocks;
  std::size_t pos = begin;
  std::optional<CodeBlock> open;

  while (pos < end) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos || eol > end) eol = end;
    std::string_view line = text.substr(pos, eol - pos);
    const auto first = line.find_first_not_of(" \t");
    const bool is_fence = first != std::string_view::npos && line.substr(first).starts_with(fence);
    const std::size_t next = eol < end ? eol + 1 : end;

    if (is_fence) {
      if (!open) {
        CodeBlock block;
        auto tag = line.substr(first + fence.size());
        const auto a = tag.find_first_not_of(" \t\r");
        const auto b = tag.find_last_not_of(" \t\r");
        if (a != std::string_view::npos) block.language = std::string(tag.substr(a, b - a + 1));
        block.span.begin = next;
        open = std::move(block);
      } else {
        open->span.end = pos;
        open->code = std::string(text.substr(open->span.begin, open->span.end - open->span.begin));
        if (!open->code.empty() && open->code.back() == '\n') open->code.pop_back();
        blocks.push_back(std::move(*open));
        open.reset();
      }
    }
    pos = next;
  }
  if (open) {
    open->span.end = end;
    open->code = std::string(text.substr(open->span.begin, end - open->span.begin));
    open->terminated = false;
    blocks.push_back(std::move(*open));
  }
  return blocks;
}

}  // namespace

ReasoningTrace parse_trace(std::string raw_text, const Delimiters& d, const Tokenizer& tokenizer) {
  ReasoningTrace t;
  t.raw_text = std::move(raw_text);
  const std::string_view text = t.raw_text;
  t.token_count = tokenizer ? tokenizer(text) : whitespace_tokenizer(text);

  const std::size_t opens = count_occurrences(text, d.think_open);
  const std::size_t closes = count_occurrences(text, d.think_close);
  const auto open_pos = text.find(d.think_open);
  const auto close_pos =
      open_pos == std::string_view::npos ? text.find(d.think_close)
                                         : text.find(d.think_close, open_pos + d.think_open.size());

  std::size_t proof_region_begin = 0;
  if (opens == 0 && closes == 0) {
    t.think_shape = ThinkShape::absent;
  } else if (open_pos == std::string_view::npos ||
             (close_pos == std::string_view::npos && text.find(d.think_close) != std::string_view::npos)) {
    t.think_shape = ThinkShape::misordered;
    proof_region_begin = text.rfind(d.think_close) + d.think_close.size();
  } else if (close_pos == std::string_view::npos) {
    t.think_shape = ThinkShape::unclosed;
    t.think_span = Span{open_pos + d.think_open.size(), text.size()};
    proof_region_begin = text.size();
  } else {
    t.think_shape = (opens == 1 && closes == 1) ? ThinkShape::balanced : ThinkShape::repeated;
    t.think_span = Span{open_pos + d.think_open.size(), close_pos};
    proof_region_begin = close_pos + d.think_close.size();
  }

  if (t.think_span) {
    t.snippets = find_code_blocks(text, t.think_span->begin, t.think_span->end, d.fence);
  }
  auto tail = find_code_blocks(text, proof_region_begin, text.size(), d.fence);
  if (!tail.empty()) t.final_proof = std::move(tail.back());
  return t;
}

TraceRecord trace_record_from_json(const nlohmann::json& j) {
  return {j.value("attempt_id", std::string()), j.value("problem_id", std::string()),
          j.at("text").get<std::string>()};
}

nlohmann::json to_json(const TraceRecord& r) {
  return {{"attempt_id", r.attempt_id}, {"problem_id", r.problem_id}, {"text", r.text}};
}

}  // namespace leanrl::pattern
