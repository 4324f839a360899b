#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace leanrl::pattern {

// Source lines with Lean comments (`--` to end of line, nested `/- -/`)
// blanked out. String literals are respected. Indentation is preserved and
// the line count matches the input.
std::vector<std::string> strip_comments(std::string_view code);

// Coverage normalization: comments removed, whitespace trimmed, internal
// whitespace runs collapsed to one space, blank and comment-only lines
// dropped. Idempotent over its own joined output.
std::vector<std::string> normalize_lines(std::string_view code);

std::string join_lines(const std::vector<std::string>& lines);

}  // namespace leanrl::pattern
