#include "leanrl/repl/header_key.hpp"

#include <algorithm>

#include "leanrl/common/rng.hpp"

namespace leanrl::repl {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

bool starts_with_word(std::string_view line, std::string_view word) {
  return line.starts_with(word) &&
         (line.size() == word.size() || line[word.size()] == ' ' || line[word.size()] == '\t');
}

}  // namespace

std::string ImportHeaderKey::serialize() const {
  std::string out;
  for (const auto& line : imports) out += line + "\n";
  for (const auto& line : options) out += line + "\n";
  return out;
}

std::size_t ImportHeaderKeyHash::operator()(const ImportHeaderKey& key) const {
  std::uint64_t h = 0;
  for (const auto& line : key.imports) h = splitmix64(h ^ fnv1a64(line));
  h = splitmix64(h ^ 0x5eedULL);
  for (const auto& line : key.options) h = splitmix64(h ^ fnv1a64(line));
  return static_cast<std::size_t>(h);
}

// Net change in block-comment nesting across one line.
static int comment_delta(std::string_view line, int depth, bool& trailing_code) {
  trailing_code = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (i + 1 < line.size() && line[i] == '/' && line[i + 1] == '-') {
      ++depth;
      ++i;
    } else if (i + 1 < line.size() && line[i] == '-' && line[i + 1] == '/' && depth > 0) {
      --depth;
      ++i;
    } else if (depth == 0 && line[i] != ' ' && line[i] != '\t') {
      trailing_code = true;
    }
  }
  return depth;
}

SplitSource canonicalize_header(std::string_view source) {
  SplitSource out;
  std::size_t pos = 0;
  std::size_t body_start = 0;
  std::size_t comment_open = 0;
  int depth = 0;

  while (pos < source.size()) {
    auto eol = source.find('\n', pos);
    const std::size_t next = eol == std::string_view::npos ? source.size() : eol + 1;
    const auto line = trim(source.substr(pos, next - pos));

    if (depth > 0 || line.starts_with("/-")) {
      if (depth == 0) comment_open = pos;
      bool trailing_code = false;
      depth = comment_delta(line, depth, trailing_code);
      if (trailing_code) break;
      pos = next;
      if (depth == 0) body_start = next;
      continue;
    }
    if (line.empty() || line.starts_with("--")) {
      // blank or line comment
    } else if (starts_with_word(line, "import")) {
      out.key.imports.emplace_back(line);
    } else if (starts_with_word(line, "set_option")) {
      out.key.options.emplace_back(line);
    } else {
      break;
    }
    pos = next;
    body_start = next;
  }
  // A block comment left open (or followed by code on its closing line)
  // belongs to the body in full.
  if (depth > 0 || body_start < pos) body_start = std::min(body_start, comment_open);

  std::sort(out.key.imports.begin(), out.key.imports.end());
  out.key.imports.erase(std::unique(out.key.imports.begin(), out.key.imports.end()),
                        out.key.imports.end());
  out.body = std::string(source.substr(body_start));
  return out;
}

std::string recompose(const SplitSource& split) {
  if (split.key.empty()) return split.body;
  return split.key.serialize() + "\n" + split.body;
}

}  // namespace leanrl::repl
