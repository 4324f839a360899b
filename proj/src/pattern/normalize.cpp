#include "leanrl/pattern/normalize.hpp"

namespace leanrl::pattern {

std::vector<std::string> strip_comments(std::string_view code) {
  std::vector<std::string> lines(1);
  int depth = 0;
  bool in_string = false;
  const std::size_t n = code.size();

  for (std::size_t i = 0; i < n; ++i) {
    const char c = code[i];
    if (c == '\n') {
      lines.emplace_back();
      continue;
    }
    auto& line = lines.back();
    if (depth > 0) {
      if (c == '/' && i + 1 < n && code[i + 1] == '-') ++depth, ++i;
      else if (c == '-' && i + 1 < n && code[i + 1] == '/') {
        --depth, ++i;
        if (depth == 0) line += ' ';
      }
      continue;
    }
    if (in_string) {
      line += c;
      if (c == '\\' && i + 1 < n && code[i + 1] != '\n') line += code[++i];
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '-' && i + 1 < n && code[i + 1] == '-') {
      while (i + 1 < n && code[i + 1] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && code[i + 1] == '-') {
      depth = 1;
      ++i;
      continue;
    }
    if (c == '"') in_string = true;
    line += c;
  }
  return lines;
}

std::vector<std::string> normalize_lines(std::string_view code) {
  std::vector<std::string> out;
  for (const auto& raw : strip_comments(code)) {
    std::string line;
    bool pending_space = false;
    for (char c : raw) {
      if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        pending_space = !line.empty();
        continue;
      }
      if (pending_space) line += ' ';
      pending_space = false;
      line += c;
    }
    if (!line.empty()) out.push_back(std::move(line));
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

}  // namespace leanrl::pattern
