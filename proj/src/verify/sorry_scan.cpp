#include "leanrl/verify/sorry_scan.hpp"

#include <array>

namespace leanrl::verify {
namespace {

// Bytes >= 0x80 are treated as identifier characters so that Unicode
// subscripts (h₀) and letters never split a token.
bool ident_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '\'' || c == '!' || c == '?' || c >= 0x80;
}

}  // namespace

bool contains_sorry_token(std::string_view src) {
  constexpr std::array<std::string_view, 2> kTokens{"sorry", "admit"};
  int block_depth = 0;
  bool in_string = false;
  const std::size_t n = src.size();

  for (std::size_t i = 0; i < n; ++i) {
    const char c = src[i];
    if (block_depth > 0) {
      if (c == '/' && i + 1 < n && src[i + 1] == '-') ++block_depth, ++i;
      else if (c == '-' && i + 1 < n && src[i + 1] == '/') --block_depth, ++i;
      continue;
    }
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '-' && i + 1 < n && src[i + 1] == '-') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && src[i + 1] == '-') {
      block_depth = 1;
      ++i;
      continue;
    }
    if (c == '"') {
      in_string = true;
      continue;
    }
    const bool left_ok = i == 0 || (!ident_char(static_cast<unsigned char>(src[i - 1])) && src[i - 1] != '.');
    if (!left_ok) continue;
    for (auto tok : kTokens) {
      if (src.substr(i, tok.size()) == tok) {
        const std::size_t end = i + tok.size();
        if (end >= n || !ident_char(static_cast<unsigned char>(src[end]))) return true;
      }
    }
  }
  return false;
}

}  // namespace leanrl::verify
