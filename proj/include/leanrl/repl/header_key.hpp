#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace leanrl::repl {

// Cache key for a preloaded REPL environment: the import and set_option lines
// of a source file's leading header, in canonical form (trimmed, comments
// dropped, imports sorted and deduplicated, options kept in source order).
struct ImportHeaderKey {
  std::vector<std::string> imports;
  std::vector<std::string> options;

  bool empty() const { return imports.empty() && options.empty(); }
  // Header text sent to the REPL to build the environment.
  std::string serialize() const;

  auto operator<=>(const ImportHeaderKey&) const = default;
  bool operator==(const ImportHeaderKey&) const = default;
};

struct ImportHeaderKeyHash {
  std::size_t operator()(const ImportHeaderKey& key) const;
};

struct SplitSource {
  ImportHeaderKey key;
  std::string body;
};

// Splits off the leading block of import / set_option / comment / blank lines.
// Never fails: a source without a header yields an empty key and the source
// unchanged as body.
SplitSource canonicalize_header(std::string_view source);

// Header text followed by the body; semantically equivalent to the source
// canonicalize_header was given.
std::string recompose(const SplitSource& split);

}  // namespace leanrl::repl
