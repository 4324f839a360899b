#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace leanrl::kernels {

using Tokens = std::vector<std::string>;

// Lowercase ASCII, delete ASCII punctuation, split on whitespace. Bytes
// >= 0x80 are kept verbatim, so UTF-8 symbols survive as parts of words.
Tokens ngram_tokens(std::string_view text);

struct NgramHit {
  std::size_t reference = 0;  // index of the reference document
  std::size_t reference_pos = 0;
  std::size_t text_pos = 0;
  bool operator==(const NgramHit&) const = default;
};

// Hash index over every n-gram of a reference set. Lookups confirm hash
// matches token by token, so collisions never produce false hits.
class NgramIndex {
 public:
  NgramIndex(std::vector<Tokens> references, std::size_t n);

  std::size_t n() const { return n_; }
  std::size_t reference_count() const { return refs_.size(); }
  std::size_t distinct_hashes() const { return table_.size(); }
  const Tokens& reference(std::size_t i) const { return refs_[i]; }

  // Leftmost n-gram of `text` that occurs in some reference.
  std::optional<NgramHit> first_hit(const Tokens& text) const;

 private:
  bool same(const Tokens& text, std::size_t pos, std::size_t ref, std::size_t ref_pos) const;

  std::size_t n_;
  std::vector<Tokens> refs_;
  std::unordered_map<std::uint64_t, std::vector<std::pair<std::size_t, std::size_t>>> table_;
};

// Polynomial hash of tokens[pos, pos+n); shared by index build and scans.
std::uint64_t window_hash(const std::vector<std::uint64_t>& token_hashes, std::size_t pos,
                          std::size_t n);

std::vector<std::optional<NgramHit>> scan_serial(const NgramIndex& index,
                                                 std::span<const Tokens> texts);
std::vector<std::optional<NgramHit>> scan_parallel(const NgramIndex& index,
                                                   std::span<const Tokens> texts);

}  // namespace leanrl::kernels
