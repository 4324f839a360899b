#include "leanrl/kernels/decontam_kernels.hpp"

#include <cctype>

#include "leanrl/common/rng.hpp"

namespace leanrl::kernels {

namespace {

constexpr std::uint64_t kBase = 0x100000001b3ULL;

std::vector<std::uint64_t> hash_tokens(const Tokens& tokens) {
  std::vector<std::uint64_t> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(fnv1a64(t));
  return out;
}

std::uint64_t power(std::uint64_t base, std::size_t e) {
  std::uint64_t r = 1;
  while (e--) r *= base;
  return r;
}

}  // namespace

Tokens ngram_tokens(std::string_view text) {
  Tokens out;
  std::string cur;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else if (c < 0x80 && std::ispunct(c)) {
      continue;
    } else {
      cur.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::uint64_t window_hash(const std::vector<std::uint64_t>& token_hashes, std::size_t pos,
                          std::size_t n) {
  std::uint64_t h = 0;
  for (std::size_t i = 0; i < n; ++i) h = h * kBase + token_hashes[pos + i];
  return h;
}

NgramIndex::NgramIndex(std::vector<Tokens> references, std::size_t n)
    : n_(n), refs_(std::move(references)) {
  if (n_ == 0) n_ = 1;
  for (std::size_t r = 0; r < refs_.size(); ++r) {
    if (refs_[r].size() < n_) continue;
    const auto hashes = hash_tokens(refs_[r]);
    for (std::size_t p = 0; p + n_ <= hashes.size(); ++p)
      table_[window_hash(hashes, p, n_)].emplace_back(r, p);
  }
}

bool NgramIndex::same(const Tokens& text, std::size_t pos, std::size_t ref,
                      std::size_t ref_pos) const {
  for (std::size_t i = 0; i < n_; ++i)
    if (text[pos + i] != refs_[ref][ref_pos + i]) return false;
  return true;
}

std::optional<NgramHit> NgramIndex::first_hit(const Tokens& text) const {
  if (text.size() < n_ || table_.empty()) return std::nullopt;
  const auto hashes = hash_tokens(text);
  const std::uint64_t top = power(kBase, n_ - 1);
  std::uint64_t h = window_hash(hashes, 0, n_);
  for (std::size_t p = 0;; ++p) {
    if (auto it = table_.find(h); it != table_.end()) {
      for (const auto& [ref, ref_pos] : it->second)
        if (same(text, p, ref, ref_pos)) return NgramHit{ref, ref_pos, p};
    }
    if (p + n_ >= text.size()) break;
    h = (h - hashes[p] * top) * kBase + hashes[p + n_];
  }
  return std::nullopt;
}

std::vector<std::optional<NgramHit>> scan_serial(const NgramIndex& index,
                                                 std::span<const Tokens> texts) {
  std::vector<std::optional<NgramHit>> out(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) out[i] = index.first_hit(texts[i]);
  return out;
}

std::vector<std::optional<NgramHit>> scan_parallel(const NgramIndex& index,
                                                   std::span<const Tokens> texts) {
  std::vector<std::optional<NgramHit>> out(texts.size());
  const auto count = static_cast<std::int64_t>(texts.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < count; ++i) out[i] = index.first_hit(texts[i]);
  return out;
}

}  // namespace leanrl::kernels
