#pragma once

#include <cstddef>
#include <list>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace leanrl::repl {

// Fixed-capacity map with strict least-recently-used eviction. Both get() and
// put() count as a use.
template <typename Key, typename Value, typename Hash = std::hash<Key>>
class LruCache {
 public:
  explicit LruCache(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  std::optional<Value> get(const Key& key) {
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    order_.splice(order_.begin(), order_, it->second);
    return it->second->second;
  }

  bool contains(const Key& key) const { return index_.count(key) != 0; }

  // Inserts or refreshes; returns the evicted entry, if any.
  std::optional<std::pair<Key, Value>> put(const Key& key, Value value) {
    if (auto it = index_.find(key); it != index_.end()) {
      it->second->second = std::move(value);
      order_.splice(order_.begin(), order_, it->second);
      return std::nullopt;
    }
    order_.emplace_front(key, std::move(value));
    index_.emplace(key, order_.begin());
    if (order_.size() <= capacity_) return std::nullopt;
    auto victim = std::move(order_.back());
    index_.erase(victim.first);
    order_.pop_back();
    return victim;
  }

  void clear() {
    order_.clear();
    index_.clear();
  }

  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Keys from most to least recently used.
  std::vector<Key> keys_by_recency() const {
    std::vector<Key> out;
    out.reserve(order_.size());
    for (const auto& entry : order_) out.push_back(entry.first);
    return out;
  }

 private:
  using Entry = std::pair<Key, Value>;
  std::size_t capacity_;
  std::list<Entry> order_;
  std::unordered_map<Key, typename std::list<Entry>::iterator, Hash> index_;
};

}  // namespace leanrl::repl
