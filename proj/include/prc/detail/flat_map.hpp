#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace prc::detail {

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Open-addressing hash map from uint64 keys to an accumulated value, used in
// the inner loops of the channel construction where node-based maps are too
// slow. Keys must never equal kEmpty. Capacity is a power of two and only
// grows; clear() keeps it.
template <class V>
class FlatMap64 {
 public:
  static constexpr std::uint64_t kEmpty = ~std::uint64_t(0);

  explicit FlatMap64(std::size_t initial_capacity = 64) { rehash(round_up(initial_capacity)); }

  void clear() {
    std::fill(keys_.begin(), keys_.end(), kEmpty);
    count_ = 0;
  }

  std::size_t size() const { return count_; }

  // Inserts key with value, or += value onto the existing entry.
  void add(std::uint64_t key, V value) {
    std::size_t i = mix64(key) & mask_;
    for (;;) {
      if (keys_[i] == key) {
        vals_[i] += value;
        return;
      }
      if (keys_[i] == kEmpty) {
        keys_[i] = key;
        vals_[i] = value;
        if (++count_ * 2 > keys_.size()) grow();
        return;
      }
      i = (i + 1) & mask_;
    }
  }

  // Inserts key with value only if absent; returns the stored value.
  V& insert(std::uint64_t key, V value) {
    std::size_t i = mix64(key) & mask_;
    for (;;) {
      if (keys_[i] == key) return vals_[i];
      if (keys_[i] == kEmpty) {
        keys_[i] = key;
        vals_[i] = value;
        std::size_t at = i;
        if (++count_ * 2 > keys_.size()) {
          grow();
          return *find(key);
        }
        return vals_[at];
      }
      i = (i + 1) & mask_;
    }
  }

  V* find(std::uint64_t key) {
    std::size_t i = mix64(key) & mask_;
    for (;;) {
      if (keys_[i] == key) return &vals_[i];
      if (keys_[i] == kEmpty) return nullptr;
      i = (i + 1) & mask_;
    }
  }

  const V* find(std::uint64_t key) const {
    return const_cast<FlatMap64*>(this)->find(key);
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i] != kEmpty) f(keys_[i], vals_[i]);
  }

  void swap(FlatMap64& other) {
    keys_.swap(other.keys_);
    vals_.swap(other.vals_);
    std::swap(mask_, other.mask_);
    std::swap(count_, other.count_);
  }

 private:
  static std::size_t round_up(std::size_t n) {
    std::size_t c = 16;
    while (c < n) c <<= 1;
    return c;
  }

  void rehash(std::size_t capacity) {
    keys_.assign(capacity, kEmpty);
    vals_.assign(capacity, V());
    mask_ = capacity - 1;
    count_ = 0;
  }

  void grow() {
    std::vector<std::uint64_t> old_keys = std::move(keys_);
    std::vector<V> old_vals = std::move(vals_);
    rehash(old_keys.size() * 2);
    for (std::size_t i = 0; i < old_keys.size(); ++i) {
      if (old_keys[i] == kEmpty) continue;
      std::size_t j = mix64(old_keys[i]) & mask_;
      while (keys_[j] != kEmpty) j = (j + 1) & mask_;
      keys_[j] = old_keys[i];
      vals_[j] = old_vals[i];
      ++count_;
    }
  }

  std::vector<std::uint64_t> keys_;
  std::vector<V> vals_;
  std::size_t mask_ = 0;
  std::size_t count_ = 0;
};

}  // namespace prc::detail
