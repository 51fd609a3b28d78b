#pragma once

// Open-addressing hash table keyed by integer lattice points (fixed-width
// int64 tuples). Entries are split into shards by the high bits of the key
// hash so that two tables merge shard-by-shard; iteration for output is
// always through sorted_entries(), which is independent of insertion order.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

namespace fp {

struct NoValue {
  friend bool operator==(NoValue, NoValue) { return true; }
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_lattice_point(std::span<const std::int64_t> key) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (std::int64_t k : key) h = mix64(h ^ static_cast<std::uint64_t>(k));
  return h;
}

template <class Value>
class LatticeTable {
 public:
  struct Entry {
    std::vector<std::int64_t> key;
    Value value;
  };

  explicit LatticeTable(std::size_t dim, unsigned shard_bits = 4)
      : dim_(dim), shard_bits_(shard_bits), shards_(std::size_t{1} << shard_bits) {}

  std::size_t dimension() const noexcept { return dim_; }

  std::size_t size() const noexcept {
    std::size_t n = 0;
    for (const auto& s : shards_) n += s.count;
    return n;
  }

  // Insert (key, value), or combine with the stored value via
  // merge(stored, value) when the key is present.
  template <class Merge>
  void upsert(std::span<const std::int64_t> key, const Value& value, Merge&& merge) {
    const std::uint64_t h = hash_lattice_point(key);
    shard_for(h).upsert(dim_, key, h, value, merge);
  }

  void insert(std::span<const std::int64_t> key) {
    upsert(key, Value{}, [](Value&, const Value&) {});
  }

  bool contains(std::span<const std::int64_t> key) const {
    const std::uint64_t h = hash_lattice_point(key);
    return shards_[shard_index(h)].find(dim_, key, h) != nullptr;
  }

  const Value* find(std::span<const std::int64_t> key) const {
    const std::uint64_t h = hash_lattice_point(key);
    return shards_[shard_index(h)].find(dim_, key, h);
  }

  template <class Merge>
  void merge_from(const LatticeTable& other, Merge&& merge) {
    for (const auto& shard : other.shards_)
      for (std::size_t slot = 0; slot < shard.used.size(); ++slot)
        if (shard.used[slot])
          upsert(std::span<const std::int64_t>(shard.keys.data() + slot * dim_, dim_), shard.values[slot], merge);
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& shard : shards_)
      for (std::size_t slot = 0; slot < shard.used.size(); ++slot)
        if (shard.used[slot]) f(std::span<const std::int64_t>(shard.keys.data() + slot * dim_, dim_), shard.values[slot]);
  }

  // Entries in lexicographic key order.
  std::vector<Entry> sorted_entries() const {
    std::vector<Entry> out;
    out.reserve(size());
    for_each([&](std::span<const std::int64_t> k, const Value& v) {
      out.push_back(Entry{std::vector<std::int64_t>(k.begin(), k.end()), v});
    });
    std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
    return out;
  }

 private:
  struct Shard {
    std::vector<std::int64_t> keys;
    std::vector<Value> values;
    std::vector<std::uint8_t> used;
    std::vector<std::uint64_t> hashes;
    std::size_t count = 0;

    std::size_t mask() const { return used.size() - 1; }

    const Value* find(std::size_t dim, std::span<const std::int64_t> key, std::uint64_t h) const {
      if (used.empty()) return nullptr;
      for (std::size_t slot = h & mask();; slot = (slot + 1) & mask()) {
        if (!used[slot]) return nullptr;
        if (hashes[slot] == h && std::equal(key.begin(), key.end(), keys.begin() + slot * dim)) return &values[slot];
      }
    }

    void grow(std::size_t dim) {
      const std::size_t capacity = used.empty() ? 16 : used.size() * 2;
      std::vector<std::int64_t> old_keys = std::move(keys);
      std::vector<Value> old_values = std::move(values);
      std::vector<std::uint8_t> old_used = std::move(used);
      std::vector<std::uint64_t> old_hashes = std::move(hashes);
      keys.assign(capacity * dim, 0);
      values.assign(capacity, Value{});
      used.assign(capacity, 0);
      hashes.assign(capacity, 0);
      for (std::size_t s = 0; s < old_used.size(); ++s) {
        if (!old_used[s]) continue;
        std::size_t slot = old_hashes[s] & mask();
        while (used[slot]) slot = (slot + 1) & mask();
        used[slot] = 1;
        hashes[slot] = old_hashes[s];
        values[slot] = std::move(old_values[s]);
        std::copy_n(old_keys.begin() + s * dim, dim, keys.begin() + slot * dim);
      }
    }

    template <class Merge>
    void upsert(std::size_t dim, std::span<const std::int64_t> key, std::uint64_t h, const Value& value,
                Merge& merge) {
      if ((count + 1) * 2 > used.size()) grow(dim);
      std::size_t slot = h & mask();
      while (used[slot]) {
        if (hashes[slot] == h && std::equal(key.begin(), key.end(), keys.begin() + slot * dim)) {
          merge(values[slot], value);
          return;
        }
        slot = (slot + 1) & mask();
      }
      used[slot] = 1;
      hashes[slot] = h;
      values[slot] = value;
      std::copy(key.begin(), key.end(), keys.begin() + slot * dim);
      ++count;
    }
  };

  std::size_t shard_index(std::uint64_t h) const {
    return shard_bits_ == 0 ? 0 : static_cast<std::size_t>(h >> (64 - shard_bits_));
  }
  Shard& shard_for(std::uint64_t h) { return shards_[shard_index(h)]; }

  std::size_t dim_;
  unsigned shard_bits_;
  std::vector<Shard> shards_;
};

using LatticeKeySet = LatticeTable<NoValue>;

}  // namespace fp
