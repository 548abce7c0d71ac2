#pragma once

// Trace-driven set-associative LRU cache, write-back + write-allocate.
// Every miss fetches one line from DRAM and every dirty eviction writes one
// back, so dram_tx = misses + dirty_evictions.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "nvmdse/error.hpp"
#include "nvmdse/workloads.hpp"

namespace nvmdse {

struct CacheConfig {
  std::uint64_t capacity = 0;  // bytes
  std::uint32_t line_size = 128;
  std::uint32_t associativity = 16;

  /// Sets need not be a power of two (3 MB / 128 B / 16 ways = 1536).
  std::uint64_t sets() const { return capacity / (std::uint64_t{line_size} * associativity); }
  std::uint64_t lines() const { return capacity / line_size; }

  void validate() const {
    if (line_size == 0 || associativity == 0) throw InvalidValue("cache", "line size and associativity must be >= 1");
    const std::uint64_t way_bytes = std::uint64_t{line_size} * associativity;
    if (capacity == 0 || capacity % way_bytes != 0)
      throw InvalidValue("capacity", std::to_string(capacity) + " is not a positive multiple of line_size x associativity");
  }

  static CacheConfig set_associative(std::uint64_t capacity, std::uint32_t line_size = 128, std::uint32_t ways = 16) {
    CacheConfig c{capacity, line_size, ways};
    c.validate();
    return c;
  }

  static CacheConfig fully_associative(std::uint64_t lines, std::uint32_t line_size = 128) {
    CacheConfig c{lines * line_size, line_size, static_cast<std::uint32_t>(lines)};
    c.validate();
    return c;
  }

  friend bool operator==(const CacheConfig&, const CacheConfig&) = default;
};

struct CacheStats {
  std::uint64_t accesses = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t dirty_evictions = 0;
  std::uint64_t dram_tx = 0;

  double miss_rate() const { return accesses == 0 ? 0.0 : static_cast<double>(misses) / static_cast<double>(accesses); }

  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

namespace detail {

// One slot per cache way; each set's slots form an intrusive LRU list.
class LruSets {
 public:
  explicit LruSets(const CacheConfig& cfg)
      : ways_(cfg.associativity), sets_(cfg.sets()), slots_(sets_ * ways_), head_(sets_, kNone), tail_(sets_, kNone),
        used_(sets_, 0) {
    index_.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(slots_.size(), 1u << 22)));
  }

  /// Returns true on hit. Updates recency and dirtiness; on a miss with a
  /// full set, evicts the LRU way and reports whether it was dirty.
  bool access(std::uint64_t line, bool write, bool& evicted_dirty) {
    evicted_dirty = false;
    const std::uint64_t set = line % sets_;
    if (const auto it = index_.find(line); it != index_.end()) {
      const std::uint32_t s = it->second;
      unlink(set, s);
      push_front(set, s);
      slots_[s].dirty |= write;
      return true;
    }
    std::uint32_t s;
    if (used_[set] < ways_) {
      s = static_cast<std::uint32_t>(set * ways_ + used_[set]++);
    } else {
      s = tail_[set];
      unlink(set, s);
      evicted_dirty = slots_[s].dirty;
      index_.erase(slots_[s].line);
    }
    slots_[s].line = line;
    slots_[s].dirty = write;
    push_front(set, s);
    index_.emplace(line, s);
    return false;
  }

 private:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  struct Slot {
    std::uint64_t line = 0;
    std::uint32_t prev = kNone;
    std::uint32_t next = kNone;
    bool dirty = false;
  };

  void unlink(std::uint64_t set, std::uint32_t s) {
    auto& slot = slots_[s];
    if (slot.prev != kNone) slots_[slot.prev].next = slot.next; else head_[set] = slot.next;
    if (slot.next != kNone) slots_[slot.next].prev = slot.prev; else tail_[set] = slot.prev;
    slot.prev = slot.next = kNone;
  }

  void push_front(std::uint64_t set, std::uint32_t s) {
    auto& slot = slots_[s];
    slot.prev = kNone;
    slot.next = head_[set];
    if (head_[set] != kNone) slots_[head_[set]].prev = s;
    head_[set] = s;
    if (tail_[set] == kNone) tail_[set] = s;
  }

  std::uint64_t ways_;
  std::uint64_t sets_;
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> head_;
  std::vector<std::uint32_t> tail_;
  std::vector<std::uint64_t> used_;
  std::unordered_map<std::uint64_t, std::uint32_t> index_;
};

}  // namespace detail

inline CacheStats simulate_cache(const MemoryTrace& trace, const CacheConfig& cfg) {
  if (trace.empty()) throw EmptyTrace();
  cfg.validate();
  detail::LruSets cache(cfg);
  CacheStats st;
  for (const auto& r : trace.records) {
    ++st.accesses;
    bool dirty = false;
    if (cache.access(r.address / cfg.line_size, r.op == MemOp::Write, dirty)) {
      ++st.hits;
    } else {
      ++st.misses;
      if (dirty) ++st.dirty_evictions;
    }
  }
  st.dram_tx = st.misses + st.dirty_evictions;
  return st;
}

/// Percent reduction in DRAM transactions from base to big.
inline double dram_reduction(const CacheStats& base, const CacheStats& big) {
  if (base.dram_tx == 0) throw NoBaseTraffic();
  return 100.0 * (1.0 - static_cast<double>(big.dram_tx) / static_cast<double>(base.dram_tx));
}

inline double dram_reduction(const MemoryTrace& trace, const CacheConfig& base_cfg, const CacheConfig& big_cfg) {
  if (base_cfg.line_size != big_cfg.line_size || base_cfg.associativity != big_cfg.associativity)
    throw InvalidValue("big_cfg", "configurations may differ only in capacity");
  return dram_reduction(simulate_cache(trace, base_cfg), simulate_cache(trace, big_cfg));
}

}  // namespace nvmdse
