#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <string>
#include <vector>

namespace gclab {

using NodeId = std::uint32_t;

/// Finite set of node ids over a fixed universe [0, universe()).
///
/// Stored as a dense bitset so that set algebra, subset tests and
/// exhaustive enumeration stay cheap at small scale. Two sets compare equal
/// iff they have the same universe and the same members.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::size_t universe)
      : universe_(universe), words_((universe + 63) / 64, 0) {}
  NodeSet(std::size_t universe, std::initializer_list<NodeId> members)
      : NodeSet(universe) {
    for (NodeId n : members) insert(n);
  }

  static NodeSet full(std::size_t universe) {
    NodeSet s(universe);
    for (std::size_t i = 0; i < universe; ++i) s.insert(static_cast<NodeId>(i));
    return s;
  }

  template <typename Range>
  static NodeSet of(std::size_t universe, const Range& members) {
    NodeSet s(universe);
    for (auto n : members) s.insert(static_cast<NodeId>(n));
    return s;
  }

  std::size_t universe() const { return universe_; }

  bool contains(NodeId n) const {
    return n < universe_ && (words_[n >> 6] >> (n & 63)) & 1u;
  }
  void insert(NodeId n) { words_[n >> 6] |= (std::uint64_t{1} << (n & 63)); }
  void erase(NodeId n) { words_[n >> 6] &= ~(std::uint64_t{1} << (n & 63)); }
  void clear() { std::fill(words_.begin(), words_.end(), 0); }

  std::size_t size() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool empty() const {
    for (auto w : words_)
      if (w) return false;
    return true;
  }

  /// Lowest member >= from, or universe() if there is none.
  NodeId lowest_from(NodeId from) const {
    if (from >= universe_) return static_cast<NodeId>(universe_);
    std::size_t wi = from >> 6;
    std::uint64_t w = words_[wi] & (~std::uint64_t{0} << (from & 63));
    while (true) {
      if (w) return static_cast<NodeId>(wi * 64 + std::countr_zero(w));
      if (++wi >= words_.size()) return static_cast<NodeId>(universe_);
      w = words_[wi];
    }
  }
  NodeId lowest() const { return lowest_from(0); }

  bool subset_of(const NodeSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.word(i)) return false;
    return true;
  }
  bool proper_subset_of(const NodeSet& o) const { return subset_of(o) && *this != o; }
  bool intersects(const NodeSet& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & o.word(i)) return true;
    return false;
  }

  NodeSet& operator|=(const NodeSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.word(i);
    return *this;
  }
  NodeSet& operator&=(const NodeSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.word(i);
    return *this;
  }
  NodeSet& operator-=(const NodeSet& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.word(i);
    return *this;
  }
  friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }
  friend NodeSet operator&(NodeSet a, const NodeSet& b) { return a &= b; }
  friend NodeSet operator-(NodeSet a, const NodeSet& b) { return a -= b; }

  /// Complement within the universe.
  NodeSet complement() const {
    NodeSet c = full(universe_);
    c -= *this;
    return c;
  }

  friend bool operator==(const NodeSet& a, const NodeSet& b) {
    return a.universe_ == b.universe_ && a.words_ == b.words_;
  }

  std::vector<NodeId> to_vector() const {
    std::vector<NodeId> out;
    for (NodeId n : *this) out.push_back(n);
    return out;
  }

  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ull ^ universe_;
    for (auto w : words_) {
      h ^= w;
      h *= 1099511628211ull;
    }
    return h;
  }

  class const_iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = NodeId;
    using difference_type = std::ptrdiff_t;
    using pointer = const NodeId*;
    using reference = NodeId;

    const_iterator() = default;
    const_iterator(const NodeSet* s, NodeId at) : set_(s), at_(at) {}
    NodeId operator*() const { return at_; }
    const_iterator& operator++() {
      at_ = set_->lowest_from(at_ + 1);
      return *this;
    }
    const_iterator operator++(int) {
      auto t = *this;
      ++*this;
      return t;
    }
    friend bool operator==(const const_iterator& a, const const_iterator& b) {
      return a.at_ == b.at_;
    }

   private:
    const NodeSet* set_ = nullptr;
    NodeId at_ = 0;
  };

  const_iterator begin() const { return {this, lowest()}; }
  const_iterator end() const { return {this, static_cast<NodeId>(universe_)}; }

  /// "{0,3,5}" with numeric ids.
  std::string str() const;

 private:
  std::uint64_t word(std::size_t i) const { return i < words_.size() ? words_[i] : 0; }

  std::size_t universe_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace gclab
