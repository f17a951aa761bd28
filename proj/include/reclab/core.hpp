#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reclab {

using UserId = std::size_t;
using ItemId = std::size_t;
using Rng = std::mt19937_64;

/// Raised when a caller breaks a documented precondition.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RatingRange {
  double lo = 1.0;
  double hi = 5.0;

  double midpoint() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

inline double clip(double x, double lo, double hi) {
  if (lo > hi) throw ContractError("clip: lower bound exceeds upper bound");
  return std::min(std::max(x, lo), hi);
}

inline double clip(double x, RatingRange range) { return clip(x, range.lo, range.hi); }

// ---------------------------------------------------------------------------
// Seeding
//
// Streams are addressed by a base seed plus an ordered list of labels. Each
// label is folded into a 64-bit state with FNV-1a and a splitmix64 finalizer,
// and the resulting state seeds a Mersenne Twister through seed_seq.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fold_label(std::uint64_t state, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(state ^ splitmix64(h + label.size()));
}

}  // namespace detail

struct RngSeed {
  std::uint64_t base_seed = 0;
  std::vector<std::string> labels;

  RngSeed derive(std::string_view label) const {
    RngSeed out = *this;
    out.labels.emplace_back(label);
    return out;
  }
  RngSeed derive(std::uint64_t index) const { return derive(std::to_string(index)); }

  std::uint64_t state() const {
    std::uint64_t s = detail::splitmix64(base_seed);
    for (const auto& l : labels) s = detail::fold_label(s, l);
    return s;
  }

  Rng stream() const {
    const std::uint64_t s = state();
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
    return Rng(seq);
  }
};

inline Rng derive_stream(const RngSeed& seed, std::string_view label) {
  return seed.derive(label).stream();
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// ---------------------------------------------------------------------------
// Observations

struct Observation {
  UserId user = 0;
  ItemId item = 0;
  double rating = 0.0;
  int timestep = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Append-only log of ratings with a per-user index. A (user, item) pair can
/// appear at most once.
class ObservationSet {
 public:
  ObservationSet() = default;
  ObservationSet(std::size_t n_users, std::size_t n_items)
      : n_users_(n_users), n_items_(n_items), by_user_(n_users), seen_(n_users * n_items, 0) {}

  std::size_t n_users() const { return n_users_; }
  std::size_t n_items() const { return n_items_; }
  std::size_t size() const { return tuples_.size(); }
  bool empty() const { return tuples_.empty(); }

  const std::vector<Observation>& tuples() const { return tuples_; }
  const Observation& operator[](std::size_t k) const { return tuples_[k]; }
  auto begin() const { return tuples_.begin(); }
  auto end() const { return tuples_.end(); }

  /// Indices into tuples() of the ratings made by `u`, in insertion order.
  std::span<const std::size_t> user_entries(UserId u) const { return by_user_.at(u); }

  bool contains(UserId u, ItemId i) const { return seen_[u * n_items_ + i] != 0; }

  /// Returns false (and leaves the set untouched) on a duplicate pair.
  bool try_insert(const Observation& o) {
    check_ids(o.user, o.item);
    auto& flag = seen_[o.user * n_items_ + o.item];
    if (flag) return false;
    flag = 1;
    by_user_[o.user].push_back(tuples_.size());
    tuples_.push_back(o);
    return true;
  }

  void insert(const Observation& o) {
    if (!try_insert(o)) {
      throw ContractError("duplicate observation for user " + std::to_string(o.user) + ", item " +
                          std::to_string(o.item));
    }
  }

  void append(std::span<const Observation> batch) {
    for (const auto& o : batch) insert(o);
  }

  /// Subset with the given tuple indices, preserving dimensions.
  ObservationSet subset(std::span<const std::size_t> indices) const {
    ObservationSet out(n_users_, n_items_);
    out.tuples_.reserve(indices.size());
    for (std::size_t k : indices) out.insert(tuples_.at(k));
    return out;
  }

  double mean_rating() const {
    if (tuples_.empty()) throw ContractError("mean of an empty observation set");
    double s = 0.0;
    for (const auto& o : tuples_) s += o.rating;
    return s / static_cast<double>(tuples_.size());
  }

  friend bool operator==(const ObservationSet& a, const ObservationSet& b) {
    return a.n_users_ == b.n_users_ && a.n_items_ == b.n_items_ && a.tuples_ == b.tuples_;
  }

 private:
  void check_ids(UserId u, ItemId i) const {
    if (u >= n_users_ || i >= n_items_) {
      throw ContractError("observation id out of range: (" + std::to_string(u) + ", " +
                          std::to_string(i) + ")");
    }
  }

  std::size_t n_users_ = 0;
  std::size_t n_items_ = 0;
  std::vector<Observation> tuples_;
  std::vector<std::vector<std::size_t>> by_user_;
  std::vector<std::uint8_t> seen_;
};

/// Dense row-major user x item table.
struct RatingTable {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<double> values;

  RatingTable() = default;
  RatingTable(std::size_t users, std::size_t items, double fill = 0.0)
      : n_users(users), n_items(items), values(users * items, fill) {}

  double& operator()(UserId u, ItemId i) { return values[u * n_items + i]; }
  double operator()(UserId u, ItemId i) const { return values[u * n_items + i]; }
  std::span<const double> row(UserId u) const { return {values.data() + u * n_items, n_items}; }
  std::span<double> row(UserId u) { return {values.data() + u * n_items, n_items}; }
};

}  // namespace reclab
