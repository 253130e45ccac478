#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

namespace sparsecoll {

/// Per-dimension interpolation levels (l_1, ..., l_N).
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : levels_(dim, 0) {}
  explicit MultiIndex(std::vector<int> levels);
  MultiIndex(std::initializer_list<int> levels) : MultiIndex(std::vector<int>(levels)) {}

  static MultiIndex unit(std::size_t dim, std::size_t n);

  std::size_t dim() const { return levels_.size(); }
  int operator[](std::size_t n) const { return levels_[n]; }
  const std::vector<int>& levels() const { return levels_; }
  int total() const;
  int max_level() const;

  /// Copy with entry n raised (delta = +1) or lowered (delta = -1).
  MultiIndex shifted(std::size_t n, int delta) const;

  std::string to_string() const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<int> levels_;
};

/// Downward-closed set of multi-indices of one fixed dimension, stored in
/// lexicographic order.
class MultiIndexSet {
 public:
  explicit MultiIndexSet(std::size_t dim) : dim_(dim) {}
  /// Throws if the members are not downward closed or have mixed dimensions.
  MultiIndexSet(std::size_t dim, std::initializer_list<MultiIndex> members);
  MultiIndexSet(std::size_t dim, const std::set<MultiIndex>& members);

  /// {l : |l| <= level}.
  static MultiIndexSet isotropic(std::size_t dim, int level);
  /// {l : l <= corner componentwise}.
  static MultiIndexSet box(const MultiIndex& corner);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(const MultiIndex& index) const { return members_.count(index) > 0; }
  const std::set<MultiIndex>& members() const { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  /// New set with `index` added; throws unless the result stays downward closed.
  MultiIndexSet with(const MultiIndex& index) const;
  /// In-place form of with().
  void add(const MultiIndex& index);

  /// Forward neighbours {l + e_n : l in set, n}, without duplicates.
  std::set<MultiIndex> refinement_set() const;
  /// Members of the refinement set outside the set whose addition keeps it
  /// downward closed. The empty set admits only the zero index.
  std::set<MultiIndex> admissible_set() const;

  /// True when every backward neighbour of `index` (with positive entry) is a member.
  bool is_admissible(const MultiIndex& index) const;

  bool operator==(const MultiIndexSet&) const = default;

 private:
  void check_dim(const MultiIndex& index) const;

  std::size_t dim_;
  std::set<MultiIndex> members_;
};

/// Definition-level check of downward closedness.
bool is_downward_closed(const std::set<MultiIndex>& members);

}  // namespace sparsecoll
