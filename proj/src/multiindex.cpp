#include "sparsecoll/multiindex.hpp"

#include <algorithm>
#include <numeric>

#include "sparsecoll/random_inputs.hpp"

namespace sparsecoll {

MultiIndex::MultiIndex(std::vector<int> levels) : levels_(std::move(levels)) {
  for (int l : levels_) {
    if (l < 0) throw InvalidArgument("multi-index entries must be non-negative");
  }
}

MultiIndex MultiIndex::unit(std::size_t dim, std::size_t n) {
  MultiIndex e(dim);
  e.levels_.at(n) = 1;
  return e;
}

int MultiIndex::total() const { return std::accumulate(levels_.begin(), levels_.end(), 0); }

int MultiIndex::max_level() const {
  return levels_.empty() ? 0 : *std::max_element(levels_.begin(), levels_.end());
}

MultiIndex MultiIndex::shifted(std::size_t n, int delta) const {
  MultiIndex out = *this;
  out.levels_.at(n) += delta;
  if (out.levels_[n] < 0) throw InvalidArgument("multi-index entries must be non-negative");
  return out;
}

std::string MultiIndex::to_string() const {
  std::string s = "(";
  for (std::size_t n = 0; n < levels_.size(); ++n) {
    if (n) s += ',';
    s += std::to_string(levels_[n]);
  }
  return s + ")";
}

bool is_downward_closed(const std::set<MultiIndex>& members) {
  for (const auto& index : members) {
    for (std::size_t n = 0; n < index.dim(); ++n) {
      if (index[n] > 0 && members.count(index.shifted(n, -1)) == 0) return false;
    }
  }
  return true;
}

MultiIndexSet::MultiIndexSet(std::size_t dim, std::initializer_list<MultiIndex> members)
    : MultiIndexSet(dim, std::set<MultiIndex>(members)) {}

MultiIndexSet::MultiIndexSet(std::size_t dim, const std::set<MultiIndex>& members)
    : dim_(dim), members_(members) {
  for (const auto& index : members_) check_dim(index);
  if (!is_downward_closed(members_)) throw InvalidArgument("multi-index set is not downward closed");
}

void MultiIndexSet::check_dim(const MultiIndex& index) const {
  if (index.dim() != dim_) throw InvalidArgument("multi-index dimension does not match the set");
}

MultiIndexSet MultiIndexSet::isotropic(std::size_t dim, int level) {
  if (dim == 0) throw InvalidArgument("isotropic set needs dim >= 1");
  if (level < 0) throw InvalidArgument("isotropic set needs level >= 0");
  MultiIndexSet out(dim);
  std::vector<int> cur(dim, 0);
  // Odometer over the total-degree simplex.
  while (true) {
    out.members_.insert(MultiIndex(cur));
    std::size_t n = 0;
    while (n < dim) {
      ++cur[n];
      if (std::accumulate(cur.begin(), cur.end(), 0) <= level) break;
      cur[n] = 0;
      ++n;
    }
    if (n == dim) break;
  }
  return out;
}

MultiIndexSet MultiIndexSet::box(const MultiIndex& corner) {
  const std::size_t dim = corner.dim();
  if (dim == 0) throw InvalidArgument("box needs dim >= 1");
  MultiIndexSet out(dim);
  std::vector<int> cur(dim, 0);
  while (true) {
    out.members_.insert(MultiIndex(cur));
    std::size_t n = 0;
    while (n < dim) {
      if (++cur[n] <= corner[n]) break;
      cur[n] = 0;
      ++n;
    }
    if (n == dim) break;
  }
  return out;
}

bool MultiIndexSet::is_admissible(const MultiIndex& index) const {
  check_dim(index);
  for (std::size_t n = 0; n < dim_; ++n) {
    if (index[n] > 0 && !contains(index.shifted(n, -1))) return false;
  }
  return true;
}

MultiIndexSet MultiIndexSet::with(const MultiIndex& index) const {
  MultiIndexSet out = *this;
  out.add(index);
  return out;
}

void MultiIndexSet::add(const MultiIndex& index) {
  check_dim(index);
  if (contains(index)) throw InvalidArgument("multi-index " + index.to_string() + " already in set");
  if (!is_admissible(index)) {
    throw InvalidArgument("adding " + index.to_string() + " breaks downward closedness");
  }
  members_.insert(index);
}

std::set<MultiIndex> MultiIndexSet::refinement_set() const {
  std::set<MultiIndex> out;
  for (const auto& index : members_) {
    for (std::size_t n = 0; n < dim_; ++n) out.insert(index.shifted(n, +1));
  }
  return out;
}

std::set<MultiIndex> MultiIndexSet::admissible_set() const {
  if (members_.empty()) return {MultiIndex(dim_)};
  std::set<MultiIndex> out;
  for (const auto& candidate : refinement_set()) {
    if (!contains(candidate) && is_admissible(candidate)) out.insert(candidate);
  }
  return out;
}

}  // namespace sparsecoll
