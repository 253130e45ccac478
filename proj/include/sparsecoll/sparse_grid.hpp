#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sparsecoll/multiindex.hpp"
#include "sparsecoll/random_inputs.hpp"
#include "sparsecoll/univariate_rules.hpp"

namespace sparsecoll {

using NodeTuple = std::vector<std::uint32_t>;

/// Identity of a grid point: its node positions within each dimension's
/// nested sequence, packed as little-endian 32-bit words.
class PointKey {
 public:
  explicit PointKey(std::span<const std::uint32_t> node_indices);

  NodeTuple node_indices() const;
  const std::string& bytes() const { return bytes_; }

  auto operator<=>(const PointKey&) const = default;
  bool operator==(const PointKey&) const = default;

  struct Hash {
    std::size_t operator()(const PointKey& k) const noexcept { return std::hash<std::string>{}(k.bytes_); }
  };

 private:
  std::string bytes_;
};

/// Lagrange interpolant through (nodes, values) evaluated at y with the
/// barycentric formula. A y within 1e-15 of the node span of a node returns
/// that node's value unchanged.
double barycentric_eval(std::span<const double> nodes, std::span<const double> values, double y);

/// Full tensor grid Z_l of a level multi-index.
struct TensorGrid {
  MultiIndex level;
  std::vector<NodeTuple> node_indices;
  std::vector<std::vector<double>> points;
};

/// `rules` must already hold the levels named by `level`.
TensorGrid tensor_grid(const MultiIndex& level, std::span<const UnivariateRule> rules);

using GridValues = std::map<NodeTuple, double>;

/// Tensor-product Lagrange interpolant of level `level` at y.
double tensor_interp_eval(const MultiIndex& level, const GridValues& values,
                          std::span<const UnivariateRule> rules, std::span<const double> y);

/// Tensor-product quadrature of level `level` applied to `values`.
double tensor_quadrature(const MultiIndex& level, const GridValues& values,
                         std::span<const UnivariateRule> rules);

/// Grid points first introduced by one multi-index, with their model values
/// and hierarchical surpluses.
struct IndexBlock {
  MultiIndex index;
  std::vector<NodeTuple> node_indices;
  std::vector<std::vector<double>> points;
  std::vector<double> values;
  std::vector<double> surpluses;
  /// Surpluses of the squared values, used for running variance estimates.
  std::vector<double> square_surpluses;
};

/// One unique grid point with its sparse quadrature weight.
struct WeightedPoint {
  NodeTuple node_indices;
  std::vector<double> point;
  double value;
  double weight;
};

/// Hierarchical sparse-grid interpolant over a downward-closed index set.
class SparseSurrogate {
 public:
  explicit SparseSurrogate(std::vector<UnivariateRule> rules);

  /// Interpolant on `set`, evaluating `model` at every grid point.
  static SparseSurrogate build(std::vector<UnivariateRule> rules, const MultiIndexSet& set,
                               const std::function<double(std::span<const double>)>& model,
                               unsigned threads = 1);

  std::size_t dim() const { return rules_.size(); }
  const std::vector<UnivariateRule>& rules() const { return rules_; }
  const MultiIndexSet& index_set() const { return index_set_; }
  const std::map<MultiIndex, IndexBlock>& blocks() const { return blocks_; }
  std::size_t num_points() const { return point_lookup_.size(); }
  bool contains_point(const PointKey& key) const { return point_lookup_.count(key) > 0; }

  /// Extends the univariate rules so that `index` can be handled.
  void prepare(const MultiIndex& index);

  /// The points of Z_index not yet in the grid (`index` must be admissible
  /// and prepared). Evaluations passed to compute_block follow this order.
  TensorGrid new_points(const MultiIndex& index) const;

  /// Surpluses of the new points of an admissible index against the current
  /// interpolant. Does not modify the surrogate.
  IndexBlock compute_block(const MultiIndex& index, std::span<const double> values,
                           unsigned threads = 1) const;

  /// Adds a block computed against the current index set.
  void insert_block(IndexBlock block);

  /// compute_block followed by insert_block.
  void add_index(const MultiIndex& index, std::span<const double> values, unsigned threads = 1);

  double evaluate(std::span<const double> y) const;
  std::vector<double> evaluate_many(const Sample& ys, unsigned threads = 1) const;

  /// sum_k s_k E[L_k]: the expectation of the interpolant via surpluses.
  double mean_by_surpluses() const;
  /// Expectation of the interpolant of q^2 via its surpluses.
  double second_moment_by_surpluses() const;

  /// One weight per unique grid point so that sum_k w_k q(y_k) is the
  /// expectation of the interpolant. Points follow block (lexicographic) order.
  std::vector<WeightedPoint> quadrature_weights() const;

 private:
  void evaluate_pair(std::span<const double> y, double& value, double& square) const;

  std::vector<UnivariateRule> rules_;
  MultiIndexSet index_set_;
  std::map<MultiIndex, IndexBlock> blocks_;
  std::unordered_map<PointKey, std::pair<MultiIndex, std::size_t>, PointKey::Hash> point_lookup_;
};

/// (sum_k s_k E[L_k], sum_k s2_k E[L_k]) over one block: its contribution to
/// the first and second moments of the interpolant.
std::pair<double, double> block_expectations(std::span<const UnivariateRule> rules, const IndexBlock& block);

/// sum_k s_k L_k(y) over the points of one block.
double block_eval(std::span<const UnivariateRule> rules, const IndexBlock& block, std::span<const double> y);

/// Free-function form of SparseSurrogate::evaluate.
double sparse_eval(const SparseSurrogate& surrogate, std::span<const double> y);

/// Free-function form of SparseSurrogate::quadrature_weights.
std::vector<WeightedPoint> sparse_quadrature_weights(const SparseSurrogate& surrogate);

}  // namespace sparsecoll
