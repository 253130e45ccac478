#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sparsecoll/random_inputs.hpp"

namespace sparsecoll {

enum class RuleFamily { ClenshawCurtis, Leja };

std::string to_string(RuleFamily family);
RuleFamily rule_family_from_string(const std::string& name);

/// Level-to-nodes map: 1, 3, 5, 9, 17, ... for Clenshaw-Curtis, l + 1 for Leja.
std::size_t level_to_nodes(RuleFamily family, int level);

/// Nodes and density-adapted weights of one level of a nested rule.
struct QuadratureLevel {
  int level = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  /// Position of each node in the rule's nested sequence.
  std::vector<std::size_t> sequence_index;
};

/// Clenshaw-Curtis nodes on [-1, 1] in ascending order; level 0 is {0}.
std::vector<double> cc_nodes(int level);

/// Affine map of nodes from [-1, 1] onto [a, b]; the endpoints map exactly.
std::vector<double> scale_nodes(std::span<const double> nodes, double a, double b);

/// gamma_k = E[T_k(t)] for k < count, where t is the variable mapped to [-1, 1].
std::vector<double> chebyshev_moments(const BoundedDistribution& dist, std::size_t count);

/// w_i = E[l_i] for the Lagrange basis of `canonical_nodes` (on [-1, 1]),
/// integrated exactly with a Gauss rule for the density.
std::vector<double> interpolatory_weights(std::span<const double> canonical_nodes,
                                          const BoundedDistribution& dist);

/// Clenshaw-Curtis weights from Chebyshev moments through the discrete
/// cosine expansion of the Lagrange basis. Ascending node order.
std::vector<double> cc_weights_from_moments(int level, const BoundedDistribution& dist);

/// Weights of the level-`level` Clenshaw-Curtis rule for `dist`, ascending
/// node order, computed by direct Lagrange integration.
QuadratureLevel cc_weights(int level, const BoundedDistribution& dist);

/// Barycentric weights lambda_j = 1 / prod_{k != j} (x_j - x_k), rescaled so
/// that max |lambda_j| = 1.
std::vector<double> barycentric_weights(std::span<const double> nodes);

/// A nested univariate node sequence tied to one input density.
///
/// Nodes are kept in sequence order: the first level_to_nodes(l) entries
/// form the level-l node set. Values are immutable; extension returns a new
/// rule whose leading nodes are bitwise identical to the original's.
class UnivariateRule {
 public:
  static UnivariateRule clenshaw_curtis(const BoundedDistribution& dist, int levels = 0);
  /// Weighted Leja rule. Requires shape parameters >= 1 so the weighted
  /// objective stays bounded on [a, b].
  static UnivariateRule leja(const BoundedDistribution& dist, int levels = 0);

  RuleFamily family() const { return family_; }
  const BoundedDistribution& distribution() const { return dist_; }

  std::size_t nodes_at_level(int level) const { return level_to_nodes(family_, level); }
  /// Highest level whose nodes and weights are available.
  int max_level() const { return static_cast<int>(weights_.size()) - 1; }
  std::size_t size() const { return nodes_.size(); }

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> canonical_nodes() const { return canonical_; }
  double node(std::size_t j) const { return nodes_.at(j); }
  /// Smallest level whose node set contains sequence node j.
  int level_of_node(std::size_t j) const;

  /// Rule holding at least all levels up to `level`.
  UnivariateRule extended_to_level(int level) const;

  /// Quadrature weights of `level` in sequence order.
  const std::vector<double>& weights(int level) const { return weights_.at(static_cast<std::size_t>(level)); }
  QuadratureLevel quadrature(int level) const;

  /// Values of the level-`level` Lagrange basis at y, written to out[0..m).
  /// A y within 1e-15 (b - a) of a node yields the exact unit vector.
  void lagrange_basis(int level, double y, std::span<double> out) const;

 private:
  UnivariateRule(RuleFamily family, const BoundedDistribution& dist) : family_(family), dist_(dist) {}
  void grow_to_level(int level);

  RuleFamily family_;
  BoundedDistribution dist_;
  std::vector<double> canonical_;
  std::vector<double> nodes_;
  std::vector<std::vector<double>> weights_;
  std::vector<std::vector<double>> barycentric_;
};

/// Appends weighted Leja nodes to a Leja rule until it holds `target_count`
/// nodes.
UnivariateRule leja_extend(const UnivariateRule& rule, std::size_t target_count);

/// The first `count` Leja nodes (sequence order) with their weights.
QuadratureLevel leja_weights(const UnivariateRule& rule, std::size_t count);

/// Next weighted Leja point on [-1, 1] for the canonical density of `dist`
/// given the existing canonical nodes.
double next_leja_point(std::span<const double> canonical_nodes, const BoundedDistribution& dist);

}  // namespace sparsecoll
