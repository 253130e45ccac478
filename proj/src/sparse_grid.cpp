#include "sparsecoll/sparse_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sparsecoll/parallel.hpp"

namespace sparsecoll {

namespace {

// Odometer over the node-index box [lo_n, hi_n) with the last dimension
// running fastest.
template <class Visit>
void for_each_tuple(const std::vector<std::uint32_t>& lo, const std::vector<std::uint32_t>& hi,
                    Visit&& visit) {
  const std::size_t dim = lo.size();
  for (std::size_t n = 0; n < dim; ++n) {
    if (lo[n] >= hi[n]) return;
  }
  NodeTuple cur = lo;
  while (true) {
    visit(cur);
    std::size_t n = dim;
    while (n > 0) {
      --n;
      if (++cur[n] < hi[n]) break;
      cur[n] = lo[n];
      if (n == 0) return;
    }
    if (dim == 0) return;
  }
}

std::uint32_t nodes_at(const UnivariateRule& rule, int level) {
  return level < 0 ? 0U : static_cast<std::uint32_t>(rule.nodes_at_level(level));
}

void check_prepared(const MultiIndex& level, std::span<const UnivariateRule> rules) {
  if (level.dim() != rules.size()) throw InvalidArgument("multi-index dimension does not match the rules");
  for (std::size_t n = 0; n < rules.size(); ++n) {
    if (level[n] > rules[n].max_level()) {
      throw InvalidArgument("rule for dimension " + std::to_string(n) + " lacks level " +
                            std::to_string(level[n]));
    }
  }
}

// Lagrange basis values per dimension and level at one parameter point.
class BasisTable {
 public:
  BasisTable(std::span<const UnivariateRule> rules, const std::vector<int>& max_levels,
             std::span<const double> y) {
    table_.resize(rules.size());
    for (std::size_t n = 0; n < rules.size(); ++n) {
      table_[n].resize(static_cast<std::size_t>(max_levels[n] + 1));
      for (int l = 0; l <= max_levels[n]; ++l) {
        auto& row = table_[n][static_cast<std::size_t>(l)];
        row.resize(rules[n].nodes_at_level(l));
        rules[n].lagrange_basis(l, y[n], row);
      }
    }
  }

  double product(const MultiIndex& level, const NodeTuple& nodes) const {
    double p = 1.0;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      p *= table_[n][static_cast<std::size_t>(level[n])][nodes[n]];
    }
    return p;
  }

 private:
  std::vector<std::vector<std::vector<double>>> table_;
};

double weight_product(std::span<const UnivariateRule> rules, const MultiIndex& level,
                      const NodeTuple& nodes) {
  double w = 1.0;
  for (std::size_t n = 0; n < nodes.size(); ++n) w *= rules[n].weights(level[n])[nodes[n]];
  return w;
}

}  // namespace

PointKey::PointKey(std::span<const std::uint32_t> node_indices) {
  bytes_.reserve(4 * node_indices.size());
  for (std::uint32_t v : node_indices) {
    for (int b = 0; b < 4; ++b) bytes_.push_back(static_cast<char>((v >> (8 * b)) & 0xffU));
  }
}

NodeTuple PointKey::node_indices() const {
  NodeTuple out(bytes_.size() / 4, 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int b = 0; b < 4; ++b) {
      out[i] |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[4 * i + static_cast<std::size_t>(b)]))
                << (8 * b);
    }
  }
  return out;
}

double barycentric_eval(std::span<const double> nodes, std::span<const double> values, double y) {
  if (nodes.size() != values.size()) throw InvalidArgument("barycentric_eval: length mismatch");
  if (nodes.empty()) throw InvalidArgument("barycentric_eval: no nodes");
  const auto [lo, hi] = std::minmax_element(nodes.begin(), nodes.end());
  const double span = *hi - *lo;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (std::abs(y - nodes[j]) <= 1e-15 * span) {
      // Still reject duplicates before returning.
      barycentric_weights(nodes);
      return values[j];
    }
  }
  const auto lambda = barycentric_weights(nodes);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double c = lambda[j] / (y - nodes[j]);
    num += c * values[j];
    den += c;
  }
  return num / den;
}

TensorGrid tensor_grid(const MultiIndex& level, std::span<const UnivariateRule> rules) {
  check_prepared(level, rules);
  TensorGrid grid{level, {}, {}};
  std::vector<std::uint32_t> lo(rules.size(), 0);
  std::vector<std::uint32_t> hi(rules.size());
  for (std::size_t n = 0; n < rules.size(); ++n) hi[n] = nodes_at(rules[n], level[n]);
  for_each_tuple(lo, hi, [&](const NodeTuple& t) {
    grid.node_indices.push_back(t);
    std::vector<double> y(t.size());
    for (std::size_t n = 0; n < t.size(); ++n) y[n] = rules[n].node(t[n]);
    grid.points.push_back(std::move(y));
  });
  return grid;
}

double tensor_interp_eval(const MultiIndex& level, const GridValues& values,
                          std::span<const UnivariateRule> rules, std::span<const double> y) {
  check_prepared(level, rules);
  if (y.size() != rules.size()) throw InvalidArgument("tensor_interp_eval: dimension mismatch");
  std::vector<std::vector<double>> basis(rules.size());
  for (std::size_t n = 0; n < rules.size(); ++n) {
    basis[n].resize(rules[n].nodes_at_level(level[n]));
    rules[n].lagrange_basis(level[n], y[n], basis[n]);
  }
  const auto grid = tensor_grid(level, rules);
  double sum = 0.0;
  for (const auto& t : grid.node_indices) {
    const auto it = values.find(t);
    if (it == values.end()) throw InvalidArgument("tensor_interp_eval: missing grid value");
    double p = it->second;
    for (std::size_t n = 0; n < t.size(); ++n) p *= basis[n][t[n]];
    sum += p;
  }
  return sum;
}

double tensor_quadrature(const MultiIndex& level, const GridValues& values,
                         std::span<const UnivariateRule> rules) {
  const auto grid = tensor_grid(level, rules);
  double sum = 0.0;
  for (const auto& t : grid.node_indices) {
    const auto it = values.find(t);
    if (it == values.end()) throw InvalidArgument("tensor_quadrature: missing grid value");
    sum += it->second * weight_product(rules, level, t);
  }
  return sum;
}

SparseSurrogate::SparseSurrogate(std::vector<UnivariateRule> rules)
    : rules_(std::move(rules)), index_set_(rules_.size()) {
  if (rules_.empty()) throw InvalidArgument("surrogate needs at least one dimension");
}

SparseSurrogate SparseSurrogate::build(std::vector<UnivariateRule> rules, const MultiIndexSet& set,
                                       const std::function<double(std::span<const double>)>& model,
                                       unsigned threads) {
  SparseSurrogate s(std::move(rules));
  if (set.dim() != s.dim()) throw InvalidArgument("index set dimension does not match the rules");
  std::vector<MultiIndex> order(set.begin(), set.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const MultiIndex& x, const MultiIndex& y) { return x.total() < y.total(); });
  for (const auto& index : order) {
    s.prepare(index);
    const auto grid = s.new_points(index);
    std::vector<double> values(grid.points.size());
    parallel_for(values.size(), threads, [&](std::size_t i) { values[i] = model(grid.points[i]); });
    s.add_index(index, values, threads);
  }
  return s;
}

void SparseSurrogate::prepare(const MultiIndex& index) {
  if (index.dim() != dim()) throw InvalidArgument("multi-index dimension does not match the surrogate");
  for (std::size_t n = 0; n < dim(); ++n) {
    if (index[n] > rules_[n].max_level()) rules_[n] = rules_[n].extended_to_level(index[n]);
  }
}

TensorGrid SparseSurrogate::new_points(const MultiIndex& index) const {
  check_prepared(index, rules_);
  TensorGrid grid{index, {}, {}};
  std::vector<std::uint32_t> lo(dim());
  std::vector<std::uint32_t> hi(dim());
  for (std::size_t n = 0; n < dim(); ++n) {
    lo[n] = nodes_at(rules_[n], index[n] - 1);
    hi[n] = nodes_at(rules_[n], index[n]);
    if (lo[n] >= hi[n]) throw std::logic_error("level-to-nodes map is not strictly increasing");
  }
  for_each_tuple(lo, hi, [&](const NodeTuple& t) {
    grid.node_indices.push_back(t);
    std::vector<double> y(t.size());
    for (std::size_t n = 0; n < t.size(); ++n) y[n] = rules_[n].node(t[n]);
    grid.points.push_back(std::move(y));
  });
  return grid;
}

IndexBlock SparseSurrogate::compute_block(const MultiIndex& index, std::span<const double> values,
                                          unsigned threads) const {
  if (index.dim() != dim()) throw InvalidArgument("multi-index dimension does not match the surrogate");
  if (index_set_.contains(index)) {
    throw InvalidArgument("multi-index " + index.to_string() + " is already in the index set");
  }
  if (!(index_set_.empty() ? index == MultiIndex(dim()) : index_set_.is_admissible(index))) {
    throw InvalidArgument("multi-index " + index.to_string() + " is not admissible");
  }
  auto grid = new_points(index);
  if (values.size() != grid.points.size()) {
    throw InvalidArgument("expected " + std::to_string(grid.points.size()) + " evaluations for " +
                          index.to_string() + ", got " + std::to_string(values.size()));
  }
  IndexBlock block;
  block.index = index;
  block.node_indices = std::move(grid.node_indices);
  block.points = std::move(grid.points);
  block.values.assign(values.begin(), values.end());
  block.surpluses.resize(values.size());
  block.square_surpluses.resize(values.size());
  parallel_for(values.size(), threads, [&](std::size_t i) {
    double v = 0.0;
    double v2 = 0.0;
    evaluate_pair(block.points[i], v, v2);
    block.surpluses[i] = values[i] - v;
    block.square_surpluses[i] = values[i] * values[i] - v2;
  });
  return block;
}

void SparseSurrogate::insert_block(IndexBlock block) {
  const MultiIndex index = block.index;
  index_set_.add(index);
  for (std::size_t i = 0; i < block.node_indices.size(); ++i) {
    point_lookup_.emplace(PointKey(block.node_indices[i]), std::make_pair(index, i));
  }
  blocks_.emplace(index, std::move(block));
}

void SparseSurrogate::add_index(const MultiIndex& index, std::span<const double> values, unsigned threads) {
  insert_block(compute_block(index, values, threads));
}

void SparseSurrogate::evaluate_pair(std::span<const double> y, double& value, double& square) const {
  std::vector<int> max_levels(dim(), 0);
  for (const auto& index : index_set_) {
    for (std::size_t n = 0; n < dim(); ++n) max_levels[n] = std::max(max_levels[n], index[n]);
  }
  value = 0.0;
  square = 0.0;
  if (blocks_.empty()) return;
  const BasisTable basis(rules_, max_levels, y);
  for (const auto& [index, block] : blocks_) {
    for (std::size_t p = 0; p < block.node_indices.size(); ++p) {
      const double l = basis.product(index, block.node_indices[p]);
      value += block.surpluses[p] * l;
      square += block.square_surpluses[p] * l;
    }
  }
}

double SparseSurrogate::evaluate(std::span<const double> y) const {
  if (y.size() != dim()) {
    throw InvalidArgument("surrogate evaluation: expected " + std::to_string(dim()) +
                          " parameters, got " + std::to_string(y.size()));
  }
  double v = 0.0;
  double v2 = 0.0;
  evaluate_pair(y, v, v2);
  return v;
}

std::vector<double> SparseSurrogate::evaluate_many(const Sample& ys, unsigned threads) const {
  std::vector<double> out(ys.size());
  parallel_for(ys.size(), threads, [&](std::size_t i) { out[i] = evaluate(ys[i]); });
  return out;
}

std::pair<double, double> block_expectations(std::span<const UnivariateRule> rules, const IndexBlock& block) {
  double first = 0.0;
  double second = 0.0;
  for (std::size_t p = 0; p < block.node_indices.size(); ++p) {
    const double w = weight_product(rules, block.index, block.node_indices[p]);
    first += block.surpluses[p] * w;
    second += block.square_surpluses[p] * w;
  }
  return {first, second};
}

double block_eval(std::span<const UnivariateRule> rules, const IndexBlock& block, std::span<const double> y) {
  check_prepared(block.index, rules);
  if (y.size() != rules.size()) throw InvalidArgument("block_eval: dimension mismatch");
  std::vector<std::vector<double>> basis(rules.size());
  for (std::size_t n = 0; n < rules.size(); ++n) {
    basis[n].resize(rules[n].nodes_at_level(block.index[n]));
    rules[n].lagrange_basis(block.index[n], y[n], basis[n]);
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < block.node_indices.size(); ++p) {
    double l = block.surpluses[p];
    for (std::size_t n = 0; n < rules.size(); ++n) l *= basis[n][block.node_indices[p][n]];
    sum += l;
  }
  return sum;
}

double SparseSurrogate::mean_by_surpluses() const {
  double sum = 0.0;
  for (const auto& entry : blocks_) sum += block_expectations(rules_, entry.second).first;
  return sum;
}

double SparseSurrogate::second_moment_by_surpluses() const {
  double sum = 0.0;
  for (const auto& entry : blocks_) sum += block_expectations(rules_, entry.second).second;
  return sum;
}

std::vector<WeightedPoint> SparseSurrogate::quadrature_weights() const {
  std::vector<WeightedPoint> out;
  std::map<MultiIndex, std::size_t> offset;
  for (const auto& [index, block] : blocks_) {
    offset[index] = out.size();
    for (std::size_t p = 0; p < block.node_indices.size(); ++p) {
      out.push_back({block.node_indices[p], block.points[p], block.values[p], 0.0});
    }
  }

  // Combination coefficients c_l = sum over z in {0,1}^N of (-1)^|z| [l + z in set].
  const std::size_t subsets = std::size_t{1} << dim();
  for (const auto& index : index_set_) {
    long coefficient = 0;
    for (std::size_t z = 0; z < subsets; ++z) {
      std::vector<int> shifted = index.levels();
      int parity = 0;
      for (std::size_t n = 0; n < dim(); ++n) {
        if (z & (std::size_t{1} << n)) {
          ++shifted[n];
          ++parity;
        }
      }
      if (index_set_.contains(MultiIndex(shifted))) coefficient += (parity % 2 == 0) ? 1 : -1;
    }
    if (coefficient == 0) continue;
    const auto grid = tensor_grid(index, rules_);
    for (const auto& t : grid.node_indices) {
      const auto it = point_lookup_.find(PointKey(t));
      if (it == point_lookup_.end()) throw std::logic_error("tensor grid point missing from sparse grid");
      out[offset.at(it->second.first) + it->second.second].weight +=
          static_cast<double>(coefficient) * weight_product(rules_, index, t);
    }
  }
  return out;
}

double sparse_eval(const SparseSurrogate& surrogate, std::span<const double> y) {
  return surrogate.evaluate(y);
}

std::vector<WeightedPoint> sparse_quadrature_weights(const SparseSurrogate& surrogate) {
  return surrogate.quadrature_weights();
}

}  // namespace sparsecoll
