#include "sparsecoll/univariate_rules.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "sparsecoll/gauss.hpp"

namespace sparsecoll {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Leja candidate grid and tie tolerance.
constexpr std::size_t kLejaGrid = 10001;
constexpr double kLejaTie = 1e-12;

// New canonical Clenshaw-Curtis nodes introduced at `level`, in sequence order.
std::vector<double> cc_new_nodes(int level) {
  if (level == 0) return {0.0};
  if (level == 1) return {1.0, -1.0};
  const double n = std::ldexp(1.0, level);
  std::vector<double> out;
  for (long k = 1; k < (1L << level); k += 2) {
    out.push_back(std::sin(kPi * (n - 2.0 * static_cast<double>(k)) / (2.0 * n)));
  }
  return out;
}

// Barycentric evaluation of all basis functions at canonical t.
void basis_at(std::span<const double> nodes, std::span<const double> lambda, double t,
              std::span<double> out) {
  double denom = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    const double diff = t - nodes[j];
    if (diff == 0.0) {
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(nodes.size()), 0.0);
      out[j] = 1.0;
      return;
    }
    out[j] = lambda[j] / diff;
    denom += out[j];
  }
  for (std::size_t j = 0; j < nodes.size(); ++j) out[j] /= denom;
}

double canonical_log_density(const BoundedDistribution& dist, double t) {
  if (dist.kind() == DistributionKind::Uniform) return 0.0;
  double v = 0.0;
  if (dist.alpha() != 1.0) v += (dist.alpha() - 1.0) * std::log1p(t);
  if (dist.beta_shape() != 1.0) v += (dist.beta_shape() - 1.0) * std::log1p(-t);
  return v;
}

double canonical_log_density_derivative(const BoundedDistribution& dist, double t) {
  if (dist.kind() == DistributionKind::Uniform) return 0.0;
  double v = 0.0;
  if (dist.alpha() != 1.0) v += (dist.alpha() - 1.0) / (1.0 + t);
  if (dist.beta_shape() != 1.0) v -= (dist.beta_shape() - 1.0) / (1.0 - t);
  return v;
}

double leja_objective(std::span<const double> nodes, const BoundedDistribution& dist, double t) {
  double v = 0.5 * canonical_log_density(dist, t);
  for (double x : nodes) v += std::log(std::abs(t - x));
  return std::isnan(v) ? kNegInf : v;
}

double leja_slope(std::span<const double> nodes, const BoundedDistribution& dist, double t) {
  double v = 0.5 * canonical_log_density_derivative(dist, t);
  for (double x : nodes) v += 1.0 / (t - x);
  return v;
}

}  // namespace

std::string to_string(RuleFamily family) {
  return family == RuleFamily::ClenshawCurtis ? "clenshaw-curtis" : "leja";
}

RuleFamily rule_family_from_string(const std::string& name) {
  if (name == "clenshaw-curtis" || name == "cc") return RuleFamily::ClenshawCurtis;
  if (name == "leja") return RuleFamily::Leja;
  throw InvalidArgument("unknown rule family '" + name + "'");
}

std::size_t level_to_nodes(RuleFamily family, int level) {
  if (level < 0) throw InvalidArgument("level must be non-negative");
  if (family == RuleFamily::Leja) return static_cast<std::size_t>(level) + 1;
  if (level == 0) return 1;
  if (level > 40) throw InvalidArgument("Clenshaw-Curtis level too large");
  return (std::size_t{1} << level) + 1;
}

std::vector<double> cc_nodes(int level) {
  if (level < 0) throw InvalidArgument("level must be non-negative");
  if (level == 0) return {0.0};
  const std::size_t n = level_to_nodes(RuleFamily::ClenshawCurtis, level) - 1;
  const double nd = static_cast<double>(n);
  std::vector<double> out(n + 1);
  // sin form keeps the set exactly antisymmetric and the midpoint exactly 0.
  for (std::size_t k = 0; k <= n; ++k) {
    out[k] = std::sin(kPi * (2.0 * static_cast<double>(k) - nd) / (2.0 * nd));
  }
  out.front() = -1.0;
  out.back() = 1.0;
  return out;
}

std::vector<double> scale_nodes(std::span<const double> nodes, double a, double b) {
  std::vector<double> out;
  out.reserve(nodes.size());
  for (double t : nodes) {
    if (t == -1.0) {
      out.push_back(a);
    } else if (t == 1.0) {
      out.push_back(b);
    } else {
      out.push_back(0.5 * (b - a) * t + 0.5 * (a + b));
    }
  }
  return out;
}

std::vector<double> chebyshev_moments(const BoundedDistribution& dist, std::size_t count) {
  if (count == 0) throw InvalidArgument("chebyshev_moments: count must be at least 1");
  const auto rule = detail::canonical_gauss_rule(dist, count / 2 + 2);
  std::vector<double> gamma(count, 0.0);
  for (std::size_t g = 0; g < rule.nodes.size(); ++g) {
    const double t = rule.nodes[g];
    double prev = 1.0;
    double cur = t;
    gamma[0] += rule.weights[g];
    if (count > 1) gamma[1] += rule.weights[g] * t;
    for (std::size_t k = 2; k < count; ++k) {
      const double next = 2.0 * t * cur - prev;
      prev = cur;
      cur = next;
      gamma[k] += rule.weights[g] * cur;
    }
  }
  gamma[0] = 1.0;
  return gamma;
}

std::vector<double> barycentric_weights(std::span<const double> nodes) {
  std::vector<double> lambda(nodes.size(), 1.0);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (k == j) continue;
      const double diff = nodes[j] - nodes[k];
      if (diff == 0.0) throw InvalidArgument("barycentric_weights: duplicate nodes");
      lambda[j] /= diff;
    }
  }
  double scale = 0.0;
  for (double l : lambda) scale = std::max(scale, std::abs(l));
  for (double& l : lambda) l /= scale;
  return lambda;
}

std::vector<double> interpolatory_weights(std::span<const double> canonical_nodes,
                                          const BoundedDistribution& dist) {
  const std::size_t m = canonical_nodes.size();
  if (m == 0) throw InvalidArgument("interpolatory_weights: no nodes");
  if (m == 1) return {1.0};
  const auto lambda = barycentric_weights(canonical_nodes);
  const auto gauss = detail::canonical_gauss_rule(dist, m / 2 + 2);
  std::vector<double> w(m, 0.0);
  std::vector<double> basis(m);
  for (std::size_t g = 0; g < gauss.nodes.size(); ++g) {
    basis_at(canonical_nodes, lambda, gauss.nodes[g], basis);
    for (std::size_t i = 0; i < m; ++i) w[i] += gauss.weights[g] * basis[i];
  }
  return w;
}

std::vector<double> cc_weights_from_moments(int level, const BoundedDistribution& dist) {
  if (level < 0) throw InvalidArgument("level must be non-negative");
  if (level == 0) return {1.0};
  const std::size_t n = level_to_nodes(RuleFamily::ClenshawCurtis, level) - 1;
  const auto gamma = chebyshev_moments(dist, n + 1);
  const double nd = static_cast<double>(n);
  // Node x_j = cos(j pi / n); the cosine expansion of its Lagrange basis
  // function integrates term by term against the moments.
  std::vector<double> desc(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    double sum = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double half = (k == 0 || k == n) ? 0.5 : 1.0;
      const auto phase = static_cast<double>((j * k) % (2 * n));
      sum += half * std::cos(kPi * phase / nd) * gamma[k];
    }
    const double c = (j == 0 || j == n) ? 2.0 : 1.0;
    desc[j] = 2.0 * sum / (nd * c);
  }
  return {desc.rbegin(), desc.rend()};
}

QuadratureLevel cc_weights(int level, const BoundedDistribution& dist) {
  return UnivariateRule::clenshaw_curtis(dist, level).quadrature(level);
}

UnivariateRule UnivariateRule::clenshaw_curtis(const BoundedDistribution& dist, int levels) {
  UnivariateRule rule(RuleFamily::ClenshawCurtis, dist);
  rule.grow_to_level(levels);
  return rule;
}

UnivariateRule UnivariateRule::leja(const BoundedDistribution& dist, int levels) {
  if (dist.alpha() < 1.0 || dist.beta_shape() < 1.0) {
    throw InvalidArgument("weighted Leja rules require beta shape parameters >= 1");
  }
  UnivariateRule rule(RuleFamily::Leja, dist);
  rule.grow_to_level(levels);
  return rule;
}

int UnivariateRule::level_of_node(std::size_t j) const {
  if (family_ == RuleFamily::Leja) return static_cast<int>(j);
  if (j == 0) return 0;
  int level = 1;
  while (level_to_nodes(family_, level) <= j) ++level;
  return level;
}

UnivariateRule UnivariateRule::extended_to_level(int level) const {
  if (level <= max_level()) return *this;
  UnivariateRule out = *this;
  out.grow_to_level(level);
  return out;
}

void UnivariateRule::grow_to_level(int level) {
  for (int l = max_level() + 1; l <= level; ++l) {
    const std::size_t m = nodes_at_level(l);
    if (family_ == RuleFamily::ClenshawCurtis) {
      for (double t : cc_new_nodes(l)) canonical_.push_back(t);
    } else {
      while (canonical_.size() < m) canonical_.push_back(next_leja_point(canonical_, dist_));
    }
    assert(canonical_.size() == m);
    const auto scaled = scale_nodes(std::span(canonical_).subspan(nodes_.size()), dist_.lower(),
                                    dist_.upper());
    nodes_.insert(nodes_.end(), scaled.begin(), scaled.end());
    const std::span<const double> level_nodes(canonical_.data(), m);
    weights_.push_back(interpolatory_weights(level_nodes, dist_));
    barycentric_.push_back(barycentric_weights(level_nodes));
  }
}

QuadratureLevel UnivariateRule::quadrature(int level) const {
  if (level < 0 || level > max_level()) throw InvalidArgument("quadrature: level not available");
  const std::size_t m = nodes_at_level(level);
  QuadratureLevel q;
  q.level = level;
  q.sequence_index.resize(m);
  std::iota(q.sequence_index.begin(), q.sequence_index.end(), std::size_t{0});
  if (family_ == RuleFamily::ClenshawCurtis) {
    std::sort(q.sequence_index.begin(), q.sequence_index.end(),
              [&](std::size_t i, std::size_t j) { return canonical_[i] < canonical_[j]; });
  }
  const auto& w = weights(level);
  for (std::size_t j : q.sequence_index) {
    q.nodes.push_back(nodes_[j]);
    q.weights.push_back(w[j]);
  }
  return q;
}

void UnivariateRule::lagrange_basis(int level, double y, std::span<double> out) const {
  const std::size_t m = nodes_at_level(level);
  if (level > max_level()) throw InvalidArgument("lagrange_basis: level not available");
  if (out.size() < m) throw InvalidArgument("lagrange_basis: output too small");
  const double tol = 1e-15 * dist_.width();
  for (std::size_t j = 0; j < m; ++j) {
    if (std::abs(y - nodes_[j]) <= tol) {
      std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
      out[j] = 1.0;
      return;
    }
  }
  basis_at(std::span<const double>(canonical_.data(), m), barycentric_[static_cast<std::size_t>(level)],
           dist_.to_canonical(y), out);
}

double next_leja_point(std::span<const double> nodes, const BoundedDistribution& dist) {
  if (nodes.empty()) {
    if (dist.kind() == DistributionKind::Uniform || (dist.alpha() == 1.0 && dist.beta_shape() == 1.0)) {
      return 1.0;
    }
    const double a = dist.alpha();
    const double b = dist.beta_shape();
    if (a > 1.0 && b > 1.0) return (a - b) / (a + b - 2.0);
    return a < b ? -1.0 : 1.0;
  }

  std::vector<double> grid(kLejaGrid);
  std::vector<double> value(kLejaGrid);
  const double step = 2.0 / static_cast<double>(kLejaGrid - 1);
  for (std::size_t g = 0; g < kLejaGrid; ++g) {
    grid[g] = g + 1 == kLejaGrid ? 1.0 : -1.0 + step * static_cast<double>(g);
    value[g] = leja_objective(nodes, dist, grid[g]);
  }

  double best_t = 0.0;
  double best_v = kNegInf;
  for (std::size_t g = 0; g < kLejaGrid; ++g) {
    if (value[g] == kNegInf) continue;
    if (g > 0 && value[g - 1] > value[g]) continue;
    if (g + 1 < kLejaGrid && value[g + 1] > value[g]) continue;

    // The objective is concave between consecutive nodes, so the maximiser
    // in the bracket is the sign change of its slope.
    double lo = g > 0 ? grid[g - 1] : grid[g];
    double hi = g + 1 < kLejaGrid ? grid[g + 1] : grid[g];
    for (double x : nodes) {
      if (x < grid[g]) lo = std::max(lo, x);
      if (x > grid[g]) hi = std::min(hi, x);
    }
    double t;
    if (lo == -1.0 && leja_objective(nodes, dist, -1.0) > kNegInf &&
        leja_slope(nodes, dist, -1.0) <= 0.0) {
      t = -1.0;
    } else if (hi == 1.0 && leja_objective(nodes, dist, 1.0) > kNegInf &&
               leja_slope(nodes, dist, 1.0) >= 0.0) {
      t = 1.0;
    } else {
      for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double slope = leja_slope(nodes, dist, mid);
        if (slope > 0.0) {
          lo = mid;
        } else if (slope < 0.0) {
          hi = mid;
        } else {
          lo = hi = mid;
        }
      }
      t = 0.5 * (lo + hi);
    }
    const double v = leja_objective(nodes, dist, t);
    // Candidates arrive in ascending t, so ties keep the smaller point.
    if (v > best_v + kLejaTie || best_v == kNegInf) {
      best_v = v;
      best_t = t;
    }
  }
  if (best_v == kNegInf) throw std::logic_error("weighted Leja objective is -inf on the whole interval");
  return best_t;
}

UnivariateRule leja_extend(const UnivariateRule& rule, std::size_t target_count) {
  if (rule.family() != RuleFamily::Leja) throw InvalidArgument("leja_extend: not a Leja rule");
  if (target_count < rule.size()) throw InvalidArgument("leja_extend: target below current size");
  if (target_count == 0) return rule;
  return rule.extended_to_level(static_cast<int>(target_count) - 1);
}

QuadratureLevel leja_weights(const UnivariateRule& rule, std::size_t count) {
  if (rule.family() != RuleFamily::Leja) throw InvalidArgument("leja_weights: not a Leja rule");
  if (count == 0 || count > rule.size()) throw InvalidArgument("leja_weights: count exceeds available nodes");
  return rule.quadrature(static_cast<int>(count) - 1);
}

}  // namespace sparsecoll
