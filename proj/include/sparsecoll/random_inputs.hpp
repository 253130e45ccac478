#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparsecoll {

/// Thrown for malformed inputs: bad distribution parameters, dimension
/// mismatches, violated preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DistributionKind { Uniform, Beta };

std::string to_string(DistributionKind kind);
DistributionKind distribution_kind_from_string(const std::string& name);

/// Univariate density supported on the closed interval [a, b].
///
/// Beta(alpha, beta, a, b) is the standard beta density shifted and scaled
/// onto [a, b]; the shape parameter alpha governs the lower end. Uniform is
/// stored with alpha = beta = 1 so that both kinds share the canonical map
/// t = (2y - a - b) / (b - a) onto [-1, 1].
class BoundedDistribution {
 public:
  static BoundedDistribution uniform(double a, double b);
  static BoundedDistribution beta(double alpha, double beta, double a, double b);

  DistributionKind kind() const { return kind_; }
  double lower() const { return a_; }
  double upper() const { return b_; }
  double alpha() const { return alpha_; }
  double beta_shape() const { return beta_; }
  double width() const { return b_ - a_; }

  /// Density value. Zero outside [a, b]. At the endpoints the uniform density
  /// keeps its interior value; the beta density takes its one-sided limit
  /// (0 for shape > 1, +inf for shape < 1).
  double pdf(double y) const;
  /// log(pdf(y)); -inf where the density vanishes.
  double log_pdf(double y) const;
  /// d/dy log(pdf(y)) on the open interval (a, b).
  double log_pdf_derivative(double y) const;

  double cdf(double y) const;
  /// Inverse CDF for u in [0, 1].
  double quantile(double u) const;

  double mean() const;
  double variance() const;
  /// Location of the density maximum. The uniform density is flat; its mode
  /// is reported as the right endpoint.
  double mode() const;

  double to_canonical(double y) const { return (2.0 * y - a_ - b_) / (b_ - a_); }
  double from_canonical(double t) const { return 0.5 * (b_ - a_) * t + 0.5 * (a_ + b_); }

  bool operator==(const BoundedDistribution&) const = default;

 private:
  BoundedDistribution(DistributionKind kind, double alpha, double beta, double a, double b);

  DistributionKind kind_;
  double alpha_;
  double beta_;
  double a_;
  double b_;
  double log_norm_;  // log of the density constant on [a, b]
};

using Sample = std::vector<std::vector<double>>;

/// Independent product of bounded marginals over the box a_1..b_1 x ... x a_N..b_N.
class JointDistribution {
 public:
  explicit JointDistribution(std::vector<BoundedDistribution> marginals);

  std::size_t dim() const { return marginals_.size(); }
  const BoundedDistribution& marginal(std::size_t n) const { return marginals_.at(n); }
  const std::vector<BoundedDistribution>& marginals() const { return marginals_; }

  /// Product of marginal densities, accumulated left to right.
  double pdf(std::span<const double> y) const;
  bool contains(std::span<const double> y) const;

  /// `count` i.i.d. draws. Coordinate n of draw m depends only on
  /// (seed, stream, m * dim + n), so any partition of the work reproduces
  /// the same sample.
  Sample sample(std::size_t count, std::uint64_t seed, std::uint64_t stream = 0) const;

 private:
  std::vector<BoundedDistribution> marginals_;
};

}  // namespace sparsecoll
