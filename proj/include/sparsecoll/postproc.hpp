#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sparsecoll/random_inputs.hpp"
#include "sparsecoll/sparse_grid.hpp"

namespace sparsecoll {

struct MomentReport {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  /// Variance not resolvable above round-off; skewness is then reported as 0.
  bool degenerate = false;
  std::size_t evaluations_used = 0;
  /// Standard error of the mean for sampling estimates; 0 for quadrature.
  double mean_std_error = 0.0;
};

/// Moments of weighted point values: mean = sum w q, then the central
/// moments sum w (q - mean)^p for p = 2, 3.
MomentReport moments_from_values(std::span<const double> values, std::span<const double> weights);

/// Moments of the quantity of interest from the surrogate's quadrature weights.
MomentReport moments_from_weights(const SparseSurrogate& surrogate);

/// Sample moments of plain values (unbiased variance, population skewness).
MomentReport sample_moments(std::span<const double> values);

/// Monte Carlo moments of the surrogate on `count` draws from `joint`.
MomentReport surrogate_mc(const SparseSurrogate& surrogate, const JointDistribution& joint, std::size_t count,
                          std::uint64_t seed, unsigned threads = 1);

/// max_m |surrogate(y_m) - model(y_m)| over a non-empty sample.
double cross_validation_error(const SparseSurrogate& surrogate,
                              const std::function<double(std::span<const double>)>& model, const Sample& sample,
                              unsigned threads = 1);

struct ErrorMetrics {
  double eps_abs = 0.0;
  double eps_rel = 0.0;
};

/// |estimate - reference| and its ratio to |reference| (infinity when the
/// reference is 0 and the error is not).
ErrorMetrics error_metrics(double estimate, double reference);

struct SobolReport {
  std::vector<double> first_order;
  std::vector<double> total_order;
  std::size_t sample_size = 0;
  std::size_t evaluations = 0;
  double mean = 0.0;
  double variance = 0.0;
};

/// First-order (Saltelli 2002) and total-order (Jansen) indices from the
/// A / B / C_j / D_j matrix scheme; calls `f` exactly (2N + 2) M times.
SobolReport sobol_saltelli(const std::function<double(std::span<const double>)>& f, const JointDistribution& joint,
                           std::size_t sample_size, std::uint64_t seed, unsigned threads = 1);

SobolReport sobol_saltelli(const SparseSurrogate& surrogate, const JointDistribution& joint, std::size_t sample_size,
                           std::uint64_t seed, unsigned threads = 1);

}  // namespace sparsecoll
