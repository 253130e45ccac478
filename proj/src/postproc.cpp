#include "sparsecoll/postproc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sparsecoll/parallel.hpp"

namespace sparsecoll {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Variance indistinguishable from round-off of values of size `scale`.
bool negligible_variance(double variance, double scale) {
  const double floor = 64.0 * kEps * scale;
  return variance <= floor * floor;
}

void finish_shape(MomentReport& r, double third, double scale) {
  if (negligible_variance(r.variance, scale)) {
    if (r.variance < -1e-12 * std::max(1.0, scale * scale)) {
      throw std::runtime_error("negative variance " + std::to_string(r.variance) + ": quadrature weights are broken");
    }
    r.variance = 0.0;
    r.skewness = 0.0;
    r.degenerate = true;
    return;
  }
  r.skewness = third / std::pow(r.variance, 1.5);
}

}  // namespace

MomentReport moments_from_values(std::span<const double> values, std::span<const double> weights) {
  if (values.size() != weights.size()) throw InvalidArgument("moments: values and weights differ in length");
  if (values.empty()) throw InvalidArgument("moments: no values");
  MomentReport r;
  for (std::size_t k = 0; k < values.size(); ++k) r.mean += weights[k] * values[k];
  double second = 0.0;
  double third = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double c = values[k] - r.mean;
    second += weights[k] * c * c;
    third += weights[k] * c * c * c;
  }
  r.variance = second;
  r.evaluations_used = values.size();
  finish_shape(r, third, max_abs(values));
  return r;
}

MomentReport moments_from_weights(const SparseSurrogate& surrogate) {
  const auto points = surrogate.quadrature_weights();
  std::vector<double> values;
  std::vector<double> weights;
  values.reserve(points.size());
  weights.reserve(points.size());
  for (const auto& p : points) {
    values.push_back(p.value);
    weights.push_back(p.weight);
  }
  return moments_from_values(values, weights);
}

MomentReport sample_moments(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("sample moments need at least two values");
  const double m = static_cast<double>(values.size());
  MomentReport r;
  for (double v : values) r.mean += v;
  r.mean /= m;
  double second = 0.0;
  double third = 0.0;
  for (double v : values) {
    const double c = v - r.mean;
    second += c * c;
    third += c * c * c;
  }
  r.variance = second / (m - 1.0);
  r.evaluations_used = values.size();
  r.mean_std_error = std::sqrt(std::max(r.variance, 0.0) / m);
  const double population = second / m;
  if (negligible_variance(population, max_abs(values))) {
    r.variance = 0.0;
    r.skewness = 0.0;
    r.degenerate = true;
    r.mean_std_error = 0.0;
  } else {
    r.skewness = (third / m) / std::pow(population, 1.5);
  }
  return r;
}

MomentReport surrogate_mc(const SparseSurrogate& surrogate, const JointDistribution& joint, std::size_t count,
                          std::uint64_t seed, unsigned threads) {
  if (count < 2) throw InvalidArgument("surrogate Monte Carlo needs at least two samples");
  if (joint.dim() != surrogate.dim()) throw InvalidArgument("sampling distribution has the wrong dimension");
  const auto ys = joint.sample(count, seed);
  return sample_moments(surrogate.evaluate_many(ys, threads));
}

double cross_validation_error(const SparseSurrogate& surrogate,
                              const std::function<double(std::span<const double>)>& model, const Sample& sample,
                              unsigned threads) {
  if (sample.empty()) throw InvalidArgument("cross-validation sample is empty");
  std::vector<double> diff(sample.size());
  parallel_for(sample.size(), threads,
               [&](std::size_t i) { diff[i] = std::abs(surrogate.evaluate(sample[i]) - model(sample[i])); });
  double worst = 0.0;
  for (double d : diff) worst = std::max(worst, d);
  return worst;
}

ErrorMetrics error_metrics(double estimate, double reference) {
  ErrorMetrics e;
  e.eps_abs = std::abs(estimate - reference);
  if (reference != 0.0) {
    e.eps_rel = e.eps_abs / std::abs(reference);
  } else {
    e.eps_rel = e.eps_abs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return e;
}

SobolReport sobol_saltelli(const std::function<double(std::span<const double>)>& f, const JointDistribution& joint,
                           std::size_t sample_size, std::uint64_t seed, unsigned threads) {
  if (sample_size < 100) throw InvalidArgument("Sobol analysis needs at least 100 samples");
  const std::size_t dim = joint.dim();
  const std::size_t m = sample_size;
  const Sample a = joint.sample(m, seed, 0);
  const Sample b = joint.sample(m, seed, 1);

  // Rows: A, B, then C_j (B with column j of A) and D_j (A with column j of B).
  const std::size_t blocks = 2 * dim + 2;
  std::vector<double> out(blocks * m);
  std::atomic<std::size_t> calls{0};
  parallel_for(blocks * m, threads, [&](std::size_t i) {
    const std::size_t block = i / m;
    const std::size_t row = i % m;
    std::vector<double> y;
    if (block == 0) {
      y = a[row];
    } else if (block == 1) {
      y = b[row];
    } else if (block < dim + 2) {
      const std::size_t j = block - 2;
      y = b[row];
      y[j] = a[row][j];
    } else {
      const std::size_t j = block - dim - 2;
      y = a[row];
      y[j] = b[row][j];
    }
    out[i] = f(y);
    calls.fetch_add(1, std::memory_order_relaxed);
  });
  auto value = [&](std::size_t block, std::size_t row) { return out[block * m + row]; };

  const double md = static_cast<double>(m);
  double f0 = 0.0;
  for (std::size_t r = 0; r < m; ++r) f0 += value(0, r) + value(1, r);
  f0 /= 2.0 * md;
  double var = 0.0;
  for (std::size_t r = 0; r < m; ++r) {
    var += (value(0, r) - f0) * (value(0, r) - f0) + (value(1, r) - f0) * (value(1, r) - f0);
  }
  var /= 2.0 * md;

  SobolReport rep;
  rep.sample_size = m;
  rep.evaluations = calls.load();
  rep.mean = f0;
  rep.variance = var;
  rep.first_order.assign(dim, 0.0);
  rep.total_order.assign(dim, 0.0);
  if (negligible_variance(var, std::abs(f0) + std::sqrt(std::max(var, 0.0)))) return rep;

  // Each index is estimated twice from the same runs: C_j pairs with A for
  // the first order and with B for the total, D_j the other way round.
  for (std::size_t j = 0; j < dim; ++j) {
    double first = 0.0;
    double total = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double fa = value(0, r), fb = value(1, r);
      const double fc = value(2 + j, r), fd = value(2 + dim + j, r);
      first += (fa - f0) * (fc - fb) + (fb - f0) * (fd - fa);
      total += (fa - fd) * (fa - fd) + (fb - fc) * (fb - fc);
    }
    rep.first_order[j] = first / (2.0 * md) / var;
    rep.total_order[j] = total / (4.0 * md) / var;
  }
  return rep;
}

SobolReport sobol_saltelli(const SparseSurrogate& surrogate, const JointDistribution& joint, std::size_t sample_size,
                           std::uint64_t seed, unsigned threads) {
  if (joint.dim() != surrogate.dim()) throw InvalidArgument("sampling distribution has the wrong dimension");
  return sobol_saltelli([&](std::span<const double> y) { return surrogate.evaluate(y); }, joint, sample_size, seed,
                        threads);
}

}  // namespace sparsecoll
