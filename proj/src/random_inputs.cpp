#include "sparsecoll/random_inputs.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <limits>

#include "sparsecoll/rng.hpp"

namespace sparsecoll {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log x^(s-1) with the conventions 0^0 = 1 and 0^negative = inf.
double log_power(double x, double s) {
  if (s == 1.0) return 0.0;
  if (x == 0.0) return s > 1.0 ? -kInf : kInf;
  return (s - 1.0) * std::log(x);
}

}  // namespace

std::string to_string(DistributionKind kind) {
  return kind == DistributionKind::Uniform ? "uniform" : "beta";
}

DistributionKind distribution_kind_from_string(const std::string& name) {
  if (name == "uniform") return DistributionKind::Uniform;
  if (name == "beta") return DistributionKind::Beta;
  throw InvalidArgument("unknown distribution kind '" + name + "'");
}

BoundedDistribution::BoundedDistribution(DistributionKind kind, double alpha, double beta,
                                         double a, double b)
    : kind_(kind), alpha_(alpha), beta_(beta), a_(a), b_(b) {
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw InvalidArgument("distribution bounds must satisfy a < b");
  }
  if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    throw InvalidArgument("beta shape parameters must be positive");
  }
  log_norm_ = std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta) - std::log(b - a);
}

BoundedDistribution BoundedDistribution::uniform(double a, double b) {
  return {DistributionKind::Uniform, 1.0, 1.0, a, b};
}

BoundedDistribution BoundedDistribution::beta(double alpha, double beta, double a, double b) {
  return {DistributionKind::Beta, alpha, beta, a, b};
}

double BoundedDistribution::pdf(double y) const {
  if (y < a_ || y > b_) return 0.0;
  if (kind_ == DistributionKind::Uniform) return 1.0 / (b_ - a_);
  return std::exp(log_pdf(y));
}

double BoundedDistribution::log_pdf(double y) const {
  if (y < a_ || y > b_) return -kInf;
  if (kind_ == DistributionKind::Uniform) return -std::log(b_ - a_);
  const double x = (y - a_) / (b_ - a_);
  const double lo = log_power(x, alpha_);
  const double hi = log_power(1.0 - x, beta_);
  return log_norm_ + lo + hi;
}

double BoundedDistribution::log_pdf_derivative(double y) const {
  if (kind_ == DistributionKind::Uniform) return 0.0;
  return (alpha_ - 1.0) / (y - a_) - (beta_ - 1.0) / (b_ - y);
}

double BoundedDistribution::cdf(double y) const {
  if (y <= a_) return 0.0;
  if (y >= b_) return 1.0;
  const double x = (y - a_) / (b_ - a_);
  if (kind_ == DistributionKind::Uniform) return x;
  return boost::math::ibeta(alpha_, beta_, x);
}

double BoundedDistribution::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile argument must lie in [0, 1]");
  const double x = kind_ == DistributionKind::Uniform ? u : boost::math::ibeta_inv(alpha_, beta_, u);
  return std::min(b_, a_ + (b_ - a_) * x);
}

double BoundedDistribution::mean() const {
  return a_ + (b_ - a_) * alpha_ / (alpha_ + beta_);
}

double BoundedDistribution::variance() const {
  const double s = alpha_ + beta_;
  const double w = b_ - a_;
  return w * w * alpha_ * beta_ / (s * s * (s + 1.0));
}

double BoundedDistribution::mode() const {
  if (kind_ == DistributionKind::Uniform || (alpha_ == 1.0 && beta_ == 1.0)) return b_;
  if (alpha_ > 1.0 && beta_ > 1.0) return a_ + (b_ - a_) * (alpha_ - 1.0) / (alpha_ + beta_ - 2.0);
  return alpha_ < beta_ ? a_ : b_;
}

JointDistribution::JointDistribution(std::vector<BoundedDistribution> marginals)
    : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw InvalidArgument("joint distribution needs at least one marginal");
}

double JointDistribution::pdf(std::span<const double> y) const {
  if (y.size() != dim()) throw InvalidArgument("pdf: dimension mismatch");
  double p = 1.0;
  for (std::size_t n = 0; n < dim(); ++n) p = p * marginals_[n].pdf(y[n]);
  return p;
}

bool JointDistribution::contains(std::span<const double> y) const {
  if (y.size() != dim()) return false;
  for (std::size_t n = 0; n < dim(); ++n) {
    if (y[n] < marginals_[n].lower() || y[n] > marginals_[n].upper()) return false;
  }
  return true;
}

Sample JointDistribution::sample(std::size_t count, std::uint64_t seed, std::uint64_t stream) const {
  if (count == 0) throw InvalidArgument("sample: count must be at least 1");
  const CounterRng rng(seed, stream);
  Sample out(count, std::vector<double>(dim()));
  for (std::size_t m = 0; m < count; ++m) {
    for (std::size_t n = 0; n < dim(); ++n) {
      out[m][n] = marginals_[n].quantile(rng.uniform(m * dim() + n));
    }
  }
  return out;
}

}  // namespace sparsecoll
