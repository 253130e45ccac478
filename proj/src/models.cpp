#include "sparsecoll/models.hpp"

#include <algorithm>
#include <cmath>

namespace sparsecoll {

double waveguide_cutoff(double w) { return kSpeedOfLight / (2.0 * w); }

double waveguide_s11_mag(const WaveguideParams& p) {
  if (!(p.w > 0 && p.h > 0 && p.d > 0)) throw InvalidArgument("waveguide lengths w, h, d must be positive");
  if (!(p.l >= 0)) throw InvalidArgument("slab length must be non-negative");
  if (!(p.eps_r >= 1 && p.mu_r >= 1)) throw InvalidArgument("eps_r and mu_r must be at least 1");
  if (!(p.f > waveguide_cutoff(p.w))) {
    throw InvalidArgument("frequency " + std::to_string(p.f) + " Hz is below the TE10 cutoff " +
                          std::to_string(waveguide_cutoff(p.w)) + " Hz");
  }
  const double omega = 2.0 * kPi * p.f;
  const double eps0 = 1.0 / (kMu0 * kSpeedOfLight * kSpeedOfLight);
  const double kc2 = (kPi / p.w) * (kPi / p.w);
  const double beta1 = std::sqrt(omega * omega * kMu0 * eps0 - kc2);
  const double mu2 = kMu0 * p.mu_r;
  const double beta2 = std::sqrt(omega * omega * mu2 * eps0 * p.eps_r - kc2);
  const double z1 = omega * kMu0 / beta1;
  const double z2 = omega * mu2 / beta2;

  // Gamma = (Zin - Z1) / (Zin + Z1) with Zin = Z2 (Z1 + j Z2 t) / (Z2 + j Z1 t),
  // t = tan(beta2 l), cleared of fractions:
  //   |Gamma| = |s| |Z2^2 - Z1^2| / sqrt(4 Z1^2 Z2^2 c^2 + s^2 (Z1^2 + Z2^2)^2)
  // with s, c = sin, cos(beta2 l). Exactly zero for Z1 = Z2 or l = 0.
  // The vacuum sections only shift the phase; h does not enter the TE10 impedances.
  const double s = std::sin(beta2 * p.l);
  const double c = std::cos(beta2 * p.l);
  const double z11 = z1 * z1;
  const double z22 = z2 * z2;
  const double num = std::abs(s) * std::abs(z22 - z11);
  const double den = std::sqrt(4.0 * z11 * z22 * c * c + s * s * (z11 + z22) * (z11 + z22));
  return std::min(num / den, 1.0);
}

const std::vector<WaveguideParameter>& waveguide_parameters() {
  static const std::vector<WaveguideParameter> table{
      {"w", 30.0, 27.0, 33.0},   {"h", 3.0, 2.7, 3.3},       {"l", 7.0, 6.3, 7.7},
      {"d", 5.0, 4.5, 5.5},      {"eps_r", 2.0, 1.8, 2.2},   {"mu_r", 2.4, 2.16, 2.64},
  };
  return table;
}

ParametricModel waveguide_model(double frequency_ghz, const std::vector<std::string>& active,
                                const std::map<std::string, double>& fixed) {
  const auto& table = waveguide_parameters();
  std::vector<double> base;
  for (const auto& p : table) base.push_back(p.nominal);
  for (const auto& [name, value] : fixed) {
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& p) { return p.name == name; });
    if (it == table.end()) throw InvalidArgument("unknown waveguide parameter '" + name + "'");
    base[static_cast<std::size_t>(it - table.begin())] = value;
  }
  if (!(frequency_ghz > 0)) throw InvalidArgument("frequency must be positive");

  ParametricModel m;
  m.name = "waveguide";
  std::vector<std::size_t> slots;
  for (const auto& name : active) {
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& p) { return p.name == name; });
    if (it == table.end()) throw InvalidArgument("unknown waveguide parameter '" + name + "'");
    const auto slot = static_cast<std::size_t>(it - table.begin());
    if (std::find(slots.begin(), slots.end(), slot) != slots.end()) {
      throw InvalidArgument("waveguide parameter '" + name + "' listed twice");
    }
    slots.push_back(slot);
    m.parameter_names.push_back(name);
    m.nominal.push_back(base[slot]);
    m.lower.push_back(it->lower);
    m.upper.push_back(it->upper);
  }
  if (slots.empty()) throw InvalidArgument("waveguide model needs at least one active parameter");
  m.evaluator = [base, slots, frequency_ghz](std::span<const double> y) {
    if (y.size() != slots.size()) throw InvalidArgument("waveguide: wrong number of parameters");
    std::vector<double> v = base;
    for (std::size_t i = 0; i < slots.size(); ++i) v[slots[i]] = y[i];
    WaveguideParams p{v[0] * 1e-3, v[1] * 1e-3, v[2] * 1e-3, v[3] * 1e-3, v[4], v[5], frequency_ghz * 1e9};
    return waveguide_s11_mag(p);
  };
  return m;
}

namespace {

bool all_uniform(const JointDistribution& joint) {
  return std::all_of(joint.marginals().begin(), joint.marginals().end(),
                     [](const auto& m) { return m.kind() == DistributionKind::Uniform; });
}

// E[exp(c y)] for y uniform on [a, b].
double uniform_exp_moment(const BoundedDistribution& u, double c) {
  const double a = u.lower();
  const double b = u.upper();
  return (std::exp(c * b) - std::exp(c * a)) / (c * (b - a));
}

void check_dim(std::span<const double> y, std::size_t dim, const std::string& name) {
  if (y.size() != dim) throw InvalidArgument(name + ": expected " + std::to_string(dim) + " parameters");
}

ParametricModel base_model(const std::string& name, std::size_t dim) {
  ParametricModel m;
  m.name = name;
  for (std::size_t n = 0; n < dim; ++n) {
    m.parameter_names.push_back("y" + std::to_string(n + 1));
    m.nominal.push_back(0.0);
    m.lower.push_back(-1.0);
    m.upper.push_back(1.0);
  }
  return m;
}

}  // namespace

std::vector<std::string> test_function_names() {
  return {"constant", "additive-linear", "exp-sum", "exp-first", "ishigami"};
}

ParametricModel test_function(const std::string& name, std::size_t dim) {
  if (dim == 0) throw InvalidArgument("test function needs dim >= 1");
  ParametricModel m = base_model(name, dim);

  if (name == "constant") {
    m.evaluator = [dim](std::span<const double> y) {
      check_dim(y, dim, "constant");
      return 3.7;
    };
    m.analytic = [dim](const JointDistribution&) -> std::optional<AnalyticFacts> {
      return AnalyticFacts{3.7, 0.0, std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
    };
  } else if (name == "additive-linear") {
    m.evaluator = [dim](std::span<const double> y) {
      check_dim(y, dim, "additive-linear");
      double s = 0.0;
      for (std::size_t n = 0; n < dim; ++n) s += static_cast<double>(n + 1) * y[n];
      return s;
    };
    m.analytic = [](const JointDistribution& joint) -> std::optional<AnalyticFacts> {
      AnalyticFacts f;
      double mean = 0.0;
      double var = 0.0;
      std::vector<double> parts;
      for (std::size_t n = 0; n < joint.dim(); ++n) {
        const double c = static_cast<double>(n + 1);
        mean += c * joint.marginal(n).mean();
        parts.push_back(c * c * joint.marginal(n).variance());
        var += parts.back();
      }
      f.mean = mean;
      f.variance = var;
      for (double p : parts) f.first_order.push_back(p / var);
      f.total_order = f.first_order;
      return f;
    };
  } else if (name == "exp-sum") {
    m.evaluator = [dim](std::span<const double> y) {
      check_dim(y, dim, "exp-sum");
      double s = 0.0;
      for (std::size_t n = 0; n < dim; ++n) s += y[n];
      return std::exp(s / static_cast<double>(dim));
    };
    m.analytic = [](const JointDistribution& joint) -> std::optional<AnalyticFacts> {
      if (!all_uniform(joint)) return std::nullopt;
      const double c = 1.0 / static_cast<double>(joint.dim());
      double e1 = 1.0;
      double e2 = 1.0;
      for (const auto& u : joint.marginals()) {
        e1 *= uniform_exp_moment(u, c);
        e2 *= uniform_exp_moment(u, 2.0 * c);
      }
      AnalyticFacts f;
      f.mean = e1;
      f.variance = e2 - e1 * e1;
      return f;
    };
  } else if (name == "exp-first") {
    m.evaluator = [dim](std::span<const double> y) {
      check_dim(y, dim, "exp-first");
      return std::exp(y[0]);
    };
    m.analytic = [dim](const JointDistribution& joint) -> std::optional<AnalyticFacts> {
      if (!all_uniform(joint)) return std::nullopt;
      const double e1 = uniform_exp_moment(joint.marginal(0), 1.0);
      const double e2 = uniform_exp_moment(joint.marginal(0), 2.0);
      AnalyticFacts f;
      f.mean = e1;
      f.variance = e2 - e1 * e1;
      f.first_order.assign(dim, 0.0);
      f.first_order[0] = 1.0;
      f.total_order = f.first_order;
      return f;
    };
  } else if (name == "ishigami") {
    if (dim != 3) throw InvalidArgument("ishigami is three-dimensional");
    constexpr double a = 7.0;
    constexpr double b = 0.1;
    for (std::size_t n = 0; n < 3; ++n) {
      m.lower[n] = -kPi;
      m.upper[n] = kPi;
    }
    m.evaluator = [](std::span<const double> y) {
      check_dim(y, 3, "ishigami");
      const double s = std::sin(y[0]);
      const double c = std::sin(y[1]);
      return s + a * c * c + b * std::pow(y[2], 4) * s;
    };
    m.analytic = [](const JointDistribution& joint) -> std::optional<AnalyticFacts> {
      for (const auto& u : joint.marginals()) {
        if (u.kind() != DistributionKind::Uniform || u.lower() != -kPi || u.upper() != kPi) return std::nullopt;
      }
      const double pi4 = std::pow(kPi, 4);
      const double pi8 = pi4 * pi4;
      const double v = a * a / 8.0 + b * pi4 / 5.0 + b * b * pi8 / 18.0 + 0.5;
      const double v1 = 0.5 * (1.0 + b * pi4 / 5.0) * (1.0 + b * pi4 / 5.0);
      const double v2 = a * a / 8.0;
      const double v13 = b * b * pi8 * (1.0 / 18.0 - 1.0 / 50.0);
      AnalyticFacts f;
      f.mean = a / 2.0;
      f.variance = v;
      f.first_order = {v1 / v, v2 / v, 0.0};
      f.total_order = {(v1 + v13) / v, v2 / v, v13 / v};
      return f;
    };
  } else {
    throw InvalidArgument("unknown model '" + name + "'");
  }
  return m;
}

}  // namespace sparsecoll
