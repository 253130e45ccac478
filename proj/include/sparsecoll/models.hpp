#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sparsecoll/random_inputs.hpp"

namespace sparsecoll {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kMu0 = 4.0e-7 * kPi;

/// Rectangular waveguide with a dielectric slab; SI units.
struct WaveguideParams {
  double w = 30e-3;    // width
  double h = 3e-3;     // height
  double l = 7e-3;     // slab length
  double d = 5e-3;     // vacuum offset
  double eps_r = 2.0;
  double mu_r = 2.4;
  double f = 6e9;      // Hz
};

/// |S11| of the TE10 mode: vacuum | slab of length l | matched vacuum guide.
/// Throws InvalidArgument below the vacuum cutoff c / (2w) or for
/// non-physical parameters.
double waveguide_s11_mag(const WaveguideParams& p);

/// TE10 cutoff frequency of an empty guide of width w (m), in Hz.
double waveguide_cutoff(double w);

/// Analytic statistics of a model under a given input distribution.
struct AnalyticFacts {
  std::optional<double> mean;
  std::optional<double> variance;
  std::vector<double> first_order;  // empty when unknown
  std::vector<double> total_order;
};

/// A scalar quantity of interest q(y).
struct ParametricModel {
  std::string name;
  std::vector<std::string> parameter_names;
  std::vector<double> nominal;
  std::vector<double> lower;
  std::vector<double> upper;
  std::function<double(std::span<const double>)> evaluator;
  /// Analytic statistics for a joint input distribution, when known.
  std::function<std::optional<AnalyticFacts>(const JointDistribution&)> analytic;

  std::size_t dim() const { return parameter_names.size(); }
  double operator()(std::span<const double> y) const { return evaluator(y); }
  std::optional<AnalyticFacts> facts(const JointDistribution& joint) const {
    return analytic ? analytic(joint) : std::nullopt;
  }
};

/// Names accepted by test_function().
std::vector<std::string> test_function_names();

/// Analytic test functions: "constant", "additive-linear", "exp-sum",
/// "exp-first", "ishigami" (dim 3 only). Unknown names throw.
ParametricModel test_function(const std::string& name, std::size_t dim);

/// The waveguide benchmark on a subset of its six parameters
/// (w, h, l, d in mm; eps_r, mu_r). Parameters not listed in `active` are
/// held at their nominal value or at the value given in `fixed`.
ParametricModel waveguide_model(double frequency_ghz = 6.0,
                                const std::vector<std::string>& active = {"w", "h", "l", "d", "eps_r", "mu_r"},
                                const std::map<std::string, double>& fixed = {});

/// Default bounds of the waveguide parameters (mm for lengths).
struct WaveguideParameter {
  std::string name;
  double nominal;
  double lower;
  double upper;
};
const std::vector<WaveguideParameter>& waveguide_parameters();

}  // namespace sparsecoll
