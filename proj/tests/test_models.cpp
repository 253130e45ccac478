#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "sparsecoll/models.hpp"

using namespace sparsecoll;

namespace {

WaveguideParams si(double w, double h, double l, double d, double er, double mr, double f_ghz = 6) {
  return {w * 1e-3, h * 1e-3, l * 1e-3, d * 1e-3, er, mr, f_ghz * 1e9};
}

double oracle_s11(const WaveguideParams& p) { return oracle::waveguide_abcd(p.w, p.h, p.l, p.d, p.eps_r, p.mu_r, p.f); }

std::vector<double> random_point(std::mt19937_64& gen) {
  std::vector<double> y;
  for (const auto& p : waveguide_parameters()) y.push_back(std::uniform_real_distribution<double>(p.lower, p.upper)(gen));
  return y;
}

}  // namespace

TEST_CASE("no contrast or no slab reflects nothing") {
  CHECK(waveguide_s11_mag(si(30, 3, 7, 5, 1, 1)) == 0.0);
  CHECK(waveguide_s11_mag(si(30, 3, 0, 5, 2.0, 2.4)) < 1e-15);
  CHECK(oracle_s11(si(30, 3, 0, 5, 2.0, 2.4)) < 1e-15);
}

TEST_CASE("half-wave slab is transparent") {
  const double f = 6e9, w = 30e-3, er = 2.0, mr = 2.4;
  const double om = 2 * oracle::pi * f;
  const double b2 = std::sqrt(om * om * er * mr / (299792458.0 * 299792458.0) - (oracle::pi / w) * (oracle::pi / w));
  const double l = oracle::pi / b2;
  WaveguideParams p{w, 3e-3, l, 5e-3, er, mr, f};
  CHECK(waveguide_s11_mag(p) < 1e-12);
  CHECK(oracle_s11(p) < 1e-12);
  p.l = 0.5 * l;
  CHECK(waveguide_s11_mag(p) > 0.1);
}

TEST_CASE("frozen regression values") {
  // Values from the independent transfer-matrix cascade in long double.
  CHECK(waveguide_s11_mag(si(30, 3, 7, 5, 2.0, 2.4)) == doctest::Approx(0.39104732289713417095).epsilon(1e-12));
  CHECK(waveguide_s11_mag(si(27, 3, 7, 5, 2.0, 2.4)) == doctest::Approx(0.64683830197860178082).epsilon(1e-12));
  CHECK(waveguide_s11_mag(si(33, 3, 7, 5, 2.0, 2.4)) == doctest::Approx(0.25745005213963778949).epsilon(1e-12));
  CHECK(waveguide_s11_mag(si(30, 3, 6.3, 4.5, 2.2, 2.64)) == doctest::Approx(0.40239888483162671357).epsilon(1e-12));
  const auto m = waveguide_model();
  CHECK(m(std::vector<double>{30, 3, 7, 5, 2.0, 2.4}) == waveguide_s11_mag(si(30, 3, 7, 5, 2.0, 2.4)));
}

TEST_CASE("agreement with the transfer-matrix oracle") {
  std::mt19937_64 gen(1);
  for (int k = 0; k < 1000; ++k) {
    const auto y = random_point(gen);
    const auto p = si(y[0], y[1], y[2], y[3], y[4], y[5]);
    CHECK(std::abs(waveguide_s11_mag(p) - oracle_s11(p)) <= 1e-12);
  }
}

TEST_CASE("passivity over the parameter box") {
  const auto m = waveguide_model();
  std::mt19937_64 gen(2);
  double lo = 1, hi = 0;
  for (int k = 0; k < 100000; ++k) {
    const double v = m(random_point(gen));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(lo >= 0.0);
  CHECK(hi <= 1.0);
}

TEST_CASE("independence of h and d") {
  const auto m = waveguide_model();
  std::mt19937_64 gen(3);
  for (int k = 0; k < 200; ++k) {
    auto y = random_point(gen);
    const double base = m(y);
    for (std::size_t slot : {1u, 3u}) {
      auto z = y;
      const auto& par = waveguide_parameters()[slot];
      z[slot] = par.lower + (k % 7) / 6.0 * (par.upper - par.lower);
      CHECK(std::abs(m(z) - base) < 1e-13);
    }
    // the oracle has a genuine vacuum section of length d
    auto p = si(y[0], y[1], y[2], y[3], y[4], y[5]);
    const double o = oracle_s11(p);
    p.d *= 1.1;
    p.h *= 0.9;
    CHECK(std::abs(oracle_s11(p) - o) < 1e-13);
  }
}

TEST_CASE("cutoff") {
  CHECK(waveguide_cutoff(0.03) == doctest::Approx(299792458.0 / 0.06));
  CHECK(waveguide_cutoff(0.03) < 6e9);
  CHECK(waveguide_cutoff(0.03) == doctest::Approx(4.99654e9).epsilon(1e-6));
  CHECK_THROWS_AS(waveguide_s11_mag(si(30, 3, 7, 5, 2, 2.4, 4.9)), InvalidArgument);
  CHECK_THROWS_AS(waveguide_s11_mag(si(20, 3, 7, 5, 2, 2.4, 6)), InvalidArgument);
  CHECK_THROWS_AS(waveguide_s11_mag(si(30, 3, 7, 5, 0.5, 2.4)), InvalidArgument);
  CHECK_THROWS_AS(waveguide_s11_mag(si(30, 0, 7, 5, 2, 2.4)), InvalidArgument);
  CHECK_THROWS_AS(waveguide_s11_mag(si(30, 3, -1, 5, 2, 2.4)), InvalidArgument);
}

TEST_CASE("smooth on the parameter box") {
  // Second differences in the canonical variables stay bounded and converge
  // under step halving.
  const auto m = waveguide_model();
  const auto& table = waveguide_parameters();
  std::mt19937_64 gen(4);
  double worst = 0;
  for (int k = 0; k < 300; ++k) {
    auto y = random_point(gen);
    for (std::size_t n = 0; n < 6; ++n) {
      const double half = 0.5 * (table[n].upper - table[n].lower);
      auto second = [&](double t) {
        auto a = y, b = y;
        a[n] += t * half;
        b[n] -= t * half;
        return (m(a) - 2 * m(y) + m(b)) / (t * t);
      };
      const double d1 = second(1e-2), d2 = second(5e-3);
      worst = std::max(worst, std::abs(d1));
      CHECK(std::abs(d1 - d2) <= 1e-3 + 0.01 * std::abs(d2));
    }
  }
  CHECK(worst < 10.0);
}

TEST_CASE("model registry") {
  const auto m = waveguide_model(6.0, {"w", "eps_r"}, {{"l", 7.7}});
  CHECK(m.dim() == 2);
  CHECK(m.parameter_names == std::vector<std::string>{"w", "eps_r"});
  CHECK(m.lower == std::vector<double>{27, 1.8});
  CHECK(m(std::vector<double>{30, 2.0}) == waveguide_s11_mag(si(30, 3, 7.7, 5, 2.0, 2.4)));
  CHECK_THROWS_AS(waveguide_model(6.0, {"w", "w"}), InvalidArgument);
  CHECK_THROWS_AS(waveguide_model(6.0, {"q"}), InvalidArgument);
  CHECK_THROWS_AS(m(std::vector<double>{30}), InvalidArgument);
  CHECK_THROWS_AS(test_function("rosenbrock", 2), InvalidArgument);
  CHECK_THROWS_AS(test_function("ishigami", 2), InvalidArgument);
}

TEST_CASE("test functions") {
  const std::vector<double> y{0.5, -0.25, 0.75};
  CHECK(test_function("constant", 3)(y) == 3.7);
  CHECK(test_function("additive-linear", 3)(y) == doctest::Approx(0.5 - 0.5 + 2.25));
  CHECK(test_function("exp-sum", 3)(y) == doctest::Approx(std::exp(1.0 / 3)));
  CHECK(test_function("exp-first", 3)(y) == doctest::Approx(std::exp(0.5)));
  CHECK(test_function("ishigami", 3)(y) ==
        doctest::Approx(std::sin(0.5) + 7 * std::pow(std::sin(-0.25), 2) + 0.1 * std::pow(0.75, 4) * std::sin(0.5)));

  // analytic facts against the quadrature oracle
  const auto u = BoundedDistribution::uniform(-1, 1);
  const JointDistribution j2({u, u});
  const auto es = test_function("exp-sum", 2).facts(j2);
  REQUIRE(es);
  const auto gl = oracle::gauss_legendre(40);
  double e1 = 0, e2 = 0;
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t k = 0; k < 40; ++k) {
      const double w = gl.w[i] * gl.w[k] / 4, v = std::exp((gl.x[i] + gl.x[k]) / 2);
      e1 += w * v;
      e2 += w * v * v;
    }
  }
  CHECK(*es->mean == doctest::Approx(e1).epsilon(1e-13));
  CHECK(*es->variance == doctest::Approx(e2 - e1 * e1).epsilon(1e-12));

  const JointDistribution jb({BoundedDistribution::beta(3, 6, 0, 2), u});
  const auto al = test_function("additive-linear", 2).facts(jb);
  REQUIRE(al);
  CHECK(*al->mean == doctest::Approx(2.0 / 3));
  CHECK(!test_function("exp-sum", 2).facts(jb));

  const auto is = test_function("ishigami", 3).facts(
      JointDistribution(std::vector<BoundedDistribution>(3, BoundedDistribution::uniform(-kPi, kPi))));
  REQUIRE(is);
  CHECK(*is->mean == doctest::Approx(3.5));
  double s = 0;
  for (double v : is->first_order) s += v;
  CHECK(s < 1.0);
  CHECK(is->first_order[2] == 0.0);
  CHECK(is->total_order[2] > 0.2);
}
