#include <cmath>

#include "doctest.h"
#include "stlc/numerics.hpp"

using namespace stlc;

namespace {

// Brute-force tensor Gauss rule for the nested cell integral.
cplx cell_exp2_oracle(double x, double y, double h) {
  return gauss_integrate(
      [&](double t) {
        return std::polar(1.0, x * t) *
               gauss_integrate([&](double s) { return std::polar(1.0, y * s); }, 0.0, t, t / 8.0, 20);
      },
      0.0, h, h / 64.0, 20);
}

}  // namespace

TEST_CASE("cell_exp matches closed form on both branches") {
  for (double x : {0.0, 1e-9, 0.3, 4.0, -7.5, 1e4}) {
    const double h = 0.1;
    const double sh = std::sin(0.5 * x * h);
    const cplx ref = x == 0.0 ? cplx(h) : cplx(std::sin(x * h), 2.0 * sh * sh) / x;
    CHECK(std::abs(cell_exp(x, h) - ref) <= 1e-14 * h + 1e-12 * std::abs(ref));
  }
}

TEST_CASE("cell_exp2 agrees with nested quadrature") {
  const double h = 0.05;
  for (double x : {0.0, 2.0, -30.0, 400.0})
    for (double y : {0.0, 1.5, -60.0, 900.0}) {
      const cplx got = cell_exp2(x, y, h), ref = cell_exp2_oracle(x, y, h);
      CHECK(std::abs(got - ref) <= 1e-12 * h * h);
    }
}

TEST_CASE("cell_exp2 at zero frequencies is h^2/2") {
  CHECK(std::abs(cell_exp2(0.0, 0.0, 0.3) - 0.045) < 1e-16);
}

TEST_CASE("parity tail sums match the closed odd-series values") {
  // sum over odd j of j^-2 is pi^2/8, of j^-4 is pi^4/96
  double s2 = 0.0, s4 = 0.0;
  for (long j = 1; j <= 99; j += 2) {
    s2 += 1.0 / double(j * j);
    s4 += 1.0 / std::pow(double(j), 4);
  }
  CHECK(std::abs(s2 + parity_tail_sum(100, 1, 2.0) - PI * PI / 8.0) < 1e-13);
  CHECK(std::abs(s4 + parity_tail_sum(100, 1, 4.0) - std::pow(PI, 4) / 96.0) < 1e-14);
}

TEST_CASE("gauss rule integrates polynomials exactly") {
  const GaussRule& g = gauss_rule(8);
  double s = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::pow(g.x[i], 14);
  CHECK(std::abs(s - 2.0 / 15.0) < 1e-15);
}

TEST_CASE("pairwise sum is exact on integers") {
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i);
  CHECK(pairwise_sum(v) == 500500.0);
}
