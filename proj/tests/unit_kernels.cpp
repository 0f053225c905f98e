#include <cmath>
#include <random>

#include "doctest.h"
#include "stlc/kernels.hpp"

using namespace stlc;

namespace {

// c_j = π²/j⁴ with its exact tail constants.
KernelModel quartic_model(long J) {
  std::vector<double> c(static_cast<std::size_t>(J + 1));
  for (long j = 1; j <= J; ++j) c[std::size_t(j)] = PI * PI / std::pow(double(j), 4);
  KernelModel m = kernel_model(c, 0);
  m.tail = true;
  m.tail_even = m.tail_odd = std::pow(PI, 6);
  m.a += m.tail_sum(-1.0);
  m.K0 += m.tail_sum(0.0);
  m.a_k = m.a;
  m.pole_scale = std::pow(PI, 6);
  return m;
}

double mittag_leffler(double w) {
  const double r = std::sqrt(w), p6 = std::pow(PI, 6);
  return -p6 / (6 * w * w) - p6 / (std::tan(r) * 4 * w * w * r) + p6 / (std::tanh(r) * 4 * w * w * r);
}

}  // namespace

TEST_CASE("j_omega band examples") {
  CHECK(j_omega(0.0) == 1);
  CHECK(j_omega(2.0 * PI * PI) == 2);
  CHECK(j_omega(6.0 * PI * PI) == 3);
  CHECK(j_omega(-6.0 * PI * PI) == 3);
  for (long j = 1; j < 300; ++j) {
    CHECK(j_omega(lambda(j)) == j);
    CHECK(j_omega(PI * PI * double(j * j + j)) == j + 1);
    CHECK(j_omega(std::nextafter(PI * PI * double(j * j + j), 0.0)) == j);
  }
}

TEST_CASE("zero potential gives zero kernels") {
  const KernelModel m = interaction_coefficients(cosine_coefficients(PotentialDesc::zero(), 50), 1, 50);
  CHECK(kernel_value(m, 0.3).value == 0.0);
  CHECK(theta(m, 17.0) == 0.0);
  const ThetaSplit s = theta_split(m, 40.0);
  CHECK(s.inv_sq == 0.0);
  CHECK(s.pv_part == 0.0);
  CHECK(s.reg_part == 0.0);
}

TEST_CASE("kernel at zero lag is K0") {
  const Potential pot = cosine_coefficients(PotentialDesc::linear(), 10000);
  const KernelModel m = interaction_coefficients(pot, 0, 10000);
  const KernelValue k = kernel_value(m, 0.0);
  CHECK(std::abs(k.value - 1.0 / 12.0) <= k.tail_bound + 1e-12);
  CHECK(kernel_value(m, 0.0, true).value == k.value);
  for (double s : {0.01, 0.2, -0.7, 3.0}) CHECK(std::abs(kernel_value(m, s).value) <= m.abs_sum);
}

TEST_CASE("modulated kernel at zero lag") {
  PotentialDesc d;
  d.kind = PotentialDesc::Kind::Coeffs;
  d.m = {0.1, 0.2, 0.0, 0.3};
  d.slope1 = 1.0;
  const KernelModel m = interaction_coefficients(cosine_coefficients(d, 400), 2, 400);
  CHECK(kernel_value(m, 0.0, true).value == kernel_value(m, 0.0, false).value);
}

TEST_CASE("modulated kernel derivative jump equals 2i a_k") {
  PotentialDesc d;
  d.kind = PotentialDesc::Kind::CosinePoly;
  d.terms = {{1, 0.4}, {3, -0.2}, {4, 0.1}};
  const Potential pot = cosine_coefficients(d, 16);
  const KernelModel m = interaction_coefficients(pot, 2, 16);
  const double dl = 1e-6;
  const cplx k0 = kernel_value(m, 0.0, true).value;
  const auto K = [&](double s) { return kernel_value(m, s, true).value; };
  // one-sided second-order difference quotients
  const cplx right = (-3.0 * k0 + 4.0 * K(dl) - K(2 * dl)) / (2 * dl);
  const cplx left = (3.0 * k0 - 4.0 * K(-dl) + K(-2 * dl)) / (2 * dl);
  CHECK(std::abs((left - right) - 2.0 * I * m.a_k) <= 1e-5 * std::abs(m.a_k) + 1e-8);
}

TEST_CASE("theta at zero and symmetry") {
  const Potential pot = cosine_coefficients(PotentialDesc::linear(), 2000);
  const KernelModel m = interaction_coefficients(pot, 0, 2000, false);
  double ref = 0.0;
  for (long j = 1; j <= 2000; ++j) ref += m.c[std::size_t(j)] / lambda(j);
  CHECK(std::abs(theta(m, 0.0) - ref) <= 1e-13 * std::abs(ref));
  for (double w : {3.0, 77.0, 1234.5}) CHECK(theta(m, -w) == theta(m, w));
}

TEST_CASE("theta matches the Mittag-Leffler closed form") {
  const KernelModel m = quartic_model(4000);
  for (double w : {5.0, 37.3, 200.0, 950.0, 3333.3}) {
    const double ref = mittag_leffler(w);
    CHECK(std::abs(theta(m, w) - ref) <= 1e-9 * std::abs(ref));
  }
}

TEST_CASE("split reconstruction off the pole lattice") {
  const Potential pot = cosine_coefficients(PotentialDesc::linear(), 3000);
  const KernelModel m = interaction_coefficients(pot, 0, 3000);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ud(-2e4, 2e4);
  for (int i = 0; i < 1000; ++i) {
    const double w = ud(rng);
    const ThetaSplit s = theta_split(m, w);
    const double lhs = w * w * theta(m, w), rhs = s.inv_sq + s.pv_part + s.reg_part;
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + std::abs(s.pv_part) + std::abs(m.a)));
  }
}

TEST_CASE("pv part vanishes in even bands for the linear potential") {
  const Potential pot = cosine_coefficients(PotentialDesc::linear(), 500);
  const KernelModel m = interaction_coefficients(pot, 0, 500);
  for (double w : {2.0 * PI * PI + 1.0, 4.0 * PI * PI, 5.9 * PI * PI}) CHECK(theta_split(m, w).pv_part == 0.0);
  // no pole where c_j vanishes
  CHECK_NOTHROW(theta(m, lambda(2)));
  CHECK_THROWS_AS(theta(m, lambda(3)), precondition_error);
  CHECK_THROWS_AS(theta_split(m, -lambda(5) * (1 + 1e-12)), precondition_error);
}

TEST_CASE("pv part bounded away from poles") {
  const Potential pot = cosine_coefficients(PotentialDesc::linear(), 500);
  const KernelModel m = interaction_coefficients(pot, 0, 500);
  double bound = 0.0;
  for (long j = 1; j <= 500; ++j) bound = std::max(bound, std::abs(lambda(j) * lambda(j) * m.c[std::size_t(j)]));
  for (double w = 0.5; w < 5000.0; w += 0.37) {
    const long j = j_omega(w);
    if (std::abs(w - lambda(j)) < 1.0) continue;
    CHECK(std::abs(theta_split(m, w).pv_part) <= bound);
  }
}
