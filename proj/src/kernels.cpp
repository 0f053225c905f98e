#include "stlc/kernels.hpp"

#include <cmath>

namespace stlc {

namespace {

void check_pole(const KernelModel& model, double omega) {
  const long j = j_omega(omega);
  const double lj = lambda(j);
  if (std::abs(std::abs(omega) - lj) <= 1e-9 * lj && kernel_coef(model, j) != 0.0 && !model.negligible(j))
    throw precondition_error("pole proximity");
}

// Σ_j λ_j^3 c_j / (λ_j² − ω²) = ω²Θ(ω) + a, summed with its tail expansion.
double shifted_theta(const KernelModel& model, double omega) {
  const double w2 = omega * omega;
  const long J = model.J();
  std::vector<double> t(static_cast<std::size_t>(J + 1));
  for (long j = 1; j <= J; ++j) {
    const double l = lambda(j);
    if (l == std::abs(omega) && model.negligible(j)) continue;
    t[std::size_t(j)] = l * l * l * model.c[std::size_t(j)] / ((l - std::abs(omega)) * (l + std::abs(omega)));
  }
  return pairwise_sum(t) + model.tail_sum(-1.0) + w2 * model.tail_sum(1.0) + w2 * w2 * model.tail_sum(3.0);
}

}  // namespace

KernelValue kernel_value(const KernelModel& model, double sigma, bool modulated) {
  const double s = std::abs(sigma);
  std::vector<cplx> t(model.c.size());
  for (std::size_t j = 0; j < t.size(); ++j) t[j] = model.c[j] * std::polar(1.0, -lambda(long(j)) * s);
  cplx v = pairwise_sum(t);
  if (modulated) v *= std::polar(1.0, 0.5 * model.lambda_k() * s);
  return {v, model.abs_tail};
}

long j_omega(double omega) {
  const double a = std::abs(omega);
  long j = static_cast<long>(std::floor(std::sqrt(0.25 + a / (PI * PI)) + 0.5));
  // Guard the floor against rounding at band edges.
  while (j > 1 && a < PI * PI * double(j * j - j)) --j;
  while (a >= PI * PI * double(j * j + j)) ++j;
  return std::max(j, 1L);
}

double kernel_coef(const KernelModel& model, long j) {
  if (j < 0) j = -j;
  if (j <= model.J()) return model.c[std::size_t(j)];
  if (!model.tail) return 0.0;
  const double A = j % 2 == 0 ? model.tail_even : model.tail_odd;
  return A / std::pow(PI * double(j), 4);
}

double theta(const KernelModel& model, double omega) {
  check_pole(model, omega);
  const double w2 = omega * omega;
  const long J = model.J();
  std::vector<double> t(static_cast<std::size_t>(J + 1));
  for (long j = 1; j <= J; ++j) {
    const double l = lambda(j);
    if (l == std::abs(omega) && model.negligible(j)) continue;
    t[std::size_t(j)] = l * model.c[std::size_t(j)] / ((l - std::abs(omega)) * (l + std::abs(omega)));
  }
  return pairwise_sum(t) + model.tail_sum(1.0) + w2 * model.tail_sum(3.0);
}

double theta_pv(const KernelModel& model, double omega) {
  const long j = j_omega(omega);
  if (model.negligible(j)) return 0.0;
  const double lj = lambda(j);
  return 0.5 * lj * lj * kernel_coef(model, j) / (lj - std::abs(omega));
}

ThetaSplit theta_split(const KernelModel& model, double omega) {
  check_pole(model, omega);
  ThetaSplit s;
  s.omega = omega;
  s.j_omega = j_omega(omega);
  s.inv_sq = -model.a;
  s.pv_part = theta_pv(model, omega);
  const double R = shifted_theta(model, omega);
  s.reg_part = R - s.pv_part;
  s.theta = omega == 0.0 ? theta(model, 0.0) : (R - model.a) / (omega * omega);
  return s;
}

}  // namespace stlc
