#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlc {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};
inline constexpr double PI = 3.14159265358979323846;

// Exit code 2 in the CLI.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Exit code 3 in the CLI.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ∫_0^h e^{ixτ} dτ
cplx cell_exp(double x, double h);

// ∫_0^h e^{ixτ} ∫_0^τ e^{iyσ} dσ dτ
cplx cell_exp2(double x, double y, double h);

// Deterministic pairwise summation.
double pairwise_sum(const double* v, std::size_t n);
cplx pairwise_sum(const cplx* v, std::size_t n);
inline double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }
inline cplx pairwise_sum(const std::vector<cplx>& v) { return pairwise_sum(v.data(), v.size()); }

// Σ_{j>J, j ≡ parity mod 2} j^{-s}, s > 1.
double parity_tail_sum(long J, int parity, double s);

// Gauss–Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_rule(int n);

// Integrate f over [a, b] split into panels of width at most hmax.
template <class F>
auto gauss_integrate(F&& f, double a, double b, double hmax, int order = 16) {
  const GaussRule& g = gauss_rule(order);
  using R = decltype(f(a));
  const double len = b - a;
  long panels = hmax > 0 ? static_cast<long>(std::ceil(len / hmax)) : 1;
  if (panels < 1) panels = 1;
  const double h = len / static_cast<double>(panels);
  std::vector<R> parts(static_cast<std::size_t>(panels));
  for (long p = 0; p < panels; ++p) {
    const double c = a + (static_cast<double>(p) + 0.5) * h;
    R s{};
    for (std::size_t q = 0; q < g.x.size(); ++q) s += g.w[q] * f(c + 0.5 * h * g.x[q]);
    parts[static_cast<std::size_t>(p)] = 0.5 * h * s;
  }
  return pairwise_sum(parts);
}

// ⟨x⟩ = (1 + x²)^{1/2}
inline double japanese(double x) { return std::sqrt(1.0 + x * x); }

}  // namespace stlc
