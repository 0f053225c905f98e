#pragma once

#include <string>
#include <vector>

#include "stlc/numerics.hpp"

namespace stlc {

// Piecewise-constant signal on the uniform grid t_n = nT/N.
struct Control {
  double T = 1.0;
  std::vector<cplx> values;
  bool real = false;

  Control() = default;
  Control(double T, std::vector<cplx> values, bool real = false);
  static Control from_real(double T, const std::vector<double>& values);
  static Control zero(double T, long N);

  long N() const { return static_cast<long>(values.size()); }
  double h() const { return T / static_cast<double>(values.size()); }
  double t(long n) const { return T * static_cast<double>(n) / static_cast<double>(values.size()); }
  cplx at(double t) const;

  double l2norm() const;
  Control scaled(cplx s) const;
  Control conj() const;
  // Each cell split into `factor` equal cells.
  Control refined(long factor) const;
};

Control operator+(const Control& a, const Control& b);
Control operator-(const Control& a, const Control& b);
// ∫ u v̄
cplx inner(const Control& u, const Control& v);

// Continuous piecewise-linear antiderivative, stored by its node values.
struct Primitive {
  double T = 1.0;
  std::vector<cplx> y;  // y[n] = u₁(t_n), n = 0..N
  std::vector<cplx> slope;

  double h() const { return T / static_cast<double>(slope.size()); }
  cplx endpoint() const { return y.back(); }
  cplx at(double t) const;
  double l2norm() const;
};

Primitive primitive(const Control& u);
// ∫ u₁ v̄₁, exact per cell.
cplx inner(const Primitive& a, const Primitive& b);

// u − u₁(T)/T
Control project_zero_mean(const Control& u);
bool in_H(const Control& u, double tol = 1e-12);

// û(ω) = ∫_0^T u(t) e^{−iωt} dt
cplx windowed_fourier(const Control& u, double omega);
// Transform of the primitive u₁ restricted to [0, T].
cplx primitive_fourier(const Control& u, double omega);
// ∫_0^T u(t) e^{iωt} dt
inline cplx moment(const Control& u, double omega) { return windowed_fourier(u, -omega); }

struct NormResult {
  double value = 0.0;
  double tail = 0.0;        // size of the analytic tail correction included in value
  bool truncated = false;   // the frequency integral diverges and was cut off
  std::string warning;
};

// Zero-extension H̃^ν norm of u, ν ∈ (−1, 1).
NormResult sobolev_norm(const Control& u, double nu);
// Zero-extension H̃^s norm of the primitive u₁; requires u ∈ H.
NormResult primitive_sobolev_norm(const Control& u, double s);
// Sine-series norm with β_k = kπ/T, ν ∈ (−1/2, 1/2).
NormResult spectral_sobolev_norm(const Control& u, double nu);

// u ⋄ v on [0, T_u + T_v].
Control concat(const Control& u, const Control& v);
// N_T(u) = |u₁(T)| + ‖u₁‖
double cost_NT(const Control& u);

}  // namespace stlc
