#pragma once

#include <functional>
#include <vector>

#include "stlc/kernels.hpp"
#include "stlc/signals.hpp"

namespace stlc {

// ∫_0^T g(t)e^{iβt} ∫_0^t e^{−iΛ(t−s)} f(s)e^{iαs} ds dt for piecewise-constant f, g on a common grid.
cplx causal_pair(const Control& f, double alpha, const Control& g, double beta, double Lambda);

// Same integral for smooth f, g on [0,T]: composite Gauss rule with the causal part of each
// cell collapsed onto its own sub-interval.
cplx causal_pair_smooth(const std::function<cplx(double)>& f, double alpha, const std::function<cplx(double)>& g,
                        double beta, double Lambda, double T, int order = 16);

// Sum of piecewise-constant signals times carriers e^{iαt}.
struct Signal {
  struct Part {
    Control u;
    double alpha = 0.0;
  };
  std::vector<Part> parts;

  Signal() = default;
  Signal(const Control& u, double alpha = 0.0) : parts{{u, alpha}} {}
  Signal& add(const Control& u, double alpha = 0.0) {
    parts.push_back({u, alpha});
    return *this;
  }
};

struct QTime {
  cplx value;
  double tail_estimate = 0.0;  // size of the leading correction for modes beyond J
};

// Q(u,v) = ∫∫ K(t−s) u(s) v̄(t); the modulated form uses e^{iλ_k|σ|/2}K(σ).
cplx q_time(const KernelModel& model, const Control& u, const Control& v, bool modulated = false);
QTime q_time(const KernelModel& model, const Signal& u, const Signal& v, bool modulated, bool parallel = true);

struct PvResult {
  cplx value;
  double eps = 0.0;
  double refinement_residual = 0.0;  // change when the exclusion radius is halved
};

// Convergent integral of f over [a,b]: Lebesgue part away from the poles plus the symmetric
// pairing ∫_0^ε (f(p+y) + f(p−y)) dy at each simple pole p.
PvResult pv_integrate(const std::function<cplx(double)>& f, const std::vector<double>& poles, double eps,
                      double a, double b, double hmax = 0.0, const std::vector<double>& breaks = {});

struct QuadFormBreakdown {
  cplx total;
  cplx dirac;   // π Σ c_j [(û v̄̂)(λ_j) + (û v̄̂)(−λ_j)]
  cplx inv_sq;  // ∫ (−a) û₁ v̄̂₁
  cplx pv;      // ∫ Θ_pv û₁ v̄̂₁
  cplx reg;     // ∫ Θ_reg û₁ v̄̂₁
  double pv_eps = 0.0;
  double certified_error = 0.0;
};

struct FourierOptions {
  double eps = 0.0;       // 0: min pole gap / 8
  double omega_max = 0.0;  // 0: upper edge of the band of λ_J
};

// Frequency-domain evaluation of Q on H.
QuadFormBreakdown q_fourier(const KernelModel& model, const Control& u, const Control& v,
                            const FourierOptions& opt = {});

struct IppKernel {
  std::function<cplx(double, double)> K, d1K, d2K, d21K;  // off-diagonal values
  std::function<cplx(double)> w;                          // ∂₁K(s,s+0) − ∂₁K(s,s−0)
};

struct IppResult {
  cplx lhs, rhs;
  double residual = 0.0;
};

// Both sides of the integration-by-parts identity for ∫∫ K(s,t) u(s) v̄(t).
IppResult ipp_reduce(const IppKernel& kernel, const Control& u, const Control& v, int order = 8);

struct CoercivityRecord {
  cplx q;      // Q_k(u,v)
  cplx r;      // Q_k(u,v) − 2i a_k ⟨u₁,v₁⟩
  double n_l2 = 0.0;  // ‖u₁‖‖v₁‖
  double n_nu = 0.0;  // ‖u₁‖_{H̃^{−ν}} ‖v₁‖_{H̃^{−ν}}
  double ratio = 0.0;  // |r| / (T^ν ‖u₁‖‖v₁‖)
};

CoercivityRecord coercivity_residual(const KernelModel& model, const Control& u, const Control& v, double nu);

struct ModulationRecord {
  double r_shift = 0.0, b_shift = 0.0;        // |Q_k − Q + iλ_k K(0)⟨u₁,v₁⟩| on H
  double r_conj = 0.0, b_conj = 0.0;          // |Q_k(uρ_k, uρ̄_k) − Q_k(P_H u, P_H u)|
  double r_proj = 0.0, b_proj = 0.0;          // |Q_k(v, v̄) − Q_k(P_H v, P_H v̄)|, v = uρ_k
};

// Residuals with the matching bound expressions (constants not included).
ModulationRecord modulation_residual(const KernelModel& model, const Control& u, double nu = 0.125);

}  // namespace stlc
