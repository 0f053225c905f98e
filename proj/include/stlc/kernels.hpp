#pragma once

#include "stlc/spectral.hpp"

namespace stlc {

struct KernelValue {
  cplx value;
  double tail_bound = 0.0;  // bound on the omitted modes
};

// K(σ) = Σ c_j e^{−iλ_j|σ|}; the modulated form multiplies by e^{iλ_k|σ|/2}.
KernelValue kernel_value(const KernelModel& model, double sigma, bool modulated = false);

// Unique j with |ω| ∈ [π²(j²−j), π²(j²+j)).
long j_omega(double omega);

// c_j, continued past the stored range by the tail model.
double kernel_coef(const KernelModel& model, long j);

// Θ(ω) = Σ λ_j c_j / (λ_j² − ω²)
double theta(const KernelModel& model, double omega);

// Single-pole part ½λ_j²c_j/(λ_j − |ω|) with j = j_omega(ω).
double theta_pv(const KernelModel& model, double omega);

// ω²Θ(ω) = inv_sq + pv_part + reg_part
struct ThetaSplit {
  double omega = 0.0;
  long j_omega = 1;
  double theta = 0.0;
  double inv_sq = 0.0;
  double pv_part = 0.0;
  double reg_part = 0.0;
};
ThetaSplit theta_split(const KernelModel& model, double omega);

}  // namespace stlc
