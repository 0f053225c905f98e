#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "stlc/quadform.hpp"

namespace stlc {

using Vec = Eigen::VectorXcd;

struct StateVector {
  Vec coeffs;  // ψ_j, j = 0..J
  double time = 0.0;

  static StateVector ground(long J);
  long J() const { return static_cast<long>(coeffs.size()) - 1; }
  double norm() const { return coeffs.norm(); }
};

// exp(−iHt)v for a real symmetric H given by its action, spectrum inside [lo, hi].
Vec chebyshev_expm_action(const std::function<Vec(const Vec&)>& apply_H, double lo, double hi, double t,
                          const Vec& v, double tol = 1e-16);

struct Trajectory {
  std::vector<StateVector> samples;
  StateVector final;
  double top_mode_weight = 0.0;  // max_t |ψ_J(t)|², a truncation indicator
};

// Galerkin system iψ̇ = Aψ − u(t) M ψ on the first J+1 Neumann modes.
class Galerkin {
 public:
  Galerkin(const Potential& pot, long J);

  long J() const { return J_; }
  const Potential& potential() const { return pot_; }
  // M_{jm} = ⟨μφ_m, φ_j⟩
  const Eigen::MatrixXd& M() const { return M_; }

  // Exact propagation over one cell with constant control value.
  Vec step(const Vec& psi, double u, double h) const;
  // Real control required; samples every `sample_every` cells when positive.
  Trajectory evolve(const Control& u, const StateVector& psi0, long sample_every = 0) const;
  StateVector final_state(const Control& u) const;

  // e^{−iθM}ψ
  Vec multiply_phase(const Vec& psi, double theta) const;

 private:
  Potential pot_;
  long J_;
  Eigen::VectorXd lam_;
  Eigen::MatrixXd M_;
  Eigen::VectorXd row_abs_;
  double m_lo_ = 0.0, m_hi_ = 0.0;
};

// ψ₁(T)_j = i⟨μ,φ_j⟩ ∫ u(s) e^{−iλ_j(T−s)} ds
Vec linearized(const Galerkin& g, const Control& u);

struct SecondOrder {
  cplx value;       // ⟨ψ₂(T), φ_k⟩ from the mode-by-mode Duhamel integrals
  cplx via_q;       // −½ Q_k(uρ_k, uρ̄_k) e^{−iλ_k T}
  double discrepancy = 0.0;
};

SecondOrder second_order(const Galerkin& g, const KernelModel& model, const Control& u);
// ⟨ψ₂(T), φ_k⟩ of the Galerkin system alone.
cplx galerkin_psi2(const Galerkin& g, long k, const Control& u);

struct SecondOrderFd {
  Vec psi2;                 // all modes
  double richardson_change = 0.0;
};

// ψ₂(T) from even parts of ψ(±εu), Richardson-extrapolated in ε.
SecondOrderFd second_order_fd(const Galerkin& g, const Control& u, double eps = 0.0);

// ‖u_p‖ for the p-th primitive vanishing at 0.
double iterated_primitive_norm(const Control& u, int p);

struct DriftCertificate {
  int order = 1;
  double nu = 0.125;
  cplx projection;    // ⟨ψ(T) − φ₀, φ_k⟩
  double a_p = 0.0;
  double up_norm2 = 0.0;  // ‖u_p‖²
  double lhs = 0.0;       // |⟨ψ(T) − φ₀, φ_k⟩ + i a_k^p ‖u_p‖²|
  double gamma = 0.0;     // T^ν for p = 1, Γ_p(T,u) otherwise
  double gamma_term = 0.0;  // gamma · ‖u_p‖²
  double state_dev2 = 0.0;  // ‖ψ(T) − φ₀‖²
  double u1T = 0.0;
  double closed_loop_rhs = 0.0;  // T^{1/2}‖u₁‖ + ‖ψ(T) − φ₀‖
  double fitted_C = 0.0;         // lhs / (gamma_term + state_dev2)
};

DriftCertificate drift_certificate(const Galerkin& g, const KernelModel& model, const Control& u, int order = 1,
                                   double nu = 0.125);

struct RemainderRecord {
  double quad_rem = 0.0, quad_bound = 0.0, quad_ratio = 0.0;
  double cubic_rem = 0.0, cubic_bound = 0.0, cubic_ratio = 0.0;
  double gauge_norm_defect = 0.0;  // |‖ψ̃‖ − 1|
  double gauge_roundtrip = 0.0;    // ‖e^{iu₁M}ψ̃ − ψ‖
  Vec psi_tilde;
};

RemainderRecord remainder_norms(const Galerkin& g, const KernelModel& model, const Control& u);

struct UnreachableScan {
  double eps = 0.0;
  long count = 0;
  long reached = 0;
  double min_distance = 0.0;
};

// Random controls with ‖u‖ ≤ 1 against the target √(1−ε²)φ₀ + i·sgn(a_k)εφ_k.
UnreachableScan unreachable_scan(const Galerkin& g, const KernelModel& model, double T, double eps, long count,
                                 std::uint64_t seed, long cells = 32);

}  // namespace stlc
