#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stlc/simulator.hpp"

namespace stlc {

// χ = normalize(1_[1/4,3/4] ⋆ ρ) with ρ a C^∞ mollifier supported in [−r, r].
class Bump {
 public:
  explicit Bump(double radius = 0.125, long samples = 4096);

  double radius() const { return r_; }
  double operator()(double t) const;
  cplx hat(double sigma) const;  // ∫ χ(t) e^{−iσt} dt
  const std::vector<double>& samples() const { return samples_; }  // χ(i/S), i = 0..S

  double l2norm() const;           // quadrature check of ‖χ‖
  double max_hat_at_4ppi(int P) const;  // max_{1≤p≤P} |χ̂(4pπ)|
  double decay_constant(double omega_max) const;  // max |χ̂(ω)|⟨ω⟩⁴ over a grid of [0, omega_max]

 private:
  double rho(double x) const;
  double cdf(double y) const;
  double rho_hat(double sigma) const;
  double chi0(double t) const;

  double r_, c_ = 1.0, norm0_ = 1.0;
  std::vector<double> cdf_nodes_;
  std::vector<double> samples_;
};

struct ProbeSpec {
  double T = 0.1;
  int sign = 1;    // ε₀
  long j0 = 1;
  double beta = 4.0 * PI;
  double omega0() const { return lambda(j0) + sign * beta / T; }
};

struct ProbeResult {
  ProbeSpec spec;
  Control u;              // V′ on the grid; its primitive interpolates V at the nodes
  double pv_value = 0.0;  // (1/2π) ∫ Θ_pv |V̂|²
  double pv_residual = 0.0;
  double scale = 1.0;     // s with s² |pv_value| = T
  double v_norm = 0.0;    // ‖V‖ before rescaling
};

// Lower bound a_μ for |λ_j² c_j| at large j, from the boundary-slope asymptotics.
double pole_floor(const KernelModel& model);

// V(t) = 2T^{−1/2} cos(ω₀t) χ(t/T) sampled on N cells.
ProbeResult probe(const KernelModel& model, const ProbeSpec& spec, const Bump& chi, long N);
// V̂(ω) = T^{1/2}[χ̂(T(ω+ω₀)) + χ̂(T(ω−ω₀))]
cplx probe_hat(const ProbeSpec& spec, const Bump& chi, double omega);

struct MomentSolution {
  Control u;
  bool regular = false;
  std::vector<long> index;
  std::vector<double> residuals;  // |achieved − d_j|
  double max_residual = 0.0;
  double l2norm = 0.0;
  double cost_NT = 0.0;
  double ridge = 0.0;  // selected Tikhonov parameter relative to σ_max
};

struct MomentOptions {
  long N = 1024;
  double tol = 1e-10;  // residual target relative to max(1, max|d_j|)
};

// Least-squares solver for ∫ w(t) e^{−iλ_j t} dt = d_j with w = u (plain) or w = u₁ ∈ H¹₀ (regular).
// The returned control is u; in the regular case its primitive solves the moments and u ∈ H.
class MomentSolver {
 public:
  MomentSolver(double T, std::vector<long> index, bool regular, const MomentOptions& opt = {});
  MomentSolution solve(const std::map<long, cplx>& targets) const;
  long N() const { return N_; }

 private:
  double T_;
  long N_;
  bool regular_;
  double tol_;
  std::vector<long> index_;
  Eigen::MatrixXd A_;  // real rows, scaled for ‖u‖_{L²}
  Eigen::VectorXd row_scale_;
  Eigen::MatrixXd U_, V_;
  Eigen::VectorXd S_;
};

MomentSolution solve_moments(double T, const std::map<long, cplx>& targets, bool regular,
                             const MomentOptions& opt = {});

struct SynthesisOptions {
  long J_series = 4000;      // coefficient series for the quadratic forms
  long J_modes = 64;         // modes whose linear response is cancelled
  double resolution = 1.0;   // max h·ω₀ on the control grid
  long N_min = 256;
  double beta = 0.0;         // 0: 4π
  double mollifier = 0.125;
  double nu = 0.125;
  double eta = std::numeric_limits<double>::infinity();  // H̃^{−ν} budget of U
  double band_margin = 2.0;  // first j₀ with λ_{j₀+1} − λ_{j₀} ≥ 2·band_margin·β/T
  double j0_growth = 1.15;   // geometric step of the a-posteriori j₀ search
  int j0_tries = 8;
  long j0_max = 0;           // 0: unbounded
  double moment_tol = 1e-10;
  bool require_balanced = true;  // reject potentials not classified as quadratic candidates
  bool real_tangents = true;     // tangent_basis builds u^{±1}
};

struct NullMomentProbe {
  ProbeResult probe;
  Control u;               // ∂_t U, U = (V + W)/√c ∈ H¹₀
  double c = 0.0;          // pv value of V + W over ±T before the final rescale
  double pv_value = 0.0;   // after rescale
  double moment_residual = 0.0;  // max_j |Û(λ_j)|
  double correction_norm = 0.0;  // ‖W‖
  double sobolev_norm = 0.0;     // ‖U‖_{H̃^{−ν}}
};

NullMomentProbe null_moment_probe(const KernelModel& model, const ProbeSpec& spec, const Bump& chi,
                                  const SynthesisOptions& opt = {});
// Same on a prescribed grid of N cells (N ≤ 0 picks one from the options).
NullMomentProbe null_moment_probe_on(const KernelModel& model, const ProbeSpec& spec, const Bump& chi,
                                     const SynthesisOptions& opt, long N);

// ⟨ψ₂(T), φ_k⟩ = −½ Q_k(uρ_k, uρ̄_k) e^{−iλ_k T}
cplx psi2_projection(const KernelModel& model, const Control& u);
// max_{j ≤ J} |⟨μ,φ_j⟩ û(λ_j)| and the norm of the truncated ψ₁(T)
double linear_response_max(const Potential& pot, const Control& u, long J);
double linear_response_norm(const Potential& pot, const Control& u, long J);

struct TangentCertificate {
  cplx psi2;            // ⟨ψ₂(T), φ_k⟩ after rescale
  double psi1_max = 0.0;
  double psi1_norm = 0.0;
  double u_norm = 0.0;
  double u1_norm = 0.0;
  double u1T = 0.0;
  double re_over_T2 = 0.0;
  double im_over_T3 = 0.0;
  double scale = 1.0;
  long j0 = 0;
  int probe_sign = 0;
};

struct TangentPair {
  double T = 0.0;
  Control plus, minus;
  TangentCertificate cert_plus, cert_minus;
};

// u^{±i} with Im⟨ψ₂(T),φ_k⟩ = ±T.
TangentPair tangent_controls(const Potential& pot, const KernelModel& model, double T,
                             const SynthesisOptions& opt = {});
TangentPair tangent_controls_on(const Potential& pot, const KernelModel& model, double T,
                                const SynthesisOptions& opt, long N);

struct RealTangentPair {
  double T = 0.0;
  long M = 1;         // smallest split with measured α ∈ [1, 3]
  long M_bound = 1;   // sufficient split from the measured C₁
  double C1 = 0.0;
  double alpha_plus = 0.0, alpha_minus = 0.0;
  Control plus, minus;
  TangentCertificate cert_plus, cert_minus;
};

// u^{±1} = rescaled u^{±i} ⋄ 0 ⋄ u^{∓i} on sub-horizons T/(2M), Re⟨ψ₂(T),φ_k⟩ = ±T².
RealTangentPair real_tangent_controls(const Potential& pot, const KernelModel& model, double T,
                                      const SynthesisOptions& opt = {});

struct TangentBasis {
  double T = 0.0;  // duration of each building block
  Control u_p1, u_m1, u_pi, u_mi;
  cplx b_p1, b_m1, b_pi, b_mi;
  bool has_real = false;
  double lambda_k = 0.0;
};

TangentBasis tangent_basis(const Potential& pot, const KernelModel& model, double T,
                           const SynthesisOptions& opt = {});

struct ComplexMotion {
  Control v;          // duration 2·basis.T
  cplx predicted;     // Σ of basis contributions
  double alpha = 0.0, beta = 0.0;
  double u1_norm = 0.0;
  double cost_bound = 0.0;  // (|Re z|/T²)^{1/2} + (|Im z|/T)^{1/2}, T = total duration
};

// First slot: u^{±1}, or u^{±i} whose contribution is rotated by e^{−iλ_k T}; second slot: u^{±i}.
ComplexMotion complex_motion(const TangentBasis& basis, const KernelModel& model, cplx z);
// Replaces the basis values by those of the Galerkin system.
void measure_basis(TangentBasis& basis, const Galerkin& g, long k);

struct ProjectionOptions {
  double tol = 1e-12;
  int max_iter = 30;
  double delta = 0.2;
  long N = 0;  // 0: choose from J
};

struct ProjectionReport {
  Control u;
  int iterations = 0;
  double error = 0.0;  // ‖P_k ψ(T) − target‖
  double u_norm = 0.0;
  double cost_NT = 0.0;
  double bound_L2 = 0.0;  // ‖ψ0 − φ0‖ + ‖target‖
  std::vector<double> trace;
  Vec final_state;
};

// P_k ψ := ψ − ⟨ψ,φ_k⟩φ_k − Re⟨ψ,φ₀⟩φ₀
Vec project_k(const Vec& psi, long k);

ProjectionReport steer_projection(const Galerkin& g, long k, double T, const Vec& psi0, const Vec& target,
                                  const ProjectionOptions& opt = {});

struct SteerOptions {
  double theta = 0.7;
  int max_iter = 200;
  double tol = 0.0;  // 0: 1e-3 |z*| + 1e-10
  bool real_tangents = false;  // false: rotated u^{±i} blocks span the real direction
  bool measure_basis = true;   // basis values from the Galerkin system
  SynthesisOptions synth;
  ProjectionOptions proj{1e-12, 30, 1.0, 0};
};

struct SteeringReport {
  bool converged = false;
  std::string status;  // CONVERGED or FAILED
  std::string reason;
  Control u;
  int iterations = 0;
  cplx z_target, z_final;
  double final_error = 0.0;  // ‖ψ(T) − ψ*‖
  double proj_error = 0.0;
  double u_norm = 0.0;
  double u1_norm = 0.0;
  double cost_NT = 0.0;
  double bound_L2 = 0.0;  // |⟨ψ*,φ_k⟩|^{1/2} + ‖ψ* − φ₀‖
  double bound_H1 = 0.0;  // (|Re z*|/T²)^{1/2} + (|Im z*|/T)^{1/2} + ‖ψ* − φ₀‖
  std::vector<double> trace;  // |⟨ψ(T),φ_k⟩ − z*| per iteration
  std::vector<std::string> warnings;
};

SteeringReport steer_full(const Galerkin& g, const KernelModel& model, double T, const Vec& target,
                          const SteerOptions& opt = {});

struct BalancedFamily {
  Potential A, B;
  double s_lo = -10.0, s_hi = 10.0;
  int scan = 201;
};

// μ_A = x²/2 − ⟨x²/2, φ_k⟩φ_k, μ_B = φ_{k+1}
BalancedFamily default_balanced_family(int k, long J);

struct BalancedPotential {
  Potential pot;
  double s = 0.0;
  double a_k = 0.0;
  double scale = 0.0;
  std::vector<std::pair<double, double>> scan;  // (s, a_k(s))
};

BalancedPotential find_balanced_potential(int k, const BalancedFamily& family);

}  // namespace stlc
