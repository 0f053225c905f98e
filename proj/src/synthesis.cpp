#include "stlc/synthesis.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

namespace stlc {

namespace {

constexpr double kWindow = 200.0;  // probe spectrum kept on |σ| ≤ kWindow around ±Tω₀

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

template <class F>
double gl_panels(F&& f, double a, double b, long panels) {
  const GaussRule& g = gauss_rule(16);
  const double h = (b - a) / static_cast<double>(panels);
  double s = 0.0;
  for (long p = 0; p < panels; ++p) {
    const double c = a + (static_cast<double>(p) + 0.5) * h;
    double q = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) q += g.w[i] * f(c + 0.5 * h * g.x[i]);
    s += 0.5 * h * q;
  }
  return s;
}

}  // namespace

// ---------------------------------------------------------------- bump

Bump::Bump(double radius, long samples) : r_(radius) {
  if (!(radius > 0.0) || radius > 0.125) throw precondition_error("mollifier radius must lie in (0, 1/8]");
  c_ = 1.0 / gl_panels([&](double x) { return rho(x); }, -r_, r_, 256);
  const long P = 2048;
  cdf_nodes_.resize(P + 1);
  cdf_nodes_[0] = 0.0;
  const double dy = 2.0 * r_ / P;
  for (long i = 0; i < P; ++i) {
    const double a = -r_ + dy * i;
    cdf_nodes_[std::size_t(i + 1)] = cdf_nodes_[std::size_t(i)] + gl_panels([&](double x) { return rho(x); }, a, a + dy, 1);
  }
  norm0_ = std::sqrt(gl_panels([&](double t) { return chi0(t) * chi0(t); }, 0.125 - 1e-3, 0.875 + 1e-3, 1024));
  samples_.resize(std::size_t(samples + 1));
  for (long i = 0; i <= samples; ++i) samples_[std::size_t(i)] = (*this)(double(i) / double(samples));
}

double Bump::rho(double x) const {
  const double y = x / r_;
  if (std::abs(y) >= 1.0) return 0.0;
  return c_ * std::exp(-1.0 / (1.0 - y * y));
}

double Bump::cdf(double y) const {
  if (y <= -r_) return 0.0;
  if (y >= r_) return 1.0;
  const long P = static_cast<long>(cdf_nodes_.size()) - 1;
  const double dy = 2.0 * r_ / P;
  const long i = std::min(P - 1, static_cast<long>((y + r_) / dy));
  const double a = -r_ + dy * i;
  return cdf_nodes_[std::size_t(i)] + gl_panels([&](double x) { return rho(x); }, a, y, 1);
}

double Bump::chi0(double t) const { return cdf(t - 0.25) - cdf(t - 0.75); }

double Bump::operator()(double t) const {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return chi0(t) / norm0_;
}

double Bump::rho_hat(double sigma) const {
  const long panels = std::max(16L, static_cast<long>(std::ceil(r_ * std::abs(sigma) / 2.0)));
  return 2.0 * gl_panels([&](double x) { return rho(x) * std::cos(sigma * x); }, 0.0, r_, panels);
}

cplx Bump::hat(double sigma) const {
  const cplx fh = sigma == 0.0 ? cplx(0.5) : 2.0 * std::polar(1.0, -0.5 * sigma) * std::sin(0.25 * sigma) / sigma;
  return fh * rho_hat(sigma) / norm0_;
}

double Bump::l2norm() const {
  return std::sqrt(gl_panels([&](double t) { return (*this)(t) * (*this)(t); }, 0.0, 1.0, 1536));
}

double Bump::max_hat_at_4ppi(int P) const {
  double m = 0.0;
  for (int p = 1; p <= P; ++p) m = std::max(m, std::abs(hat(4.0 * PI * p)));
  return m;
}

double Bump::decay_constant(double omega_max) const {
  double m = 0.0;
  for (double w = 0.0; w <= omega_max; w += 0.25) m = std::max(m, std::abs(hat(w)) * std::pow(1.0 + w * w, 2.0));
  return m;
}

// ---------------------------------------------------------------- probes

double pole_floor(const KernelModel& model) {
  if (!model.tail) return 0.0;
  return 0.5 * std::max(std::abs(model.tail_even), std::abs(model.tail_odd));
}

cplx probe_hat(const ProbeSpec& spec, const Bump& chi, double omega) {
  const double T = spec.T, w0 = spec.omega0();
  return std::sqrt(T) * (chi.hat(T * (omega + w0)) + chi.hat(T * (omega - w0)));
}

namespace {

void check_spec(const ProbeSpec& spec) {
  const double q = spec.beta / (4.0 * PI);
  if (!(spec.T > 0.0)) throw precondition_error("horizon must be positive");
  if (std::abs(q - std::round(q)) > 1e-9 || std::round(q) < 1.0)
    throw precondition_error("beta must be a positive multiple of 4 pi");
  if (spec.sign != 1 && spec.sign != -1) throw precondition_error("probe sign must be +1 or -1");
  if (spec.omega0() < 1.0 / spec.T) throw precondition_error("omega0 below 1/T, increase j0");
}

// Poles and band edges of Θ_pv inside [lo, hi].
void pv_lattice(const KernelModel& model, double lo, double hi, std::vector<double>& poles,
                std::vector<double>& breaks, double& eps) {
  const long ja = j_omega(lo), jb = j_omega(hi);
  double gap = hi - lo;
  for (long j = ja; j <= jb; ++j) {
    const double l = lambda(j);
    if (l > lo && l < hi && !model.negligible(j)) poles.push_back(l);
    for (double e : {PI * PI * double(j * j - j), PI * PI * double(j * j + j)})
      if (e > lo && e < hi) breaks.push_back(e);
    gap = std::min(gap, l - PI * PI * double(j * j - j));
  }
  eps = gap / 8.0;
}

// (1/2π) ∫_R Θ_pv |ĝ|² for an even |ĝ|², integrated on [lo, hi] ⊂ [0, ∞).
PvResult pv_energy(const KernelModel& model, const std::function<double(double)>& g2, double lo, double hi,
                   double hmax) {
  std::vector<double> poles, breaks;
  double eps = 0.0;
  pv_lattice(model, lo, hi, poles, breaks, eps);
  for (double p : poles) eps = std::min({eps, p - lo, hi - p});
  const auto f = [&](double w) { return cplx(theta_pv(model, w) * g2(w)); };
  PvResult r = pv_integrate(f, poles, eps, lo, hi, hmax, breaks);
  r.value /= PI;
  r.refinement_residual /= PI;
  return r;
}

}  // namespace

ProbeResult probe(const KernelModel& model, const ProbeSpec& spec, const Bump& chi, long N) {
  check_spec(spec);
  const double a_mu = pole_floor(model);
  const double weight = std::pow(lambda(spec.j0), 2) * std::abs(kernel_coef(model, spec.j0));
  if (!(a_mu > 0.0) || weight < a_mu || model.negligible(spec.j0))
    throw precondition_error("pole too weak, increase j0");
  if (N < 2) throw precondition_error("probe grid too coarse");

  const double T = spec.T, w0 = spec.omega0();
  ProbeResult r;
  r.spec = spec;
  std::vector<double> V(std::size_t(N + 1));
  for (long n = 0; n <= N; ++n) {
    const double t = T * double(n) / double(N);
    V[std::size_t(n)] = 2.0 / std::sqrt(T) * std::cos(w0 * t) * chi(t / T);
  }
  std::vector<double> du(static_cast<std::size_t>(N));
  const double h = T / double(N);
  for (long n = 0; n < N; ++n) du[std::size_t(n)] = (V[std::size_t(n + 1)] - V[std::size_t(n)]) / h;
  r.u = Control::from_real(T, du);
  r.v_norm = primitive(r.u).l2norm();

  const double lo = std::max(0.0, w0 - kWindow / T), hi = w0 + kWindow / T;
  const PvResult pv =
      pv_energy(model, [&](double w) { return std::norm(probe_hat(spec, chi, w)); }, lo, hi, 2.0 / T);
  r.pv_value = pv.value.real();
  r.pv_residual = pv.refinement_residual;
  if (r.pv_value == 0.0) throw numerical_error("probe has no principal-value response");
  r.scale = std::sqrt(T / std::abs(r.pv_value));
  return r;
}

// ---------------------------------------------------------------- moments

MomentSolver::MomentSolver(double T, std::vector<long> index, bool regular, const MomentOptions& opt)
    : T_(T), N_(opt.N), regular_(regular), tol_(opt.tol), index_(std::move(index)) {
  if (!(T > 0.0)) throw precondition_error("horizon must be positive");
  std::sort(index_.begin(), index_.end());
  index_.erase(std::unique(index_.begin(), index_.end()), index_.end());
  if (index_.empty()) throw precondition_error("no moments requested");
  const long rows = 2 * static_cast<long>(index_.size()) + (regular ? 1 : 0);
  if (N_ < rows) throw precondition_error("increase N or reduce moment count");
  const double h = T / double(N_), sh = std::sqrt(h);
  A_ = Eigen::MatrixXd::Zero(rows, N_);
  long r = 0;
  for (long j : index_) {
    const double l = lambda(j);
    for (long n = 0; n < N_; ++n) {
      const double tn = h * double(n);
      cplx a;
      if (!regular)
        a = std::polar(1.0, -l * tn) * cell_exp(-l, h);
      else if (j == 0)
        a = h * (T - tn - 0.5 * h);
      else
        a = std::polar(1.0, -l * tn) * cell_exp(-l, h) / (I * l);
      A_(r, n) = a.real() / sh;
      A_(r + 1, n) = a.imag() / sh;
    }
    r += 2;
  }
  if (regular) A_.row(r).setConstant(sh);
  row_scale_ = A_.rowwise().norm();
  for (long i = 0; i < rows; ++i) row_scale_(i) = row_scale_(i) > 0.0 ? 1.0 / row_scale_(i) : 0.0;
  const Eigen::MatrixXd As = row_scale_.asDiagonal() * A_;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  U_ = svd.matrixU();
  V_ = svd.matrixV();
  S_ = svd.singularValues();
}

MomentSolution MomentSolver::solve(const std::map<long, cplx>& targets) const {
  for (const auto& [j, d] : targets)
    if (!std::binary_search(index_.begin(), index_.end(), j)) throw precondition_error("target outside the moment set");
  const long rows = A_.rows();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
  double dmax = 0.0;
  long r = 0;
  for (long j : index_) {
    const auto it = targets.find(j);
    const cplx d = it == targets.end() ? cplx(0.0) : it->second;
    if (j == 0 && std::abs(d.imag()) > 1e-12 * std::max(1.0, std::abs(d.real())))
      throw precondition_error("d_0 must be real");
    b(r) = d.real();
    b(r + 1) = j == 0 ? 0.0 : d.imag();
    dmax = std::max(dmax, std::abs(d));
    r += 2;
  }
  MomentSolution out;
  out.regular = regular_;
  out.index = index_;
  const double h = T_ / double(N_), sh = std::sqrt(h);
  if (dmax == 0.0) {
    out.u = Control::zero(T_, N_);
    out.u.real = true;
    out.residuals.assign(index_.size(), 0.0);
    return out;
  }
  const Eigen::VectorXd bs = row_scale_.asDiagonal() * b;
  const Eigen::VectorXd Ub = U_.transpose() * bs;
  const double smax = S_.size() > 0 ? S_(0) : 0.0;
  const double tol = tol_ * dmax;

  Eigen::VectorXd best;
  double best_alpha = -1.0, best_res = 0.0;
  std::vector<double> best_resid;
  for (int p = -1; p <= 10; ++p) {
    const double alpha = p < 0 ? 0.0 : std::pow(10.0, -16.0 + p) * smax;
    Eigen::VectorXd coef(S_.size());
    for (long i = 0; i < S_.size(); ++i) {
      const double s = S_(i);
      if (alpha == 0.0)
        coef(i) = s > 1e-14 * smax ? Ub(i) / s : 0.0;
      else
        coef(i) = s * Ub(i) / (s * s + alpha * alpha);
    }
    const Eigen::VectorXd x = V_ * coef;
    const Eigen::VectorXd ach = A_ * x;
    std::vector<double> resid;
    double rmax = 0.0;
    long q = 0;
    for (std::size_t i = 0; i < index_.size(); ++i) {
      const double e = std::hypot(ach(q) - b(q), ach(q + 1) - b(q + 1));
      resid.push_back(e);
      rmax = std::max(rmax, e);
      q += 2;
    }
    if (regular_) rmax = std::max(rmax, std::abs(ach(q)));
    if (rmax <= tol) {
      best = x;
      best_alpha = alpha / smax;
      best_res = rmax;
      best_resid = resid;
    }
  }
  if (best_alpha < 0.0) throw numerical_error("ill-conditioned moment matrix: increase N or reduce moment count");
  std::vector<double> u(static_cast<std::size_t>(N_));
  for (long n = 0; n < N_; ++n) u[std::size_t(n)] = best(n) / sh;
  out.u = Control::from_real(T_, u);
  out.residuals = best_resid;
  out.max_residual = best_res;
  out.ridge = best_alpha;
  out.l2norm = out.u.l2norm();
  out.cost_NT = cost_NT(out.u);
  return out;
}

MomentSolution solve_moments(double T, const std::map<long, cplx>& targets, bool regular, const MomentOptions& opt) {
  std::vector<long> idx;
  for (const auto& kv : targets) idx.push_back(kv.first);
  return MomentSolver(T, idx, regular, opt).solve(targets);
}

// ---------------------------------------------------------------- null-moment probes

namespace {

long probe_grid(double T, double w0, const SynthesisOptions& opt) {
  const long n_res = static_cast<long>(std::ceil(T * w0 / opt.resolution));
  const long n_mom = 4 * (opt.J_modes + 1) + 16;
  return std::max({opt.N_min, n_res, n_mom});
}

// Û(ω) for the piecewise-linear primitive, phases by recurrence reseeded every 64 cells.
class PrimitiveSpectrum {
 public:
  explicit PrimitiveSpectrum(const Control& u) : h_(u.h()), y_(primitive(u).y), s_(u.values) {}
  cplx operator()(double omega) const {
    const cplx e0 = cell_exp(-omega, h_), e1 = cell_exp2(-omega, 0.0, h_);
    const cplx z = std::polar(1.0, -omega * h_);
    cplx acc = 0.0, ph = 1.0;
    for (std::size_t n = 0; n < s_.size(); ++n) {
      if (n % 64 == 0) ph = std::polar(1.0, -omega * h_ * static_cast<double>(n));
      acc += ph * (y_[n] * e0 + s_[n] * e1);
      ph *= z;
    }
    return acc;
  }

 private:
  double h_;
  std::vector<cplx> y_, s_;
};

double primitive_pv_energy(const KernelModel& model, const Control& u, double hi) {
  const double T = u.T;
  const PrimitiveSpectrum U(u);
  const PvResult pv = pv_energy(model, [&](double w) { return std::norm(U(w)); }, 0.0, hi, 2.0 / T);
  return pv.value.real();
}

}  // namespace

NullMomentProbe null_moment_probe(const KernelModel& model, const ProbeSpec& spec, const Bump& chi,
                                  const SynthesisOptions& opt) {
  return null_moment_probe_on(model, spec, chi, opt, 0);
}

NullMomentProbe null_moment_probe_on(const KernelModel& model, const ProbeSpec& spec, const Bump& chi,
                                     const SynthesisOptions& opt, long N) {
  const double T = spec.T;
  if (N <= 0) N = probe_grid(T, spec.omega0(), opt);
  NullMomentProbe out;
  out.probe = probe(model, spec, chi, N);
  const Control uV = out.probe.u.scaled(out.probe.scale);

  std::vector<long> idx;
  std::map<long, cplx> d;
  for (long j = 0; j <= opt.J_modes; ++j) {
    idx.push_back(j);
    cplx v = -primitive_fourier(uV, lambda(j));
    if (j == 0) v = v.real();
    d[j] = v;
  }
  const MomentSolution W = MomentSolver(T, idx, true, {N, opt.moment_tol}).solve(d);
  Control U = uV + W.u;
  U.real = true;
  out.correction_norm = primitive(W.u).l2norm();

  const double target = sgn(out.probe.pv_value) * T;
  const double hi = std::max(spec.omega0() + kWindow / T, lambda(opt.J_modes + 2));
  const double pv = primitive_pv_energy(model, U, hi);
  out.c = pv / target;
  if (!(out.c > 0.0)) throw numerical_error("moment correction dominates the probe, increase j0");
  out.u = U.scaled(1.0 / std::sqrt(out.c));
  out.pv_value = target;
  for (long j = 0; j <= opt.J_modes; ++j)
    out.moment_residual = std::max(out.moment_residual, std::abs(primitive_fourier(out.u, lambda(j))));
  out.sobolev_norm = primitive_sobolev_norm(out.u, -opt.nu).value;
  if (out.sobolev_norm > opt.eta) throw precondition_error("correction norm exceeds budget, increase j0");
  return out;
}

// ---------------------------------------------------------------- tangent controls

cplx psi2_projection(const KernelModel& model, const Control& u) {
  const double lk = model.lambda_k();
  const cplx q = q_time(model, Signal(u, 0.5 * lk), Signal(u.conj(), -0.5 * lk), true).value;
  return -0.5 * q * std::polar(1.0, -lk * u.T);
}

double linear_response_max(const Potential& pot, const Control& u, long J) {
  double m = 0.0;
  for (long j = 0; j <= J; ++j) m = std::max(m, std::abs(pot.coef(j) * windowed_fourier(u, lambda(j))));
  return m;
}

double linear_response_norm(const Potential& pot, const Control& u, long J) {
  double s = 0.0;
  for (long j = 0; j <= J; ++j) s += std::norm(pot.coef(j) * windowed_fourier(u, lambda(j)));
  return std::sqrt(s);
}

namespace {

TangentCertificate certify(const Potential& pot, const KernelModel& model, const Control& u, long J, double scale,
                           const ProbeSpec& spec) {
  TangentCertificate c;
  const double T = u.T;
  c.psi2 = psi2_projection(model, u);
  c.psi1_max = linear_response_max(pot, u, J);
  c.psi1_norm = linear_response_norm(pot, u, J);
  c.u_norm = u.l2norm();
  const Primitive p = primitive(u);
  c.u1_norm = p.l2norm();
  c.u1T = std::abs(p.endpoint());
  c.re_over_T2 = std::abs(c.psi2.real()) / (T * T);
  c.im_over_T3 = std::abs(c.psi2.imag()) / (T * T * T);
  c.scale = scale;
  c.j0 = spec.j0;
  c.probe_sign = spec.sign;
  return c;
}

void require_balanced(const Potential& pot, int k) {
  const Classification cl = classify(pot, k);
  if (cl.verdict != Verdict::QUADRATIC_STLC_CANDIDATE)
    throw precondition_error("tangent controls require a balanced potential (verdict " + to_string(cl.verdict) + ")");
}

bool usable_pole(const KernelModel& model, long j) {
  return j != model.k && !model.negligible(j) &&
         std::pow(lambda(j), 2) * std::abs(kernel_coef(model, j)) >= pole_floor(model);
}

long first_pole(const KernelModel& model, double T, double beta, const SynthesisOptions& opt) {
  if (!(pole_floor(model) > 0.0)) throw precondition_error("pole too weak, increase j0");
  const double wmin = std::max(1.0 / T, 4.0 * beta / T) + beta / T;
  long j = std::max(1L, static_cast<long>(std::ceil((2.0 * opt.band_margin * beta / T / (PI * PI) - 1.0) / 2.0)));
  while (lambda(j) < wmin) ++j;
  for (long cap = j + 100000; j < cap; ++j)
    if (usable_pole(model, j)) return j;
  throw precondition_error("pole too weak, increase j0");
}

}  // namespace

TangentPair tangent_controls_on(const Potential& pot, const KernelModel& model, double T, const SynthesisOptions& opt,
                                long N) {
  if (opt.require_balanced) require_balanced(pot, model.k);
  const double beta = opt.beta > 0.0 ? opt.beta : 4.0 * PI;
  const Bump chi(opt.mollifier);
  long j0 = first_pole(model, T, beta, opt);
  std::string last = "no candidate pole";
  for (int attempt = 0; attempt < opt.j0_tries; ++attempt) {
    if (attempt > 0) j0 = std::max(j0 + 1, static_cast<long>(std::ceil(j0 * opt.j0_growth)));
    while (!usable_pole(model, j0)) ++j0;
    if (opt.j0_max > 0 && j0 > opt.j0_max) {
      last += "; next pole index beyond j0_max = " + std::to_string(opt.j0_max);
      break;
    }
    const double sc = sgn(kernel_coef(model, j0));
    SynthesisOptions o = opt;
    o.J_modes = std::max(opt.J_modes, j0 + 8);
    const long NN = N > 0 ? N : probe_grid(T, lambda(j0) + beta / T, o);
    try {
      // pv ≈ −ε₀ T λ²c/β, so ε₀ = −sign·sgn(c_{j0}) gives the requested sign.
      ProbeSpec sp{T, static_cast<int>(-sc), j0, beta};
      ProbeSpec sm{T, static_cast<int>(sc), j0, beta};
      const NullMomentProbe P = null_moment_probe_on(model, sp, chi, o, NN);
      const NullMomentProbe Mn = null_moment_probe_on(model, sm, chi, o, NN);
      const cplx bp = psi2_projection(model, P.u), bm = psi2_projection(model, Mn.u);
      if (!(bp.imag() > 0.0 && bm.imag() < 0.0)) {
        last = "probe pair at j0 = " + std::to_string(j0) + " gives Im psi2 = (" + std::to_string(bp.imag()) + ", " +
               std::to_string(bm.imag()) + ")";
        continue;
      }
      TangentPair out;
      out.T = T;
      const double s_p = std::sqrt(T / bp.imag()), s_m = std::sqrt(T / -bm.imag());
      out.plus = P.u.scaled(s_p);
      out.minus = Mn.u.scaled(s_m);
      out.plus.real = out.minus.real = true;
      out.cert_plus = certify(pot, model, out.plus, o.J_modes, s_p, sp);
      out.cert_minus = certify(pot, model, out.minus, o.J_modes, s_m, sm);
      return out;
    } catch (const precondition_error& e) {
      last = e.what();
    } catch (const numerical_error& e) {
      last = e.what();
    }
  }
  throw numerical_error("no control found along +-i phi_k: " + last);
}

TangentPair tangent_controls(const Potential& pot, const KernelModel& model, double T, const SynthesisOptions& opt) {
  return tangent_controls_on(pot, model, T, opt, 0);
}

namespace {

long smallest_M(double C1, double lk) {
  return std::max(1L, static_cast<long>(std::ceil(2.0 * (2.0 * C1 + lk) / lk - 1e-12)));
}

}  // namespace

RealTangentPair real_tangent_controls(const Potential& pot, const KernelModel& model, double T,
                                      const SynthesisOptions& opt) {
  const int k = model.k;
  if (k == 0) throw precondition_error("real tangent direction unavailable at k=0");
  if (opt.require_balanced) require_balanced(pot, k);
  SynthesisOptions o = opt;
  o.require_balanced = false;
  const double lk = lambda(k);
  std::string last = "no admissible split";
  for (long M = 1; M <= 8; ++M) {
    const double TM = T / (2.0 * M);
    const TangentPair tp = tangent_controls(pot, model, TM, o);
    const long n = tp.plus.N();
    auto chain = [&](const Control& a, const Control& b) {
      if (M == 1) return concat(a, b);
      return concat(concat(a, Control::zero(T - 2.0 * TM, n * (2 * M - 2))), b);
    };
    const Control up = chain(tp.plus, tp.minus), um = chain(tp.minus, tp.plus);
    const cplx bp = psi2_projection(model, up), bm = psi2_projection(model, um);
    const double ap = 4.0 * M * bp.real() / (lk * T * T), am = -4.0 * M * bm.real() / (lk * T * T);
    RealTangentPair out;
    out.T = T;
    out.M = M;
    out.C1 = std::max(tp.cert_plus.re_over_T2, tp.cert_minus.re_over_T2);
    out.M_bound = smallest_M(out.C1, lk);
    out.alpha_plus = ap;
    out.alpha_minus = am;
    if (!(ap >= 1.0 && ap <= 3.0 && am >= 1.0 && am <= 3.0)) {
      last = "alpha = (" + std::to_string(ap) + ", " + std::to_string(am) + ") at M = " + std::to_string(M);
      continue;
    }
    const double sp = T / std::sqrt(bp.real()), sm = T / std::sqrt(-bm.real());
    out.plus = up.scaled(sp);
    out.minus = um.scaled(sm);
    out.plus.real = out.minus.real = true;
    out.cert_plus = certify(pot, model, out.plus, std::max(opt.J_modes, tp.cert_plus.j0 + 8), sp,
                            {T, tp.cert_plus.probe_sign, tp.cert_plus.j0});
    out.cert_minus = certify(pot, model, out.minus, std::max(opt.J_modes, tp.cert_minus.j0 + 8), sm,
                             {T, tp.cert_minus.probe_sign, tp.cert_minus.j0});
    return out;
  }
  throw numerical_error("T too large for tangent basis: " + last);
}

TangentBasis tangent_basis(const Potential& pot, const KernelModel& model, double T, const SynthesisOptions& opt) {
  TangentBasis b;
  b.T = T;
  b.lambda_k = model.lambda_k();
  if (opt.require_balanced) require_balanced(pot, model.k);
  SynthesisOptions o = opt;
  o.require_balanced = false;
  long N = 0;
  if (model.k != 0 && opt.real_tangents) {
    const RealTangentPair rp = real_tangent_controls(pot, model, T, o);
    b.u_p1 = rp.plus;
    b.u_m1 = rp.minus;
    b.has_real = true;
    N = rp.plus.N();
    const cplx rot = std::polar(1.0, -b.lambda_k * T);
    b.b_p1 = rp.cert_plus.psi2 * rot / (T * T);
    b.b_m1 = rp.cert_minus.psi2 * rot / (T * T);
  }
  const TangentPair tp = tangent_controls_on(pot, model, T, o, N);
  b.u_pi = tp.plus;
  b.u_mi = tp.minus;
  b.b_pi = tp.cert_plus.psi2 / T;
  b.b_mi = tp.cert_minus.psi2 / T;
  return b;
}

void measure_basis(TangentBasis& b, const Galerkin& g, long k) {
  const double T = b.T;
  const cplx rot = std::polar(1.0, -b.lambda_k * T);
  b.b_pi = galerkin_psi2(g, k, b.u_pi) / T;
  b.b_mi = galerkin_psi2(g, k, b.u_mi) / T;
  if (b.has_real) {
    b.b_p1 = galerkin_psi2(g, k, b.u_p1) * rot / (T * T);
    b.b_m1 = galerkin_psi2(g, k, b.u_m1) * rot / (T * T);
  }
}

ComplexMotion complex_motion(const TangentBasis& basis, const KernelModel& model, cplx z) {
  const double T = basis.T;
  ComplexMotion out;
  const long n = basis.u_pi.N();
  if (z == 0.0) {
    out.v = Control::zero(2.0 * T, 2 * n);
    out.v.real = true;
    return out;
  }
  struct Cand {
    const Control* u;
    cplx b;
    double power;  // v = √(α/T^power) u
  };
  const cplx rot = std::polar(1.0, -model.lambda_k() * T);
  std::vector<Cand> first, second{{&basis.u_pi, basis.b_pi, 1.0}, {&basis.u_mi, basis.b_mi, 1.0}};
  if (basis.has_real) first = {{&basis.u_p1, basis.b_p1, 2.0}, {&basis.u_m1, basis.b_m1, 2.0}};
  first.push_back({&basis.u_pi, basis.b_pi * rot, 1.0});
  first.push_back({&basis.u_mi, basis.b_mi * rot, 1.0});
  bool found = false;
  for (const Cand& a : first) {
    for (const Cand& c : second) {
      // z = α a.b + β c.b with α, β ≥ 0
      const double det = a.b.real() * c.b.imag() - a.b.imag() * c.b.real();
      if (std::abs(det) < 0.05 * std::abs(a.b) * std::abs(c.b)) continue;
      const double al = (z.real() * c.b.imag() - z.imag() * c.b.real()) / det;
      const double be = (a.b.real() * z.imag() - a.b.imag() * z.real()) / det;
      const double slack = -1e-14 * std::abs(z) / std::max(std::abs(a.b), std::abs(c.b));
      if (al < slack || be < slack) continue;
      out.alpha = std::max(0.0, al);
      out.beta = std::max(0.0, be);
      out.v = concat(a.u->scaled(std::sqrt(out.alpha / std::pow(T, a.power))), c.u->scaled(std::sqrt(out.beta / T)));
      out.predicted = out.alpha * a.b + out.beta * c.b;
      found = true;
      break;
    }
    if (found) break;
  }
  if (!found) {
    for (const Cand& c : second) {
      const double be = (z / c.b).real();
      if (be >= 0.0 && std::abs(z - be * c.b) <= 1e-12 * std::abs(z)) {
        out.beta = be;
        out.v = concat(Control::zero(T, n), c.u->scaled(std::sqrt(be / T)));
        out.predicted = be * c.b;
        found = true;
        break;
      }
    }
  }
  if (!found) {
    if (model.k == 0) throw precondition_error("real tangent direction unavailable at k=0");
    throw precondition_error("T too large for tangent basis");
  }
  out.v.real = true;
  out.u1_norm = primitive(out.v).l2norm();
  const double Tt = 2.0 * T;
  out.cost_bound = std::sqrt(std::abs(z.real()) / (Tt * Tt)) + std::sqrt(std::abs(z.imag()) / Tt);
  return out;
}

// ---------------------------------------------------------------- projection steering

Vec project_k(const Vec& psi, long k) {
  Vec out = psi;
  out(k) = 0.0;
  out(0) = cplx(0.0, out(0).imag());
  return out;
}

ProjectionReport steer_projection(const Galerkin& g, long k, double T, const Vec& psi0, const Vec& target,
                                  const ProjectionOptions& opt) {
  const long J = g.J();
  if (k > J) throw precondition_error("mode k outside the Galerkin range");
  if (psi0.size() != J + 1 || target.size() != J + 1) throw precondition_error("state dimension does not match J_max");
  if (std::abs(target(k)) > 1e-12 || std::abs(target(0).real()) > 1e-12)
    throw precondition_error("target must lie in V_k");
  const Vec g0 = StateVector::ground(J).coeffs;
  ProjectionReport rep;
  rep.bound_L2 = (psi0 - g0).norm() + target.norm();
  if (rep.bound_L2 > opt.delta)
    throw precondition_error("initial state and target must lie within delta of the ground state (distance " +
                             std::to_string(rep.bound_L2) + ")");

  const double mscale = std::max(g.M().col(0).norm(), 1e-300);
  std::vector<long> idx{k};
  for (long j = 0; j <= J; ++j)
    if (j != k && std::abs(g.M()(j, 0)) > 1e-13 * mscale) idx.push_back(j);
  long N = opt.N;
  if (N <= 0) N = std::max(256L, static_cast<long>(std::ceil(2.0 * lambda(J) * T / PI)) + 4 * (J + 1));
  const MomentSolver solver(T, idx, false, {N, 1e-10});

  // Real unknowns x ↔ moments d_j (j ≠ k, d_0 real); residual components of P_k ψ(T) − target on the same modes.
  std::vector<long> free;
  for (long j : idx)
    if (j != k) free.push_back(j);
  long n = 0;
  for (long j : free) n += j == 0 ? 1 : 2;
  auto to_moments = [&](const Eigen::VectorXd& x) {
    std::map<long, cplx> d{{k, 0.0}};
    long q = 0;
    for (long j : free) {
      if (j == 0) {
        d[j] = x(q++);
      } else {
        d[j] = cplx(x(q), x(q + 1));
        q += 2;
      }
    }
    return d;
  };
  auto restrict = [&](const Vec& r) {
    Eigen::VectorXd f(n);
    long q = 0;
    for (long j : free) {
      if (j == 0) {
        f(q++) = r(j).imag();
      } else {
        f(q) = r(j).real();
        f(q + 1) = r(j).imag();
        q += 2;
      }
    }
    return f;
  };
  // Linearization at the ground state: δψ_j = i m_j e^{−iλ_j T} conj(d_j).
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  {
    long q = 0;
    for (long j : free) {
      const cplx c = I * g.M()(j, 0) * std::polar(1.0, -lambda(j) * T);
      if (j == 0) {
        B(q, q) = c.imag();
        ++q;
      } else {
        B(q, q) = c.real();
        B(q, q + 1) = c.imag();
        B(q + 1, q) = c.imag();
        B(q + 1, q + 1) = -c.real();
        q += 2;
      }
    }
  }

  const StateVector s0{psi0, 0.0};
  struct Eval {
    Control u;
    Vec psi;
    Vec r;
    Eigen::VectorXd f;
    double err;
  };
  auto evaluate = [&](const Eigen::VectorXd& x) {
    Eval e;
    e.u = x.size() == 0 || x.isZero(0.0) ? Control::zero(T, N) : solver.solve(to_moments(x)).u;
    e.u.real = true;
    e.psi = g.evolve(e.u, s0).final.coeffs;
    e.r = project_k(e.psi, k) - target;
    e.f = restrict(e.r);
    e.err = e.r.norm();
    return e;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eval cur = evaluate(x);
  rep.trace.push_back(cur.err);
  int it = 0;
  while (cur.err > opt.tol && it < opt.max_iter) {
    ++it;
    const Eigen::VectorXd step = -B.partialPivLu().solve(cur.f);
    double lam = 1.0;
    Eval next = evaluate(x + step);
    for (int bt = 0; bt < 6 && !(next.err < cur.err); ++bt) {
      lam *= 0.5;
      next = evaluate(x + lam * step);
    }
    if (!std::isfinite(next.err) || !(next.err < cur.err)) {
      std::string tr;
      for (double e : rep.trace) tr += " " + std::to_string(e);
      throw numerical_error("target outside numerical neighborhood; reduce delta (trace" + tr + ")");
    }
    const Eigen::VectorXd s_ = lam * step, y = next.f - cur.f;
    B += (y - B * s_) * s_.transpose() / s_.squaredNorm();
    x += s_;
    cur = std::move(next);
    rep.trace.push_back(cur.err);
  }
  rep.final_state = cur.psi;
  rep.error = cur.err;
  rep.iterations = it;
  if (rep.error > opt.tol) {
    std::string tr;
    for (double e : rep.trace) tr += " " + std::to_string(e);
    throw numerical_error("projection iteration did not converge; trace" + tr);
  }
  const Control& u = cur.u;
  rep.u = u;
  rep.u_norm = u.l2norm();
  rep.cost_NT = cost_NT(u);
  return rep;
}

// ---------------------------------------------------------------- full steering

SteeringReport steer_full(const Galerkin& g, const KernelModel& model, double T, const Vec& target,
                          const SteerOptions& opt) {
  const long k = model.k, J = g.J();
  const Vec g0 = StateVector::ground(J).coeffs;
  if (target.size() != J + 1) throw precondition_error("state dimension does not match J_max");
  if (std::abs(target.norm() - 1.0) > 1e-10) throw precondition_error("target must have unit norm");
  SteeringReport rep;
  rep.z_target = target(k) - (k == 0 ? 1.0 : 0.0);
  const double dev = (target - g0).norm();
  rep.bound_L2 = std::sqrt(std::abs(target(k))) + dev;
  rep.bound_H1 = std::sqrt(std::abs(rep.z_target.real()) / (T * T)) + std::sqrt(std::abs(rep.z_target.imag()) / T) + dev;
  auto fail = [&](const std::string& why) {
    rep.converged = false;
    rep.status = "FAILED";
    rep.reason = why;
    return rep;
  };
  if (dev <= 1e-15) {
    rep.converged = true;
    rep.status = "CONVERGED";
    rep.u = Control::zero(T, 1);
    rep.u.real = true;
    return rep;
  }
  const Classification cl = classify(g.potential(), static_cast<int>(k));
  if (cl.verdict != Verdict::QUADRATIC_STLC_CANDIDATE)
    rep.warnings.push_back("classifier verdict " + to_string(cl.verdict) + ", no convergence expected");

  SynthesisOptions so = opt.synth;
  so.require_balanced = false;
  so.real_tangents = opt.real_tangents;
  so.J_modes = std::max(so.J_modes, J);
  if (so.j0_max <= 0) so.j0_max = J - 4;
  TangentBasis basis;
  try {
    basis = tangent_basis(g.potential(), model, 0.25 * T, so);
    if (opt.measure_basis) measure_basis(basis, g, k);
  } catch (const std::exception& e) {
    return fail(std::string("tangent basis: ") + e.what());
  }
  const Vec target_proj = project_k(target, k);
  const double tol = opt.tol > 0.0 ? opt.tol : 1e-3 * std::abs(rep.z_target) + 1e-10;
  const double lk = model.lambda_k();

  cplx z = rep.z_target;
  Control u;
  Vec psiT;
  for (int it = 0; it < opt.max_iter; ++it) {
    try {
      const ComplexMotion cm = complex_motion(basis, model, z * std::polar(1.0, 0.5 * lk * T));
      const Vec half = g.evolve(cm.v, StateVector::ground(J)).final.coeffs;
      ProjectionOptions po = opt.proj;
      po.N = cm.v.N();
      const ProjectionReport pr = steer_projection(g, k, 0.5 * T, half, target_proj, po);
      u = concat(cm.v, pr.u);
      psiT = pr.final_state;
    } catch (const std::exception& e) {
      rep.iterations = it;
      return fail(e.what());
    }
    const cplx zeta = psiT(k) - (k == 0 ? 1.0 : 0.0);
    const double e = std::abs(zeta - rep.z_target);
    rep.trace.push_back(e);
    rep.iterations = it + 1;
    if (e <= tol) {
      rep.converged = true;
      break;
    }
    z += opt.theta * (rep.z_target - zeta);
    if (!std::isfinite(std::abs(z)) || std::abs(z) > 100.0 * std::abs(rep.z_target) + 1.0)
      return fail("fixed-point iteration diverged");
  }
  u.real = true;
  rep.u = u;
  const Vec psi = g.evolve(u, StateVector::ground(J)).final.coeffs;
  rep.z_final = psi(k) - (k == 0 ? 1.0 : 0.0);
  rep.final_error = (psi - target).norm();
  rep.proj_error = (project_k(psi, k) - target_proj).norm();
  rep.u_norm = u.l2norm();
  const Primitive p = primitive(u);
  rep.u1_norm = p.l2norm();
  rep.cost_NT = cost_NT(u);
  if (!rep.converged) return fail("iteration cap reached");
  rep.status = "CONVERGED";
  return rep;
}

// ---------------------------------------------------------------- balanced potentials

BalancedFamily default_balanced_family(int k, long J) {
  if (k < 0) throw precondition_error("mode index must be nonnegative");
  PotentialDesc a;
  a.kind = PotentialDesc::Kind::Function;
  a.f = [](double x) { return 0.5 * x * x; };
  a.has_slopes = true;
  a.slope0 = 0.0;
  a.slope1 = 1.0;
  BalancedFamily fam;
  fam.A = cosine_coefficients(a, J);
  fam.A.m[std::size_t(k)] = 0.0;
  fam.A.source = "x^2/2 - <x^2/2,phi_k> phi_k";
  PotentialDesc b;
  b.kind = PotentialDesc::Kind::CosinePoly;
  b.terms = {{k + 1, std::sqrt(2.0)}};
  fam.B = cosine_coefficients(b, J);
  fam.B.source = "phi_{k+1}";
  return fam;
}

BalancedPotential find_balanced_potential(int k, const BalancedFamily& fam) {
  const long J = std::max(fam.A.J(), fam.B.J());
  auto a_of = [&](double s) { return interaction_coefficients(add(fam.A, fam.B, s), k, J).a_k; };
  BalancedPotential out;
  const int n = std::max(fam.scan, 2);
  for (int i = 0; i < n; ++i) {
    const double s = fam.s_lo + (fam.s_hi - fam.s_lo) * i / (n - 1);
    out.scan.emplace_back(s, a_of(s));
  }
  long pick = -1;
  for (std::size_t i = 0; i + 1 < out.scan.size(); ++i) {
    const double a0 = out.scan[i].second, a1 = out.scan[i + 1].second;
    if (a0 == 0.0 || a0 * a1 < 0.0) {
      if (pick < 0 || std::abs(out.scan[i].first) < std::abs(out.scan[std::size_t(pick)].first)) pick = long(i);
    }
  }
  if (pick < 0) throw precondition_error("family does not bracket a_k = 0");
  double lo = out.scan[std::size_t(pick)].first, hi = out.scan[std::size_t(pick) + 1].first;
  double s = lo;
  if (out.scan[std::size_t(pick)].second != 0.0) {
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(a_of, lo, hi, out.scan[std::size_t(pick)].second,
                                                     out.scan[std::size_t(pick) + 1].second,
                                                     boost::math::tools::eps_tolerance<double>(52), iters);
    s = 0.5 * (r.first + r.second);
    if (std::abs(a_of(r.first)) < std::abs(a_of(s))) s = r.first;
    if (std::abs(a_of(r.second)) < std::abs(a_of(s))) s = r.second;
  }
  out.s = s;
  out.pot = add(fam.A, fam.B, s);
  out.pot.m[std::size_t(k)] = 0.0;
  out.pot.source = "balanced family, s = " + std::to_string(s);
  const KernelModel m = interaction_coefficients(out.pot, k, J);
  out.a_k = m.a_k;
  out.scale = std::abs(m.a) + 0.5 * lambda(k) * std::abs(m.K0);
  if (std::abs(out.a_k) > 1e-10 * std::max(out.scale, 1e-300)) throw numerical_error("root refinement failed");
  return out;
}

}  // namespace stlc
