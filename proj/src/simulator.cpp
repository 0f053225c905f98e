#include "stlc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace stlc {

namespace {

// J_0(x) .. J_n(x) by Miller's backward recurrence, x >= 0.
std::vector<double> bessel_j_all(double x, long n) {
  std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  const long start = 2 * ((std::max(n, static_cast<long>(x)) + 20 + static_cast<long>(std::sqrt(40.0 * (x + 1.0)))) / 2);
  double jp1 = 0.0, j = 1e-300, norm = 0.0;
  for (long m = start; m >= 1; --m) {
    const double jm1 = 2.0 * static_cast<double>(m) / x * j - jp1;
    jp1 = j;
    j = jm1;
    if (m - 1 <= n) out[static_cast<std::size_t>(m - 1)] = j;
    if ((m - 1) % 2 == 0 && m - 1 > 0) norm += 2.0 * j;
    if (std::abs(j) > 1e250) {
      jp1 *= 1e-250;
      j *= 1e-250;
      norm *= 1e-250;
      for (double& v : out) v *= 1e-250;
    }
  }
  norm += j;
  for (double& v : out) v /= norm;
  return out;
}

double real_norm(const Control& u) {
  for (const cplx& v : u.values)
    if (v.imag() != 0.0) throw precondition_error("the control must be real");
  return u.l2norm();
}

Vec ground_vec(long J) {
  Vec v = Vec::Zero(J + 1);
  v(0) = 1.0;
  return v;
}

}  // namespace

StateVector StateVector::ground(long J) { return {ground_vec(J), 0.0}; }

Vec chebyshev_expm_action(const std::function<Vec(const Vec&)>& apply_H, double lo, double hi, double t,
                          const Vec& v, double tol) {
  if (t < 0.0)
    return chebyshev_expm_action([&](const Vec& w) { Vec r = apply_H(w); return Vec(-r); }, -hi, -lo, -t, v, tol);
  const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
  const cplx phase = std::polar(1.0, -c * t);
  const double x = r * t;
  if (x == 0.0) return phase * v;
  const long nmax = static_cast<long>(x + 10.0 * std::cbrt(x) + 40.0);
  const std::vector<double> Jn = bessel_j_all(x, nmax);
  auto Hhat = [&](const Vec& w) { return Vec((apply_H(w) - c * w) / r); };

  Vec w0 = v, w1 = Hhat(v);
  Vec acc = Jn[0] * w0 + 2.0 * (-I) * Jn[1] * w1;
  cplx coef = -I;
  int small = 0;
  for (long n = 2; n <= nmax; ++n) {
    Vec w2 = 2.0 * Hhat(w1) - w0;
    coef *= -I;
    const double a = 2.0 * Jn[static_cast<std::size_t>(n)];
    acc += (coef * a) * w2;
    w0.swap(w1);
    w1.swap(w2);
    if (static_cast<double>(n) > x && std::abs(a) < tol) {
      if (++small >= 2) break;
    } else {
      small = 0;
    }
  }
  return phase * acc;
}

Galerkin::Galerkin(const Potential& pot, long J) : pot_(pot), J_(J) {
  if (J < 1) throw precondition_error("J_max must be at least 1");
  lam_.resize(J + 1);
  M_.resize(J + 1, J + 1);
  for (long j = 0; j <= J; ++j) {
    lam_(j) = lambda(j);
    for (long m = 0; m <= j; ++m) M_(j, m) = M_(m, j) = pot.matrix_entry(j, m);
  }
  row_abs_ = M_.cwiseAbs().rowwise().sum();
  m_lo_ = (M_.diagonal() - (row_abs_ - M_.diagonal().cwiseAbs())).minCoeff();
  m_hi_ = (M_.diagonal() + (row_abs_ - M_.diagonal().cwiseAbs())).maxCoeff();
}

Vec Galerkin::step(const Vec& psi, double u, double h) const {
  if (u == 0.0) {
    Vec out(psi.size());
    for (long j = 0; j <= J_; ++j) out(j) = std::polar(1.0, -lam_(j) * h) * psi(j);
    return out;
  }
  const double au = std::abs(u);
  const double lo = (lam_ - au * row_abs_).minCoeff(), hi = (lam_ + au * row_abs_).maxCoeff();
  auto H = [&](const Vec& w) { return Vec(lam_.cwiseProduct(w) - u * (M_ * w)); };
  return chebyshev_expm_action(H, lo, hi, h, psi);
}

Trajectory Galerkin::evolve(const Control& u, const StateVector& psi0, long sample_every) const {
  real_norm(u);
  if (psi0.J() != J_) throw precondition_error("state dimension does not match J_max");
  if (std::abs(psi0.norm() - 1.0) > 1e-10) throw precondition_error("initial state must have unit norm");
  Trajectory tr;
  Vec psi = psi0.coeffs;
  const double h = u.h();
  auto top = [&](const Vec& p) { tr.top_mode_weight = std::max(tr.top_mode_weight, std::norm(p(J_))); };
  top(psi);
  if (sample_every > 0) tr.samples.push_back({psi, psi0.time});
  for (long n = 0; n < u.N(); ++n) {
    psi = step(psi, u.values[static_cast<std::size_t>(n)].real(), h);
    top(psi);
    if (sample_every > 0 && ((n + 1) % sample_every == 0 || n + 1 == u.N()))
      tr.samples.push_back({psi, psi0.time + u.t(n + 1)});
  }
  tr.final = {psi, psi0.time + u.T};
  return tr;
}

StateVector Galerkin::final_state(const Control& u) const { return evolve(u, StateVector::ground(J_)).final; }

Vec Galerkin::multiply_phase(const Vec& psi, double theta) const {
  return chebyshev_expm_action([&](const Vec& w) { return Vec(M_ * w); }, m_lo_, m_hi_, theta, psi);
}

Vec linearized(const Galerkin& g, const Control& u) {
  Vec out(g.J() + 1);
  for (long j = 0; j <= g.J(); ++j) {
    const double l = lambda(j);
    out(j) = I * g.M()(j, 0) * std::polar(1.0, -l * u.T) * moment(u, l);
  }
  return out;
}

cplx galerkin_psi2(const Galerkin& g, long k, const Control& u) {
  real_norm(u);
  if (k < 0 || k > g.J()) throw precondition_error("mode k outside the Galerkin range");
  const double lk = lambda(k);
  std::vector<cplx> parts(static_cast<std::size_t>(g.J() + 1));
  for (long j = 0; j <= g.J(); ++j) {
    const double cj = g.M()(k, j) * g.M()(j, 0);
    parts[static_cast<std::size_t>(j)] = cj == 0.0 ? cplx(0.0) : cj * causal_pair(u, 0.0, u, lk, lambda(j));
  }
  return -std::polar(1.0, -lk * u.T) * pairwise_sum(parts);
}

SecondOrder second_order(const Galerkin& g, const KernelModel& model, const Control& u) {
  const long k = model.k;
  SecondOrder r;
  r.value = galerkin_psi2(g, k, u);
  const double lk = lambda(k);
  r.via_q = -0.5 * std::polar(1.0, -lk * u.T) * q_time(model, Signal(u, 0.5 * lk), Signal(u.conj(), -0.5 * lk), true).value;
  r.discrepancy = std::abs(r.value - r.via_q);
  return r;
}

SecondOrderFd second_order_fd(const Galerkin& g, const Control& u, double eps) {
  const double un = real_norm(u);
  SecondOrderFd r;
  if (un == 0.0) {
    r.psi2 = Vec::Zero(g.J() + 1);
    return r;
  }
  if (eps <= 0.0) eps = 0.05 / un;
  const Vec g0 = ground_vec(g.J());
  auto even = [&](double e) {
    const Vec p = g.final_state(u.scaled(e)).coeffs, m = g.final_state(u.scaled(-e)).coeffs;
    return Vec((0.5 * (p + m) - g0) / (e * e));
  };
  const Vec d1 = even(eps), d2 = even(0.5 * eps);
  r.psi2 = (4.0 * d2 - d1) / 3.0;
  r.richardson_change = (r.psi2 - d2).norm();
  return r;
}

double iterated_primitive_norm(const Control& u, int p) {
  if (p < 1) throw precondition_error("order must be positive");
  const GaussRule& gr = gauss_rule(p + 1);
  const double h = u.h();
  std::vector<cplx> y(static_cast<std::size_t>(p + 1), 0.0);  // y[i] = u_i(t_n)
  std::vector<double> cells(static_cast<std::size_t>(u.N()));
  auto eval = [&](int i, double tau, cplx c) {
    cplx s = 0.0;
    double f = 1.0;
    for (int l = 0; l < i; ++l) {
      if (l > 0) f *= tau / l;
      s += y[static_cast<std::size_t>(i - l)] * f;
    }
    f *= tau / i;
    return s + c * f;
  };
  for (long n = 0; n < u.N(); ++n) {
    const cplx c = u.values[static_cast<std::size_t>(n)];
    double acc = 0.0;
    for (std::size_t q = 0; q < gr.x.size(); ++q) acc += gr.w[q] * std::norm(eval(p, 0.5 * h * (1.0 + gr.x[q]), c));
    cells[static_cast<std::size_t>(n)] = 0.5 * h * acc;
    std::vector<cplx> next(y.size(), 0.0);
    for (int i = 1; i <= p; ++i) next[static_cast<std::size_t>(i)] = eval(i, h, c);
    y.swap(next);
  }
  return std::sqrt(pairwise_sum(cells));
}

namespace {

// ‖u^{(r)}‖ from r-th divided differences of the cell values.
double discrete_derivative_norm(const Control& u, int r) {
  std::vector<cplx> d = u.values;
  const double h = u.h();
  for (int i = 0; i < r && d.size() > 1; ++i) {
    for (std::size_t n = 0; n + 1 < d.size(); ++n) d[n] = (d[n + 1] - d[n]) / h;
    d.pop_back();
  }
  if (static_cast<int>(u.values.size()) <= r) return 0.0;
  double s = 0.0;
  for (const cplx& v : d) s += std::norm(v);
  return std::sqrt(h * s);
}

void require_small_control(const Control& u, double un) {
  if (un > 1.0 + 1e-12) throw precondition_error("control must satisfy ||u|| <= 1");
  if (u.T > 1.0) throw precondition_error("horizon must satisfy T <= 1");
}

}  // namespace

DriftCertificate drift_certificate(const Galerkin& g, const KernelModel& model, const Control& u, int order,
                                   double nu) {
  const double un = real_norm(u);
  if (un > 1.0 + 1e-12) throw precondition_error("control must satisfy ||u|| <= 1");
  const long k = model.k;
  if (k > g.J()) throw precondition_error("mode k outside the Galerkin range");
  const Potential& pot = g.potential();
  if (std::abs(g.M()(k, 0)) > 1e-10 * std::max(1.0, pot.l2norm()))
    throw precondition_error("<mu, phi_k> must vanish");
  if (order > 1 && (std::abs(pot.slope0) > 1e-12 || std::abs(pot.slope1) > 1e-12))
    throw precondition_error("order p > 1 requires a potential with vanishing boundary slopes");

  DriftCertificate c;
  c.order = order;
  c.nu = nu;
  const Vec psi = g.final_state(u).coeffs;
  const Vec dev = psi - ground_vec(g.J());
  c.projection = dev(k);
  c.a_p = higher_drift_coefficients(model, order).back();
  const double up = iterated_primitive_norm(u, order);
  c.up_norm2 = up * up;
  c.lhs = std::abs(c.projection + I * c.a_p * c.up_norm2);
  const Primitive u1 = primitive(u);
  const double u1n = u1.l2norm(), T = u.T;
  if (order == 1)
    c.gamma = std::pow(T, nu);
  else
    c.gamma = T + discrete_derivative_norm(u, 2 * order - 3) + std::pow(T, 2 - 2 * order) * u1n;
  c.gamma_term = c.gamma * c.up_norm2;
  c.state_dev2 = dev.squaredNorm();
  c.u1T = std::abs(u1.endpoint());
  c.closed_loop_rhs = std::sqrt(T) * u1n + std::sqrt(c.state_dev2);
  const double den = c.gamma_term + c.state_dev2;
  c.fitted_C = den > 0.0 ? c.lhs / den : 0.0;
  return c;
}

RemainderRecord remainder_norms(const Galerkin& g, const KernelModel& model, const Control& u) {
  const double un = real_norm(u);
  require_small_control(u, un);
  const long k = model.k;
  RemainderRecord r;
  const Vec psi = g.final_state(u).coeffs;
  const Vec psi1 = linearized(g, u);
  const Vec rem = psi - ground_vec(g.J()) - psi1;
  const Primitive u1 = primitive(u);
  const double u1n = u1.l2norm(), u1T = std::abs(u1.endpoint());
  r.quad_rem = rem.norm();
  r.quad_bound = std::pow(u1n, 1.5) * std::sqrt(un) + u1T * u1T;
  r.quad_ratio = r.quad_bound > 0.0 ? r.quad_rem / r.quad_bound : 0.0;
  r.cubic_rem = std::abs(rem(k) - second_order(g, model, u).value);
  r.cubic_bound = std::pow(u1n, 2.125) * std::pow(un, 0.875);
  r.cubic_ratio = r.cubic_bound > 0.0 ? r.cubic_rem / r.cubic_bound : 0.0;
  const double theta = u1.endpoint().real();
  r.psi_tilde = g.multiply_phase(psi, theta);
  r.gauge_norm_defect = std::abs(r.psi_tilde.norm() - 1.0);
  r.gauge_roundtrip = (g.multiply_phase(r.psi_tilde, -theta) - psi).norm();
  return r;
}

UnreachableScan unreachable_scan(const Galerkin& g, const KernelModel& model, double T, double eps, long count,
                                 std::uint64_t seed, long cells) {
  if (model.a_k == 0.0) throw precondition_error("drift coefficient a_k vanishes");
  if (!(eps > 0.0 && eps < 1.0)) throw precondition_error("eps must lie in (0,1)");
  const long k = model.k;
  Vec target = std::sqrt(1.0 - eps * eps) * ground_vec(g.J());
  target(k) += I * (model.a_k > 0.0 ? 1.0 : -1.0) * eps;
  std::vector<double> dist(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) {
    std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1));
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(cells));
    for (double& x : v) x = nd(rng);
    Control u = Control::from_real(T, v);
    const double n = u.l2norm();
    if (n > 0.0) u = u.scaled((1.0 - ud(rng)) / n);
    dist[static_cast<std::size_t>(i)] = (g.final_state(u).coeffs - target).norm();
  }
  UnreachableScan s;
  s.eps = eps;
  s.count = count;
  s.min_distance = count > 0 ? *std::min_element(dist.begin(), dist.end()) : 0.0;
  for (double d : dist)
    if (d <= 0.5 * eps) ++s.reached;
  return s;
}

}  // namespace stlc
