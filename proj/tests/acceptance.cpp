#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "stlc/synthesis.hpp"

using namespace stlc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double x) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", x);
  return b;
}

Potential linear(long J) { return cosine_coefficients(PotentialDesc::linear(), J); }

Control gaussian(std::mt19937_64& rng, double T, long N, bool real = true) {
  std::normal_distribution<double> nd;
  std::vector<cplx> v(static_cast<std::size_t>(N));
  for (cplx& x : v) x = real ? cplx(nd(rng)) : cplx(nd(rng), nd(rng));
  return Control(T, v, real);
}

Control unit_H(std::mt19937_64& rng, double T, long N) {
  Control u = project_zero_mean(gaussian(rng, T, N));
  u.real = true;
  return u.scaled(1.0 / u.l2norm());
}

// 1. a_0 = 1, K(0) = 1/12 for x − 1/2 at k = 0.
Outcome c1() {
  const KernelModel m = interaction_coefficients(linear(10000), 0, 10000);
  const double ea = std::abs(m.a - 1.0), ek = std::abs(m.K0 - 1.0 / 12.0);
  return {ea <= 1e-6 && ek <= 1e-6, "|a-1|=" + num(ea) + " |K0-1/12|=" + num(ek)};
}

// 2. Norm preservation.
Outcome c2() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const Galerkin g(linear(256), 32);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double T = 0.05 + 0.95 * ud(rng);
    Control u = gaussian(rng, T, 4096);
    u = u.scaled(ud(rng) / u.l2norm());
    const Trajectory tr = g.evolve(u, StateVector::ground(32), 256);
    for (const StateVector& s : tr.samples) worst = std::max(worst, std::abs(s.norm() - 1.0));
    worst = std::max(worst, std::abs(tr.final.norm() - 1.0));
  }
  return {worst <= 1e-8, "max |norm-1|=" + num(worst)};
}

// 3. Second-order state against the quadratic form.
Outcome c3() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(0.1, 1.0);
  const Potential pot = linear(256);
  const Galerkin g(pot, 32);
  double worst = 0.0;
  for (int k : {0, 2}) {
    const KernelModel model = interaction_coefficients(pot, k, 4000);
    for (int i = 0; i < 25; ++i) {
      Control u = gaussian(rng, ud(rng), 64);
      u = u.scaled(ud(rng) / u.l2norm());
      const SecondOrderFd fd = second_order_fd(g, u);
      const cplx via_q = second_order(g, model, u).via_q;
      const double e = std::abs(fd.psi2(k) - via_q) / (1.0 + std::pow(u.l2norm(), 2));
      worst = std::max(worst, e);
    }
  }
  return {worst <= 1e-6, "max rel=" + num(worst)};
}

// 4. Time and frequency evaluations.
Outcome c4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ud(0.2, 1.0);
  const KernelModel m = interaction_coefficients(linear(32), 0, 32);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double T = ud(rng);
    const Control u = project_zero_mean(gaussian(rng, T, 64)), v = project_zero_mean(gaussian(rng, T, 64));
    const cplx qt = q_time(m, u, v);
    const cplx qf = q_fourier(m, u, v).total;
    worst = std::max(worst, std::abs(qt - qf) / (std::abs(qt) + primitive(u).l2norm() * primitive(v).l2norm()));
  }
  return {worst <= 1e-4, "max rel=" + num(worst)};
}

// 5. Indicator against the closed series.
Outcome c5() {
  const KernelModel m = interaction_coefficients(linear(10000), 0, 10000);
  double worst = 0.0;
  for (double T : {0.1, 0.5, 2.0}) {
    double ref = 0.0;
    for (long j = 10000; j >= 1; --j) {
      const double l = lambda(j);
      ref += 2.0 * m.c[std::size_t(j)] / (l * l) * (std::sin(l * T) - l * T);
    }
    ref -= 2.0 * T * m.tail_sum(1.0);
    worst = std::max(worst, std::abs(q_time(m, Control::from_real(T, {1.0}), Control::from_real(T, {1.0})).imag() - ref));
  }
  return {worst <= 1e-8, "max abs=" + num(worst)};
}

// 6. Per-mode double integral for the centred ramp.
Outcome c6() {
  double worst = 0.0;
  for (double T : {0.3, 1.0, 20.0})
    for (long j : {1L, 5L, 20L}) {
      const double l = lambda(j);
      const double ref = -T * T * T / (6 * l) - T * T * std::sin(l * T) / (2 * l * l) -
                         2 * T * std::cos(l * T) / (l * l * l) + 2 * std::sin(l * T) / std::pow(l, 4);
      const auto ramp = [T](double t) { return cplx(t - 0.5 * T); };
      const cplx got = 2.0 * causal_pair_smooth(ramp, 0.0, ramp, 0.0, l, T);
      worst = std::max(worst, std::abs(got.imag() - ref) / std::max(1.0, std::abs(ref)));
    }
  return {worst <= 1e-10, "max rel=" + num(worst)};
}

// 7. Coercivity residual shrinks with T; the long ramp has negative form.
Outcome c7() {
  const KernelModel m = interaction_coefficients(linear(400), 0, 400);
  std::vector<double> cT;
  for (double T : {0.4, 0.2, 0.1, 0.05}) {
    std::mt19937_64 rng(7);
    double min_ratio = 1e300;
    for (int i = 0; i < 100; ++i) {
      const Control u = unit_H(rng, T, 64);
      const CoercivityRecord r = coercivity_residual(m, u, u, 0.125);
      min_ratio = std::min(min_ratio, r.q.imag() / r.n_l2);
    }
    cT.push_back(2.0 - min_ratio);
  }
  const bool mono = cT[0] > cT[1] && cT[1] > cT[2] && cT[2] > cT[3] && cT[3] > 0.0;
  const double T = 20.0;
  const long N = 4096;
  std::vector<double> v(N);
  for (long n = 0; n < N; ++n) v[std::size_t(n)] = (n + 0.5) * T / N - 0.5 * T;
  const KernelModel mr = interaction_coefficients(linear(4000), 0, 4000);
  const double q = q_time(mr, Control::from_real(T, v), Control::from_real(T, v)).imag();
  return {mono && q < 0.0, "c(T)=" + num(cT[0]) + "," + num(cT[1]) + "," + num(cT[2]) + "," + num(cT[3]) +
                               " ImQ(ramp,T=20)=" + num(q)};
}

// 8. Drift certificate at T = 0.05.
Outcome c8() {
  std::mt19937_64 rng(8);
  const Potential pot = linear(256);
  const Galerkin g(pot, 32);
  const KernelModel m = interaction_coefficients(pot, 0, 4000);
  double worst = -1e300;
  for (int i = 0; i < 100; ++i) {
    const DriftCertificate c = drift_certificate(g, m, unit_H(rng, 0.05, 64));
    worst = std::max(worst, c.projection.imag() / c.up_norm2);
  }
  return {worst <= -0.5, "max Im/|u1|^2=" + num(worst)};
}

// 9. Θ_reg growth envelope is stable under grid extension.
Outcome c9() {
  const KernelModel m = interaction_coefficients(linear(1000), 0, 1000);
  auto envelope = [&](double lo, double hi) {
    double e = 0.0;
    for (double w = lo; w < hi; w += 2.311) {
      const long j = j_omega(w);
      if (std::abs(w - lambda(j)) < 1e-6) continue;
      const double jw = japanese(w);
      e = std::max(e, std::abs(theta_split(m, w).reg_part) * std::sqrt(jw) / std::log(1.0 + jw));
    }
    return e;
  };
  const double a = envelope(0.5, 1e4);
  const double b = std::max(a, envelope(1e4, 4e4));
  const double ch = (b - a) / a;
  return {ch < 0.05, "max(1e4)=" + num(a) + " max(4e4)=" + num(b) + " change=" + num(ch)};
}

// 10. Bessel inequality.
Outcome c10() {
  std::mt19937_64 rng(10);
  double worst = 0.0;
  for (double T : {0.3, 1.0})
    for (int i = 0; i < 100; ++i) {
      const Control gg = gaussian(rng, T, 256, false);
      double s = 0.0;
      for (long j = 0; j <= 200; ++j) s += std::norm(moment(gg, lambda(j)));
      worst = std::max(worst, s / ((1.0 + T) * std::pow(gg.l2norm(), 2)));
    }
  return {worst <= 1.0, "max ratio=" + num(worst)};
}

// 11. Integration-by-parts identity.
Outcome c11() {
  std::mt19937_64 rng(11);
  IppKernel k;
  k.K = [](double s, double t) { return cplx(std::exp(-(t - s) * (t - s))); };
  k.d1K = [](double s, double t) { return cplx(2.0 * (t - s) * std::exp(-(t - s) * (t - s))); };
  k.d2K = [](double s, double t) { return cplx(-2.0 * (t - s) * std::exp(-(t - s) * (t - s))); };
  k.d21K = [](double s, double t) { return cplx((2.0 - 4.0 * (t - s) * (t - s)) * std::exp(-(t - s) * (t - s))); };
  k.w = [](double) { return cplx(0.0); };
  const Control u = gaussian(rng, 1.5, 512, false), v = gaussian(rng, 1.5, 512, false);
  const IppResult r = ipp_reduce(k, u, v);
  const double rel = r.residual / std::abs(r.lhs);

  const cplx alpha(0.4, -1.1), beta(2.0, 0.5);
  IppKernel a;
  a.K = [&](double s, double t) { return alpha * std::abs(t - s) + beta; };
  a.d1K = [&](double s, double t) { return t > s ? -alpha : alpha; };
  a.d2K = [&](double s, double t) { return t > s ? alpha : -alpha; };
  a.d21K = [](double, double) { return cplx(0.0); };
  a.w = [&](double) { return -2.0 * alpha; };
  const Control p = project_zero_mean(gaussian(rng, 0.7, 40, false)), q = project_zero_mean(gaussian(rng, 0.7, 40, false));
  const IppResult ra = ipp_reduce(a, p, q);
  const cplx ref = -2.0 * alpha * inner(primitive(p), primitive(q));
  const double ea = std::max(std::abs(ra.lhs - ref), std::abs(ra.rhs - ref)) / std::abs(ref);
  return {rel <= 1e-8 && ea <= 1e-12, "gaussian rel=" + num(rel) + " affine rel=" + num(ea)};
}

struct Balanced {
  Potential pot;
  KernelModel model;
};

const Balanced& balanced() {
  static const Balanced b = [] {
    const BalancedPotential bp = find_balanced_potential(1, default_balanced_family(1, 200));
    return Balanced{bp.pot, interaction_coefficients(bp.pot, 1, 4000)};
  }();
  return b;
}

// 12. Tangent control certificates.
Outcome c12() {
  const Balanced& b = balanced();
  bool ok = true;
  std::string d;
  double re[2][2];
  int i = 0;
  for (double T : {0.1, 0.2}) {
    const TangentPair tp = tangent_controls(b.pot, b.model, T);
    for (int s = 0; s < 2; ++s) {
      const TangentCertificate& c = s == 0 ? tp.cert_plus : tp.cert_minus;
      const double sign = s == 0 ? 1.0 : -1.0;
      ok = ok && c.psi1_max <= 1e-8 * c.u_norm && std::abs(c.psi2.imag() - sign * T) <= 1e-9 * T;
      re[i][s] = std::abs(c.psi2.real()) / (T * T);
      d += " T=" + num(T) + (s == 0 ? "+" : "-") + " psi1/|u|=" + num(c.psi1_max / c.u_norm) +
           " Im/T=" + num(c.psi2.imag() / T) + " |Re|/T^2=" + num(re[i][s]);
    }
    ++i;
  }
  for (int s = 0; s < 2; ++s) {
    const double r = re[0][s] / re[1][s];
    ok = ok && r <= 2.0 && r >= 0.5;
  }
  return {ok, d};
}

// 13. Full steering and the drift obstruction.
Outcome c13() {
  const Balanced& b = balanced();
  const long J = 80;
  const double eps = 1e-3, T = 0.2;
  const Galerkin g(b.pot, J);
  Vec t = Vec::Zero(J + 1);
  t(0) = std::sqrt(1.0 - eps * eps);
  t(1) = cplx(0.0, eps);
  SteerOptions o;
  o.tol = 1e-2 * eps;
  const SteeringReport r = steer_full(g, b.model, T, t, o);
  const bool pos = r.converged && r.final_error <= 1e-4;

  const Potential lin = linear(J);
  const Galerkin g0(lin, J);
  Vec t0 = Vec::Zero(J + 1);
  t0(0) = cplx(std::sqrt(1.0 - eps * eps), eps);
  const SteeringReport rn = steer_full(g0, interaction_coefficients(lin, 0, 4000), T, t0, o);
  const bool neg = rn.status == "FAILED";
  std::string reason = r.reason.substr(0, 120);
  return {pos && neg, "balanced: " + r.status + " err=" + num(r.final_error) +
                          (reason.empty() ? "" : " (" + reason + ")") + "; drift: " + rn.status};
}

// 14. Moment solver.
Outcome c14() {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> nd;
  std::vector<long> idx;
  for (long j = 0; j <= 19; ++j) idx.push_back(j);
  const MomentSolver s(1.0, idx, false, {1024, 1e-10});
  std::map<long, cplx> d;
  for (long j : idx) d[j] = j == 0 ? cplx(nd(rng)) : cplx(nd(rng), nd(rng));
  const MomentSolution a = s.solve(d);
  double worst = 0.0;
  for (long j : idx) worst = std::max(worst, std::abs(windowed_fourier(a.u, lambda(j)) - d[j]));
  for (auto& kv : d) kv.second *= 0.5;
  const MomentSolution h = s.solve(d);
  return {worst <= 1e-8 && h.cost_NT < a.cost_NT,
          "max residual=" + num(worst) + " N_T=" + num(a.cost_NT) + " -> " + num(h.cost_NT)};
}

}  // namespace

int main() {
  const std::vector<std::pair<double, std::function<Outcome()>>> criteria{
      {1, c1},     {30, c2},  {60, c3},  {60, c4},  {1, c5},  {1, c6},   {60, c7},
      {120, c8},   {10, c9},  {5, c10},  {5, c11},  {300, c12}, {600, c13}, {10, c14}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < criteria[i].first;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2zu: %s  [%.2f s / %.0f s]  %s%s\n", i + 1, pass ? "PASS" : "FAIL", dt, criteria[i].first,
                o.detail.c_str(), in_time ? "" : " (over time budget)");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
