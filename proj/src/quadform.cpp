#include "stlc/quadform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlc {

namespace {

constexpr long kResync = 64;

void require_same_grid(const Control& a, const Control& b) {
  if (a.N() != b.N() || std::abs(a.T - b.T) > 1e-14 * std::max(a.T, b.T))
    throw precondition_error("horizon mismatch");
}

cplx causal_raw(const cplx* f, double alpha, const cplx* g, double beta, double Lambda, long N, double h) {
  const cplx g1b = cell_exp(beta - Lambda, h);
  const cplx g2 = cell_exp2(beta - Lambda, alpha + Lambda, h);
  const cplx decay = std::polar(1.0, -Lambda * h);
  const cplx inject = decay * cell_exp(alpha + Lambda, h);
  const cplx ea = std::polar(1.0, alpha * h), eb = std::polar(1.0, beta * h);
  cplx F = 0.0, pa = 1.0, pb = 1.0, acc = 0.0, comp = 0.0;
  for (long n = 0; n < N; ++n) {
    if (n % kResync == 0) {
      pa = std::polar(1.0, alpha * h * double(n));
      pb = std::polar(1.0, beta * h * double(n));
    }
    const cplx fa = f[n] * pa;
    const cplx term = g[n] * pb * (F * g1b + fa * g2) - comp;
    const cplx next = acc + term;
    comp = (next - acc) - term;
    acc = next;
    F = decay * F + fa * inject;
    pa *= ea;
    pb *= eb;
  }
  return acc;
}

// ∫ f e^{iαt} conj(g e^{iγt})
cplx carrier_inner(const Control& f, double alpha, const Control& g, double gamma) {
  const double h = f.h(), d = alpha - gamma;
  std::vector<cplx> p(f.values.size());
  for (std::size_t n = 0; n < p.size(); ++n)
    p[n] = f.values[n] * std::conj(g.values[n]) * std::polar(1.0, d * h * double(n));
  return pairwise_sum(p) * cell_exp(d, h);
}

struct V2 {
  cplx a, b;
  V2& operator+=(const V2& o) {
    a += o.a;
    b += o.b;
    return *this;
  }
};
V2 operator+(V2 x, const V2& y) { return x += y; }
V2 operator*(double s, const V2& x) { return {s * x.a, s * x.b}; }
V2 operator-(const V2& x, const V2& y) { return {x.a - y.a, x.b - y.b}; }
double magnitude(const V2& x) { return std::abs(x.a) + std::abs(x.b); }

template <class V>
V pairwise(const V* v, std::size_t n) {
  if (n <= 16) {
    V s{};
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  return pairwise(v, n / 2) + pairwise(v + n / 2, n - n / 2);
}

template <class V>
struct PvOut {
  V value{};
  V coarse{};  // corrections computed with a single panel per pole
};

template <class V, class G>
PvOut<V> pv_engine(const G& g, std::vector<double> poles, double eps, double a, double b, double hmax,
                   const std::vector<double>& breaks) {
  if (!(b > a)) throw precondition_error("empty integration interval");
  if (hmax <= 0.0) hmax = (b - a) / 64.0;
  std::sort(poles.begin(), poles.end());
  poles.erase(std::remove_if(poles.begin(), poles.end(), [&](double p) { return p <= a || p >= b; }), poles.end());
  for (std::size_t i = 0; i < poles.size(); ++i) {
    if (poles[i] - eps < a || poles[i] + eps > b) throw precondition_error("ε too large for pole lattice");
    if (i > 0 && poles[i] - poles[i - 1] <= 2.0 * eps) throw precondition_error("ε too large for pole lattice");
  }
  std::vector<double> edges{a, b};
  for (double p : poles) {
    edges.push_back(p - eps);
    edges.push_back(p + eps);
  }
  for (double x : breaks)
    if (x > a && x < b) edges.push_back(x);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  struct Job {
    double x0, w;
    double pole;  // NaN for a plain panel
  };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Job> jobs;
  auto excluded = [&](double x) {
    auto it = std::lower_bound(poles.begin(), poles.end(), x);
    if (it != poles.end() && *it - x < eps) return true;
    if (it != poles.begin() && x - *(it - 1) < eps) return true;
    return false;
  };
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double x0 = edges[i], x1 = edges[i + 1];
    if (x1 - x0 <= 0.0 || excluded(0.5 * (x0 + x1))) continue;
    const long n = std::max(1L, static_cast<long>(std::ceil((x1 - x0) / hmax)));
    for (long k = 0; k < n; ++k) jobs.push_back({x0 + (x1 - x0) * k / n, (x1 - x0) / n, nan});
  }
  const std::size_t plain = jobs.size();
  const double pw = std::min(hmax, 0.5 * eps);
  const long pn = std::max(2L, static_cast<long>(std::ceil(eps / pw)));
  for (double p : poles)
    for (long k = 0; k < pn; ++k) jobs.push_back({eps * k / pn, eps / pn, p});

  const GaussRule& gr = gauss_rule(16);
  auto panel = [&](const Job& jb) {
    V s{};
    for (std::size_t q = 0; q < gr.x.size(); ++q) {
      const double x = jb.x0 + 0.5 * jb.w * (1.0 + gr.x[q]);
      if (std::isnan(jb.pole))
        s += gr.w[q] * g(x);
      else
        s += gr.w[q] * (g(jb.pole + x) + g(jb.pole - x));
    }
    return 0.5 * jb.w * s;
  };
  std::vector<V> out(jobs.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < static_cast<long>(jobs.size()); ++i) out[std::size_t(i)] = panel(jobs[std::size_t(i)]);

  PvOut<V> res;
  res.value = pairwise(out.data(), out.size());
  std::vector<V> coarse(poles.size());
  for (std::size_t i = 0; i < poles.size(); ++i) coarse[i] = panel({0.0, eps, poles[i]});
  std::vector<V> base(out.begin(), out.begin() + static_cast<long>(plain));
  res.coarse = pairwise(base.data(), base.size()) + pairwise(coarse.data(), coarse.size());
  return res;
}

// Horner evaluation of û₁(ω) for the primitive of a piecewise-constant control.
struct PrimitiveTransform {
  std::vector<cplx> y, s;
  double h;
  explicit PrimitiveTransform(const Control& u) : h(u.h()) {
    const Primitive p = primitive(u);
    y.assign(p.y.begin(), p.y.end() - 1);
    s = u.values;
  }
  cplx operator()(double omega) const {
    const cplx z = std::polar(1.0, -omega * h);
    cplx Y = 0.0, S = 0.0;
    for (std::size_t n = y.size(); n-- > 0;) {
      Y = Y * z + y[n];
      S = S * z + s[n];
    }
    return Y * cell_exp(-omega, h) + S * cell_exp2(-omega, 0.0, h);
  }
};

}  // namespace

cplx causal_pair(const Control& f, double alpha, const Control& g, double beta, double Lambda) {
  require_same_grid(f, g);
  return causal_raw(f.values.data(), alpha, g.values.data(), beta, Lambda, f.N(), f.h());
}

cplx causal_pair_smooth(const std::function<cplx(double)>& f, double alpha, const std::function<cplx(double)>& g,
                        double beta, double Lambda, double T, int order) {
  const double rate = std::max({std::abs(alpha), std::abs(beta), std::abs(Lambda), 1.0});
  const long cells = std::max(8L, static_cast<long>(std::ceil(rate * T / 2.0)));
  const double h = T / double(cells);
  const GaussRule& gr = gauss_rule(order);
  const std::size_t q = gr.x.size();
  cplx F = 0.0, acc = 0.0;
  std::vector<cplx> parts(static_cast<std::size_t>(cells));
  for (long n = 0; n < cells; ++n) {
    const double a = h * double(n);
    cplx cell = 0.0, inject = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      const double tau = 0.5 * h * (1.0 + gr.x[i]), t = a + tau, wi = 0.5 * h * gr.w[i];
      // ∫_a^t e^{−iΛ(t−s)} f(s) e^{iαs} ds on the sub-interval [a, t]
      cplx tri = 0.0;
      for (std::size_t k = 0; k < q; ++k) {
        const double s = a + 0.5 * tau * (1.0 + gr.x[k]);
        tri += 0.5 * tau * gr.w[k] * std::polar(1.0, -Lambda * (t - s) + alpha * s) * f(s);
      }
      cell += wi * g(t) * std::polar(1.0, beta * t) * (std::polar(1.0, -Lambda * tau) * F + tri);
      inject += wi * std::polar(1.0, -Lambda * (h - tau) + alpha * t) * f(t);
    }
    parts[std::size_t(n)] = cell;
    F = std::polar(1.0, -Lambda * h) * F + inject;
  }
  acc = pairwise_sum(parts);
  return acc;
}

QTime q_time(const KernelModel& model, const Signal& u, const Signal& v, bool modulated, bool parallel) {
  if (u.parts.empty() || v.parts.empty()) return {};
  const Control& ref = u.parts.front().u;
  for (const auto& p : u.parts) require_same_grid(ref, p.u);
  for (const auto& p : v.parts) require_same_grid(ref, p.u);
  const long N = ref.N(), J = model.J();
  const double h = ref.h(), shift = modulated ? 0.5 * model.lambda_k() : 0.0;

  std::vector<std::vector<cplx>> vbar;
  for (const auto& p : v.parts) vbar.push_back(p.u.conj().values);

  auto mode = [&](long j) {
    const double c = model.c[std::size_t(j)];
    if (c == 0.0) return cplx(0.0);
    const double L = lambda(j) - shift;
    cplx s = 0.0;
    for (const auto& up : u.parts)
      for (std::size_t iv = 0; iv < v.parts.size(); ++iv) {
        const double gamma = v.parts[iv].alpha;
        const cplx* f = up.u.values.data();
        const cplx* g = vbar[iv].data();
        s += causal_raw(f, up.alpha, g, -gamma, L, N, h) + causal_raw(g, -gamma, f, up.alpha, L, N, h);
      }
    return c * s;
  };
  std::vector<cplx> per(static_cast<std::size_t>(J + 1));
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (long j = 0; j <= J; ++j) per[std::size_t(j)] = mode(j);
  } else {
    for (long j = 0; j <= J; ++j) per[std::size_t(j)] = mode(j);
  }

  QTime out;
  out.value = pairwise_sum(per);
  if (model.tail) {
    cplx ip = 0.0;
    for (const auto& up : u.parts)
      for (const auto& vp : v.parts) ip += carrier_inner(up.u, up.alpha, vp.u, vp.alpha);
    const double S = model.tail_sum(1.0) + shift * model.tail_sum(2.0);
    const cplx corr = -2.0 * I * ip * S;
    out.value += corr;
    out.tail_estimate = std::abs(corr);
  }
  return out;
}

cplx q_time(const KernelModel& model, const Control& u, const Control& v, bool modulated) {
  return q_time(model, Signal(u), Signal(v), modulated).value;
}

PvResult pv_integrate(const std::function<cplx(double)>& f, const std::vector<double>& poles, double eps,
                      double a, double b, double hmax, const std::vector<double>& breaks) {
  const PvOut<cplx> r = pv_engine<cplx>(f, poles, eps, a, b, hmax, breaks);
  return {r.value, eps, std::abs(r.value - r.coarse)};
}

QuadFormBreakdown q_fourier(const KernelModel& model, const Control& u, const Control& v,
                            const FourierOptions& opt) {
  require_same_grid(u, v);
  if (!in_H(u, 1e-10) || !in_H(v, 1e-10)) throw precondition_error("project to zero mean first");
  const long J = model.J();
  QuadFormBreakdown out;

  std::vector<cplx> dirac(static_cast<std::size_t>(J + 1));
  for (long j = 0; j <= J; ++j) {
    const double l = lambda(j);
    dirac[std::size_t(j)] = model.c[std::size_t(j)] *
                            (windowed_fourier(u, l) * std::conj(windowed_fourier(v, l)) +
                             windowed_fourier(u, -l) * std::conj(windowed_fourier(v, -l)));
  }
  out.dirac = PI * pairwise_sum(dirac);
  out.inv_sq = -model.a * 2.0 * PI * inner(primitive(u), primitive(v));

  std::vector<double> poles, breaks;
  for (long j = 1; j <= J; ++j) {
    if (model.c[std::size_t(j)] != 0.0 && !model.negligible(j)) {
      poles.push_back(lambda(j));
      poles.push_back(-lambda(j));
    }
    breaks.push_back(PI * PI * double(j * j + j));
    breaks.push_back(-PI * PI * double(j * j + j));
  }
  double eps = opt.eps;
  if (eps <= 0.0) {
    std::vector<double> sp = poles;
    std::sort(sp.begin(), sp.end());
    double gap = 3.0 * PI * PI;
    for (std::size_t i = 1; i < sp.size(); ++i) gap = std::min(gap, sp[i] - sp[i - 1]);
    eps = gap / 8.0;
  }
  out.pv_eps = eps;
  const double Omega = opt.omega_max > 0.0 ? opt.omega_max : PI * PI * double(J * J + J);

  std::vector<double> l3c(static_cast<std::size_t>(J + 1)), l2(l3c.size());
  for (long j = 1; j <= J; ++j) {
    const double l = lambda(j);
    l2[std::size_t(j)] = l * l;
    l3c[std::size_t(j)] = l * l * l * model.c[std::size_t(j)];
  }
  const double t1 = model.tail_sum(-1.0), t3 = model.tail_sum(1.0), t5 = model.tail_sum(3.0);
  auto R = [&](double w) {
    const double w2 = w * w;
    double s = 0.0;
    for (long j = 1; j <= J; ++j) s += l3c[std::size_t(j)] / (l2[std::size_t(j)] - w2);
    return s + t1 + w2 * t3 + w2 * w2 * t5;
  };
  auto pvw = [&](double w) {
    const long j = j_omega(w);
    if (model.negligible(j)) return 0.0;
    const double l = lambda(j);
    return 0.5 * l * l * kernel_coef(model, j) / (l - std::abs(w));
  };
  const PrimitiveTransform U(u), Vt(v);
  auto g = [&](double w) {
    const cplx phi = U(w) * std::conj(Vt(w));
    return V2{R(w) * phi, pvw(w) * phi};
  };
  const PvOut<V2> r = pv_engine<V2>(g, poles, eps, -Omega, Omega, PI / (4.0 * u.T), breaks);
  out.pv = r.value.b;
  out.reg = r.value.a - r.value.b;
  out.total = (out.dirac - 2.0 * I * (out.inv_sq + out.pv + out.reg)) / (2.0 * PI);
  const double trunc = 2.0 * Omega / 3.0 * (std::abs(R(Omega)) + std::abs(pvw(Omega))) *
                       (std::abs(U(Omega) * std::conj(Vt(Omega))) + std::abs(U(-Omega) * std::conj(Vt(-Omega))));
  out.certified_error = (magnitude(r.value - r.coarse) + trunc) / PI;
  return out;
}

IppResult ipp_reduce(const IppKernel& k, const Control& u, const Control& v, int order) {
  require_same_grid(u, v);
  const long N = u.N();
  const double h = u.h(), T = u.T;
  const GaussRule& g = gauss_rule(order);
  const std::size_t q = g.x.size();
  const Primitive U = primitive(u), Vp = primitive(v);
  std::vector<double> x(q), w(q);
  for (std::size_t i = 0; i < q; ++i) {
    x[i] = 0.5 * (1.0 + g.x[i]);
    w[i] = 0.5 * g.w[i];
  }
  auto u1 = [&](long n, double tau) { return U.y[std::size_t(n)] + U.slope[std::size_t(n)] * tau; };
  auto v1 = [&](long n, double tau) { return Vp.y[std::size_t(n)] + Vp.slope[std::size_t(n)] * tau; };

  // Cell pair (m: s-cell, n: t-cell) contributions to both double integrals.
  auto pair = [&](long m, long n, cplx& lhs, cplx& rhs) {
    const double a = h * m, b = h * n;
    cplx L = 0.0, R = 0.0;
    if (m != n) {
      for (std::size_t i = 0; i < q; ++i)
        for (std::size_t j = 0; j < q; ++j) {
          const double s = a + h * x[i], t = b + h * x[j], ww = w[i] * w[j] * h * h;
          L += ww * k.K(s, t);
          R += ww * k.d21K(s, t) * u1(m, h * x[i]) * std::conj(v1(n, h * x[j]));
        }
      lhs = L * u.values[std::size_t(m)] * std::conj(v.values[std::size_t(n)]);
      rhs = R;
      return;
    }
    // Diagonal cell: collapse each triangle onto the unit square.
    for (std::size_t i = 0; i < q; ++i)
      for (std::size_t j = 0; j < q; ++j) {
        const double r = h * x[i], ww = w[i] * w[j] * h * h * x[i], r2 = r * x[j];
        // s < t
        L += ww * k.K(a + r2, a + r);
        R += ww * k.d21K(a + r2, a + r) * u1(m, r2) * std::conj(v1(m, r));
        // s > t
        L += ww * k.K(a + r, a + r2);
        R += ww * k.d21K(a + r, a + r2) * u1(m, r) * std::conj(v1(m, r2));
      }
    lhs = L * u.values[std::size_t(m)] * std::conj(v.values[std::size_t(m)]);
    rhs = R;
  };

  std::vector<cplx> lhs(static_cast<std::size_t>(N * N)), rhs(lhs.size());
#pragma omp parallel for schedule(static)
  for (long m = 0; m < N; ++m)
    for (long n = 0; n < N; ++n) pair(m, n, lhs[std::size_t(m * N + n)], rhs[std::size_t(m * N + n)]);

  std::vector<cplx> diag(static_cast<std::size_t>(N)), b1(diag.size()), b2(diag.size());
  for (long n = 0; n < N; ++n) {
    cplx d = 0.0, e = 0.0, f = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
      const double tau = h * x[i], t = h * n + tau;
      d += w[i] * k.w(t) * u1(n, tau) * std::conj(v1(n, tau));
      e += w[i] * k.d2K(T, t) * std::conj(v1(n, tau));
      f += w[i] * k.d1K(t, T) * u1(n, tau);
    }
    diag[std::size_t(n)] = h * d;
    b1[std::size_t(n)] = h * e;
    b2[std::size_t(n)] = h * f;
  }
  IppResult out;
  out.lhs = pairwise_sum(lhs);
  const cplx uT = U.endpoint(), vT = std::conj(Vp.endpoint());
  out.rhs = pairwise_sum(diag) + pairwise_sum(rhs) - uT * pairwise_sum(b1) - vT * pairwise_sum(b2) +
            k.K(T, T) * uT * vT;
  out.residual = std::abs(out.lhs - out.rhs);
  return out;
}

CoercivityRecord coercivity_residual(const KernelModel& model, const Control& u, const Control& v, double nu) {
  if (!in_H(u, 1e-10) || !in_H(v, 1e-10)) throw precondition_error("project to zero mean first");
  CoercivityRecord rec;
  rec.q = q_time(model, u, v, true);
  const Primitive U = primitive(u), Vp = primitive(v);
  rec.r = rec.q - 2.0 * I * model.a_k * inner(U, Vp);
  rec.n_l2 = U.l2norm() * Vp.l2norm();
  rec.n_nu = primitive_sobolev_norm(u, -nu).value * primitive_sobolev_norm(v, -nu).value;
  rec.ratio = rec.n_l2 > 0.0 ? std::abs(rec.r) / (std::pow(u.T, nu) * rec.n_l2) : 0.0;
  return rec;
}

ModulationRecord modulation_residual(const KernelModel& model, const Control& u, double nu) {
  ModulationRecord rec;
  const double T = u.T, lk = model.lambda_k(), half = 0.5 * lk;
  const Control uh = project_zero_mean(u);
  const Primitive P = primitive(u), Ph = primitive(uh);
  const double n1 = P.l2norm(), nh = Ph.l2norm();
  const double nneg = primitive_sobolev_norm(uh, -nu).value;
  const double end2 = std::norm(P.endpoint());

  const cplx qk = q_time(model, uh, uh, true), q = q_time(model, uh, uh, false);
  rec.r_shift = std::abs(qk - q + I * lk * model.K0 * nh * nh);
  rec.b_shift = T * T * nh * nh + nneg * nneg;

  const Control ub = u.conj();
  const cplx qconj = q_time(model, Signal(u, half), Signal(ub, -half), true).value;
  rec.r_conj = std::abs(qconj - qk);
  rec.b_conj = T * (std::abs(model.a_k) + T) * n1 * n1 + nneg * nneg + end2;

  // v = uρ_k and its conjugate, each with the constant that projects it onto H.
  const cplx vT = moment(u, half), vbT = moment(ub, -half);
  const Control ones = Control::from_real(T, std::vector<double>(u.values.size(), 1.0));
  Signal pv(u, half), pvb(ub, -half);
  pv.add(ones.scaled(-vT / T));
  pvb.add(ones.scaled(-vbT / T));
  const cplx qpv = q_time(model, pv, pvb, true).value;
  const cplx qv = qconj;
  rec.r_proj = std::abs(qv - qpv);
  rec.b_proj = T * T * n1 * n1 + nneg * nneg + end2;
  return rec;
}

}  // namespace stlc
