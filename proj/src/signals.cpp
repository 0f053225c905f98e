#include "stlc/signals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlc {

namespace {

void require_same_grid(const Control& a, const Control& b) {
  if (a.N() != b.N() || std::abs(a.T - b.T) > 1e-14 * std::max(a.T, b.T))
    throw precondition_error("horizon mismatch");
}

struct LatticeEnergy {
  double value = 0.0, tail = 0.0;
  bool divergent = false;
};

// (1/2π)∫ ⟨ω⟩^{2s} |ĝ(ω)|² dω for ĝ(ω) = C(e^{−iωh}) · B_p(ω), where B_1 is the transform of a
// cell indicator and B_2 that of a unit hat. Folding ω = (θ + 2πm)/h turns the integral into one
// over θ ∈ (0, 2π) against a lattice-summed weight.
LatticeEnergy lattice_energy(const std::vector<cplx>& coef, double h, int p, double s, long M) {
  LatticeEnergy out;
  const double e = 2.0 * s - 2.0 * p;
  out.divergent = e >= -1.0;
  const double tail_coef = out.divergent
                               ? 0.0
                               : 2.0 * std::pow(2.0 * PI, e) * std::pow(M + 0.5, e + 1.0) / (-e - 1.0) *
                                     std::pow(h, 2.0 - 2.0 * s);

  const std::size_t deg = std::max<std::size_t>(coef.size(), 1);
  const double wmax = std::min(4.0 * PI / static_cast<double>(deg), PI / 4.0);
  std::vector<double> edges{0.0};
  double b = h / 4.0;
  while (b < wmax && b < PI / 2.0) {
    edges.push_back(b);
    b *= 2.0;
  }
  const double left = edges.back();
  const std::vector<double> graded = edges;
  const double right = 2.0 * PI - left;
  const long inner = std::max(1L, static_cast<long>(std::ceil((right - left) / wmax)));
  for (long i = 1; i <= inner; ++i) edges.push_back(left + (right - left) * double(i) / double(inner));
  for (std::size_t i = graded.size() - 1; i-- > 0;) edges.push_back(2.0 * PI - graded[i]);

  const GaussRule& g = gauss_rule(16);
  const long panels = static_cast<long>(edges.size()) - 1;
  std::vector<double> main(static_cast<std::size_t>(panels)), tail(main.size());
#pragma omp parallel for schedule(dynamic)
  for (long pi = 0; pi < panels; ++pi) {
    const double a = edges[std::size_t(pi)], w = edges[std::size_t(pi) + 1] - a;
    double acc = 0.0, tacc = 0.0;
    for (std::size_t q = 0; q < g.x.size(); ++q) {
      const double th = a + 0.5 * w * (1.0 + g.x[q]);
      const cplx z = std::polar(1.0, -th);
      cplx c = 0.0;
      for (std::size_t n = coef.size(); n-- > 0;) c = c * z + coef[n];
      const double two_sin = 2.0 * std::sin(0.5 * th);
      double lat = 0.0;
      for (long m = -M; m <= M; ++m) {
        const double qv = th + 2.0 * PI * static_cast<double>(m);
        const double r = two_sin / qv;
        lat += std::pow(r * r, p) * std::pow(1.0 + (qv / h) * (qv / h), s);
      }
      const double c2 = std::norm(c);
      acc += g.w[q] * c2 * h * h * lat;
      tacc += g.w[q] * c2 * std::pow(two_sin * two_sin, p) * tail_coef;
    }
    main[std::size_t(pi)] = 0.5 * w * acc;
    tail[std::size_t(pi)] = 0.5 * w * tacc;
  }
  const double scale = 1.0 / (2.0 * PI * h);
  out.tail = out.divergent ? std::numeric_limits<double>::infinity() : scale * pairwise_sum(tail);
  out.value = scale * pairwise_sum(main) + (out.divergent ? 0.0 : out.tail);
  return out;
}

long lattice_cutoff(const Control& u) {
  const double omega_max = std::max(1e4, 100.0 * static_cast<double>(u.N()) / u.T);
  return std::max(200L, static_cast<long>(std::ceil(omega_max * u.h() / (2.0 * PI))));
}

NormResult finish(const LatticeEnergy& le) {
  NormResult r;
  r.value = std::sqrt(std::max(le.value, 0.0));
  r.truncated = le.divergent;
  r.tail = le.divergent ? le.tail : (r.value > 0.0 ? 0.5 * le.tail / r.value : std::sqrt(le.tail));
  return r;
}

}  // namespace

Control::Control(double T_, std::vector<cplx> v, bool real_) : T(T_), values(std::move(v)), real(real_) {
  if (!(T > 0.0)) throw precondition_error("horizon must be positive");
  if (values.empty()) throw precondition_error("control needs at least one cell");
  if (real)
    for (const cplx& x : values)
      if (x.imag() != 0.0) throw precondition_error("real control with imaginary part");
}

Control Control::from_real(double T, const std::vector<double>& v) {
  return Control(T, std::vector<cplx>(v.begin(), v.end()), true);
}

Control Control::zero(double T, long N) {
  if (N < 1) throw precondition_error("control needs at least one cell");
  return Control(T, std::vector<cplx>(static_cast<std::size_t>(N)), true);
}

cplx Control::at(double t) const {
  if (t < 0.0 || t >= T) return 0.0;
  const long n = std::min(N() - 1, static_cast<long>(t / h()));
  return values[static_cast<std::size_t>(n)];
}

double Control::l2norm() const {
  std::vector<double> sq(values.size());
  for (std::size_t n = 0; n < values.size(); ++n) sq[n] = std::norm(values[n]);
  return std::sqrt(h() * pairwise_sum(sq));
}

Control Control::scaled(cplx s) const {
  Control c = *this;
  for (cplx& x : c.values) x *= s;
  c.real = real && s.imag() == 0.0;
  return c;
}

Control Control::conj() const {
  Control c = *this;
  for (cplx& x : c.values) x = std::conj(x);
  return c;
}

Control Control::refined(long factor) const {
  if (factor < 1) throw precondition_error("refinement factor must be positive");
  std::vector<cplx> v;
  v.reserve(values.size() * static_cast<std::size_t>(factor));
  for (const cplx& x : values)
    for (long i = 0; i < factor; ++i) v.push_back(x);
  return Control(T, std::move(v), real);
}

Control operator+(const Control& a, const Control& b) {
  require_same_grid(a, b);
  Control c = a;
  for (std::size_t n = 0; n < c.values.size(); ++n) c.values[n] += b.values[n];
  c.real = a.real && b.real;
  return c;
}

Control operator-(const Control& a, const Control& b) { return a + b.scaled(-1.0); }

cplx inner(const Control& u, const Control& v) {
  require_same_grid(u, v);
  std::vector<cplx> p(u.values.size());
  for (std::size_t n = 0; n < p.size(); ++n) p[n] = u.values[n] * std::conj(v.values[n]);
  return u.h() * pairwise_sum(p);
}

cplx Primitive::at(double t) const {
  const double hh = h();
  const long N = static_cast<long>(slope.size());
  if (t <= 0.0) return y.front();
  if (t >= T) return y.back();
  const long n = std::min(N - 1, static_cast<long>(t / hh));
  return y[static_cast<std::size_t>(n)] + slope[static_cast<std::size_t>(n)] * (t - hh * static_cast<double>(n));
}

double Primitive::l2norm() const { return std::sqrt(std::max(0.0, inner(*this, *this).real())); }

Primitive primitive(const Control& u) {
  Primitive p;
  p.T = u.T;
  p.slope = u.values;
  p.y.resize(u.values.size() + 1);
  const double h = u.h();
  // Kahan-compensated running sum keeps u₁(T) accurate for long grids.
  cplx s = 0.0, comp = 0.0;
  p.y[0] = 0.0;
  for (std::size_t n = 0; n < u.values.size(); ++n) {
    const cplx term = h * u.values[n] - comp;
    const cplx next = s + term;
    comp = (next - s) - term;
    s = next;
    p.y[n + 1] = s;
  }
  return p;
}

cplx inner(const Primitive& a, const Primitive& b) {
  if (a.slope.size() != b.slope.size() || std::abs(a.T - b.T) > 1e-14 * std::max(a.T, b.T))
    throw precondition_error("horizon mismatch");
  const double h = a.h();
  std::vector<cplx> parts(a.slope.size());
  for (std::size_t n = 0; n < parts.size(); ++n) {
    const cplx y0 = a.y[n], c = a.slope[n], z0 = b.y[n], d = b.slope[n];
    parts[n] = h * y0 * std::conj(z0) + 0.5 * h * h * (y0 * std::conj(d) + c * std::conj(z0)) +
               h * h * h / 3.0 * c * std::conj(d);
  }
  return pairwise_sum(parts);
}

Control project_zero_mean(const Control& u) {
  const cplx mean = primitive(u).endpoint() / u.T;
  Control c = u;
  for (cplx& x : c.values) x -= mean;
  return c;
}

bool in_H(const Control& u, double tol) {
  return std::abs(primitive(u).endpoint()) <= tol * std::max(1.0, u.l2norm() * std::sqrt(u.T));
}

cplx windowed_fourier(const Control& u, double omega) {
  const double h = u.h();
  std::vector<cplx> parts(u.values.size());
  for (std::size_t n = 0; n < parts.size(); ++n)
    parts[n] = u.values[n] * std::polar(1.0, -omega * h * static_cast<double>(n));
  return pairwise_sum(parts) * cell_exp(-omega, h);
}

cplx primitive_fourier(const Control& u, double omega) {
  const Primitive p = primitive(u);
  const double h = u.h();
  const cplx e0 = cell_exp(-omega, h), e1 = cell_exp2(-omega, 0.0, h);
  std::vector<cplx> parts(u.values.size());
  for (std::size_t n = 0; n < parts.size(); ++n)
    parts[n] = std::polar(1.0, -omega * h * static_cast<double>(n)) * (p.y[n] * e0 + u.values[n] * e1);
  return pairwise_sum(parts);
}

NormResult sobolev_norm(const Control& u, double nu) {
  if (!(nu > -1.0 && nu < 1.0)) throw precondition_error("nu outside (-1, 1)");
  NormResult r = finish(lattice_energy(u.values, u.h(), 1, nu, lattice_cutoff(u)));
  if (r.truncated) {
    bool jump = u.values.front() != 0.0 || u.values.back() != 0.0;
    for (std::size_t n = 1; n < u.values.size() && !jump; ++n) jump = u.values[n] != u.values[n - 1];
    if (jump) r.warning = "norm may be infinite for this regularity class";
  }
  return r;
}

NormResult primitive_sobolev_norm(const Control& u, double s) {
  if (!(s > -1.0 && s < 1.5)) throw precondition_error("exponent outside (-1, 3/2)");
  if (!in_H(u, 1e-10)) throw precondition_error("project to zero mean first");
  const Primitive p = primitive(u);
  std::vector<cplx> y(p.y.begin(), p.y.end() - 1);
  return finish(lattice_energy(y, u.h(), 2, s, lattice_cutoff(u)));
}

NormResult spectral_sobolev_norm(const Control& u, double nu) {
  if (!(nu > -0.5 && nu < 0.5)) throw precondition_error("nu outside (-1/2, 1/2)");
  const long N = u.N(), P = 2 * N;
  // ⟨u, e_k⟩ = √(2/T)/β_k · S(k mod 2N) with S(r) = Σ_n d_n cos(rπn/N), d_n = u_n − u_{n−1}.
  std::vector<cplx> d(static_cast<std::size_t>(N + 1));
  for (long n = 0; n <= N; ++n) {
    const cplx a = n < N ? u.values[std::size_t(n)] : 0.0, b = n > 0 ? u.values[std::size_t(n - 1)] : 0.0;
    d[std::size_t(n)] = a - b;
  }
  std::vector<double> cosv(static_cast<std::size_t>(P));
  for (long i = 0; i < P; ++i) cosv[std::size_t(i)] = std::cos(PI * double(i) / double(N));
  const long Q = 200;
  const double base = PI / u.T, e = 2.0 * nu - 2.0;
  const double tail_coef = std::pow(P * base, e) * std::pow(Q + 0.5, e + 1.0) / (-e - 1.0);
  std::vector<double> main(static_cast<std::size_t>(P)), tail(main.size());
#pragma omp parallel for schedule(static)
  for (long r = 0; r < P; ++r) {
    cplx S = 0.0;
    for (long n = 0; n <= N; ++n) S += d[std::size_t(n)] * cosv[std::size_t((r * n) % P)];
    double lat = 0.0;
    for (long q = 0; q <= Q; ++q) {
      const long k = r + P * q;
      if (k == 0) continue;
      const double beta = base * double(k);
      lat += std::pow(1.0 + beta * beta, nu) / (beta * beta);
    }
    main[std::size_t(r)] = std::norm(S) * lat;
    tail[std::size_t(r)] = std::norm(S) * tail_coef;
  }
  const double le_tail = 2.0 / u.T * pairwise_sum(tail);
  LatticeEnergy le;
  le.tail = le_tail;
  le.value = 2.0 / u.T * pairwise_sum(main) + le_tail;
  return finish(le);
}

Control concat(const Control& u, const Control& v) {
  const double hu = u.h(), hv = v.h();
  long a = 1, b = 1;
  if (std::abs(hu - hv) > 1e-12 * std::max(hu, hv)) {
    // Continued-fraction search for hu/hv = a/b.
    const double r = hu / hv;
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double x = r;
    bool found = false;
    for (int it = 0; it < 64; ++it) {
      const long ai = static_cast<long>(std::floor(x));
      const long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
      p0 = p1;
      q0 = q1;
      p1 = p2;
      q1 = q2;
      if (std::abs(double(p1) / double(q1) - r) <= 1e-12 * r) {
        found = true;
        break;
      }
      const double frac = x - double(ai);
      if (frac < 1e-15 || q1 > (1L << 22)) break;
      x = 1.0 / frac;
    }
    if (!found) throw precondition_error("incompatible grids for concatenation");
    a = p1;
    b = q1;
  }
  if (u.N() * a + v.N() * b > (1L << 22)) throw precondition_error("concatenation grid exceeds 2^22 cells");
  const Control ur = u.refined(a), vr = v.refined(b);
  std::vector<cplx> vals = ur.values;
  vals.insert(vals.end(), vr.values.begin(), vr.values.end());
  return Control(u.T + v.T, std::move(vals), u.real && v.real);
}

double cost_NT(const Control& u) {
  const Primitive p = primitive(u);
  return std::abs(p.endpoint()) + p.l2norm();
}

}  // namespace stlc
