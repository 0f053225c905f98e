#include "stlc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlc {

namespace {

const double SQRT2 = std::sqrt(2.0);

// j_l(kappa) for l = 0..L-1.
void sph_bessel_all(int L, double kappa, double* out) {
  if (kappa > static_cast<double>(L)) {
    const double s = std::sin(kappa), c = std::cos(kappa);
    out[0] = s / kappa;
    if (L > 1) out[1] = s / (kappa * kappa) - c / kappa;
    for (int l = 1; l + 1 < L; ++l) out[l + 1] = (2.0 * l + 1.0) / kappa * out[l] - out[l - 1];
    return;
  }
  for (int l = 0; l < L; ++l) out[l] = std::sph_bessel(static_cast<unsigned>(l), kappa);
}

// Composite Legendre-Filon rule: f is expanded in Legendre polynomials per panel and
// the products with cos(omega x) are integrated exactly.
class FilonCosine {
 public:
  FilonCosine(const std::function<double(double)>& f, int panels, int degree)
      : panels_(panels), L_(degree + 1), coeff_(static_cast<std::size_t>(panels * (degree + 1))) {
    const GaussRule& g = gauss_rule(L_ + 8);
    const double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
      const double c = (p + 0.5) * h, r = 0.5 * h;
      for (int l = 0; l < L_; ++l) {
        double s = 0.0;
        for (std::size_t q = 0; q < g.x.size(); ++q)
          s += g.w[q] * f(c + r * g.x[q]) * std::legendre(static_cast<unsigned>(l), g.x[q]);
        coeff_[static_cast<std::size_t>(p * L_ + l)] = 0.5 * (2.0 * l + 1.0) * s;
      }
    }
  }

  // int_0^1 f(x) cos(omega x) dx
  double integrate(double omega) const {
    std::vector<double> jl(static_cast<std::size_t>(L_));
    std::vector<double> parts(static_cast<std::size_t>(panels_));
    const double h = 1.0 / panels_, r = 0.5 * h;
    sph_bessel_all(L_, omega * r, jl.data());
    for (int p = 0; p < panels_; ++p) {
      const double c = (p + 0.5) * h;
      // sum_l f_l 2 i^l j_l(omega r), real part after the e^{i omega c} phase.
      cplx s = 0.0, il = 1.0;
      for (int l = 0; l < L_; ++l) {
        s += coeff_[static_cast<std::size_t>(p * L_ + l)] * 2.0 * il * jl[static_cast<std::size_t>(l)];
        il *= I;
      }
      parts[static_cast<std::size_t>(p)] = r * std::real(std::polar(1.0, omega * c) * s);
    }
    return pairwise_sum(parts);
  }

 private:
  int panels_, L_;
  std::vector<double> coeff_;
};

double parity_sum4(long J, double even, double odd, double s) {
  return even * parity_tail_sum(J, 0, s) + odd * parity_tail_sum(J, 1, s);
}

}  // namespace

double phi(long j, double x) { return j == 0 ? 1.0 : SQRT2 * std::cos(PI * static_cast<double>(j) * x); }

double Potential::coef(long j) const {
  if (j < 0) j = -j;
  if (j <= J()) return m[static_cast<std::size_t>(j)];
  if (j == 0) return 0.0;
  const double sgn = (j % 2 == 0) ? 1.0 : -1.0;
  const double jp = PI * static_cast<double>(j);
  return SQRT2 * (sgn * slope1 - slope0) / (jp * jp);
}

double Potential::mc(long n) const {
  if (n < 0) n = -n;
  return n == 0 ? coef(0) : coef(n) / SQRT2;
}

double Potential::matrix_entry(long j, long k) const {
  const double sj = j == 0 ? 1.0 : SQRT2, sk = k == 0 ? 1.0 : SQRT2;
  return 0.5 * sj * sk * (mc(j - k) + mc(j + k));
}

double Potential::l2norm() const {
  std::vector<double> sq(m.size());
  for (std::size_t j = 0; j < m.size(); ++j) sq[j] = m[j] * m[j];
  const double p4 = std::pow(PI, 4);
  const double tail = 2.0 / p4 *
                      parity_sum4(J(), (slope1 - slope0) * (slope1 - slope0),
                                  (slope1 + slope0) * (slope1 + slope0), 4.0);
  return std::sqrt(pairwise_sum(sq) + tail);
}

Potential Potential::scaled(double s) const {
  Potential p = *this;
  for (double& v : p.m) v *= s;
  p.slope0 *= s;
  p.slope1 *= s;
  return p;
}

Potential add(const Potential& a, const Potential& b, double s) {
  Potential p;
  const long J = std::max(a.J(), b.J());
  p.m.resize(static_cast<std::size_t>(J + 1));
  for (long j = 0; j <= J; ++j) p.m[static_cast<std::size_t>(j)] = a.coef(j) + s * b.coef(j);
  p.slope0 = a.slope0 + s * b.slope0;
  p.slope1 = a.slope1 + s * b.slope1;
  p.source = "sum";
  return p;
}

Potential cosine_coefficients(const PotentialDesc& desc, long J) {
  if (J < 0) throw precondition_error("J_max must be nonnegative");
  Potential pot;
  pot.m.assign(static_cast<std::size_t>(J + 1), 0.0);
  using K = PotentialDesc::Kind;
  switch (desc.kind) {
    case K::Coeffs: {
      pot.slope0 = desc.slope0;
      pot.slope1 = desc.slope1;
      Potential given;
      given.m = desc.m;
      given.slope0 = desc.slope0;
      given.slope1 = desc.slope1;
      for (long j = 0; j <= J; ++j) pot.m[static_cast<std::size_t>(j)] = given.coef(j);
      pot.source = "coeffs";
      return pot;
    }
    case K::CosinePoly: {
      for (const auto& [j, amp] : desc.terms) {
        if (j < 0) throw precondition_error("cosine_poly term with negative index");
        if (j > J) continue;
        pot.m[static_cast<std::size_t>(j)] += j == 0 ? amp : amp / SQRT2;
      }
      pot.source = "cosine_poly";
      return pot;
    }
    case K::Linear:
    case K::Function: {
      std::function<double(double)> f = desc.f;
      if (desc.kind == K::Linear) {
        f = [](double x) { return x - 0.5; };
        pot.slope0 = pot.slope1 = 1.0;
        pot.source = "linear";
      } else {
        if (!f || !desc.has_slopes) throw precondition_error("insufficient potential data");
        pot.slope0 = desc.slope0;
        pot.slope1 = desc.slope1;
        pot.source = "function";
      }
      const FilonCosine rule(f, 32, 15);
      for (long j = 0; j <= J; ++j) {
        const double v = rule.integrate(PI * static_cast<double>(j));
        pot.m[static_cast<std::size_t>(j)] = j == 0 ? v : SQRT2 * v;
      }
      return pot;
    }
  }
  throw precondition_error("insufficient potential data");
}

bool KernelModel::negligible(long j) const {
  if (j < 0 || j > J()) return false;
  return lambda(j) * lambda(j) * std::abs(c[static_cast<std::size_t>(j)]) <= 1e-12 * pole_scale;
}

namespace {

double pole_scale_of(const KernelModel& mdl) {
  double s = std::max(std::abs(mdl.tail_even), std::abs(mdl.tail_odd));
  for (long j = 0; j <= mdl.J(); ++j) s = std::max(s, lambda(j) * lambda(j) * std::abs(mdl.c[static_cast<std::size_t>(j)]));
  return s;
}

}  // namespace

double KernelModel::tail_sum(double s) const {
  if (!tail) return 0.0;
  const double e = 4.0 + 2.0 * s;
  return parity_sum4(J(), tail_even, tail_odd, e) / std::pow(PI, e);
}

KernelModel interaction_coefficients(const Potential& pot, int k, long J, bool tail, double tol) {
  if (k < 0) throw precondition_error("mode index must be nonnegative");
  if (J < k) throw precondition_error("J_max below target mode");
  const double norm = pot.l2norm();
  if (std::abs(pot.coef(k)) > tol * std::max(norm, std::numeric_limits<double>::min()))
    throw precondition_error("assumption violated: <mu,phi_k> != 0");

  KernelModel mdl;
  mdl.k = k;
  mdl.tail = tail;
  mdl.c.resize(static_cast<std::size_t>(J + 1));
  std::vector<double> lc(mdl.c.size()), ac(mdl.c.size());
  for (long j = 0; j <= J; ++j) {
    const double cj = pot.coef(j) * pot.matrix_entry(j, k);
    mdl.c[static_cast<std::size_t>(j)] = cj;
    lc[static_cast<std::size_t>(j)] = lambda(j) * cj;
    ac[static_cast<std::size_t>(j)] = std::abs(cj);
  }
  if (tail) {
    const double sk = k == 0 ? 1.0 : SQRT2;
    const double s0 = pot.slope0, s1 = pot.slope1, sgk = (k % 2 == 0) ? 1.0 : -1.0;
    mdl.tail_even = 2.0 * sk * (s1 - s0) * (sgk * s1 - s0);
    mdl.tail_odd = 2.0 * sk * (-s1 - s0) * (-sgk * s1 - s0);
  }
  mdl.K0 = pairwise_sum(mdl.c) + mdl.tail_sum(0.0);
  mdl.a = pairwise_sum(lc) + mdl.tail_sum(-1.0);
  mdl.a_k = mdl.a - 0.5 * lambda(k) * mdl.K0;
  if (tail)
    mdl.abs_tail = parity_sum4(J, std::abs(mdl.tail_even), std::abs(mdl.tail_odd), 4.0) / std::pow(PI, 4);
  mdl.abs_sum = pairwise_sum(ac) + mdl.abs_tail;
  mdl.pole_scale = pole_scale_of(mdl);
  return mdl;
}

KernelModel kernel_model(std::vector<double> c, int k) {
  KernelModel mdl;
  mdl.k = k;
  mdl.c = std::move(c);
  std::vector<double> lc(mdl.c.size()), ac(mdl.c.size());
  for (std::size_t j = 0; j < mdl.c.size(); ++j) {
    lc[j] = lambda(static_cast<long>(j)) * mdl.c[j];
    ac[j] = std::abs(mdl.c[j]);
  }
  mdl.K0 = pairwise_sum(mdl.c);
  mdl.a = pairwise_sum(lc);
  mdl.a_k = mdl.a - 0.5 * lambda(k) * mdl.K0;
  mdl.abs_sum = pairwise_sum(ac);
  mdl.pole_scale = pole_scale_of(mdl);
  return mdl;
}

std::vector<double> higher_drift_coefficients(const KernelModel& model, int p) {
  if (p < 1) throw precondition_error("order must be positive");
  std::vector<double> out{model.a_k};
  const double lk = model.lambda_k();
  const long J = model.J();
  for (int n = 2; n <= p; ++n) {
    if (model.tail && (model.tail_even != 0.0 || model.tail_odd != 0.0))
      throw precondition_error("insufficient coefficient decay for order p");
    std::vector<double> t(static_cast<std::size_t>(J + 1));
    double lo = 0.0, hi = 0.0;
    for (long j = 0; j <= J; ++j) {
      const double lj = lambda(j);
      const double v = model.c[static_cast<std::size_t>(j)] * std::pow(lj, n - 1) *
                       std::pow(lj - lk, n - 1) * (lj - 0.5 * lk);
      t[static_cast<std::size_t>(j)] = v;
      const double w = std::abs(v) * static_cast<double>(j);
      if (4 * j > J && 2 * j <= J) lo = std::max(lo, w);
      if (2 * j > J) hi = std::max(hi, w);
    }
    if (hi > 0.0 && hi >= lo) throw precondition_error("insufficient coefficient decay for order p");
    out.push_back(pairwise_sum(t));
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::LINEAR_STLC: return "LINEAR_STLC";
    case Verdict::DRIFT: return "DRIFT";
    case Verdict::QUADRATIC_STLC_CANDIDATE: return "QUADRATIC_STLC_CANDIDATE";
    case Verdict::UNDETERMINED: return "UNDETERMINED";
  }
  return "UNDETERMINED";
}

Classification classify(const Potential& pot, int k, const ClassifyOptions& opt) {
  Classification cl;
  const long J = pot.J();
  if (J < k) return cl;
  double margin_all = std::numeric_limits<double>::infinity();
  double margin_nk = margin_all;
  for (long j = 0; j <= J; ++j) {
    const double v = std::abs(pot.m[static_cast<std::size_t>(j)]) * (1.0 + static_cast<double>(j * j));
    margin_all = std::min(margin_all, v);
    if (j != k) margin_nk = std::min(margin_nk, v);
  }
  cl.m_k = pot.coef(k);
  const double norm = pot.l2norm();
  const bool orth = std::abs(cl.m_k) <= opt.orth_tol * norm || norm == 0.0;
  const KernelModel mdl = interaction_coefficients(pot, k, J, true, std::numeric_limits<double>::infinity());
  cl.a = mdl.a;
  cl.K0 = mdl.K0;
  cl.a_k = mdl.a_k;
  cl.tie_tol = opt.tie_rel * (std::abs(mdl.a) + 0.5 * lambda(k) * std::abs(mdl.K0) +
                              std::numeric_limits<double>::epsilon());
  if (!orth) {
    cl.margin = margin_all;
    if (margin_all >= opt.margin_min) cl.verdict = Verdict::LINEAR_STLC;
    return cl;
  }
  cl.margin = margin_nk;
  if (std::abs(mdl.a_k) > cl.tie_tol)
    cl.verdict = Verdict::DRIFT;
  else if (margin_nk >= opt.margin_min)
    cl.verdict = Verdict::QUADRATIC_STLC_CANDIDATE;
  return cl;
}

}  // namespace stlc
