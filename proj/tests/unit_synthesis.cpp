#include <cmath>
#include <random>

#include "doctest.h"
#include "stlc/synthesis.hpp"

using namespace stlc;

namespace {

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

Potential linear_pot(long J) { return cosine_coefficients(PotentialDesc::linear(), J); }

}  // namespace

TEST_CASE("bump is normalized, supported in [0,1] and cancels at 4 p pi") {
  const Bump chi;
  CHECK(std::abs(chi.l2norm() - 1.0) < 1e-10);
  CHECK(chi(-0.01) == 0.0);
  CHECK(chi(1.01) == 0.0);
  CHECK(chi(0.5) > 0.0);
  CHECK(chi.max_hat_at_4ppi(20) < 1e-12);
  CHECK(std::isfinite(chi.decay_constant(200.0)));
  // χ symmetric about 1/2: e^{iσ/2} χ̂(σ) is real
  for (double s : {0.3, 5.0, 17.0, 60.0}) CHECK(std::abs((std::polar(1.0, 0.5 * s) * chi.hat(s)).imag()) < 1e-10);
  // χ̂(0) = ∫χ
  double area = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) area += chi((i + 0.5) / n) / n;
  CHECK(std::abs(chi.hat(0.0).real() - area) < 1e-6);
}

TEST_CASE("probe transform matches the windowed transform of its primitive") {
  const Bump chi;
  const KernelModel& model = balanced().model;
  ProbeSpec spec;
  spec.T = 0.2;
  spec.j0 = 13;
  spec.sign = 1;
  const ProbeResult p = probe(model, spec, chi, 8192);
  for (double w : {0.0, 50.0, spec.omega0(), spec.omega0() + 30.0}) {
    const cplx got = primitive_fourier(p.u, w);
    const cplx ref = probe_hat(spec, chi, w);
    CHECK(std::abs(got - ref) < 2e-3 * (1.0 + std::abs(ref)));
  }
  CHECK(p.scale > 0.0);
  CHECK(std::abs(p.scale * p.scale * std::abs(p.pv_value) - spec.T) < 1e-12);
}

TEST_CASE("probe preconditions") {
  const Bump chi;
  const KernelModel& model = balanced().model;
  ProbeSpec spec;
  spec.T = 0.2;
  spec.j0 = 13;
  spec.beta = 5.0;
  CHECK_THROWS_AS(probe(model, spec, chi, 1024), precondition_error);
  spec.beta = 4.0 * PI;
  spec.sign = 0;
  CHECK_THROWS_AS(probe(model, spec, chi, 1024), precondition_error);
  const KernelModel zero = interaction_coefficients(cosine_coefficients(PotentialDesc::zero(), 64), 1, 64);
  spec.sign = 1;
  CHECK_THROWS_WITH_AS(probe(zero, spec, chi, 1024), "pole too weak, increase j0", precondition_error);
}

TEST_CASE("moment solver reaches single and random targets") {
  const double T = 0.5;
  std::vector<long> idx;
  for (long j = 0; j <= 12; ++j) idx.push_back(j);
  const MomentSolver s(T, idx, false, {512, 1e-10});
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    std::map<long, cplx> d;
    for (long j : idx) d[j] = j == 0 ? cplx(nd(rng)) : cplx(nd(rng), nd(rng));
    const MomentSolution m = s.solve(d);
    for (long j : idx) CHECK(std::abs(windowed_fourier(m.u, lambda(j)) - d[j]) < 1e-8);
    CHECK(m.max_residual <= 1e-8);
  }
  const MomentSolution z = s.solve({});
  CHECK(z.u.l2norm() == 0.0);
  CHECK_THROWS_AS(s.solve({{20, 1.0}}), precondition_error);
  CHECK_THROWS_AS(s.solve({{0, cplx(0.0, 1.0)}}), precondition_error);
}

TEST_CASE("moment solver is homogeneous") {
  std::map<long, cplx> d{{0, 0.3}, {1, cplx(0.1, -0.2)}, {4, cplx(-0.5, 0.05)}};
  const MomentSolution a = solve_moments(0.4, d, false, {256, 1e-10});
  for (auto& [j, v] : d) v *= 0.5;
  const MomentSolution b = solve_moments(0.4, d, false, {256, 1e-10});
  CHECK(std::abs(b.l2norm - 0.5 * a.l2norm) < 1e-8 * a.l2norm);
  CHECK(b.cost_NT < a.cost_NT);
}

TEST_CASE("regular moments: primitive vanishes at T and solves the moments") {
  std::map<long, cplx> d;
  for (long j = 0; j <= 8; ++j) d[j] = j == 0 ? cplx(0.2) : cplx(0.1 / j, 0.05);
  const MomentSolution m = solve_moments(0.3, d, true, {512, 1e-10});
  CHECK(std::abs(primitive(m.u).endpoint()) < 1e-10);
  for (const auto& [j, v] : d) CHECK(std::abs(primitive_fourier(m.u, lambda(j)) - v) < 1e-8);
}

TEST_CASE("null-moment probe cancels the linear response") {
  const Bump chi;
  const KernelModel& model = balanced().model;
  ProbeSpec spec;
  spec.T = 0.2;
  spec.j0 = 13;
  SynthesisOptions opt;
  opt.J_modes = 24;
  for (int sign : {1, -1}) {
    spec.sign = sign;
    const NullMomentProbe np = null_moment_probe(model, spec, chi, opt);
    CHECK(np.moment_residual < 1e-8);
    CHECK(np.c > 0.5);
    CHECK(np.c < 1.5);
    CHECK(std::abs(primitive(np.u).endpoint()) < 1e-10);
    CHECK(std::abs(np.pv_value) == doctest::Approx(spec.T));
  }
}

TEST_CASE("tangent controls certify plus and minus i directions") {
  const Balanced& b = balanced();
  const double T = 0.2;
  const TangentPair tp = tangent_controls(b.pot, b.model, T);
  CHECK(tp.cert_plus.psi2.imag() == doctest::Approx(T).epsilon(1e-6));
  CHECK(tp.cert_minus.psi2.imag() == doctest::Approx(-T).epsilon(1e-6));
  CHECK(tp.cert_plus.psi1_max < 1e-8 * tp.cert_plus.u_norm);
  CHECK(tp.cert_minus.psi1_max < 1e-8 * tp.cert_minus.u_norm);
  CHECK(std::abs(tp.cert_plus.u1T) < 1e-10);
  const double ratio = tp.cert_plus.u1_norm / tp.cert_minus.u1_norm;
  CHECK(ratio < 5.0);
  CHECK(ratio > 0.2);
  CHECK(psi2_projection(b.model, tp.plus).imag() == doctest::Approx(T).epsilon(1e-6));
}

TEST_CASE("tangent controls reject unbalanced potentials") {
  const Potential lin = linear_pot(256);
  const KernelModel m = interaction_coefficients(lin, 2, 4000);
  CHECK_THROWS_AS(tangent_controls(lin, m, 0.2), precondition_error);
}

TEST_CASE("real tangent direction is unavailable at k=0") {
  const Potential lin = linear_pot(256);
  const KernelModel m = interaction_coefficients(lin, 0, 4000);
  SynthesisOptions opt;
  opt.require_balanced = false;
  CHECK_THROWS_WITH_AS(real_tangent_controls(lin, m, 0.2, opt), "real tangent direction unavailable at k=0",
                       precondition_error);
}

TEST_CASE("quadratic form of a concatenation adds up for null-moment blocks") {
  const Balanced& b = balanced();
  const double T = 0.1, lk = b.model.lambda_k();
  const TangentPair tp = tangent_controls(b.pot, b.model, T);
  const cplx whole = psi2_projection(b.model, concat(tp.plus, tp.minus));
  const cplx parts = psi2_projection(b.model, tp.plus) * std::polar(1.0, -lk * T) + psi2_projection(b.model, tp.minus);
  CHECK(std::abs(whole - parts) < 0.05 * T);
}

TEST_CASE("complex motion: zero target and quadratic homogeneity") {
  const Balanced& b = balanced();
  SynthesisOptions opt;
  opt.real_tangents = false;
  const TangentBasis basis = tangent_basis(b.pot, b.model, 0.05, opt);
  const ComplexMotion z0 = complex_motion(basis, b.model, 0.0);
  CHECK(z0.v.l2norm() == 0.0);
  CHECK(z0.v.T == doctest::Approx(0.1));
  const cplx z(2e-4, 5e-4);
  const ComplexMotion a = complex_motion(basis, b.model, z);
  const ComplexMotion c = complex_motion(basis, b.model, 4.0 * z);
  CHECK(std::abs(a.predicted - z) < 1e-10);
  CHECK(c.v.l2norm() == doctest::Approx(2.0 * a.v.l2norm()).epsilon(1e-9));
  CHECK(std::abs(psi2_projection(b.model, a.v) - z) < 0.1 * std::abs(z));
}

TEST_CASE("project_k removes the k-th mode and the real ground component") {
  Vec v(4);
  v << cplx(1.0, 2.0), cplx(3.0, 4.0), cplx(5.0, 6.0), cplx(7.0, 8.0);
  const Vec p = project_k(v, 2);
  CHECK(p(0) == cplx(0.0, 2.0));
  CHECK(p(1) == v(1));
  CHECK(p(2) == cplx(0.0));
  CHECK(p(3) == v(3));
  const Vec q = project_k(p, 2);
  CHECK((q - p).norm() == 0.0);
}

TEST_CASE("projection steering") {
  const Balanced& b = balanced();
  const long J = 24;
  const Galerkin g(b.pot, J);
  const Vec g0 = StateVector::ground(J).coeffs;
  SUBCASE("zero target from the ground state needs no control") {
    const ProjectionReport r = steer_projection(g, 1, 0.2, g0, Vec::Zero(J + 1));
    CHECK(r.iterations == 0);
    CHECK(r.u.l2norm() == 0.0);
  }
  SUBCASE("single mode target") {
    Vec target = Vec::Zero(J + 1);
    target(3) = cplx(1e-4, -2e-4);
    ProjectionOptions po;
    po.tol = 1e-10;
    const ProjectionReport r = steer_projection(g, 1, 0.5, g0, target, po);
    CHECK(r.error <= 1e-10);
    CHECK((project_k(g.evolve(r.u, StateVector::ground(J)).final.coeffs, 1) - target).norm() < 1e-9);
  }
  SUBCASE("preconditions") {
    Vec target = Vec::Zero(J + 1);
    target(1) = 0.1;
    CHECK_THROWS_AS(steer_projection(g, 1, 0.2, g0, target), precondition_error);
    target.setZero();
    target(2) = 0.5;
    CHECK_THROWS_AS(steer_projection(g, 1, 0.2, g0, target), precondition_error);
  }
}

TEST_CASE("full steering") {
  const Balanced& b = balanced();
  const long J = 40;
  const Galerkin g(b.pot, J);
  SUBCASE("ground state target") {
    const SteeringReport r = steer_full(g, b.model, 1.0, StateVector::ground(J).coeffs);
    CHECK(r.converged);
    CHECK(r.iterations == 0);
  }
  SUBCASE("balanced potential reaches a nearby target on a unit horizon") {
    const double eps = 1e-5;
    Vec t = Vec::Zero(J + 1);
    t(0) = std::sqrt(1.0 - eps * eps);
    t(1) = cplx(0.0, eps);
    SteerOptions o;
    o.tol = 1e-2 * eps;
    const SteeringReport r = steer_full(g, b.model, 1.0, t, o);
    CHECK(r.status == "CONVERGED");
    CHECK(r.final_error < 1e-2 * eps);
    CHECK(r.u.T == doctest::Approx(1.0));
  }
  SUBCASE("drift potential reports failure") {
    const long Jd = 80;
    const Potential lin = linear_pot(Jd);
    const KernelModel m0 = interaction_coefficients(lin, 0, 4000);
    const Galerkin g0(lin, Jd);
    const double eps = 1e-3;
    Vec t = Vec::Zero(Jd + 1);
    t(0) = cplx(std::sqrt(1.0 - eps * eps), eps);
    const SteeringReport r = steer_full(g0, m0, 0.2, t);
    CHECK(r.status == "FAILED");
    CHECK_FALSE(r.reason.empty());
  }
}

TEST_CASE("balanced potential search") {
  const BalancedPotential bp = find_balanced_potential(1, default_balanced_family(1, 200));
  CHECK(std::abs(bp.a_k) <= 1e-10 * bp.scale);
  const Classification c = classify(bp.pot, 1);
  CHECK(c.verdict == Verdict::QUADRATIC_STLC_CANDIDATE);
  BalancedFamily degenerate = default_balanced_family(1, 64);
  for (double& m : degenerate.B.m) m = 0.0;
  degenerate.B.slope0 = degenerate.B.slope1 = 0.0;
  CHECK_THROWS_AS(find_balanced_potential(1, degenerate), precondition_error);
}
