#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stlc/numerics.hpp"

namespace stlc {

// Neumann eigen-system on (0,1).
inline double lambda(long j) { return (PI * static_cast<double>(j)) * (PI * static_cast<double>(j)); }
double phi(long j, double x);

struct PotentialDesc {
  enum class Kind { Linear, Coeffs, CosinePoly, Function };
  Kind kind = Kind::Linear;
  std::vector<double> m;                   // Coeffs
  double slope0 = 0.0, slope1 = 0.0;       // Coeffs, Function
  bool has_slopes = false;                 // Function
  std::vector<std::pair<int, double>> terms;  // CosinePoly: mu = sum amp cos(j pi x)
  std::function<double(double)> f;         // Function

  static PotentialDesc linear() { return {}; }
  static PotentialDesc zero() {
    PotentialDesc d;
    d.kind = Kind::Coeffs;
    return d;
  }
};

struct Potential {
  std::vector<double> m;  // <mu, phi_j>, j = 0..J
  double slope0 = 0.0, slope1 = 0.0;
  std::string source;

  long J() const { return static_cast<long>(m.size()) - 1; }
  // Stored coefficient, or the leading boundary-slope term beyond J.
  double coef(long j) const;
  // <mu, cos(n pi x)>
  double mc(long n) const;
  // <mu phi_j, phi_k>
  double matrix_entry(long j, long k) const;
  double l2norm() const;
  Potential scaled(double s) const;
};

Potential cosine_coefficients(const PotentialDesc& desc, long J);
Potential add(const Potential& a, const Potential& b, double s);

struct KernelModel {
  int k = 0;
  std::vector<double> c;  // j = 0..J
  bool tail = false;
  double tail_even = 0.0, tail_odd = 0.0;  // c_j ~ A/(j pi)^4 beyond J
  double a = 0.0, K0 = 0.0, a_k = 0.0;
  double abs_sum = 0.0;   // sum |c_j| including tail
  double abs_tail = 0.0;  // sum_{j>J} |c_j|
  double pole_scale = 0.0;  // max_j |lambda_j^2 c_j|, tail included

  // Pole weight lambda_j^2 c_j at roundoff level of pole_scale.
  bool negligible(long j) const;

  long J() const { return static_cast<long>(c.size()) - 1; }
  double lambda_k() const { return lambda(k); }
  // Tail of sum_{j>J} c_j lambda_j^{-s}, s >= 0, from the leading model.
  double tail_sum(double s) const;
};

// c_j = <mu,phi_j><phi_j, mu phi_k>; with tail=true a, a_k, K0 carry the analytic tail.
KernelModel interaction_coefficients(const Potential& pot, int k, long J, bool tail = true,
                                     double tol = 1e-10);
// Model from explicit coefficients (no tail).
KernelModel kernel_model(std::vector<double> c, int k);

// a_k^n for n = 1..p.
std::vector<double> higher_drift_coefficients(const KernelModel& model, int p);

enum class Verdict { LINEAR_STLC, DRIFT, QUADRATIC_STLC_CANDIDATE, UNDETERMINED };
std::string to_string(Verdict v);

struct Classification {
  Verdict verdict = Verdict::UNDETERMINED;
  double margin = 0.0;  // min_{j != k} |m_j| <j>^2 on the stored range
  double m_k = 0.0;
  double a = 0.0, K0 = 0.0, a_k = 0.0;
  double tie_tol = 0.0;
};

struct ClassifyOptions {
  double orth_tol = 1e-10;
  double margin_min = 1e-8;
  double tie_rel = 1e-8;
};

Classification classify(const Potential& pot, int k, const ClassifyOptions& opt = {});

}  // namespace stlc
