#include "stlc/numerics.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/special_functions/legendre.hpp>

namespace stlc {

namespace {

constexpr double kSeriesCut = 0.5;

cplx cell_exp_series(double x, double h) {
  // h Σ (ixh)^m / (m+1)!
  const cplx z = I * (x * h);
  cplx term = 1.0, sum = 1.0;
  for (int m = 1; m < 24; ++m) {
    term *= z / static_cast<double>(m + 1);
    sum += term;
  }
  return h * sum;
}

cplx cell_exp2_series(double x, double y, double h) {
  // h² Σ (ixh)^p (iyh)^q / (p! q! (q+1)(p+q+2))
  const cplx a = I * (x * h), b = I * (y * h);
  cplx sum = 0.0;
  cplx ap = 1.0;
  for (int p = 0; p < 26; ++p) {
    cplx bq = 1.0;
    for (int q = 0; p + q < 26; ++q) {
      sum += ap * bq / (static_cast<double>(q + 1) * static_cast<double>(p + q + 2));
      bq *= b / static_cast<double>(q + 1);
    }
    ap *= a / static_cast<double>(p + 1);
  }
  return h * h * sum;
}

}  // namespace

cplx cell_exp(double x, double h) {
  if (std::abs(x * h) < kSeriesCut) return cell_exp_series(x, h);
  return (std::polar(1.0, x * h) - 1.0) / (I * x);
}

cplx cell_exp2(double x, double y, double h) {
  const double ax = std::abs(x * h), ay = std::abs(y * h);
  if (std::max(ax, ay) < kSeriesCut) return cell_exp2_series(x, y, h);
  if (ax >= ay) return (std::polar(1.0, x * h) * cell_exp(y, h) - cell_exp(x + y, h)) / (I * x);
  return (cell_exp(x + y, h) - cell_exp(x, h)) / (I * y);
}

template <class T>
static T pairwise_impl(const T* v, std::size_t n) {
  if (n <= 16) {
    T s{};
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t m = n / 2;
  return pairwise_impl(v, m) + pairwise_impl(v + m, n - m);
}

double pairwise_sum(const double* v, std::size_t n) { return pairwise_impl(v, n); }
cplx pairwise_sum(const cplx* v, std::size_t n) { return pairwise_impl(v, n); }

double parity_tail_sum(long J, int parity, double s) {
  long q = J + 1;
  if ((q & 1L) != (parity & 1)) ++q;
  double direct = 0.0;
  const long stop = q + 4000;
  std::vector<double> terms;
  for (; q < stop; q += 2) terms.push_back(std::pow(static_cast<double>(q), -s));
  direct = pairwise_sum(terms);
  // Euler–Maclaurin on f(n) = (2n + q)^{-s}.
  const double qd = static_cast<double>(q);
  const double em = std::pow(qd, 1.0 - s) / (2.0 * (s - 1.0)) + 0.5 * std::pow(qd, -s) +
                    (s / 6.0) * std::pow(qd, -s - 1.0) -
                    s * (s + 1.0) * (s + 2.0) / 90.0 * std::pow(qd, -s - 3.0);
  return direct + em;
}

const GaussRule& gauss_rule(int n) {
  static std::mutex mtx;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule g;
  g.x.resize(static_cast<std::size_t>(n));
  g.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(PI * (i + 0.75) / (n + 0.5));
    for (int it2 = 0; it2 < 100; ++it2) {
      const double p = boost::math::legendre_p(n, x);
      const double dp = boost::math::legendre_p_prime(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = boost::math::legendre_p_prime(n, x);
    g.x[static_cast<std::size_t>(i)] = x;
    g.w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(g)).first->second;
}

}  // namespace stlc
