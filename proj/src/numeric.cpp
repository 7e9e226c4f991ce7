#include "wsbm/numeric.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <stdexcept>

namespace wsbm {

namespace {

constexpr int kTableSize = 8192;

const std::array<double, kTableSize>& lnfact_table() {
  static const std::array<double, kTableSize> table = [] {
    std::array<double, kTableSize> t{};
    t[0] = 0.0;
    for (int i = 1; i < kTableSize; ++i) t[i] = t[i - 1] + std::log(double(i));
    return t;
  }();
  return table;
}

}  // namespace

double ln_factorial(std::int64_t n) {
  if (n < 0) throw std::domain_error("ln_factorial: negative argument");
  if (n < kTableSize) return lnfact_table()[size_t(n)];
  return std::lgamma(double(n) + 1.0);
}

double ln_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) throw std::domain_error("ln_binomial: invalid arguments");
  return ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k);
}

double ln_multiset(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0) throw std::domain_error("ln_multiset: invalid arguments");
  if (k == 0) return 0.0;
  if (n == 0) throw std::domain_error("ln_multiset: no parts for nonzero total");
  return ln_binomial(n + k - 1, k);
}

double ln_double_factorial_even(std::int64_t m) {
  if (m < 0) throw std::domain_error("ln_double_factorial_even: negative");
  return double(m) * std::log(2.0) + ln_factorial(m);
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa,
               double b, double fb, double m, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double fa,
             double b, double fb, double m, double fm, double whole,
             double tol, int depth) {
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, fa, m, fm, lm, flm);
  double right = simpson(f, m, fm, b, fb, rm, frm);
  double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adapt(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol, int max_depth) {
  if (a == b) return 0.0;
  double m = 0.5 * (a + b);
  double fa = f(a), fb = f(b), fm = f(m);
  double whole = simpson(f, a, fa, b, fb, m, fm);
  return adapt(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

namespace {

// Series expansion for P(a, x), x < a + 1.
double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 1000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a, x), x >= a + 1.
double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_p: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

double chi2_sf(double x, double k) {
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * k, 0.5 * x);
}

std::vector<double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, double step, int max_iter, double ftol) {
  const size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::vector<double> fv(n + 1);
  for (size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  auto order = [&] {
    std::vector<size_t> idx(n + 1);
    for (size_t i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2(n + 1);
    std::vector<double> f2(n + 1);
    for (size_t i = 0; i <= n; ++i) {
      s2[i] = simplex[idx[i]];
      f2[i] = fv[idx[i]];
    }
    simplex.swap(s2);
    fv.swap(f2);
  };

  for (int it = 0; it < max_iter; ++it) {
    order();
    if (std::abs(fv[n] - fv[0]) < ftol * (std::abs(fv[0]) + ftol)) break;
    std::vector<double> centroid(n, 0.0);
    for (size_t i = 0; i < n; ++i)
      for (size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j] / double(n);
    auto blend = [&](double t) {
      std::vector<double> p(n);
      for (size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (simplex[n][j] - centroid[j]);
      return p;
    };
    auto xr = blend(-1.0);
    double fr = f(xr);
    if (fr < fv[0]) {
      auto xe = blend(-2.0);
      double fe = f(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
    } else if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
    } else {
      auto xc = blend(0.5);
      double fc = f(xc);
      if (fc < fv[n]) {
        simplex[n] = xc;
        fv[n] = fc;
      } else {
        for (size_t i = 1; i <= n; ++i) {
          for (size_t j = 0; j < n; ++j)
            simplex[i][j] = 0.5 * (simplex[i][j] + simplex[0][j]);
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  order();
  return simplex[0];
}

}  // namespace wsbm
