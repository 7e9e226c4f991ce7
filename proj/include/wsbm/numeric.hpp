#ifndef WSBM_NUMERIC_HPP
#define WSBM_NUMERIC_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace wsbm {

// ln n! with a fixed table for small n and lgamma above.
double ln_factorial(std::int64_t n);

// ln C(n, k); 0 if k < 0 or k > n would make the coefficient vanish is an
// error, callers must pass valid arguments.
double ln_binomial(std::int64_t n, std::int64_t k);

// ln of the multiset coefficient ((n, k)) = C(n + k - 1, k): number of ways
// to distribute k indistinct items into n distinct parts.
double ln_multiset(std::int64_t n, std::int64_t k);

// ln (2m)!! = m ln 2 + ln m!
double ln_double_factorial_even(std::int64_t m);

// Neumaier compensated accumulator.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }
  void reset(double v = 0.0) {
    sum_ = v;
    comp_ = 0.0;
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Adaptive Simpson quadrature on [a, b].
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-10, int max_depth = 40);

// Regularized incomplete gamma functions P(a, x), Q(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-squared distribution with k dof.
double chi2_sf(double x, double k);

// Nelder-Mead minimization, dimension = x0.size(). Returns best point.
std::vector<double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, double step = 0.5, int max_iter = 2000,
    double ftol = 1e-10);

}  // namespace wsbm

#endif
