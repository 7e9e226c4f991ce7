#include "wsbm/transform.hpp"

#include <cmath>
#include <stdexcept>

namespace wsbm {

bool family_is_micro(Family f) {
  switch (f) {
    case Family::ExponentialMicro:
    case Family::NormalMicro:
    case Family::GeometricMicro:
    case Family::BinomialMicro:
    case Family::PoissonMicro:
      return true;
    default:
      return false;
  }
}

bool family_is_discrete(Family f) {
  switch (f) {
    case Family::GeometricMicro:
    case Family::BinomialMicro:
    case Family::PoissonMicro:
    case Family::GeometricConjugate:
    case Family::BinomialConjugate:
    case Family::PoissonConjugate:
      return true;
    default:
      return false;
  }
}

bool family_is_binomial(Family f) {
  return f == Family::BinomialMicro || f == Family::BinomialConjugate;
}

Family parse_family(const std::string& name) {
  if (name == "exponential-micro") return Family::ExponentialMicro;
  if (name == "normal-micro") return Family::NormalMicro;
  if (name == "geometric-micro") return Family::GeometricMicro;
  if (name == "binomial-micro") return Family::BinomialMicro;
  if (name == "poisson-micro") return Family::PoissonMicro;
  if (name == "exponential-conjugate") return Family::ExponentialConjugate;
  if (name == "normal-conjugate") return Family::NormalConjugate;
  if (name == "geometric-conjugate") return Family::GeometricConjugate;
  if (name == "binomial-conjugate") return Family::BinomialConjugate;
  if (name == "poisson-conjugate") return Family::PoissonConjugate;
  throw std::invalid_argument("unknown weight family: " + name);
}

std::string family_name(Family f) {
  switch (f) {
    case Family::ExponentialMicro: return "exponential-micro";
    case Family::NormalMicro: return "normal-micro";
    case Family::GeometricMicro: return "geometric-micro";
    case Family::BinomialMicro: return "binomial-micro";
    case Family::PoissonMicro: return "poisson-micro";
    case Family::ExponentialConjugate: return "exponential-conjugate";
    case Family::NormalConjugate: return "normal-conjugate";
    case Family::GeometricConjugate: return "geometric-conjugate";
    case Family::BinomialConjugate: return "binomial-conjugate";
    case Family::PoissonConjugate: return "poisson-conjugate";
  }
  throw std::logic_error("bad family");
}

TransformStep::Kind parse_transform_kind(const std::string& name) {
  using K = TransformStep::Kind;
  if (name == "identity") return K::Identity;
  if (name == "log") return K::Log;
  if (name == "neg-log-unit") return K::NegLogUnit;
  if (name == "logit-unit") return K::LogitUnit;
  if (name == "arctanh-sym") return K::ArctanhSym;
  if (name == "affine") return K::Affine;
  if (name == "sign-magnitude-split") return K::SignMagnitudeSplit;
  throw std::invalid_argument("unknown transform: " + name);
}

std::string transform_kind_name(TransformStep::Kind k) {
  using K = TransformStep::Kind;
  switch (k) {
    case K::Identity: return "identity";
    case K::Log: return "log";
    case K::NegLogUnit: return "neg-log-unit";
    case K::LogitUnit: return "logit-unit";
    case K::ArctanhSym: return "arctanh-sym";
    case K::Affine: return "affine";
    case K::SignMagnitudeSplit: return "sign-magnitude-split";
  }
  throw std::logic_error("bad transform kind");
}

namespace {

[[noreturn]] void domain_fail(std::size_t i, double x, const std::string& what) {
  throw std::domain_error("covariate #" + std::to_string(i) + " (value " +
                          std::to_string(x) + "): " + what);
}

}  // namespace

TransformResult apply_transform_step(const std::vector<double>& values,
                                     const TransformStep& step) {
  using K = TransformStep::Kind;
  TransformResult res;
  res.outputs.resize(1);
  auto& out = res.outputs[0];
  out.reserve(values.size());

  switch (step.kind) {
    case K::Identity:
      out = values;
      break;
    case K::Log:
      for (std::size_t i = 0; i < values.size(); ++i) {
        double x = values[i];
        if (!(x > 0.0)) domain_fail(i, x, "log requires x > 0");
        out.push_back(std::log(x));
        res.log_jacobian -= std::log(x);
      }
      break;
    case K::NegLogUnit:
      for (std::size_t i = 0; i < values.size(); ++i) {
        double x = values[i];
        if (!(x > 0.0) || x > 1.0)
          domain_fail(i, x, "neg-log-unit requires 0 < x <= 1");
        out.push_back(-std::log(x));
        res.log_jacobian -= std::log(x);
      }
      break;
    case K::LogitUnit:
      for (std::size_t i = 0; i < values.size(); ++i) {
        double x = values[i];
        if (x == 0.0 || x == 1.0)
          domain_fail(i, x,
                      "logit-unit boundary value; pre-shrink with an affine "
                      "step (e.g. x -> eps + (1-2*eps)*x)");
        if (!(x > 0.0 && x < 1.0))
          domain_fail(i, x, "logit-unit requires 0 < x < 1");
        out.push_back(std::log(x / (1.0 - x)));
        res.log_jacobian += -std::log(x) - std::log1p(-x);
      }
      break;
    case K::ArctanhSym:
      for (std::size_t i = 0; i < values.size(); ++i) {
        double x = values[i];
        if (x == -1.0 || x == 1.0)
          domain_fail(i, x,
                      "arctanh-sym boundary value; pre-shrink with an affine "
                      "step (e.g. x -> (1-eps)*x)");
        if (!(x > -1.0 && x < 1.0))
          domain_fail(i, x, "arctanh-sym requires -1 < x < 1");
        out.push_back(2.0 * std::atanh(x));
        res.log_jacobian += std::log(2.0) - std::log1p(-x * x);
      }
      break;
    case K::Affine: {
      if (step.a == 0.0) throw std::invalid_argument("affine slope must be nonzero");
      double lj = std::log(std::abs(step.a));
      for (std::size_t i = 0; i < values.size(); ++i) {
        out.push_back(step.a * values[i] + step.b);
        res.log_jacobian += lj;
      }
      break;
    }
    case K::SignMagnitudeSplit: {
      res.outputs.resize(2);
      auto& signs = res.outputs[0];
      auto& mags = res.outputs[1];
      signs.reserve(values.size());
      mags.reserve(values.size());
      for (double x : values) {
        signs.push_back(x >= 0.0 ? 1.0 : 0.0);
        mags.push_back(std::abs(x));
      }
      // discrete relabeling: no Jacobian
      break;
    }
  }
  return res;
}

TransformResult apply_transform(const std::vector<double>& values,
                                const std::vector<TransformStep>& chain) {
  TransformResult res;
  res.outputs = {values};
  for (std::size_t k = 0; k < chain.size(); ++k) {
    if (res.outputs.size() != 1)
      throw std::invalid_argument("sign-magnitude-split must be the last step");
    TransformResult step = apply_transform_step(res.outputs[0], chain[k]);
    res.outputs = std::move(step.outputs);
    res.log_jacobian += step.log_jacobian;
  }
  return res;
}

double invert_transform_step(double y, const TransformStep& step) {
  using K = TransformStep::Kind;
  switch (step.kind) {
    case K::Identity: return y;
    case K::Log: return std::exp(y);
    case K::NegLogUnit: return std::exp(-y);
    case K::LogitUnit: return 1.0 / (1.0 + std::exp(-y));
    case K::ArctanhSym: return std::tanh(0.5 * y);
    case K::Affine: return (y - step.b) / step.a;
    case K::SignMagnitudeSplit:
      throw std::invalid_argument("sign-magnitude-split is not elementwise invertible");
  }
  throw std::logic_error("bad transform kind");
}

void check_family_domain(const std::vector<double>& values, Family family,
                         std::optional<std::int64_t> bound_M) {
  switch (family) {
    case Family::ExponentialMicro:
    case Family::ExponentialConjugate:
      for (std::size_t i = 0; i < values.size(); ++i)
        if (!(values[i] >= 0.0))
          domain_fail(i, values[i], "exponential family requires x >= 0");
      break;
    case Family::NormalMicro:
    case Family::NormalConjugate:
      for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
          domain_fail(i, values[i], "normal family requires finite x");
      break;
    case Family::GeometricMicro:
    case Family::GeometricConjugate:
    case Family::PoissonMicro:
    case Family::PoissonConjugate:
      for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] < 0.0 || values[i] != std::floor(values[i]))
          domain_fail(i, values[i], "family requires integer x >= 0");
      break;
    case Family::BinomialMicro:
    case Family::BinomialConjugate: {
      if (!bound_M) throw std::invalid_argument("binomial family requires bound M");
      double M = double(*bound_M);
      for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] < 0.0 || values[i] > M || values[i] != std::floor(values[i]))
          domain_fail(i, values[i], "binomial family requires integer 0 <= x <= M");
      break;
    }
  }
}

}  // namespace wsbm
