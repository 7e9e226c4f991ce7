#ifndef WSBM_TRANSFORM_HPP
#define WSBM_TRANSFORM_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wsbm {

enum class Family {
  ExponentialMicro,
  NormalMicro,
  GeometricMicro,
  BinomialMicro,
  PoissonMicro,
  ExponentialConjugate,
  NormalConjugate,
  GeometricConjugate,
  BinomialConjugate,
  PoissonConjugate,
};

bool family_is_micro(Family f);
bool family_is_discrete(Family f);
bool family_is_binomial(Family f);
Family parse_family(const std::string& name);
std::string family_name(Family f);

struct TransformStep {
  enum class Kind {
    Identity,
    Log,
    NegLogUnit,   // -ln x on (0, 1]
    LogitUnit,    // ln(x / (1 - x)) on (0, 1)
    ArctanhSym,   // 2 arctanh(x) on (-1, 1)
    Affine,       // a * x + b, a != 0
    SignMagnitudeSplit,
  };
  Kind kind = Kind::Identity;
  double a = 1.0;
  double b = 0.0;

  bool operator==(const TransformStep&) const = default;
};

TransformStep::Kind parse_transform_kind(const std::string& name);
std::string transform_kind_name(TransformStep::Kind k);

struct CovariateSpec {
  Family family = Family::ExponentialMicro;
  std::vector<TransformStep> transform_chain;
  std::optional<std::int64_t> bound_M;  // binomial only
  double log_jacobian = 0.0;            // accumulated over applied transforms

  bool operator==(const CovariateSpec&) const = default;
};

struct TransformResult {
  // One output vector normally; two for sign-magnitude-split
  // (first: signs in {0,1}, second: magnitudes).
  std::vector<std::vector<double>> outputs;
  double log_jacobian = 0.0;
};

// Applies one step to all values. Throws std::domain_error naming the index
// of the first offending value.
TransformResult apply_transform_step(const std::vector<double>& values,
                                     const TransformStep& step);

// Applies a whole chain; the split step, when present, must be last.
TransformResult apply_transform(const std::vector<double>& values,
                                const std::vector<TransformStep>& chain);

// Inverse of an invertible step (split is not invertible elementwise).
double invert_transform_step(double y, const TransformStep& step);

// Checks transformed values against the family's domain. Throws
// std::domain_error naming the first offending index.
void check_family_domain(const std::vector<double>& values, Family family,
                         std::optional<std::int64_t> bound_M);

}  // namespace wsbm

#endif
