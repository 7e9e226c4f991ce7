#ifndef WSBM_WEIGHT_LIKELIHOOD_HPP
#define WSBM_WEIGHT_LIKELIHOOD_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "wsbm/hier_state.hpp"
#include "wsbm/transform.hpp"

namespace wsbm {

// One covariate channel ready for likelihood evaluation: family, hyperparams
// (conjugate variants), and per-graph constants that do not depend on the
// partition.
struct ChannelModel {
  Family family = Family::ExponentialMicro;
  std::int64_t M = 1;             // binomial trial bound
  std::vector<double> hyper;      // conjugate hyperparameters, family-specific:
                                  //   exponential/geometric/binomial/poisson: {alpha, beta}
                                  //   normal: {mu0, kappa0, nu0, sigma0_sq}
  double log_jacobian = 0.0;      // accumulated covariate transform Jacobian
  double edge_constant = 0.0;     // per-value constants (Poisson, binomial)
};

ChannelModel make_channel_model(const WeightedGraph& g, std::size_t channel,
                                const CovariateSpec& spec);

// Per-cell weight term at the given level (1-based). Zero for empty or
// degenerate cells.
double ll_cell(const ChannelModel& cm, int level, const Cell& cell,
               std::size_t channel);

// Per-level term (nonzero only for the signed family).
double ll_level(const ChannelModel& cm, const LevelAgg& agg);

// Cross-level term (signed family prefactor; zero otherwise).
double ll_global(const ChannelModel& cm, const std::vector<LevelAgg>& per_level);

// Full weight log-likelihood of one channel, constants included.
double ll_weights(const ChannelModel& cm, const HierState& st, std::size_t channel);

// Maximizes ll_weights over the hyperparameters (conjugate families only).
void fit_hyperparameters(ChannelModel& cm, const HierState& st, std::size_t channel);

struct Atom {
  double x = 0.0;
  double mass = 0.0;
};

// Marginal distribution of a single value among n values with sum mu (and sum
// of squares nu, signed family only). Continuous families return a density,
// discrete ones a mass; point masses are reported via micro_marginal_atoms.
double micro_marginal_pdf(Family f, double x, std::int64_t n, double mu,
                          double nu, std::int64_t M = 1);
std::vector<Atom> micro_marginal_atoms(Family f, std::int64_t n, double mu,
                                       double nu);
// Interval outside which the continuous marginal density vanishes.
std::pair<double, double> micro_marginal_support(Family f, std::int64_t n,
                                                 double mu, double nu);

// Posterior-predictive mixture of per-pair marginals over level-1 cells,
// weighted by edge counts. Continuous part plus point masses.
double overall_weight_density(const HierState& st, const ChannelModel& cm,
                              std::size_t channel, double x);
std::vector<Atom> overall_weight_atoms(const HierState& st,
                                       const ChannelModel& cm,
                                       std::size_t channel);

// Graph with covariates pushed through their transform chains, paired with
// ready channel models. A sign-magnitude split expands a channel into
// "<name>.sign" (binomial, M = 1) and "<name>.mag" (the declared family).
struct PreparedGraph {
  WeightedGraph graph;
  std::vector<ChannelModel> channels;
};

PreparedGraph prepare_graph(const GraphBundle& bundle);

struct EvidenceBreakdown {
  double log_jacobian = 0.0;
  double edge_constant = 0.0;
  double global_term = 0.0;
  std::vector<double> level_terms;  // cell + per-level terms, by level
  double total = 0.0;
};

EvidenceBreakdown evidence_breakdown(const ChannelModel& cm, const HierState& st,
                                     std::size_t channel);

}  // namespace wsbm

#endif
