#ifndef WSBM_SYNTH_HPP
#define WSBM_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "wsbm/graph.hpp"
#include "wsbm/rng.hpp"

namespace wsbm {

// Per-pair weight sampling parameters. Meaning by family:
//   exponential: p1 = mean
//   normal:      p1 = mean, p2 = stddev
//   geometric:   p1 = success probability
//   binomial:    p1 = success probability, M = trial count
//   poisson:     p1 = mean
struct WeightParams {
  Family family = Family::ExponentialMicro;
  double p1 = 1.0;
  double p2 = 1.0;
  std::int64_t M = 1;
};

struct SynthChannel {
  std::string name = "w";
  // B x B matrix (row-major, symmetric for undirected graphs)
  std::vector<std::vector<WeightParams>> params;
};

// Samples a simple graph with SBM edge probabilities, then covariates
// conditioned on endpoint groups. Deterministic given the seed.
GraphBundle synth_generate(const std::vector<std::int32_t>& partition,
                           const std::vector<std::vector<double>>& edge_probabilities,
                           const std::vector<SynthChannel>& channels,
                           std::uint64_t seed, bool directed = false);

double sample_weight(const WeightParams& wp, Rng& rng);

}  // namespace wsbm

#endif
