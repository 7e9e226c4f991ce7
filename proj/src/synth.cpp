#include "wsbm/synth.hpp"

#include <stdexcept>

namespace wsbm {

double sample_weight(const WeightParams& wp, Rng& rng) {
  switch (wp.family) {
    case Family::ExponentialMicro:
    case Family::ExponentialConjugate:
      if (!(wp.p1 > 0.0)) throw std::invalid_argument("exponential mean must be > 0");
      return rng.exponential(1.0 / wp.p1);
    case Family::NormalMicro:
    case Family::NormalConjugate:
      if (!(wp.p2 > 0.0)) throw std::invalid_argument("normal stddev must be > 0");
      return rng.normal(wp.p1, wp.p2);
    case Family::GeometricMicro:
    case Family::GeometricConjugate:
      if (!(wp.p1 > 0.0 && wp.p1 <= 1.0))
        throw std::invalid_argument("geometric probability must be in (0, 1]");
      return double(rng.geometric(wp.p1));
    case Family::BinomialMicro:
    case Family::BinomialConjugate:
      if (!(wp.p1 >= 0.0 && wp.p1 <= 1.0) || wp.M < 1)
        throw std::invalid_argument("binomial needs p in [0, 1] and M >= 1");
      return double(rng.binomial(wp.M, wp.p1));
    case Family::PoissonMicro:
    case Family::PoissonConjugate:
      if (!(wp.p1 >= 0.0)) throw std::invalid_argument("poisson mean must be >= 0");
      return double(rng.poisson(wp.p1));
  }
  throw std::logic_error("bad family");
}

GraphBundle synth_generate(const std::vector<std::int32_t>& partition,
                           const std::vector<std::vector<double>>& edge_probabilities,
                           const std::vector<SynthChannel>& channels,
                           std::uint64_t seed, bool directed) {
  const std::int32_t n = std::int32_t(partition.size());
  if (n < 1) throw std::invalid_argument("empty partition");
  const std::size_t B = edge_probabilities.size();
  if (B < 1) throw std::invalid_argument("need at least one group");
  for (const auto& row : edge_probabilities) {
    if (row.size() != B) throw std::invalid_argument("edge probability matrix must be square");
    for (double p : row)
      if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("edge probabilities must lie in [0, 1]");
  }
  for (std::int32_t b : partition)
    if (b < 0 || std::size_t(b) >= B)
      throw std::invalid_argument("partition label out of range");
  for (const auto& ch : channels)
    if (ch.params.size() != B)
      throw std::invalid_argument("weight parameter matrix must be B x B");

  GraphBundle bundle;
  WeightedGraph& g = bundle.graph;
  g.node_count = n;
  g.directed = directed;
  for (const auto& ch : channels) {
    g.channel_names.push_back(ch.name);
    CovariateSpec spec;
    if (!ch.params.empty()) {
      spec.family = ch.params[0][0].family;
      if (family_is_binomial(spec.family)) {
        std::int64_t M = 0;
        for (const auto& row : ch.params)
          for (const auto& wp : row) M = std::max(M, wp.M);
        spec.bound_M = M;
      }
    }
    bundle.channels.push_back(spec);
  }
  g.values.resize(channels.size());

  Rng rng(seed);
  auto consider = [&](std::int32_t i, std::int32_t j) {
    std::size_t r = std::size_t(partition[i]), s = std::size_t(partition[j]);
    if (rng.uniform() >= edge_probabilities[r][s]) return;
    g.edges.push_back({i, j, 1});
    for (std::size_t c = 0; c < channels.size(); ++c)
      g.values[c].push_back({sample_weight(channels[c].params[r][s], rng)});
  };

  if (directed) {
    for (std::int32_t i = 0; i < n; ++i)
      for (std::int32_t j = 0; j < n; ++j)
        if (i != j) consider(i, j);
  } else {
    for (std::int32_t i = 0; i < n; ++i)
      for (std::int32_t j = i + 1; j < n; ++j) consider(i, j);
  }
  g.validate();
  return bundle;
}

}  // namespace wsbm
