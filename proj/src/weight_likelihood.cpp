#include "wsbm/weight_likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wsbm/numeric.hpp"

namespace wsbm {

namespace {

double ln_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// (w - 1)! / mu^(w - 1): values of an exponential variable given their sum
double exponential_term(std::int64_t w, double mu) {
  if (!(mu > 0.0) || w < 1) return 0.0;
  return ln_factorial(w - 1) - double(w - 1) * std::log(mu);
}

// multiset(w, mu)^-1: nonnegative integers given their sum
double geometric_term(std::int64_t w, double mu_d) {
  std::int64_t mu = std::llround(mu_d);
  if (mu <= 0 || w < 1) return 0.0;
  return -ln_multiset(w, mu);
}

double conjugate_cell(const ChannelModel& cm, const Cell& cell, std::size_t c) {
  const auto& cs = cell.ch[c];
  double m = double(cell.w);
  switch (cm.family) {
    case Family::ExponentialConjugate: {
      double a = cm.hyper[0], b = cm.hyper[1];
      return std::lgamma(m + a) - std::lgamma(a) + a * std::log(b) -
             (m + a) * std::log(cs.mu + b);
    }
    case Family::NormalConjugate: {
      double mu0 = cm.hyper[0], k0 = cm.hyper[1], n0 = cm.hyper[2], s0 = cm.hyper[3];
      double z = HierState::z_value(cell, c);
      double k = k0 + m, np = n0 + m;
      double dev = mu0 - cs.mu / m;
      double S = (n0 * s0 + z + (m * k0 / (k0 + m)) * dev * dev) / np;
      return std::lgamma(0.5 * np) - std::lgamma(0.5 * n0) +
             0.5 * (std::log(k0) - std::log(k)) + 0.5 * n0 * std::log(n0 * s0) -
             0.5 * np * std::log(np * S) - 0.5 * m * std::log(M_PI);
    }
    case Family::GeometricConjugate: {
      double a = cm.hyper[0], b = cm.hyper[1];
      return ln_beta(m + a, cs.mu + b) - ln_beta(a, b);
    }
    case Family::BinomialConjugate: {
      double a = cm.hyper[0], b = cm.hyper[1];
      return ln_beta(cs.mu + a, double(cm.M) * m - cs.mu + b) - ln_beta(a, b);
    }
    case Family::PoissonConjugate: {
      double a = cm.hyper[0], b = cm.hyper[1];
      return a * std::log(b) + std::lgamma(cs.mu + a) - std::lgamma(a) -
             (cs.mu + a) * std::log(m + b);
    }
    default:
      throw std::logic_error("not a conjugate family");
  }
}

}  // namespace

ChannelModel make_channel_model(const WeightedGraph& g, std::size_t channel,
                                const CovariateSpec& spec) {
  ChannelModel cm;
  cm.family = spec.family;
  cm.log_jacobian = spec.log_jacobian;

  if (family_is_binomial(cm.family)) {
    std::int64_t mx = spec.bound_M.value_or(1);
    for (const auto& edge_vals : g.values[channel])
      for (double x : edge_vals) mx = std::max(mx, std::int64_t(std::llround(x)));
    cm.M = mx;
  }
  switch (cm.family) {
    case Family::NormalConjugate:
      cm.hyper = {0.0, 1.0, 1.0, 1.0};
      break;
    case Family::ExponentialConjugate:
    case Family::GeometricConjugate:
    case Family::BinomialConjugate:
    case Family::PoissonConjugate:
      cm.hyper = {1.0, 1.0};
      break;
    default:
      break;
  }
  if (cm.family == Family::PoissonMicro || cm.family == Family::PoissonConjugate) {
    for (const auto& edge_vals : g.values[channel])
      for (double x : edge_vals) cm.edge_constant -= ln_factorial(std::llround(x));
  }
  if (family_is_binomial(cm.family)) {
    for (const auto& edge_vals : g.values[channel])
      for (double x : edge_vals)
        cm.edge_constant += ln_binomial(cm.M, std::llround(x));
  }
  return cm;
}

double ll_cell(const ChannelModel& cm, int level, const Cell& cell,
               std::size_t channel) {
  if (cell.w < 1) return 0.0;
  const auto& cs = cell.ch[channel];
  switch (cm.family) {
    case Family::ExponentialMicro:
      return exponential_term(cell.w, cs.mu);
    case Family::NormalMicro: {
      double z = HierState::z_value(cell, channel);
      if (cell.w < 2 || z <= 0.0) return 0.0;
      double w = double(cell.w);
      return std::lgamma(0.5 * (w - 1.0)) + 0.5 * std::log(w) -
             0.5 * (w - 1.0) * std::log(M_PI) - 0.5 * (w - 3.0) * std::log(z);
    }
    case Family::GeometricMicro:
      return geometric_term(cell.w, cs.mu);
    case Family::BinomialMicro:
      if (level == 1) {
        std::int64_t mu = std::llround(cs.mu);
        return -ln_binomial(cm.M * cell.w, mu);
      }
      return geometric_term(cell.w, cs.mu);
    case Family::PoissonMicro:
      if (level == 1) {
        std::int64_t mu = std::llround(cs.mu);
        return ln_factorial(mu) - double(mu) * std::log(double(cell.w));
      }
      return geometric_term(cell.w, cs.mu);
    default:
      // conjugate families are single-level
      return level == 1 ? conjugate_cell(cm, cell, channel) : 0.0;
  }
}

double ll_level(const ChannelModel& cm, const LevelAgg& agg) {
  if (cm.family != Family::NormalMicro || agg.m_z <= 0) return 0.0;
  double term = std::log(double(agg.m_z));
  if (agg.mu_z > 0.0)
    term += ln_factorial(agg.m_z - 1) - double(agg.m_z - 1) * std::log(agg.mu_z);
  return term;
}

double ll_global(const ChannelModel& cm, const std::vector<LevelAgg>& per_level) {
  if (cm.family != Family::NormalMicro) return 0.0;
  std::int64_t levels = 0;
  double total = 0.0;
  for (const auto& a : per_level) {
    if (a.m_z > 0) ++levels;
    total += double(a.m_z) * a.mu_z;
  }
  if (levels < 1 || !(total > 0.0)) return 0.0;
  return ln_factorial(levels - 1) - double(levels - 1) * std::log(total);
}

double ll_weights(const ChannelModel& cm, const HierState& st, std::size_t channel) {
  KahanSum sum;
  sum.add(cm.log_jacobian);
  sum.add(cm.edge_constant);
  std::vector<LevelAgg> aggs;
  for (int l = 1; l <= st.depth(); ++l) {
    const LevelState& ls = st.level(l);
    for (const auto& [key, cell] : ls.cells) sum.add(ll_cell(cm, l, cell, channel));
    sum.add(ll_level(cm, ls.agg[channel]));
    aggs.push_back(ls.agg[channel]);
  }
  sum.add(ll_global(cm, aggs));
  return sum.value();
}

void fit_hyperparameters(ChannelModel& cm, const HierState& st, std::size_t channel) {
  bool is_normal = cm.family == Family::NormalConjugate;
  switch (cm.family) {
    case Family::ExponentialConjugate:
    case Family::NormalConjugate:
    case Family::GeometricConjugate:
    case Family::BinomialConjugate:
    case Family::PoissonConjugate:
      break;
    default:
      return;  // microcanonical families have no hyperparameters
  }
  auto unpack = [&](const std::vector<double>& t) {
    std::vector<double> h(t.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      h[i] = (is_normal && i == 0) ? t[i] : std::exp(t[i]);
    return h;
  };
  std::vector<double> t0(cm.hyper.size());
  for (std::size_t i = 0; i < cm.hyper.size(); ++i)
    t0[i] = (is_normal && i == 0) ? cm.hyper[i] : std::log(cm.hyper[i]);
  ChannelModel probe = cm;
  auto objective = [&](const std::vector<double>& t) {
    probe.hyper = unpack(t);
    double ll = ll_weights(probe, st, channel);
    return std::isfinite(ll) ? -ll : 1e100;
  };
  cm.hyper = unpack(nelder_mead(objective, t0));
}

double micro_marginal_pdf(Family f, double x, std::int64_t n, double mu,
                          double nu, std::int64_t M) {
  switch (f) {
    case Family::ExponentialMicro: {
      if (n < 2) return 0.0;  // n = 1 is an atom at mu
      if (x < 0.0 || x > mu || !(mu > 0.0)) return 0.0;
      if (n == 2) return 1.0 / mu;
      return std::exp(std::log(double(n - 1)) +
                      double(n - 2) * std::log(mu - x) -
                      double(n - 1) * std::log(mu));
    }
    case Family::NormalMicro: {
      if (n < 3) return 0.0;  // n <= 2 is purely atomic
      double zn = nu - mu * mu / double(n);
      if (!(zn > 0.0)) return 0.0;
      // factored form of nu - x^2 - (mu - x)^2 / (n - 1): stable near the
      // support endpoints
      auto [lo, hi] = micro_marginal_support(f, n, mu, nu);
      double rem = double(n) / double(n - 1) * (hi - x) * (x - lo);
      if (!(rem > 0.0)) return 0.0;
      double ln_p = std::lgamma(0.5 * double(n - 1)) - std::lgamma(0.5 * double(n - 2)) +
                    0.5 * (std::log(double(n)) - std::log(M_PI * double(n - 1))) +
                    0.5 * double(n - 4) * std::log(rem) -
                    0.5 * double(n - 3) * std::log(zn);
      return std::exp(ln_p);
    }
    case Family::GeometricMicro: {
      std::int64_t xi = std::llround(x), mui = std::llround(mu);
      if (x != std::floor(x) || xi < 0 || xi > mui) return 0.0;
      if (n == 1) return xi == mui ? 1.0 : 0.0;
      return std::exp(ln_multiset(n - 1, mui - xi) - ln_multiset(n, mui));
    }
    case Family::BinomialMicro: {
      std::int64_t xi = std::llround(x), mui = std::llround(mu);
      if (x != std::floor(x) || xi < 0 || xi > std::min(M, mui)) return 0.0;
      if (mui - xi > M * (n - 1)) return 0.0;
      return std::exp(ln_binomial(M, xi) + ln_binomial(M * (n - 1), mui - xi) -
                      ln_binomial(M * n, mui));
    }
    case Family::PoissonMicro: {
      std::int64_t xi = std::llround(x), mui = std::llround(mu);
      if (x != std::floor(x) || xi < 0 || xi > mui) return 0.0;
      if (n == 1) return xi == mui ? 1.0 : 0.0;
      double p = 1.0 / double(n);
      return std::exp(ln_binomial(mui, xi) + double(xi) * std::log(p) +
                      double(mui - xi) * std::log1p(-p));
    }
    default:
      throw std::invalid_argument("marginal only defined for microcanonical families");
  }
}

std::vector<Atom> micro_marginal_atoms(Family f, std::int64_t n, double mu,
                                       double nu) {
  std::vector<Atom> atoms;
  switch (f) {
    case Family::ExponentialMicro:
      if (n == 1) atoms.push_back({mu, 1.0});
      break;
    case Family::NormalMicro:
      if (n == 1) {
        atoms.push_back({mu, 1.0});
      } else if (n == 2) {
        double disc = 2.0 * nu - mu * mu;
        if (disc > 0.0) {
          double h = std::sqrt(disc);
          atoms.push_back({0.5 * (mu - h), 0.5});
          atoms.push_back({0.5 * (mu + h), 0.5});
        } else {
          atoms.push_back({0.5 * mu, 1.0});
        }
      }
      break;
    default:
      break;  // discrete families have no continuous part to separate
  }
  return atoms;
}

std::pair<double, double> micro_marginal_support(Family f, std::int64_t n,
                                                 double mu, double nu) {
  if (f == Family::ExponentialMicro) return {0.0, mu};
  if (f == Family::NormalMicro) {
    double disc = double(n - 1) * (double(n) * nu - mu * mu);
    double h = disc > 0.0 ? std::sqrt(disc) / double(n) : 0.0;
    double mid = mu / double(n);
    return {mid - h, mid + h};
  }
  return {0.0, mu};
}

double overall_weight_density(const HierState& st, const ChannelModel& cm,
                              std::size_t channel, double x) {
  double total = 0.0;
  const LevelState& ls = st.level(1);
  double E = double(st.total_edges());
  if (E <= 0.0) return 0.0;
  for (const auto& [key, cell] : ls.cells) {
    const auto& cs = cell.ch[channel];
    total += double(cell.w) / E *
             micro_marginal_pdf(cm.family, x, cell.w, cs.mu, cs.nu, cm.M);
  }
  return total;
}

std::vector<Atom> overall_weight_atoms(const HierState& st,
                                       const ChannelModel& cm,
                                       std::size_t channel) {
  std::vector<Atom> out;
  const LevelState& ls = st.level(1);
  double E = double(st.total_edges());
  if (E <= 0.0) return out;
  for (const auto& [key, cell] : ls.cells) {
    const auto& cs = cell.ch[channel];
    for (const auto& a : micro_marginal_atoms(cm.family, cell.w, cs.mu, cs.nu))
      out.push_back({a.x, a.mass * double(cell.w) / E});
  }
  return out;
}

PreparedGraph prepare_graph(const GraphBundle& bundle) {
  const WeightedGraph& src = bundle.graph;
  PreparedGraph out;
  out.graph.node_count = src.node_count;
  out.graph.directed = src.directed;
  out.graph.edges = src.edges;

  for (std::size_t c = 0; c < src.channel_count(); ++c) {
    const CovariateSpec& spec = bundle.channels[c];
    bool split = !spec.transform_chain.empty() &&
                 spec.transform_chain.back().kind == TransformStep::Kind::SignMagnitudeSplit;
    double jacobian = 0.0;
    std::size_t first = out.graph.values.size();
    out.graph.values.resize(first + (split ? 2 : 1));
    for (std::size_t e = 0; e < src.edges.size(); ++e) {
      TransformResult tr = apply_transform(src.values[c][e], spec.transform_chain);
      jacobian += tr.log_jacobian;
      for (std::size_t k = 0; k < tr.outputs.size(); ++k)
        out.graph.values[first + k].push_back(std::move(tr.outputs[k]));
    }
    if (split) {
      out.graph.channel_names.push_back(src.channel_names[c] + ".sign");
      out.graph.channel_names.push_back(src.channel_names[c] + ".mag");
      CovariateSpec sign_spec;
      sign_spec.family = family_is_micro(spec.family) ? Family::BinomialMicro
                                                      : Family::BinomialConjugate;
      sign_spec.bound_M = 1;
      CovariateSpec mag_spec;
      mag_spec.family = spec.family;
      mag_spec.bound_M = spec.bound_M;
      mag_spec.log_jacobian = spec.log_jacobian + jacobian;
      for (const auto& edge_vals : out.graph.values[first])
        check_family_domain(edge_vals, sign_spec.family, sign_spec.bound_M);
      for (const auto& edge_vals : out.graph.values[first + 1])
        check_family_domain(edge_vals, mag_spec.family, mag_spec.bound_M);
      out.channels.push_back(make_channel_model(out.graph, first, sign_spec));
      out.channels.push_back(make_channel_model(out.graph, first + 1, mag_spec));
    } else {
      out.graph.channel_names.push_back(src.channel_names[c]);
      CovariateSpec flat = spec;
      flat.log_jacobian = spec.log_jacobian + jacobian;
      for (const auto& edge_vals : out.graph.values[first])
        check_family_domain(edge_vals, flat.family, flat.bound_M);
      out.channels.push_back(make_channel_model(out.graph, first, flat));
    }
  }
  out.graph.validate();
  return out;
}

EvidenceBreakdown evidence_breakdown(const ChannelModel& cm, const HierState& st,
                                     std::size_t channel) {
  EvidenceBreakdown br;
  br.log_jacobian = cm.log_jacobian;
  br.edge_constant = cm.edge_constant;
  std::vector<LevelAgg> aggs;
  KahanSum total;
  total.add(cm.log_jacobian);
  total.add(cm.edge_constant);
  for (int l = 1; l <= st.depth(); ++l) {
    const LevelState& ls = st.level(l);
    KahanSum lvl;
    for (const auto& [key, cell] : ls.cells) lvl.add(ll_cell(cm, l, cell, channel));
    lvl.add(ll_level(cm, ls.agg[channel]));
    br.level_terms.push_back(lvl.value());
    total.add(lvl.value());
    aggs.push_back(ls.agg[channel]);
  }
  br.global_term = ll_global(cm, aggs);
  total.add(br.global_term);
  br.total = total.value();
  return br;
}

}  // namespace wsbm
