#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmshare/network.hpp"
#include "mmshare/stats.hpp"

namespace mmshare {

// The three open-resource scenarios: which resource dimension is fixed at
// its cap while the others scale with network size n.
enum class OpenResourceScenario { NoOpenResources, OpenBsDeployment, OpenSpectrum };

inline const char* to_string(OpenResourceScenario s) {
  switch (s) {
    case OpenResourceScenario::NoOpenResources: return "no_open_resources";
    case OpenResourceScenario::OpenBsDeployment: return "open_bs_deployment";
    default: return "open_spectrum";
  }
}

struct ResourceCaps {
  double bs_per_km2_max = 100.0;
  double bandwidth_hz_max = 1e9;
  double ue_per_km2_max = 500.0;
};

struct Resources {
  double bs_per_km2 = 0.0;
  double bandwidth_hz = 0.0;
  double ue_per_km2 = 0.0;
};

// Resource scaling with network size. Without a coalition this is the
// no-sharing row; with one, n is replaced by the coalition total on each
// shared dimension. UE density always scales with the operator's own n.
inline Resources scenario_resources(double n, OpenResourceScenario scenario,
                                    const ResourceCaps& caps,
                                    std::span<const double> coalition = {}) {
  if (!(n >= 0.0 && n <= 1.0)) throw std::invalid_argument("scenario_resources: n outside [0,1]");
  double pooled = n;
  if (!coalition.empty()) {
    pooled = 0.0;
    for (double nj : coalition) pooled += nj;
    if (pooled > 1.0 + 1e-12)
      throw std::invalid_argument("scenario_resources: coalition sizes exceed 1");
  }
  Resources r;
  r.ue_per_km2 = n * caps.ue_per_km2_max;
  switch (scenario) {
    case OpenResourceScenario::NoOpenResources:
      r.bs_per_km2 = pooled * caps.bs_per_km2_max;
      r.bandwidth_hz = pooled * caps.bandwidth_hz_max;
      break;
    case OpenResourceScenario::OpenBsDeployment:
      r.bs_per_km2 = caps.bs_per_km2_max;
      r.bandwidth_hz = pooled * caps.bandwidth_hz_max;
      break;
    case OpenResourceScenario::OpenSpectrum:
      r.bs_per_km2 = pooled * caps.bs_per_km2_max;
      r.bandwidth_hz = caps.bandwidth_hz_max;
      break;
  }
  return r;
}

struct CurvePoint {
  double n = 0.0;
  double h = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double raw_rate_bps = 0.0;
};

struct ExternalityCurve {
  OpenResourceScenario scenario = OpenResourceScenario::NoOpenResources;
  std::vector<CurvePoint> points;       // n strictly increasing
  double norm_rate_bps = 0.0;           // fifth-percentile rate dividing the raw values
};

// Simulation knobs shared by every point of a curve sweep. The network is a
// single operator sized by scenario_resources.
struct ExternalitySimSettings {
  Region region;
  AntennaPattern bs_pattern{20.0, -10.0, 5.0};
  AntennaPattern ue_pattern{10.0, -10.0, 30.0};
  ChannelParams channel;
  RateModel rate_model;
  std::int64_t slots = 10000;
  int drops = 20;
  SchedulerPolicy policy = SchedulerPolicy::TemporalFairOpportunistic;
  InterferenceMode interference = InterferenceMode::Sinr;
  std::uint64_t seed = 1;
  int threads = 1;
  int bootstrap_resamples = 500;
};

inline ScenarioConfig externality_point_config(OpenResourceScenario scenario,
                                               const ResourceCaps& caps, double n,
                                               const ExternalitySimSettings& s) {
  const Resources r = scenario_resources(n, scenario, caps);
  ScenarioConfig cfg;
  cfg.region = s.region;
  cfg.operators = {{r.bandwidth_hz, r.bs_per_km2, r.ue_per_km2}};
  cfg.regime = SharingRegime::NoSharing;
  cfg.bs_pattern = s.bs_pattern;
  cfg.ue_pattern = s.ue_pattern;
  cfg.channel = s.channel;
  cfg.rate_model = s.rate_model;
  cfg.slots = s.slots;
  cfg.drops = s.drops;
  cfg.policy = s.policy;
  cfg.interference = s.interference;
  cfg.seed = s.seed;
  cfg.threads = s.threads;
  return cfg;
}

struct RawPoint {
  double n = 0.0;
  double rate_bps = 0.0;
  double ci_lo_bps = 0.0;
  double ci_hi_bps = 0.0;
};

inline RawPoint estimate_point(OpenResourceScenario scenario, const ResourceCaps& caps, double n,
                               const ExternalitySimSettings& s) {
  const ScenarioConfig cfg = externality_point_config(scenario, caps, n, s);
  const RateDistribution dist = simulate(cfg);
  if (dist.samples.empty()) return {n, 0.0, 0.0, 0.0};  // zero-size network
  Rng boot = StreamFactory(s.seed).stream("bootstrap", static_cast<std::uint64_t>(n * 1e6));
  const RateSummary sum = summarize(dist, boot, s.bootstrap_resamples);
  return {n, sum.fifth_percentile_bps, sum.ci_lo, sum.ci_hi};
}

// Default grid from the build plan: 0.05 steps, denser below 0.3 to resolve
// the tipping region.
inline std::vector<double> default_externality_grid() {
  std::vector<double> g;
  for (double n = 0.025; n < 0.3 - 1e-9; n += 0.025) g.push_back(n);
  for (double n = 0.3; n <= 1.0 + 1e-9; n += 0.05) g.push_back(std::min(n, 1.0));
  return g;
}

constexpr double kOpenBsZeroSizeEpsilon = 0.01;

// Empirical h(n): one simulation per grid point, fifth percentile with
// bootstrap CI, normalized by baseline_rate_bps (the no-open-resources rate
// at n=1; 0 means derive it from this curve's own n=1 point, which is only
// meaningful for the no-open-resources scenario). h(0) is appended: an
// exact zero for the scenarios with no standing resources, a simulation at
// a tiny epsilon size when open BSs exist at zero network size.
inline ExternalityCurve estimate_h(OpenResourceScenario scenario, const ResourceCaps& caps,
                                   std::span<const double> n_grid,
                                   const ExternalitySimSettings& s,
                                   double baseline_rate_bps = 0.0) {
  if (n_grid.empty()) throw std::invalid_argument("estimate_h: empty grid");
  for (double n : n_grid)
    if (!(n > 0.0 && n <= 1.0)) throw std::invalid_argument("estimate_h: grid point outside (0,1]");

  std::vector<RawPoint> raw(n_grid.size());
  for (std::size_t i = 0; i < n_grid.size(); ++i)
    raw[i] = estimate_point(scenario, caps, n_grid[i], s);

  RawPoint zero{0.0, 0.0, 0.0, 0.0};
  if (scenario == OpenResourceScenario::OpenBsDeployment) {
    const RawPoint eps = estimate_point(scenario, caps, kOpenBsZeroSizeEpsilon, s);
    zero = {0.0, eps.rate_bps, eps.ci_lo_bps, eps.ci_hi_bps};
  }

  double norm = baseline_rate_bps;
  if (norm <= 0.0) {
    if (scenario != OpenResourceScenario::NoOpenResources)
      throw std::invalid_argument("estimate_h: baseline rate required for open-resource scenarios");
    for (const auto& p : raw)
      if (p.n == 1.0) norm = p.rate_bps;
    if (norm <= 0.0) {
      const RawPoint base = estimate_point(scenario, caps, 1.0, s);
      norm = base.rate_bps;
    }
    if (norm <= 0.0) throw std::runtime_error("estimate_h: degenerate baseline (zero rate at n=1)");
  }

  ExternalityCurve curve;
  curve.scenario = scenario;
  curve.norm_rate_bps = norm;
  curve.points.push_back({0.0, zero.rate_bps / norm, zero.ci_lo_bps / norm,
                          zero.ci_hi_bps / norm, zero.rate_bps});
  for (const auto& p : raw)
    curve.points.push_back({p.n, p.rate_bps / norm, p.ci_lo_bps / norm, p.ci_hi_bps / norm,
                            p.rate_bps});
  return curve;
}

// Least-squares slope of h over the grid points with n >= n_min; this is the
// network-effect intensity handed to the duopoly game.
inline double fit_slope(const ExternalityCurve& curve, double n_min) {
  std::vector<double> xs, ys;
  for (const auto& p : curve.points)
    if (p.n >= n_min) {
      xs.push_back(p.n);
      ys.push_back(p.h);
    }
  if (xs.size() < 2) throw std::invalid_argument("fit_slope: fewer than 2 points above n_min");
  return stats::ols_slope(xs, ys);
}

}  // namespace mmshare
