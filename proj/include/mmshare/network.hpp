#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mmshare/geometry.hpp"
#include "mmshare/radio.hpp"
#include "mmshare/rng.hpp"
#include "mmshare/stats.hpp"

namespace mmshare {

// The four resource-use cases: spectrum and/or base stations pooled across
// operators.
enum class SharingRegime { NoSharing, BsSharingOnly, SpectrumSharingOnly, FullSharing };

inline bool bs_pooled(SharingRegime r) {
  return r == SharingRegime::BsSharingOnly || r == SharingRegime::FullSharing;
}
inline bool spectrum_pooled(SharingRegime r) {
  return r == SharingRegime::SpectrumSharingOnly || r == SharingRegime::FullSharing;
}

enum class SchedulerPolicy { TemporalFairOpportunistic, RoundRobin };
enum class InterferenceMode { Sinr, SnrOnly };

struct OperatorConfig {
  double bandwidth_hz = 500e6;
  double bs_per_km2 = 50.0;
  double ue_per_km2 = 250.0;
};

struct ValidationError : std::runtime_error {
  explicit ValidationError(std::vector<std::string> f)
      : std::runtime_error("invalid config: " + join(f)), fields(std::move(f)) {}
  std::vector<std::string> fields;

 private:
  static std::string join(const std::vector<std::string>& f) {
    std::string s;
    for (const auto& x : f) {
      if (!s.empty()) s += "; ";
      s += x;
    }
    return s;
  }
};

constexpr int kOutside = -1;

// UE -> serving BS index, or kOutside when no admissible BS exists under
// the regime (those UEs stay in the rate distribution as zeros).
struct Association {
  std::vector<int> serving_bs;
};

inline Association associate(const Deployment& dep, SharingRegime regime) {
  if (dep.region.side_m <= 0.0) throw std::invalid_argument("associate: empty region");
  const bool any_bs = bs_pooled(regime);
  Association assoc;
  assoc.serving_bs.assign(dep.ue.size(), kOutside);
  for (std::size_t u = 0; u < dep.ue.size(); ++u) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < dep.bs.size(); ++b) {
      if (!any_bs && dep.bs[b].op != dep.ue[u].op) continue;
      const double d = distance(dep.ue[u].pos, dep.bs[b].pos, dep.region);
      if (d < best) {  // ties keep the lowest BS index
        best = d;
        assoc.serving_bs[u] = static_cast<int>(b);
      }
    }
  }
  return assoc;
}

inline double operative_bandwidth(int ue_op, SharingRegime regime,
                                  std::span<const OperatorConfig> ops) {
  if (ue_op < 1 || ue_op > static_cast<int>(ops.size()))
    throw std::invalid_argument("operative_bandwidth: bad operator id");
  if (!spectrum_pooled(regime)) return ops[ue_op - 1].bandwidth_hz;
  double total = 0.0;
  for (const auto& o : ops) total += o.bandwidth_hz;
  return total;
}

// Single-stage multicell scheduler: pick the UE with the largest
// instantaneous-to-mean SNR ratio (ties uniform at random), or round robin
// in fixed index order. Returns an index into the cell, -1 for an empty
// cell (BS silent that slot).
inline int schedule_slot(std::span<const double> inst_snr, std::span<const double> mean_snr,
                         SchedulerPolicy policy, std::int64_t slot_index, Rng& rng) {
  const auto n = inst_snr.size();
  if (n != mean_snr.size()) throw std::invalid_argument("schedule_slot: length mismatch");
  if (n == 0) return -1;
  if (policy == SchedulerPolicy::RoundRobin)
    return static_cast<int>(slot_index % static_cast<std::int64_t>(n));
  double best = -std::numeric_limits<double>::infinity();
  int ties = 0;
  int winner = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const double metric = mean_snr[i] > 0.0 ? inst_snr[i] / mean_snr[i] : -1.0;
    if (metric > best) {
      best = metric;
      winner = static_cast<int>(i);
      ties = 1;
    } else if (metric == best) {
      // reservoir pick keeps the choice uniform without a second pass
      ++ties;
      if (rng.uniform_int(ties) == 0) winner = static_cast<int>(i);
    }
  }
  return winner;
}

enum class UeLinkTag : std::uint8_t { Los, Nlos, Outage, Outside };

inline const char* to_string(UeLinkTag t) {
  switch (t) {
    case UeLinkTag::Los: return "LOS";
    case UeLinkTag::Nlos: return "NLOS";
    case UeLinkTag::Outage: return "OUTAGE";
    default: return "OUTSIDE";
  }
}

// Per-drop randomness, one named substream per physical mechanism so drops
// can be reproduced in isolation.
struct DropStreams {
  Rng channel;
  Rng fading;
  Rng interference_fading;
  Rng scheduler;

  DropStreams(const StreamFactory& f, std::uint64_t drop)
      : channel(f.stream("channel", drop)),
        fading(f.stream("fading", drop)),
        interference_fading(f.stream("xfading", drop)),
        scheduler(f.stream("scheduler", drop)) {}
};

struct DropResult {
  std::vector<double> avg_rate_bps;  // per UE, zeros included
  std::vector<UeLinkTag> link_tag;   // serving-link class, or OUTSIDE
  Association association;
};

// One time-slotted downlink drop: slow channel frozen, fading redrawn per
// slot, one transmission per (BS, band) scheduling domain per slot.
inline DropResult run_drop(const Deployment& dep, SharingRegime regime,
                           std::span<const OperatorConfig> ops, const RateModel& rate_model,
                           const AntennaPattern& bs_pattern, const AntennaPattern& ue_pattern,
                           const ChannelParams& channel, std::int64_t slots,
                           SchedulerPolicy policy, InterferenceMode mode, DropStreams& streams) {
  if (slots < 1) throw std::invalid_argument("run_drop: slots must be >= 1");
  const int num_bs = static_cast<int>(dep.bs.size());
  const int num_ue = static_cast<int>(dep.ue.size());
  const int num_ops = static_cast<int>(ops.size());
  const int num_bands = spectrum_pooled(regime) ? 1 : num_ops;

  DropResult result;
  result.avg_rate_bps.assign(num_ue, 0.0);
  result.link_tag.assign(num_ue, UeLinkTag::Outside);
  result.association = associate(dep, regime);
  if (num_ue == 0) return result;

  // Slow channel for every BS-UE pair, BS-major. Distances are floored at
  // 1 m, below the validity range of the path loss fit.
  std::vector<double> gain(static_cast<std::size_t>(num_bs) * num_ue);
  std::vector<LinkClass> cls(gain.size());
  std::vector<double> az(gain.size());  // azimuth BS -> UE
  for (int b = 0; b < num_bs; ++b) {
    for (int u = 0; u < num_ue; ++u) {
      const double d = std::max(1.0, distance(dep.bs[b].pos, dep.ue[u].pos, dep.region));
      const LinkState ls = draw_link_state(d, channel, streams.channel);
      const std::size_t i = static_cast<std::size_t>(b) * num_ue + u;
      gain[i] = ls.mean_path_gain;
      cls[i] = ls.link_class;
      az[i] = azimuth_deg(dep.bs[b].pos, dep.ue[u].pos, dep.region);
    }
  }

  const double p_watts = dbm_to_watts(rate_model.tx_power_dbm);
  const double bs_main = db_to_linear(bs_pattern.main_lobe_db);
  const double bs_back = db_to_linear(bs_pattern.back_lobe_db);
  const double bs_half_beam = bs_pattern.beamwidth_deg / 2.0;
  const double ue_main = db_to_linear(ue_pattern.main_lobe_db);

  std::vector<double> band_width(num_bands, 0.0);
  std::vector<double> band_noise(num_bands, 0.0);
  if (num_bands == 1) {
    band_width[0] = operative_bandwidth(1, regime, ops);
  } else {
    for (int b = 0; b < num_bands; ++b) band_width[b] = ops[b].bandwidth_hz;
  }
  for (int b = 0; b < num_bands; ++b) band_noise[b] = noise_power_watts(rate_model, band_width[b]);

  auto band_of_ue = [&](int u) { return num_bands == 1 ? 0 : dep.ue[u].op - 1; };

  // Scheduling domains: one per (BS, band) with attached UEs. Under BS
  // sharing each BS runs an independent scheduler per operator band.
  struct Domain {
    int bs;
    int band;
    std::vector<int> ues;
  };
  std::vector<Domain> domains;
  {
    std::vector<std::vector<int>> by_key(static_cast<std::size_t>(num_bs) * num_bands);
    for (int u = 0; u < num_ue; ++u) {
      const int s = result.association.serving_bs[u];
      if (s == kOutside) continue;
      by_key[static_cast<std::size_t>(s) * num_bands + band_of_ue(u)].push_back(u);
    }
    for (int b = 0; b < num_bs; ++b)
      for (int band = 0; band < num_bands; ++band) {
        auto& ues = by_key[static_cast<std::size_t>(b) * num_bands + band];
        if (!ues.empty()) domains.push_back({b, band, std::move(ues)});
      }
  }

  // Serving-link mean SNR (perfect beam alignment in-cell: M^B * M^U), and
  // the serving-link tag for the output CSV.
  std::vector<double> mean_snr(num_ue, 0.0);
  std::vector<double> mean_signal(num_ue, 0.0);
  for (int u = 0; u < num_ue; ++u) {
    const int s = result.association.serving_bs[u];
    if (s == kOutside) continue;
    const std::size_t i = static_cast<std::size_t>(s) * num_ue + u;
    result.link_tag[u] = cls[i] == LinkClass::Los    ? UeLinkTag::Los
                         : cls[i] == LinkClass::Nlos ? UeLinkTag::Nlos
                                                     : UeLinkTag::Outage;
    mean_signal[u] = p_watts * bs_main * ue_main * gain[i];
    mean_snr[u] = mean_signal[u] / band_noise[band_of_ue(u)];
  }

  // Potential interferers per UE: every other BS with a nonzero slow gain
  // toward it. The UE-side gain is fixed per drop (the victim's own beam
  // does not move); the BS-side gain depends on who that BS serves in the
  // slot and is resolved in the slot loop.
  struct Audible {
    int bs;
    double p_h_gu;  // P * H * G^U(phi_A)
  };
  std::vector<std::vector<Audible>> audible(num_ue);
  if (mode == InterferenceMode::Sinr) {
    for (int u = 0; u < num_ue; ++u) {
      const int s = result.association.serving_bs[u];
      if (s == kOutside) continue;
      const std::size_t si = static_cast<std::size_t>(s) * num_ue + u;
      for (int b = 0; b < num_bs; ++b) {
        if (b == s) continue;
        const std::size_t i = static_cast<std::size_t>(b) * num_ue + u;
        if (gain[i] == 0.0) continue;
        const double phi_a = fold_angle_deg(az[si] - az[i]);
        audible[u].push_back({b, p_watts * gain[i] * antenna_gain(ue_pattern, phi_a)});
      }
    }
  }

  std::vector<int> scheduled(static_cast<std::size_t>(num_bs) * num_bands);
  std::vector<double> sched_fading(num_ue, 0.0);
  std::vector<double> inst_snr_buf, mean_snr_buf;
  std::vector<double> acc(num_ue, 0.0);

  for (std::int64_t t = 0; t < slots; ++t) {
    std::fill(scheduled.begin(), scheduled.end(), -1);
    for (const auto& dom : domains) {
      inst_snr_buf.resize(dom.ues.size());
      mean_snr_buf.resize(dom.ues.size());
      for (std::size_t k = 0; k < dom.ues.size(); ++k) {
        const int u = dom.ues[k];
        const double f = fading_sample(streams.fading);
        sched_fading[u] = f;
        inst_snr_buf[k] = mean_snr[u] * f;
        mean_snr_buf[k] = mean_snr[u];
      }
      const int pick = schedule_slot(inst_snr_buf, mean_snr_buf, policy, t, streams.scheduler);
      if (pick >= 0)
        scheduled[static_cast<std::size_t>(dom.bs) * num_bands + dom.band] = dom.ues[pick];
    }

    for (const auto& dom : domains) {
      const int u = scheduled[static_cast<std::size_t>(dom.bs) * num_bands + dom.band];
      if (u < 0) continue;
      double interference = 0.0;
      for (const auto& a : audible[u]) {
        const int v = scheduled[static_cast<std::size_t>(a.bs) * num_bands + dom.band];
        if (v < 0) continue;
        const std::size_t base = static_cast<std::size_t>(a.bs) * num_ue;
        const double phi_d = fold_angle_deg(az[base + u] - az[base + v]);
        const double g_bs = phi_d <= bs_half_beam ? bs_main : bs_back;
        interference += a.p_h_gu * g_bs * fading_sample(streams.interference_fading);
      }
      const double sinr =
          mean_signal[u] * sched_fading[u] / (band_noise[dom.band] + interference);
      acc[u] += rate_bps(rate_model, band_width[dom.band], sinr);
    }
  }

  for (int u = 0; u < num_ue; ++u)
    result.avg_rate_bps[u] = acc[u] / static_cast<double>(slots);
  return result;
}

// ---- scenario-level Monte Carlo -----------------------------------------

struct ScenarioConfig {
  Region region;
  std::vector<OperatorConfig> operators{{500e6, 50.0, 250.0}, {500e6, 50.0, 250.0}};
  SharingRegime regime = SharingRegime::NoSharing;
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
};

inline std::vector<std::string> validate(const ScenarioConfig& c) {
  std::vector<std::string> bad;
  if (!(c.region.side_m > 0.0)) bad.push_back("region.side_m: must be > 0");
  if (c.operators.empty()) bad.push_back("operators: must be nonempty");
  for (std::size_t i = 0; i < c.operators.size(); ++i) {
    const auto& o = c.operators[i];
    const std::string p = "operators[" + std::to_string(i) + "].";
    if (o.bandwidth_hz < 0.0) bad.push_back(p + "bandwidth_hz: must be >= 0");
    if (o.bs_per_km2 < 0.0) bad.push_back(p + "bs_per_km2: must be >= 0");
    if (o.ue_per_km2 < 0.0) bad.push_back(p + "ue_per_km2: must be >= 0");
  }
  for (const auto* pat : {&c.bs_pattern, &c.ue_pattern}) {
    const std::string p = pat == &c.bs_pattern ? "bs_pattern." : "ue_pattern.";
    if (!(pat->main_lobe_db > pat->back_lobe_db)) bad.push_back(p + "main_lobe_db: must exceed back_lobe_db");
    if (!(pat->beamwidth_deg > 0.0 && pat->beamwidth_deg < 360.0))
      bad.push_back(p + "beamwidth_deg: must be in (0, 360)");
  }
  if (c.channel.los.shadow_sigma_db < 0.0) bad.push_back("channel.los.shadow_sigma_db: must be >= 0");
  if (c.channel.nlos.shadow_sigma_db < 0.0) bad.push_back("channel.nlos.shadow_sigma_db: must be >= 0");
  if (!(c.channel.los.exponent > 0.0)) bad.push_back("channel.los.exponent: must be > 0");
  if (!(c.channel.nlos.exponent > 0.0)) bad.push_back("channel.nlos.exponent: must be > 0");
  if (!(c.channel.outage_decay_m > 0.0)) bad.push_back("channel.outage_decay_m: must be > 0");
  if (!(c.channel.los_decay_m > 0.0)) bad.push_back("channel.los_decay_m: must be > 0");
  if (!(c.rate_model.overhead >= 0.0 && c.rate_model.overhead < 1.0))
    bad.push_back("rate_model.overhead: must be in [0, 1)");
  if (!(c.rate_model.loss > 0.0 && c.rate_model.loss <= 1.0))
    bad.push_back("rate_model.loss: must be in (0, 1]");
  if (c.slots < 1) bad.push_back("slots: must be >= 1");
  if (c.drops < 1) bad.push_back("drops: must be >= 1");
  if (c.threads < 1) bad.push_back("threads: must be >= 1");
  return bad;
}

struct RateSample {
  int drop;
  int op;
  int ue_index;
  double rate_bps;
  UeLinkTag tag;
};

struct RateDistribution {
  std::vector<RateSample> samples;
  int drops = 0;

  std::vector<double> rates() const {
    std::vector<double> r(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) r[i] = samples[i].rate_bps;
    return r;
  }
  std::vector<double> rates_of_op(int op) const {
    std::vector<double> r;
    for (const auto& s : samples)
      if (s.op == op) r.push_back(s.rate_bps);
    return r;
  }
};

inline Deployment sample_deployment(const ScenarioConfig& cfg, Rng& geometry_rng) {
  Deployment dep;
  dep.region = cfg.region;
  for (std::size_t i = 0; i < cfg.operators.size(); ++i)
    for (const Point& p : sample_hppp(cfg.operators[i].bs_per_km2, cfg.region, geometry_rng))
      dep.bs.push_back({p, static_cast<int>(i) + 1});
  for (std::size_t i = 0; i < cfg.operators.size(); ++i)
    for (const Point& p : sample_hppp(cfg.operators[i].ue_per_km2, cfg.region, geometry_rng))
      dep.ue.push_back({p, static_cast<int>(i) + 1});
  return dep;
}

// Independent drops, deterministic for a given master seed regardless of
// thread count: every drop owns named substreams and writes its own slot.
inline RateDistribution simulate(const ScenarioConfig& cfg) {
  if (auto bad = validate(cfg); !bad.empty()) throw ValidationError(std::move(bad));
  const StreamFactory factory(cfg.seed);
  std::vector<std::vector<RateSample>> per_drop(cfg.drops);

  auto run_one = [&](int d) {
    Rng geom = factory.stream("geometry", d);
    const Deployment dep = sample_deployment(cfg, geom);
    DropStreams streams(factory, d);
    const DropResult res =
        run_drop(dep, cfg.regime, cfg.operators, cfg.rate_model, cfg.bs_pattern, cfg.ue_pattern,
                 cfg.channel, cfg.slots, cfg.policy, cfg.interference, streams);
    std::vector<RateSample>& out = per_drop[d];
    out.reserve(dep.ue.size());
    for (std::size_t u = 0; u < dep.ue.size(); ++u)
      out.push_back({d, dep.ue[u].op, static_cast<int>(u), res.avg_rate_bps[u], res.link_tag[u]});
  };

  if (cfg.threads <= 1 || cfg.drops == 1) {
    for (int d = 0; d < cfg.drops; ++d) run_one(d);
  } else {
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int d = next.fetch_add(1); d < cfg.drops; d = next.fetch_add(1)) run_one(d);
    };
    std::vector<std::thread> pool;
    const int nt = std::min(cfg.threads, cfg.drops);
    pool.reserve(nt);
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RateDistribution dist;
  dist.drops = cfg.drops;
  for (auto& v : per_drop)
    dist.samples.insert(dist.samples.end(), v.begin(), v.end());
  return dist;
}

inline double fifth_percentile(std::span<const double> samples) {
  return stats::fifth_percentile(samples);
}

struct RateSummary {
  double fifth_percentile_bps = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n_samples = 0;
};

inline RateSummary summarize(const RateDistribution& dist, Rng& bootstrap_rng,
                             int resamples = 1000, double level = 0.95) {
  const std::vector<double> r = dist.rates();
  const auto ci =
      stats::bootstrap_ci(r, stats::fifth_percentile_statistic(), level, resamples, bootstrap_rng);
  return {stats::fifth_percentile(r), ci.lo, ci.hi, r.size()};
}

}  // namespace mmshare
