#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "mmshare/geometry.hpp"
#include "mmshare/rng.hpp"
#include "mmshare/units.hpp"

namespace mmshare {

// Flat-top sector pattern: main lobe gain M inside the beamwidth, back lobe
// gain m everywhere else.
struct AntennaPattern {
  double main_lobe_db = 20.0;
  double back_lobe_db = -10.0;
  double beamwidth_deg = 5.0;
};

inline double antenna_gain(const AntennaPattern& pattern, double phi_deg) {
  const double phi = fold_angle_deg(phi_deg);
  return db_to_linear(phi <= pattern.beamwidth_deg / 2.0 ? pattern.main_lobe_db
                                                         : pattern.back_lobe_db);
}

enum class LinkClass : std::uint8_t { Los, Nlos, Outage };

struct StatePathLoss {
  double intercept_db = 0.0;
  double exponent = 2.0;        // multiplies 10*log10(d[m])
  double shadow_sigma_db = 0.0;
};

// Distance-dependent three-state channel. Defaults are the 73 GHz fit from
// the NYU measurement campaign: PL(d) = intercept + exponent*10*log10(d),
// P_out(d) = max(0, 1 - exp(-d/outage_decay_m + outage_offset)),
// P_los(d) = (1 - P_out(d)) * exp(-d/los_decay_m).
struct ChannelParams {
  double frequency_ghz = 73.0;
  StatePathLoss los{69.8, 2.0, 5.8};
  StatePathLoss nlos{86.6, 2.45, 8.0};
  double outage_decay_m = 30.0;
  double outage_offset = 5.2;
  double los_decay_m = 67.1;

  double outage_probability(double d_m) const {
    return std::max(0.0, 1.0 - std::exp(-d_m / outage_decay_m + outage_offset));
  }
  double los_probability(double d_m) const {
    return (1.0 - outage_probability(d_m)) * std::exp(-d_m / los_decay_m);
  }
  double nlos_probability(double d_m) const {
    return 1.0 - outage_probability(d_m) - los_probability(d_m);
  }
};

// Slow part of the channel, frozen for a drop: link class plus lognormal
// shadowing folded into a linear mean path gain. Outage is a zero gain.
struct LinkState {
  LinkClass link_class = LinkClass::Outage;
  double shadowing_db = 0.0;
  double mean_path_gain = 0.0;
};

inline LinkState draw_link_state(double d_m, const ChannelParams& params, Rng& rng) {
  if (d_m <= 0.0) throw std::invalid_argument("draw_link_state: nonpositive distance");
  const double p_out = params.outage_probability(d_m);
  const double p_los = params.los_probability(d_m);
  const double u = rng.uniform();
  if (u < p_out) return {LinkClass::Outage, 0.0, 0.0};
  const bool los = u < p_out + p_los;
  const StatePathLoss& s = los ? params.los : params.nlos;
  const double shadow = rng.normal() * s.shadow_sigma_db;
  const double pl_db = s.intercept_db + s.exponent * 10.0 * std::log10(d_m) + shadow;
  return {los ? LinkClass::Los : LinkClass::Nlos, shadow, db_to_linear(-pl_db)};
}

// Rayleigh block fading: unit-mean exponential power gain, i.i.d. per link
// per slot.
inline double fading_sample(Rng& rng) { return rng.exponential(); }

// Shannon-fit rate model: R = (1-overhead) * W * log2(1 + loss * SINR).
struct RateModel {
  double overhead = 0.2;          // alpha
  double loss = 0.5;              // beta
  double noise_figure_db = 7.0;   // N_f
  double noise_psd_dbm_hz = -174.0;  // N_0
  double tx_power_dbm = 30.0;     // P
};

inline double noise_power_watts(const RateModel& model, double bandwidth_hz) {
  if (bandwidth_hz < 0.0) throw std::invalid_argument("noise_power: negative bandwidth");
  return db_to_linear(model.noise_figure_db) * dbm_to_watts(model.noise_psd_dbm_hz) *
         bandwidth_hz;
}

inline double rate_bps(const RateModel& model, double bandwidth_hz, double sinr) {
  if (bandwidth_hz < 0.0 || sinr < 0.0) throw std::invalid_argument("rate: negative input");
  return (1.0 - model.overhead) * bandwidth_hz * std::log2(1.0 + model.loss * sinr);
}

// One co-channel transmitter as seen from a victim UE: the BS position, the
// point its beam is steered at, the slow link gain toward the victim, and
// this slot's fading draw.
struct InterferingTx {
  Point bs_pos;
  Point beam_target;
  LinkState link_to_victim;
  double fading = 1.0;
};

// Sum of P * G^B(phi_D) * G^U(phi_A) * H * fading over the transmitters.
// phi_D is the departure angle off the transmitter's own serving beam,
// phi_A the victim's arrival angle off its own serving beam.
inline double interference_power_watts(const Point& victim, const Point& victim_boresight,
                                       std::span<const InterferingTx> transmitters,
                                       const AntennaPattern& bs_pattern,
                                       const AntennaPattern& ue_pattern,
                                       double tx_power_watts, const Region& region) {
  double total = 0.0;
  for (const auto& tx : transmitters) {
    if (tx.link_to_victim.mean_path_gain == 0.0) continue;
    const double phi_d = angle_from_boresight(tx.bs_pos, tx.beam_target, victim, region);
    const double phi_a = angle_from_boresight(victim, victim_boresight, tx.bs_pos, region);
    total += tx_power_watts * antenna_gain(bs_pattern, phi_d) * antenna_gain(ue_pattern, phi_a) *
             tx.link_to_victim.mean_path_gain * tx.fading;
  }
  return total;
}

}  // namespace mmshare
