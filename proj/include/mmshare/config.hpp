#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmshare/network.hpp"

namespace mmshare {

inline const char* to_string(SharingRegime r) {
  switch (r) {
    case SharingRegime::NoSharing: return "no_sharing";
    case SharingRegime::BsSharingOnly: return "bs_sharing_only";
    case SharingRegime::SpectrumSharingOnly: return "spectrum_sharing_only";
    default: return "full_sharing";
  }
}

inline const char* to_string(SchedulerPolicy p) {
  return p == SchedulerPolicy::TemporalFairOpportunistic ? "temporal_fair_opportunistic"
                                                         : "round_robin";
}

inline const char* to_string(InterferenceMode m) {
  return m == InterferenceMode::Sinr ? "sinr" : "snr_only";
}

namespace detail {

inline SharingRegime regime_from_string(const std::string& s, std::vector<std::string>& bad) {
  if (s == "no_sharing") return SharingRegime::NoSharing;
  if (s == "bs_sharing_only") return SharingRegime::BsSharingOnly;
  if (s == "spectrum_sharing_only") return SharingRegime::SpectrumSharingOnly;
  if (s == "full_sharing") return SharingRegime::FullSharing;
  bad.push_back("regime: unknown value '" + s + "'");
  return SharingRegime::NoSharing;
}

inline SchedulerPolicy policy_from_string(const std::string& s, std::vector<std::string>& bad) {
  if (s == "temporal_fair_opportunistic") return SchedulerPolicy::TemporalFairOpportunistic;
  if (s == "round_robin") return SchedulerPolicy::RoundRobin;
  bad.push_back("policy: unknown value '" + s + "'");
  return SchedulerPolicy::TemporalFairOpportunistic;
}

inline InterferenceMode interference_from_string(const std::string& s,
                                                 std::vector<std::string>& bad) {
  if (s == "sinr") return InterferenceMode::Sinr;
  if (s == "snr_only") return InterferenceMode::SnrOnly;
  bad.push_back("interference: unknown value '" + s + "'");
  return InterferenceMode::Sinr;
}

}  // namespace detail

inline nlohmann::json to_json(const ScenarioConfig& c) {
  nlohmann::json j;
  j["region"] = {{"side_m", c.region.side_m}, {"wraparound", c.region.wraparound}};
  j["operators"] = nlohmann::json::array();
  for (const auto& o : c.operators)
    j["operators"].push_back({{"bandwidth_hz", o.bandwidth_hz},
                              {"bs_per_km2", o.bs_per_km2},
                              {"ue_per_km2", o.ue_per_km2}});
  j["regime"] = to_string(c.regime);
  j["bs_pattern"] = {{"main_lobe_db", c.bs_pattern.main_lobe_db},
                     {"back_lobe_db", c.bs_pattern.back_lobe_db},
                     {"beamwidth_deg", c.bs_pattern.beamwidth_deg}};
  j["ue_pattern"] = {{"main_lobe_db", c.ue_pattern.main_lobe_db},
                     {"back_lobe_db", c.ue_pattern.back_lobe_db},
                     {"beamwidth_deg", c.ue_pattern.beamwidth_deg}};
  j["channel"] = {{"frequency_ghz", c.channel.frequency_ghz},
                  {"los",
                   {{"intercept_db", c.channel.los.intercept_db},
                    {"exponent", c.channel.los.exponent},
                    {"shadow_sigma_db", c.channel.los.shadow_sigma_db}}},
                  {"nlos",
                   {{"intercept_db", c.channel.nlos.intercept_db},
                    {"exponent", c.channel.nlos.exponent},
                    {"shadow_sigma_db", c.channel.nlos.shadow_sigma_db}}},
                  {"outage_decay_m", c.channel.outage_decay_m},
                  {"outage_offset", c.channel.outage_offset},
                  {"los_decay_m", c.channel.los_decay_m}};
  j["rate_model"] = {{"overhead", c.rate_model.overhead},
                     {"loss", c.rate_model.loss},
                     {"noise_figure_db", c.rate_model.noise_figure_db},
                     {"noise_psd_dbm_hz", c.rate_model.noise_psd_dbm_hz},
                     {"tx_power_dbm", c.rate_model.tx_power_dbm}};
  j["slots"] = c.slots;
  j["drops"] = c.drops;
  j["policy"] = to_string(c.policy);
  j["interference"] = to_string(c.interference);
  j["seed"] = c.seed;
  return j;
}

// Strict parse: unknown keys and wrong types are collected as field-level
// errors; missing fields keep their defaults.
inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  std::vector<std::string> bad;
  static const std::vector<std::string> known = {
      "region", "operators", "regime", "bs_pattern", "ue_pattern", "channel",
      "rate_model", "slots", "drops", "policy", "interference", "seed", "threads"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      bad.push_back(it.key() + ": unknown field");

  auto num = [&](const nlohmann::json& o, const char* key, const std::string& path,
                 double fallback) -> double {
    if (!o.contains(key)) return fallback;
    if (!o[key].is_number()) {
      bad.push_back(path + key + ": expected number");
      return fallback;
    }
    return o[key].get<double>();
  };

  try {
    if (j.contains("region")) {
      c.region.side_m = num(j["region"], "side_m", "region.", c.region.side_m);
      if (j["region"].contains("wraparound")) c.region.wraparound = j["region"]["wraparound"].get<bool>();
    }
    if (j.contains("operators")) {
      if (!j["operators"].is_array() || j["operators"].empty()) {
        bad.push_back("operators: expected nonempty array");
      } else {
        c.operators.clear();
        int i = 0;
        for (const auto& o : j["operators"]) {
          const std::string p = "operators[" + std::to_string(i++) + "].";
          OperatorConfig oc;
          oc.bandwidth_hz = num(o, "bandwidth_hz", p, oc.bandwidth_hz);
          oc.bs_per_km2 = num(o, "bs_per_km2", p, oc.bs_per_km2);
          oc.ue_per_km2 = num(o, "ue_per_km2", p, oc.ue_per_km2);
          c.operators.push_back(oc);
        }
      }
    }
    if (j.contains("regime")) c.regime = detail::regime_from_string(j["regime"].get<std::string>(), bad);
    for (auto [key, pat] : {std::pair{"bs_pattern", &c.bs_pattern}, {"ue_pattern", &c.ue_pattern}}) {
      if (!j.contains(key)) continue;
      const std::string p = std::string(key) + ".";
      pat->main_lobe_db = num(j[key], "main_lobe_db", p, pat->main_lobe_db);
      pat->back_lobe_db = num(j[key], "back_lobe_db", p, pat->back_lobe_db);
      pat->beamwidth_deg = num(j[key], "beamwidth_deg", p, pat->beamwidth_deg);
    }
    if (j.contains("channel")) {
      const auto& ch = j["channel"];
      c.channel.frequency_ghz = num(ch, "frequency_ghz", "channel.", c.channel.frequency_ghz);
      for (auto [key, st] : {std::pair{"los", &c.channel.los}, {"nlos", &c.channel.nlos}}) {
        if (!ch.contains(key)) continue;
        const std::string p = "channel." + std::string(key) + ".";
        st->intercept_db = num(ch[key], "intercept_db", p, st->intercept_db);
        st->exponent = num(ch[key], "exponent", p, st->exponent);
        st->shadow_sigma_db = num(ch[key], "shadow_sigma_db", p, st->shadow_sigma_db);
      }
      c.channel.outage_decay_m = num(ch, "outage_decay_m", "channel.", c.channel.outage_decay_m);
      c.channel.outage_offset = num(ch, "outage_offset", "channel.", c.channel.outage_offset);
      c.channel.los_decay_m = num(ch, "los_decay_m", "channel.", c.channel.los_decay_m);
    }
    if (j.contains("rate_model")) {
      const auto& rm = j["rate_model"];
      c.rate_model.overhead = num(rm, "overhead", "rate_model.", c.rate_model.overhead);
      c.rate_model.loss = num(rm, "loss", "rate_model.", c.rate_model.loss);
      c.rate_model.noise_figure_db = num(rm, "noise_figure_db", "rate_model.", c.rate_model.noise_figure_db);
      c.rate_model.noise_psd_dbm_hz = num(rm, "noise_psd_dbm_hz", "rate_model.", c.rate_model.noise_psd_dbm_hz);
      c.rate_model.tx_power_dbm = num(rm, "tx_power_dbm", "rate_model.", c.rate_model.tx_power_dbm);
    }
    if (j.contains("slots")) c.slots = j["slots"].get<std::int64_t>();
    if (j.contains("drops")) c.drops = j["drops"].get<int>();
    if (j.contains("policy")) c.policy = detail::policy_from_string(j["policy"].get<std::string>(), bad);
    if (j.contains("interference"))
      c.interference = detail::interference_from_string(j["interference"].get<std::string>(), bad);
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    bad.push_back(std::string("json: ") + e.what());
  }

  if (!bad.empty()) throw ValidationError(std::move(bad));
  if (auto range_bad = validate(c); !range_bad.empty()) throw ValidationError(std::move(range_bad));
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError({std::string("json parse: ") + e.what()});
  }
  return config_from_json(j);
}

// 64-bit FNV-1a over the canonical (sorted-key) JSON dump. Identical
// (config, seed) means identical hash means identical outputs.
inline std::string config_hash(const nlohmann::json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char ch : dump) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string config_hash(const ScenarioConfig& c) { return config_hash(to_json(c)); }

}  // namespace mmshare
