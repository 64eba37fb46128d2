#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mmshare/externality.hpp"
#include "mmshare/network.hpp"

namespace mmshare {

// Named, re-runnable recipes for the experiment figures. Desk scale
// (10^4 slots, 20 drops, 1 km^2) by default; the full-scale variant raises
// the slot count to 10^5.

struct SimulatePreset {
  std::string name;
  ScenarioConfig base;
  std::vector<SharingRegime> regimes;
};

inline ScenarioConfig desk_scale_base() {
  ScenarioConfig cfg;
  cfg.region = {1000.0, true};
  cfg.slots = 10000;
  cfg.drops = 20;
  cfg.seed = 20160901;
  return cfg;
}

inline std::optional<SimulatePreset> simulate_preset(const std::string& name) {
  const std::vector<SharingRegime> all_regimes = {
      SharingRegime::NoSharing, SharingRegime::BsSharingOnly,
      SharingRegime::SpectrumSharingOnly, SharingRegime::FullSharing};
  if (name == "fig4_symmetric") {
    SimulatePreset p{name, desk_scale_base(), all_regimes};
    p.base.operators = {{500e6, 50.0, 250.0}, {500e6, 50.0, 250.0}};
    return p;
  }
  if (name == "fig5_asymmetric") {
    SimulatePreset p{name, desk_scale_base(), all_regimes};
    p.base.operators = {{700e6, 70.0, 350.0}, {300e6, 30.0, 150.0}};
    return p;
  }
  return std::nullopt;
}

struct ExternalityPreset {
  std::string name;
  std::vector<OpenResourceScenario> scenarios;
  ResourceCaps caps;
  std::vector<double> grid;
  ExternalitySimSettings settings;
};

inline std::optional<ExternalityPreset> externality_preset(const std::string& name) {
  ExternalityPreset p;
  p.name = name;
  p.caps = {100.0, 1e9, 500.0};
  p.grid = default_externality_grid();
  p.settings.region = {1000.0, true};
  p.settings.slots = 10000;
  p.settings.drops = 20;
  p.settings.seed = 20160901;
  if (name == "networksize_noopen") {
    p.scenarios = {OpenResourceScenario::NoOpenResources};
    return p;
  }
  if (name == "networksize_openbs") {
    p.scenarios = {OpenResourceScenario::OpenBsDeployment};
    return p;
  }
  if (name == "networksize_openspectrum") {
    p.scenarios = {OpenResourceScenario::OpenSpectrum};
    return p;
  }
  if (name == "networksize_all") {
    p.scenarios = {OpenResourceScenario::NoOpenResources, OpenResourceScenario::OpenBsDeployment,
                   OpenResourceScenario::OpenSpectrum};
    return p;
  }
  return std::nullopt;
}

inline std::vector<std::string> preset_names() {
  return {"fig4_symmetric", "fig5_asymmetric", "networksize_noopen", "networksize_openbs",
          "networksize_openspectrum", "networksize_all"};
}

}  // namespace mmshare
