#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmshare/config.hpp"
#include "mmshare/demand.hpp"
#include "mmshare/duopoly.hpp"
#include "mmshare/externality.hpp"
#include "mmshare/network.hpp"

namespace mmshare {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

// Every artifact starts with "# key=value" comment lines so a file can be
// traced back to the exact run that produced it.
using Metadata = std::map<std::string, std::string>;

inline std::ofstream open_out(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  return out;
}

inline void write_header_comments(std::ofstream& out, const Metadata& meta) {
  for (const auto& [k, v] : meta) out << "# " << k << "=" << v << "\n";
}

inline void write_rates_csv(const std::string& path, const RateDistribution& dist,
                            const Metadata& meta) {
  auto out = open_out(path);
  write_header_comments(out, meta);
  out << "drop,operator,ue_index,rate_bps,link_class\n";
  for (const auto& s : dist.samples)
    out << s.drop << ',' << s.op << ',' << s.ue_index << ',' << fmt_double(s.rate_bps) << ','
        << to_string(s.tag) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json summary_json(const RateSummary& sum, const ScenarioConfig& cfg) {
  return {{"config_hash", config_hash(cfg)},
          {"seed", cfg.seed},
          {"regime", to_string(cfg.regime)},
          {"drops", cfg.drops},
          {"slots", cfg.slots},
          {"n_samples", sum.n_samples},
          {"fifth_percentile_bps", sum.fifth_percentile_bps},
          {"ci95_lo_bps", sum.ci_lo},
          {"ci95_hi_bps", sum.ci_hi}};
}

inline void write_curve_csv(const std::string& path, const ExternalityCurve& curve,
                            const Metadata& meta) {
  auto out = open_out(path);
  Metadata m = meta;
  m["scenario"] = to_string(curve.scenario);
  m["norm_rate_bps"] = fmt_double(curve.norm_rate_bps);
  write_header_comments(out, m);
  out << "scenario,n,h,ci_lo,ci_hi,raw_rate_bps\n";
  for (const auto& p : curve.points)
    out << to_string(curve.scenario) << ',' << fmt_double(p.n) << ',' << fmt_double(p.h) << ','
        << fmt_double(p.ci_lo) << ',' << fmt_double(p.ci_hi) << ',' << fmt_double(p.raw_rate_bps)
        << '\n';
  if (!out) throw IoError("write failed: " + path);
}

// Reads back a curve CSV produced by write_curve_csv (comment lines are
// skipped; the norm constant is recovered from the header).
inline ExternalityCurve read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open curve csv: " + path);
  ExternalityCurve curve;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("norm_rate_bps=");
      if (pos != std::string::npos) curve.norm_rate_bps = std::stod(line.substr(pos + 14));
      const auto spos = line.find("# scenario=");
      if (spos == 0) {
        const std::string v = line.substr(11);
        if (v == "open_bs_deployment") curve.scenario = OpenResourceScenario::OpenBsDeployment;
        else if (v == "open_spectrum") curve.scenario = OpenResourceScenario::OpenSpectrum;
        else curve.scenario = OpenResourceScenario::NoOpenResources;
      }
      continue;
    }
    if (!saw_header) {  // column header row
      saw_header = true;
      continue;
    }
    CurvePoint p;
    char scen[64];
    if (std::sscanf(line.c_str(), "%63[^,],%lf,%lf,%lf,%lf,%lf", scen, &p.n, &p.h, &p.ci_lo,
                    &p.ci_hi, &p.raw_rate_bps) == 6)
      curve.points.push_back(p);
  }
  if (curve.points.size() < 2) throw IoError("curve csv has fewer than 2 points: " + path);
  return curve;
}

inline void write_demand_csv(const std::string& path, const DemandCurve& demand, int grid_points,
                             const Metadata& meta) {
  auto out = open_out(path);
  write_header_comments(out, meta);
  out << "n,p,revenue\n";
  for (int i = 0; i < grid_points; ++i) {
    const double n = static_cast<double>(i) / (grid_points - 1);
    out << fmt_double(n) << ',' << fmt_double(demand.price(n)) << ','
        << fmt_double(demand.revenue(n)) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

inline nlohmann::json equilibria_json(const EquilibriumSet& eq, double monopoly_n) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : eq.points)
    pts.push_back({{"n", p.n},
                   {"stability", p.stability == Stability::Stable ? "stable" : "unstable"},
                   {"kind", p.kind}});
  return {{"cost", eq.cost},
          {"critical_mass_n", eq.critical_mass_n},
          {"critical_mass_grid_n", eq.critical_mass_grid_n},
          {"peak_price", eq.peak_price},
          {"monopoly_optimum_n", monopoly_n},
          {"equilibria", pts}};
}

inline void write_sweep_csv(const std::string& path, const SweepResult& sweep,
                            const Metadata& meta) {
  auto out = open_out(path);
  write_header_comments(out, meta);
  out << "omega_hat,mu,regime,q2,p1,p2,n1,n2,coverage,pi1,pi2,uniqueness_flag,interior_flag\n";
  auto row = [&](double w, double mu, const DuopolyEquilibrium& eq) {
    out << fmt_double(w) << ',' << fmt_double(mu) << ',' << to_string(eq.regime) << ','
        << fmt_double(eq.q2) << ',' << fmt_double(eq.p1) << ',' << fmt_double(eq.p2) << ','
        << fmt_double(eq.market.n1) << ',' << fmt_double(eq.market.n2) << ','
        << fmt_double(eq.market.n1 + eq.market.n2) << ',' << fmt_double(eq.pi1) << ','
        << fmt_double(eq.pi2) << ',' << (eq.unique_ok ? 1 : 0) << ','
        << (eq.interior_ok ? 1 : 0) << '\n';
  };
  for (const auto& c : sweep.cells) {
    row(c.omega_hat, c.mu, c.no_sharing);
    row(c.omega_hat, c.mu, c.sharing);
    row(c.omega_hat, c.mu, c.monopoly);
  }
  if (!out) throw IoError("write failed: " + path);
}

// Run manifest: enough to reproduce and to detect cache reuse.
struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  nlohmann::json entries = nlohmann::json::array();

  void add_output(const std::string& path) {
    entries.push_back({{"path", path}});
  }
  void add_cached(const std::string& path, const std::string& computed_at, bool cache_hit) {
    entries.push_back({{"path", path}, {"computed_at", computed_at}, {"cache_hit", cache_hit}});
  }
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
  write_json(path, {{"config_hash", m.config_hash}, {"seed", m.seed}, {"outputs", m.entries}});
}

}  // namespace mmshare
