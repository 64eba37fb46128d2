// Command-line front end: runs the sharing-regime simulations, the
// network-size sweeps behind the externality curves, and the demand and
// duopoly computations, emitting CSV/JSON artifacts per figure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmshare/config.hpp"
#include "mmshare/demand.hpp"
#include "mmshare/duopoly.hpp"
#include "mmshare/externality.hpp"
#include "mmshare/io.hpp"
#include "mmshare/network.hpp"
#include "mmshare/presets.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

std::string now_iso8601() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string cache_dir_for(const std::string& out_dir) {
  if (const char* env = std::getenv("MMSHARE_CACHE_DIR"); env && *env) return env;
  return out_dir + "/cache";
}

struct CommonOpts {
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0 = hardware
  std::optional<std::int64_t> slots;
  std::optional<int> drops;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--out-dir", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "Master seed override");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware)");
  cmd->add_option("--slots", o.slots, "Slots per drop override");
  cmd->add_option("--drops", o.drops, "Monte Carlo drops override");
}

int effective_threads(int req) {
  if (req > 0) return req;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

void apply_overrides(mmshare::ScenarioConfig& cfg, const CommonOpts& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.slots) cfg.slots = *o.slots;
  if (o.drops) cfg.drops = *o.drops;
  cfg.threads = effective_threads(o.threads);
}

int cmd_simulate(const std::string& config_path, const std::string& preset_name,
                 const std::string& regime_override, const CommonOpts& opts) {
  using namespace mmshare;
  std::vector<std::pair<std::string, ScenarioConfig>> runs;
  if (!config_path.empty()) {
    ScenarioConfig cfg = load_config(config_path);
    if (!regime_override.empty()) {
      std::vector<std::string> bad;
      cfg.regime = detail::regime_from_string(regime_override, bad);
      if (!bad.empty()) throw ValidationError(std::move(bad));
    }
    runs.emplace_back("run", cfg);
  } else {
    const auto preset = simulate_preset(preset_name);
    if (!preset) throw ValidationError({"--preset: unknown name '" + preset_name + "'"});
    for (SharingRegime r : preset->regimes) {
      if (!regime_override.empty() && regime_override != to_string(r)) continue;
      ScenarioConfig cfg = preset->base;
      cfg.regime = r;
      runs.emplace_back(to_string(r), cfg);
    }
    if (runs.empty()) throw ValidationError({"--regime: unknown name '" + regime_override + "'"});
  }

  RunManifest manifest;
  for (auto& [tag, cfg] : runs) {
    apply_overrides(cfg, opts);
    const std::string hash = config_hash(cfg);
    if (manifest.config_hash.empty()) {
      manifest.config_hash = hash;
      manifest.seed = cfg.seed;
    }
    const RateDistribution dist = simulate(cfg);
    Rng boot = StreamFactory(cfg.seed).stream("bootstrap");
    const RateSummary sum = summarize(dist, boot);

    Metadata meta{{"config_hash", hash},
                  {"seed", std::to_string(cfg.seed)},
                  {"regime", to_string(cfg.regime)}};
    const std::string rates_path = opts.out_dir + "/rates_" + tag + ".csv";
    const std::string summary_path = opts.out_dir + "/summary_" + tag + ".json";
    write_rates_csv(rates_path, dist, meta);
    write_json(summary_path, summary_json(sum, cfg));
    manifest.add_output(rates_path);
    manifest.add_output(summary_path);
    std::cout << tag << ": fifth percentile " << fmt_double(sum.fifth_percentile_bps)
              << " bps  [" << fmt_double(sum.ci_lo) << ", " << fmt_double(sum.ci_hi) << "]\n";
  }
  write_manifest(opts.out_dir + "/run_manifest.json", manifest);
  return kExitOk;
}

int cmd_externality(const std::string& preset_name, const CommonOpts& opts,
                    const std::string& cache_override) {
  using namespace mmshare;
  auto preset = externality_preset(preset_name);
  if (!preset) throw ValidationError({"--preset: unknown name '" + preset_name + "'"});
  ExternalitySimSettings s = preset->settings;
  if (opts.seed) s.seed = *opts.seed;
  if (opts.slots) s.slots = *opts.slots;
  if (opts.drops) s.drops = *opts.drops;
  s.threads = effective_threads(opts.threads);

  const std::string cache_dir =
      cache_override.empty() ? cache_dir_for(opts.out_dir) : cache_override;
  RunManifest manifest;
  manifest.seed = s.seed;

  // one raw point, through the cache
  auto cached_point = [&](OpenResourceScenario scenario, double n) {
    const ScenarioConfig pc = externality_point_config(scenario, preset->caps, n, s);
    const std::string key = config_hash(pc);
    const std::string path = cache_dir + "/" + key + ".json";
    if (std::filesystem::exists(path)) {
      std::ifstream in(path);
      nlohmann::json j;
      in >> j;
      manifest.add_cached(path, j.value("computed_at", ""), true);
      return RawPoint{n, j["raw_rate_bps"].get<double>(), j["ci_lo_bps"].get<double>(),
                      j["ci_hi_bps"].get<double>()};
    }
    const RawPoint p = estimate_point(scenario, preset->caps, n, s);
    const std::string stamp = now_iso8601();
    write_json(path, {{"scenario", to_string(scenario)},
                      {"n", p.n},
                      {"raw_rate_bps", p.rate_bps},
                      {"ci_lo_bps", p.ci_lo_bps},
                      {"ci_hi_bps", p.ci_hi_bps},
                      {"computed_at", stamp}});
    manifest.add_cached(path, stamp, false);
    return p;
  };

  // the no-open baseline at n=1 normalizes every curve
  const RawPoint baseline = cached_point(OpenResourceScenario::NoOpenResources, 1.0);
  if (baseline.rate_bps <= 0.0) {
    std::cerr << "degenerate baseline: fifth percentile is zero at full size\n";
    return kExitInfeasible;
  }
  manifest.config_hash =
      config_hash(externality_point_config(OpenResourceScenario::NoOpenResources, preset->caps,
                                           1.0, s));

  nlohmann::json slopes;
  for (OpenResourceScenario scenario : preset->scenarios) {
    ExternalityCurve curve;
    curve.scenario = scenario;
    curve.norm_rate_bps = baseline.rate_bps;
    RawPoint zero{0.0, 0.0, 0.0, 0.0};
    if (scenario == OpenResourceScenario::OpenBsDeployment)
      zero = cached_point(scenario, kOpenBsZeroSizeEpsilon);
    curve.points.push_back({0.0, zero.rate_bps / baseline.rate_bps,
                            zero.ci_lo_bps / baseline.rate_bps,
                            zero.ci_hi_bps / baseline.rate_bps, zero.rate_bps});
    for (double n : preset->grid) {
      const RawPoint p = cached_point(scenario, n);
      curve.points.push_back({p.n, p.rate_bps / baseline.rate_bps,
                              p.ci_lo_bps / baseline.rate_bps,
                              p.ci_hi_bps / baseline.rate_bps, p.rate_bps});
    }
    const std::string path =
        opts.out_dir + "/curve_" + std::string(to_string(scenario)) + ".csv";
    write_curve_csv(path, curve,
                    {{"config_hash", manifest.config_hash}, {"seed", std::to_string(s.seed)}});
    manifest.add_output(path);

    const double n_min = scenario == OpenResourceScenario::NoOpenResources ? 0.25
                         : scenario == OpenResourceScenario::OpenBsDeployment ? 0.35
                                                                              : 0.45;
    const double mu = fit_slope(curve, n_min);
    slopes[to_string(scenario)] = {{"n_min", n_min}, {"mu", mu}};
    std::cout << to_string(scenario) << ": slope mu = " << fmt_double(mu) << " (n >= "
              << fmt_double(n_min) << ")\n";
  }
  write_json(opts.out_dir + "/slopes.json", slopes);
  manifest.add_output(opts.out_dir + "/slopes.json");
  write_manifest(opts.out_dir + "/run_manifest.json", manifest);
  return kExitOk;
}

int cmd_demand(const std::string& curve_path, bool analytic, double omega_hat,
               std::vector<double> costs, const CommonOpts& opts) {
  using namespace mmshare;
  if (costs.empty()) costs = {0.1};
  DemandCurve demand;
  std::string tag;
  if (analytic) {
    demand = fe_demand([](double n) { return n; }, omega_hat);
    tag = "analytic";
  } else {
    if (curve_path.empty())
      throw ValidationError({"demand: provide --curve <csv> or --analytic"});
    const ExternalityCurve curve = read_curve_csv(curve_path);
    demand = fe_demand(curve, omega_hat);
    tag = to_string(curve.scenario);
  }

  Metadata meta{{"omega_hat", fmt_double(omega_hat)}, {"h_source", tag}};
  const std::string demand_path = opts.out_dir + "/demand_" + tag + ".csv";
  write_demand_csv(demand_path, demand, 201, meta);

  nlohmann::json all = nlohmann::json::array();
  for (double c : costs) {
    const EquilibriumSet eq = equilibria(demand, c);
    all.push_back(equilibria_json(eq, monopoly_optimum(demand, c)));
  }
  const std::string eq_path = opts.out_dir + "/equilibria_" + tag + ".json";
  write_json(eq_path, {{"omega_hat", omega_hat}, {"h_source", tag}, {"costs", all}});

  RunManifest manifest;
  manifest.add_output(demand_path);
  manifest.add_output(eq_path);
  write_manifest(opts.out_dir + "/run_manifest.json", manifest);
  std::cout << "demand curve and equilibria written for h=" << tag << "\n";
  return kExitOk;
}

int cmd_duopoly(double q_hat, double omega_min, double omega_max, double omega_step,
                std::vector<double> mu_set, const std::string& slopes_path,
                const CommonOpts& opts) {
  using namespace mmshare;
  if (!slopes_path.empty()) {
    std::ifstream in(slopes_path);
    if (!in) throw IoError("cannot open slopes file: " + slopes_path);
    nlohmann::json j;
    in >> j;
    mu_set.clear();
    for (const auto& [k, v] : j.items()) mu_set.push_back(v["mu"].get<double>());
  }
  if (mu_set.empty()) mu_set = default_mu_set();
  std::vector<double> grid;
  for (double w = omega_min; w <= omega_max + 1e-9; w += omega_step) grid.push_back(w);
  if (grid.empty()) throw ValidationError({"duopoly: empty omega_hat grid"});

  const SweepResult result = sweep(grid, mu_set, q_hat);
  if (result.cells.empty()) {
    std::cerr << "no feasible (omega_hat, mu) cells\n";
    for (const auto& s : result.skipped) std::cerr << "  skipped " << s << "\n";
    return kExitInfeasible;
  }
  Metadata meta{{"q_hat", fmt_double(q_hat)}};
  const std::string path = opts.out_dir + "/duopoly_sweep.csv";
  write_sweep_csv(path, result, meta);
  RunManifest manifest;
  manifest.add_output(path);
  write_manifest(opts.out_dir + "/run_manifest.json", manifest);
  std::cout << result.cells.size() << " cells written, " << result.skipped.size()
            << " skipped\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mmWave multi-operator sharing simulator and economics toolkit"};
  app.require_subcommand(1);

  CommonOpts sim_opts, ext_opts, dem_opts, duo_opts;

  auto* sim = app.add_subcommand("simulate", "Monte Carlo rate distributions per sharing regime");
  std::string sim_config, sim_preset = "fig4_symmetric", sim_regime;
  sim->add_option("--config", sim_config, "Scenario config JSON");
  sim->add_option("--preset", sim_preset, "Named preset (fig4_symmetric, fig5_asymmetric)");
  sim->add_option("--regime", sim_regime, "Restrict to one sharing regime");
  add_common(sim, sim_opts);

  auto* ext = app.add_subcommand("externality", "Network-size sweeps for h(n)");
  std::string ext_preset = "networksize_all", ext_cache;
  ext->add_option("--preset", ext_preset, "networksize_{noopen,openbs,openspectrum,all}");
  ext->add_option("--cache-dir", ext_cache, "Cache directory (default out-dir/cache)");
  add_common(ext, ext_opts);

  auto* dem = app.add_subcommand("demand", "Fulfilled-expectations demand and critical mass");
  std::string dem_curve;
  bool dem_analytic = false;
  double dem_omega = 1.0;
  std::vector<double> dem_costs;
  dem->add_option("--curve", dem_curve, "Externality curve CSV");
  dem->add_flag("--analytic", dem_analytic, "Use the analytic h(n)=n self-test curve");
  dem->add_option("--omega-hat", dem_omega, "Type upper bound");
  dem->add_option("--cost", dem_costs, "Marginal cost(s)")->delimiter(',');
  add_common(dem, dem_opts);

  auto* duo = app.add_subcommand("duopoly", "Vertically differentiated duopoly sweep");
  double q_hat = 1.5, omega_min = 1.5, omega_max = 4.0, omega_step = 0.05;
  std::vector<double> mu_set;
  std::string duo_slopes;
  duo->add_option("--q-hat", q_hat, "Max inherent quality");
  duo->add_option("--omega-hat-min", omega_min, "Dispersion grid start");
  duo->add_option("--omega-hat-max", omega_max, "Dispersion grid end");
  duo->add_option("--omega-hat-step", omega_step, "Dispersion grid step");
  duo->add_option("--mu", mu_set, "Network-effect intensities")->delimiter(',');
  duo->add_option("--slopes", duo_slopes, "slopes.json from the externality command");
  add_common(duo, duo_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_preset, sim_regime, sim_opts);
    if (ext->parsed()) return cmd_externality(ext_preset, ext_opts, ext_cache);
    if (dem->parsed()) return cmd_demand(dem_curve, dem_analytic, dem_omega, dem_costs, dem_opts);
    if (duo->parsed())
      return cmd_duopoly(q_hat, omega_min, omega_max, omega_step, mu_set, duo_slopes, duo_opts);
  } catch (const mmshare::ValidationError& e) {
    std::cerr << "validation error:\n";
    for (const auto& f : e.fields) std::cerr << "  " << f << "\n";
    return kExitValidation;
  } catch (const mmshare::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
