#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "mmshare/network.hpp"
#include "mmshare/stats.hpp"

using namespace mmshare;

namespace {

Deployment two_cell_deployment(bool same_operator) {
  // BS 0 west, BS 1 east; UE 0 near BS 0, UE 1 near BS 1
  Deployment dep;
  dep.region = {1000.0, false};
  dep.bs = {{{300.0, 500.0}, 1}, {{700.0, 500.0}, same_operator ? 1 : 2}};
  dep.ue = {{{320.0, 520.0}, 1}, {{680.0, 470.0}, same_operator ? 1 : 2}};
  return dep;
}

ChannelParams no_shadow_channel() {
  ChannelParams ch;
  ch.los.shadow_sigma_db = 0.0;
  ch.nlos.shadow_sigma_db = 0.0;
  return ch;
}

}  // namespace

TEST_CASE("association per regime") {
  Deployment dep;
  dep.region = {1000.0, false};
  dep.bs = {{{100.0, 100.0}, 1}, {{900.0, 900.0}, 2}};
  dep.ue = {{{150.0, 150.0}, 1}, {{850.0, 850.0}, 2}, {{870.0, 870.0}, 1}};

  SECTION("exclusive regimes bind UEs to their own operator") {
    const Association a = associate(dep, SharingRegime::NoSharing);
    CHECK(a.serving_bs == std::vector<int>{0, 1, 0});  // UE 2 crosses the map to its own BS
    const Association s = associate(dep, SharingRegime::SpectrumSharingOnly);
    CHECK(s.serving_bs == std::vector<int>{0, 1, 0});
  }
  SECTION("BS pooling lets UEs take the nearest foreign BS") {
    const Association a = associate(dep, SharingRegime::BsSharingOnly);
    CHECK(a.serving_bs == std::vector<int>{0, 1, 1});
    const Association f = associate(dep, SharingRegime::FullSharing);
    CHECK(f.serving_bs == std::vector<int>{0, 1, 1});
  }
  SECTION("operator without BSs goes outside in exclusive regimes") {
    dep.bs = {{{100.0, 100.0}, 1}};
    const Association a = associate(dep, SharingRegime::NoSharing);
    CHECK(a.serving_bs[0] == 0);
    CHECK(a.serving_bs[1] == kOutside);
    CHECK(a.serving_bs[2] == 0);
    const Association b = associate(dep, SharingRegime::BsSharingOnly);
    CHECK(b.serving_bs == std::vector<int>{0, 0, 0});
  }
  SECTION("association ties break toward the lowest BS index") {
    dep.bs = {{{400.0, 500.0}, 1}, {{600.0, 500.0}, 1}};
    dep.ue = {{{500.0, 500.0}, 1}};
    CHECK(associate(dep, SharingRegime::NoSharing).serving_bs[0] == 0);
  }
}

TEST_CASE("operative bandwidth per regime") {
  const std::vector<OperatorConfig> ops{{500e6, 50.0, 250.0}, {500e6, 50.0, 250.0}};
  CHECK(operative_bandwidth(1, SharingRegime::NoSharing, ops) == 500e6);
  CHECK(operative_bandwidth(2, SharingRegime::BsSharingOnly, ops) == 500e6);
  CHECK(operative_bandwidth(1, SharingRegime::FullSharing, ops) == 1e9);
  CHECK(operative_bandwidth(2, SharingRegime::SpectrumSharingOnly, ops) == 1e9);
  const std::vector<OperatorConfig> one{{700e6, 70.0, 350.0}};
  CHECK(operative_bandwidth(1, SharingRegime::FullSharing, one) == 700e6);
  CHECK(operative_bandwidth(1, SharingRegime::NoSharing, one) == 700e6);
  CHECK_THROWS_AS(operative_bandwidth(3, SharingRegime::NoSharing, ops), std::invalid_argument);
}

TEST_CASE("scheduler selection") {
  Rng rng(31);
  SECTION("single UE always selected; empty cell is silent") {
    const double inst[] = {2.0};
    const double mean[] = {1.0};
    CHECK(schedule_slot({inst, 1}, {mean, 1}, SchedulerPolicy::TemporalFairOpportunistic, 0, rng) == 0);
    CHECK(schedule_slot({}, {}, SchedulerPolicy::TemporalFairOpportunistic, 0, rng) == -1);
  }
  SECTION("round robin cycles in index order") {
    const double inst[] = {1.0, 5.0, 2.0};
    const double mean[] = {1.0, 1.0, 1.0};
    for (int t = 0; t < 9; ++t)
      CHECK(schedule_slot({inst, 3}, {mean, 3}, SchedulerPolicy::RoundRobin, t, rng) == t % 3);
  }
  SECTION("two UEs with i.i.d. fading split slots evenly") {
    Rng fading(7);
    int wins0 = 0;
    const int slots = 100000;
    for (int t = 0; t < slots; ++t) {
      // unequal mean SNRs: the normalized rule must not care
      const double mean[] = {1.0, 20.0};
      const double inst[] = {mean[0] * fading.exponential(), mean[1] * fading.exponential()};
      if (schedule_slot({inst, 2}, {mean, 2}, SchedulerPolicy::TemporalFairOpportunistic, t, rng) == 0)
        ++wins0;
    }
    CHECK(std::fabs(wins0 / static_cast<double>(slots) - 0.5) < 0.01);
  }
  SECTION("slot share stays within 1/N +- 2% for larger cells") {
    Rng fading(13);
    const int n = 5, slots = 100000;
    std::vector<int> wins(n, 0);
    std::vector<double> mean{1.0, 2.0, 0.5, 4.0, 1.5};
    std::vector<double> inst(n);
    for (int t = 0; t < slots; ++t) {
      for (int i = 0; i < n; ++i) inst[i] = mean[i] * fading.exponential();
      ++wins[schedule_slot(inst, mean, SchedulerPolicy::TemporalFairOpportunistic, t, rng)];
    }
    for (int i = 0; i < n; ++i)
      CHECK(std::fabs(wins[i] / static_cast<double>(slots) - 1.0 / n) < 0.02);
  }
}

TEST_CASE("single-link drop reproduces the closed-form rate") {
  // one BS, one UE, no interference, no shadowing: reconstruct the exact
  // Eq-style hand value from the same substreams the drop consumed
  Deployment dep;
  dep.region = {1000.0, false};
  dep.bs = {{{500.0, 500.0}, 1}};
  dep.ue = {{{530.0, 500.0}, 1}};
  const std::vector<OperatorConfig> ops{{1e9, 0.0, 0.0}};
  const RateModel model;
  const AntennaPattern bs_pat{20.0, -10.0, 5.0}, ue_pat{10.0, -10.0, 30.0};
  const ChannelParams ch = no_shadow_channel();

  const StreamFactory factory(99);
  DropStreams streams(factory, 0);
  const DropResult res = run_drop(dep, SharingRegime::NoSharing, ops, model, bs_pat, ue_pat, ch, 1,
                                  SchedulerPolicy::TemporalFairOpportunistic,
                                  InterferenceMode::SnrOnly, streams);

  // replay the same draws
  Rng ch_rng = factory.stream("channel", 0);
  const LinkState ls = draw_link_state(30.0, ch, ch_rng);
  REQUIRE(ls.link_class != LinkClass::Outage);  // p_out(30) = 0
  Rng fad = factory.stream("fading", 0);
  const double f = fad.exponential();
  const double signal = dbm_to_watts(model.tx_power_dbm) * db_to_linear(20.0) *
                        db_to_linear(10.0) * ls.mean_path_gain * f;
  const double expected = rate_bps(model, 1e9, signal / noise_power_watts(model, 1e9));
  CHECK(res.avg_rate_bps[0] == Catch::Approx(expected).epsilon(1e-12));
  CHECK(res.link_tag[0] ==
        (ls.link_class == LinkClass::Los ? UeLinkTag::Los : UeLinkTag::Nlos));
}

TEST_CASE("drop interference path matches the reference computation") {
  const Deployment dep = two_cell_deployment(true);
  const std::vector<OperatorConfig> ops{{1e9, 0.0, 0.0}};
  const RateModel model;
  const AntennaPattern bs_pat{20.0, -10.0, 5.0}, ue_pat{10.0, -10.0, 30.0};
  const ChannelParams ch = no_shadow_channel();

  const StreamFactory factory(123);
  DropStreams streams(factory, 0);
  const DropResult res =
      run_drop(dep, SharingRegime::NoSharing, ops, model, bs_pat, ue_pat, ch, 1,
               SchedulerPolicy::TemporalFairOpportunistic, InterferenceMode::Sinr, streams);

  // replay: link states BS-major, then per-domain fading, then per-victim
  // interference fading in domain order
  Rng ch_rng = factory.stream("channel", 0);
  LinkState ls[2][2];
  for (int b = 0; b < 2; ++b)
    for (int u = 0; u < 2; ++u) {
      const double d = std::max(1.0, distance(dep.bs[b].pos, dep.ue[u].pos, dep.region));
      ls[b][u] = draw_link_state(d, ch, ch_rng);
    }
  Rng fad = factory.stream("fading", 0);
  const double f0 = fad.exponential();
  const double f1 = fad.exponential();
  Rng xfad = factory.stream("xfading", 0);

  const double p_watts = dbm_to_watts(model.tx_power_dbm);
  const double noise = noise_power_watts(model, 1e9);
  auto serving_power = [&](int u, double f) {
    return p_watts * db_to_linear(20.0) * db_to_linear(10.0) * ls[u][u].mean_path_gain * f;
  };

  for (int u = 0; u < 2; ++u) {
    const int other = 1 - u;
    double interference = 0.0;
    if (ls[other][u].mean_path_gain > 0.0) {
      const InterferingTx itx{dep.bs[other].pos, dep.ue[other].pos, ls[other][u],
                              xfad.exponential()};
      interference = interference_power_watts(dep.ue[u].pos, dep.bs[u].pos, {&itx, 1}, bs_pat,
                                              ue_pat, p_watts, dep.region);
    }
    const double f = u == 0 ? f0 : f1;
    const double expected =
        rate_bps(model, 1e9, serving_power(u, f) / (noise + interference));
    CHECK(res.avg_rate_bps[u] == Catch::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("UE with an outage serving link averages zero rate") {
  Deployment dep;
  dep.region = {10000.0, false};
  dep.bs = {{{0.0, 0.0}, 1}};
  dep.ue = {{{5000.0, 5000.0}, 1}};  // ~7 km: certain outage
  const std::vector<OperatorConfig> ops{{1e9, 0.0, 0.0}};
  const StreamFactory factory(5);
  DropStreams streams(factory, 0);
  const DropResult res = run_drop(dep, SharingRegime::NoSharing, ops, RateModel{},
                                  AntennaPattern{20, -10, 5}, AntennaPattern{10, -10, 30},
                                  ChannelParams{}, 50, SchedulerPolicy::TemporalFairOpportunistic,
                                  InterferenceMode::Sinr, streams);
  CHECK(res.avg_rate_bps[0] == 0.0);
  CHECK(res.link_tag[0] == UeLinkTag::Outage);
}

TEST_CASE("degenerate single-owner regimes coincide") {
  // one operator owning all resources: no-sharing and full-sharing are the
  // same network, so the same seed must give bit-identical rates
  ScenarioConfig cfg;
  cfg.operators = {{1e9, 60.0, 150.0}};
  cfg.slots = 200;
  cfg.drops = 3;
  cfg.seed = 314;
  cfg.regime = SharingRegime::NoSharing;
  const RateDistribution a = simulate(cfg);
  cfg.regime = SharingRegime::FullSharing;
  const RateDistribution b = simulate(cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i)
    CHECK(a.samples[i].rate_bps == b.samples[i].rate_bps);
}

TEST_CASE("band-exclusive scheduling under BS sharing") {
  // both UEs sit next to operator 1's BS; under BS sharing the foreign UE
  // attaches there but keeps its own (tiny) band
  Deployment dep;
  dep.region = {1000.0, false};
  dep.bs = {{{500.0, 500.0}, 1}, {{900.0, 900.0}, 2}};
  dep.ue = {{{510.0, 500.0}, 1}, {{490.0, 500.0}, 2}};
  const std::vector<OperatorConfig> ops{{1e9, 0.0, 0.0}, {1e6, 0.0, 0.0}};
  const ChannelParams ch = no_shadow_channel();
  const StreamFactory factory(8);
  DropStreams streams(factory, 0);
  const DropResult res = run_drop(dep, SharingRegime::BsSharingOnly, ops, RateModel{},
                                  AntennaPattern{20, -10, 5}, AntennaPattern{10, -10, 30}, ch, 400,
                                  SchedulerPolicy::TemporalFairOpportunistic,
                                  InterferenceMode::SnrOnly, streams);
  CHECK(res.association.serving_bs == std::vector<int>{0, 0});
  CHECK(res.avg_rate_bps[0] > 0.0);
  CHECK(res.avg_rate_bps[1] > 0.0);
  // both transmit every slot on their own band; the 1000x bandwidth gap
  // should show up at roughly that order of magnitude
  CHECK(res.avg_rate_bps[0] / res.avg_rate_bps[1] > 100.0);
}

TEST_CASE("simulate is deterministic and thread-count invariant") {
  ScenarioConfig cfg;
  cfg.operators = {{500e6, 40.0, 100.0}, {500e6, 40.0, 100.0}};
  cfg.regime = SharingRegime::FullSharing;
  cfg.slots = 100;
  cfg.drops = 4;
  cfg.seed = 777;
  cfg.threads = 1;
  const RateDistribution a = simulate(cfg);
  const RateDistribution b = simulate(cfg);
  cfg.threads = 2;
  const RateDistribution c = simulate(cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  REQUIRE(a.samples.size() == c.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].rate_bps == b.samples[i].rate_bps);
    CHECK(a.samples[i].rate_bps == c.samples[i].rate_bps);
    CHECK(a.samples[i].op == c.samples[i].op);
  }
}

TEST_CASE("SNR-only rates dominate SINR rates on the same seed") {
  ScenarioConfig cfg;
  cfg.operators = {{500e6, 50.0, 100.0}, {500e6, 50.0, 100.0}};
  cfg.regime = SharingRegime::FullSharing;
  cfg.slots = 150;
  cfg.drops = 3;
  cfg.seed = 2024;
  cfg.interference = InterferenceMode::Sinr;
  const RateDistribution sinr = simulate(cfg);
  cfg.interference = InterferenceMode::SnrOnly;
  const RateDistribution snr = simulate(cfg);
  REQUIRE(sinr.samples.size() == snr.samples.size());
  for (std::size_t i = 0; i < sinr.samples.size(); ++i)
    CHECK(snr.samples[i].rate_bps >= sinr.samples[i].rate_bps - 1e-9);
}

TEST_CASE("opportunistic scheduling beats round robin per drop") {
  ScenarioConfig cfg;
  cfg.operators = {{1e9, 30.0, 150.0}};
  cfg.regime = SharingRegime::NoSharing;
  cfg.slots = 400;
  cfg.drops = 4;
  cfg.seed = 11;
  cfg.interference = InterferenceMode::SnrOnly;
  cfg.policy = SchedulerPolicy::TemporalFairOpportunistic;
  const auto opp = simulate(cfg).rates();
  cfg.policy = SchedulerPolicy::RoundRobin;
  const auto rr = simulate(cfg).rates();
  CHECK(stats::mean(opp) > stats::mean(rr));
}

TEST_CASE("validation lists offending fields") {
  ScenarioConfig cfg;
  cfg.operators.clear();
  cfg.slots = 0;
  cfg.rate_model.overhead = 1.5;
  try {
    simulate(cfg);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.fields.size() == 3);
  }
}

TEST_CASE("symmetric operators have matching rate distributions") {
  ScenarioConfig cfg;
  cfg.operators = {{500e6, 50.0, 150.0}, {500e6, 50.0, 150.0}};
  cfg.regime = SharingRegime::FullSharing;
  cfg.slots = 300;
  cfg.drops = 6;
  cfg.seed = 42;
  const RateDistribution dist = simulate(cfg);
  const auto r1 = dist.rates_of_op(1);
  const auto r2 = dist.rates_of_op(2);
  REQUIRE(!r1.empty());
  REQUIRE(!r2.empty());
  CHECK(stats::ks_two_sample(r1, r2).p_value > 0.01);
}
