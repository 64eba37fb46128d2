#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "mmshare/duopoly.hpp"
#include "mmshare/rng.hpp"

using namespace mmshare;

namespace {

// Independent check of solve_shares: damped fixed-point iteration on the
// four defining equations.
struct OracleResult {
  MarketOutcome m;
  bool converged = false;
};

OracleResult fixed_point_shares(double q1, double q2, double p1, double p2,
                                const GameParams& g, bool compatible) {
  double n1 = 0.25, n2 = 0.25;
  const double damp = 0.2;
  OracleResult out;
  for (int it = 0; it < 400000; ++it) {
    const double nt1 = compatible ? n1 + n2 : n1;
    const double nt2 = compatible ? n1 + n2 : n2;
    const double w_hi = (p1 - p2 - g.mu * (q1 * nt1 - q2 * nt2)) / (q1 - q2);
    const double w_lo = (p2 - g.mu * q2 * nt2) / q2;
    const double n1n = (g.omega_hat - w_hi) / g.omega_hat;
    const double n2n = (w_hi - w_lo) / g.omega_hat;
    const double delta = std::max(std::fabs(n1n - n1), std::fabs(n2n - n2));
    n1 += damp * (n1n - n1);
    n2 += damp * (n2n - n2);
    if (!std::isfinite(n1) || !std::isfinite(n2)) return out;
    if (delta < 1e-13) {
      out.m.n1 = n1;
      out.m.n2 = n2;
      out.m.omega_hi = w_hi;
      out.m.omega_lo = w_lo;
      out.converged = true;
      return out;
    }
  }
  return out;
}

double residual(const MarketOutcome& m, double q1, double q2, double p1, double p2,
                const GameParams& g, bool compatible) {
  const double nt1 = compatible ? m.n1 + m.n2 : m.n1;
  const double nt2 = compatible ? m.n1 + m.n2 : m.n2;
  const double r1 = m.omega_hi * q1 + g.mu * q1 * nt1 - p1 -
                    (m.omega_hi * q2 + g.mu * q2 * nt2 - p2);
  const double r2 = m.omega_lo * q2 + g.mu * q2 * nt2 - p2;
  const double r3 = m.n1 - (g.omega_hat - m.omega_hi) / g.omega_hat;
  const double r4 = m.n2 - (m.omega_hi - m.omega_lo) / g.omega_hat;
  return std::max({std::fabs(r1), std::fabs(r2), std::fabs(r3), std::fabs(r4)});
}

}  // namespace

TEST_CASE("market shares without network effects") {
  const GameParams g{1.5, 2.0, 0.0};
  SECTION("closed form at mu = 0") {
    const MarketOutcome m = solve_shares(1.5, 0.9, 1.8, 1.0, g, false);
    CHECK(m.omega_hi == Catch::Approx((1.8 - 1.0) / (1.5 - 0.9)).epsilon(1e-12));
    CHECK(m.omega_lo == Catch::Approx(1.0 / 0.9).epsilon(1e-12));
    const MarketOutcome mc = solve_shares(1.5, 0.9, 1.8, 1.0, g, true);
    CHECK(mc.omega_hi == Catch::Approx(m.omega_hi).epsilon(1e-12));  // compatibility moot
  }
  SECTION("equal quality-adjusted prices squeeze the low-end firm") {
    const double k = 1.2;
    const MarketOutcome m = solve_shares(1.5, 0.9, 1.5 * k, 0.9 * k, g, false);
    CHECK(m.omega_hi == Catch::Approx(k).epsilon(1e-12));
    CHECK(m.omega_lo == Catch::Approx(k).epsilon(1e-12));
    CHECK(m.n2 == Catch::Approx(0.0).margin(1e-12));
  }
}

TEST_CASE("market shares match the fixed-point oracle on a generic instance") {
  const GameParams g{1.5, 2.0, 0.25};
  const MarketOutcome m = solve_shares(1.5, 0.9, 1.8, 1.0, g, true);
  // hand-solved values for this instance
  CHECK(m.omega_lo == Catch::Approx(0.775 / 0.7875).epsilon(1e-10));
  CHECK(m.n2 == Catch::Approx(1.0 / 9.0).epsilon(1e-8));
  CHECK(m.interior);
  const OracleResult o = fixed_point_shares(1.5, 0.9, 1.8, 1.0, g, true);
  REQUIRE(o.converged);
  CHECK(m.omega_hi == Catch::Approx(o.m.omega_hi).margin(1e-10));
  CHECK(m.omega_lo == Catch::Approx(o.m.omega_lo).margin(1e-10));
  CHECK(m.n1 == Catch::Approx(o.m.n1).margin(1e-10));
  CHECK(m.n2 == Catch::Approx(o.m.n2).margin(1e-10));
}

TEST_CASE("linear solve equals the oracle across random feasible draws") {
  Rng rng(909);
  int converged = 0, checked = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const double omega_hat = 1.5 + 2.5 * rng.uniform();
    const double mu = 0.9 * rng.uniform() * std::min(1.0, omega_hat / 2.0);
    const GameParams g{1.0, omega_hat, mu};
    const double q1 = 0.5 + 1.5 * rng.uniform();
    // keep q2 inside the unique-equilibrium region; outside it the forward
    // iteration has an expanding eigenvalue and no oracle exists
    const double ratio_cap = (omega_hat - mu) * (omega_hat - 2.0 * mu) / (omega_hat * omega_hat);
    const double q2 = q1 * ratio_cap * (0.3 + 0.65 * rng.uniform());
    const double p1 = q1 * (1.0 + rng.uniform());
    const double p2 = q2 * (1.0 + rng.uniform());
    const bool compatible = rng.uniform() < 0.5;
    const MarketOutcome m = solve_shares(q1, q2, p1, p2, g, compatible);
    CHECK(residual(m, q1, q2, p1, p2, g, compatible) < 1e-10);
    const OracleResult o = fixed_point_shares(q1, q2, p1, p2, g, compatible);
    if (!o.converged) continue;
    ++converged;
    if (std::fabs(m.n1 - o.m.n1) < 1e-8 && std::fabs(m.n2 - o.m.n2) < 1e-8 &&
        std::fabs(m.omega_hi - o.m.omega_hi) < 1e-8 &&
        std::fabs(m.omega_lo - o.m.omega_lo) < 1e-8)
      ++checked;
  }
  CHECK(converged > 900);
  CHECK(checked == converged);
}

TEST_CASE("uniqueness condition") {
  SECTION("mu = 0 reduces to q1 > q2") {
    const GameParams g{1.5, 2.0, 0.0};
    CHECK(check_uniqueness(1.01, 1.0, g));
    CHECK_FALSE(check_uniqueness(1.0, 1.0, g));
    CHECK_FALSE(check_uniqueness(0.9, 1.0, g));
  }
  SECTION("hand-evaluated threshold at omega_hat = 2, mu = 0.25") {
    const GameParams g{1.5, 2.0, 0.25};
    const double threshold = 4.0 / (1.75 * 1.5);
    CHECK(check_uniqueness(threshold + 1e-9, 1.0, g));
    CHECK_FALSE(check_uniqueness(threshold - 1e-9, 1.0, g));
  }
  SECTION("equal qualities never satisfy it") {
    for (double mu : {0.0, 0.1, 0.4}) {
      const GameParams g{1.5, 2.0, mu};
      CHECK_FALSE(check_uniqueness(1.0, 1.0, g));
    }
  }
  SECTION("mu at or above omega_hat/2 is a parameter error") {
    const GameParams g{1.5, 2.0, 1.0};
    CHECK_THROWS_AS(check_uniqueness(2.0, 1.0, g), std::invalid_argument);
  }
}

TEST_CASE("no-sharing equilibrium closed forms") {
  SECTION("mu = 0 gives q2 = 4/7 q_hat") {
    const DuopolyEquilibrium eq = equilibrium_no_sharing({1.5, 2.0, 0.0});
    CHECK(eq.q2 == Catch::Approx(4.0 * 1.5 / 7.0).epsilon(1e-12));
    CHECK(eq.q1 == 1.5);
  }
  SECTION("price above cost, quality below the cap") {
    for (double omega_hat : {1.6, 2.0, 3.0, 4.0}) {
      for (double mu : {0.0, 0.25, 0.4, 0.7}) {
        const GameParams g{1.5, omega_hat, mu};
        if (!g.feasible()) continue;
        const DuopolyEquilibrium eq = equilibrium_no_sharing(g);
        CHECK(eq.p1 > eq.q1);
        CHECK(eq.p2 > eq.q2);
        CHECK(eq.q2 < g.q_hat);
        CHECK(eq.q2 > 0.0);
      }
    }
  }
}

TEST_CASE("sharing equilibrium closed forms") {
  SECTION("hand evaluation of q2 at (1.5, 2, 0.25)") {
    const DuopolyEquilibrium eq = equilibrium_sharing({1.5, 2.0, 0.25});
    CHECK(eq.q2 == Catch::Approx(0.87).epsilon(1e-12));
  }
  SECTION("mu = 0 coincides with no sharing") {
    const GameParams g{1.5, 2.0, 0.0};
    const DuopolyEquilibrium s = equilibrium_sharing(g);
    const DuopolyEquilibrium ns = equilibrium_no_sharing(g);
    CHECK(s.q2 == Catch::Approx(4.0 * 1.5 / 7.0).epsilon(1e-12));
    CHECK(std::fabs(s.p1 - ns.p1) < 1e-10);
    CHECK(std::fabs(s.p2 - ns.p2) < 1e-10);
    CHECK(std::fabs(s.pi1 - ns.pi1) < 1e-10);
    CHECK(std::fabs(s.pi2 - ns.pi2) < 1e-10);
    CHECK(std::fabs(s.market.n1 - ns.market.n1) < 1e-10);
    CHECK(std::fabs(s.market.n2 - ns.market.n2) < 1e-10);
  }
  SECTION("price above cost across the parameter box") {
    for (double omega_hat : {1.6, 2.0, 3.0, 4.0}) {
      for (double mu : {0.0, 0.25, 0.4, 0.7}) {
        const GameParams g{1.5, omega_hat, mu};
        if (!g.feasible()) continue;
        const DuopolyEquilibrium eq = equilibrium_sharing(g);
        CHECK(eq.p1 > eq.q1);
        CHECK(eq.p2 > eq.q2);
        CHECK(eq.q2 < g.q_hat);
      }
    }
  }
}

TEST_CASE("monopoly equilibrium") {
  const DuopolyEquilibrium eq = equilibrium_monopoly({1.5, 2.0, 0.0});
  CHECK(eq.p1 == Catch::Approx(0.75).epsilon(1e-12));
  CHECK(eq.market.omega_hi == Catch::Approx(0.5).epsilon(1e-12));
  CHECK(eq.market.n1 == Catch::Approx(0.75).epsilon(1e-12));
  // profit is reported as computed; it is negative below omega_hat = 3
  CHECK(eq.pi1 == Catch::Approx(0.75 * (0.75 - 1.5)).epsilon(1e-12));
  const DuopolyEquilibrium rich = equilibrium_monopoly({1.5, 3.5, 0.0});
  CHECK(rich.pi1 > 0.0);
  GameParams bad{1.5, 1.0, 0.0};
  CHECK_THROWS_AS(equilibrium_monopoly(bad), std::invalid_argument);
}

TEST_CASE("closed forms are best responses to each other") {
  for (double omega_hat : {1.8, 2.5, 3.6}) {
    for (double mu : {0.0, 0.25, 0.4}) {
      const GameParams g{1.5, omega_hat, mu};
      if (!g.feasible()) continue;
      const DuopolyEquilibrium ns = equilibrium_no_sharing(g);
      CHECK(best_response_gap(ns, g, 1) < 1e-6);
      CHECK(best_response_gap(ns, g, 2) < 1e-6);
      const DuopolyEquilibrium s = equilibrium_sharing(g);
      CHECK(best_response_gap(s, g, 1) < 1e-6);
      CHECK(best_response_gap(s, g, 2) < 1e-6);
    }
  }
}

TEST_CASE("sweep mechanics") {
  SECTION("defaults produce three regimes per feasible cell") {
    const auto grid = default_omega_hat_grid();
    const auto mus = default_mu_set();
    const SweepResult r = sweep(grid, mus, 1.5);
    CHECK(r.cells.size() == grid.size() * mus.size());  // all feasible here
    CHECK(r.skipped.empty());
  }
  SECTION("infeasible cells are skipped with a reason") {
    const std::vector<double> grid{1.2, 2.0};
    const std::vector<double> mus{0.7};
    const SweepResult r = sweep(grid, mus, 1.5);
    CHECK(r.cells.size() == 1);  // mu=0.7 needs omega_hat > 1.4
    REQUIRE(r.skipped.size() == 1);
    CHECK(r.skipped[0].find("omega_hat=1.2") != std::string::npos);
  }
  SECTION("mu -> 0 collapses sharing and no-sharing") {
    const std::vector<double> grid{1.7, 2.9};
    const std::vector<double> mus{0.0};
    for (const auto& cell : sweep(grid, mus, 1.5).cells) {
      CHECK(std::fabs(cell.sharing.pi1 - cell.no_sharing.pi1) < 1e-10);
      CHECK(std::fabs(cell.sharing.pi2 - cell.no_sharing.pi2) < 1e-10);
      CHECK(std::fabs(cell.sharing.q2 - cell.no_sharing.q2) < 1e-10);
    }
  }
}
