#pragma once

#include <array>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmshare {

// Vertically differentiated duopoly with network effects: consumers of type
// omega ~ U[0, omega_hat] value service i at omega*q_i + mu*q_i*n~_i where
// n~_i pools both market shares when the firms share resources.
struct GameParams {
  double q_hat = 1.5;      // max inherent quality
  double omega_hat = 2.0;  // type upper bound
  double mu = 0.25;        // network-effect intensity

  bool feasible() const {
    return q_hat > 0.0 && omega_hat > 1.0 && mu >= 0.0 &&
           mu < std::min(1.0, omega_hat / 2.0);
  }
  void require_feasible() const {
    if (!feasible()) throw std::invalid_argument("GameParams: mu must be in [0, min(1, omega_hat/2)), omega_hat > 1, q_hat > 0");
  }
};

struct MarketOutcome {
  double omega_hi = 0.0;  // indifferent between firm 1 and firm 2
  double omega_lo = 0.0;  // indifferent between firm 2 and no subscription
  double n1 = 0.0;
  double n2 = 0.0;
  bool interior = false;  // 0 < omega_lo < omega_hi < omega_hat
};

namespace detail {

// Gaussian elimination with partial pivoting on a 4x4 augmented system.
inline std::array<double, 4> solve4(std::array<std::array<double, 5>, 4> m) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[pivot][col])) pivot = r;
    if (std::fabs(m[pivot][col]) < 1e-14)
      throw std::runtime_error("solve_shares: singular market-share system");
    std::swap(m[col], m[pivot]);
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return {m[0][4] / m[0][0], m[1][4] / m[1][1], m[2][4] / m[2][2], m[3][4] / m[3][3]};
}

}  // namespace detail

// Marginal consumers and market shares for given qualities and prices,
// solved as a linear system in (omega_hi, omega_lo, n1, n2):
//   omega_hi*q1 + mu*q1*n~1 - p1 = omega_hi*q2 + mu*q2*n~2 - p2
//   omega_lo*q2 + mu*q2*n~2 - p2 = 0
//   n1 = (omega_hat - omega_hi)/omega_hat
//   n2 = (omega_hi - omega_lo)/omega_hat
// Non-interior solutions are returned as-is with the flag down, never
// clamped.
inline MarketOutcome solve_shares(double q1, double q2, double p1, double p2,
                                  const GameParams& params, bool compatible) {
  if (!(q1 > q2 && q2 > 0.0)) throw std::invalid_argument("solve_shares: need q1 > q2 > 0");
  const double w = params.omega_hat;
  const double mu = params.mu;
  // columns: omega_hi, omega_lo, n1, n2 | rhs
  std::array<std::array<double, 5>, 4> m{};
  m[0] = {q1 - q2, 0.0,
          compatible ? mu * (q1 - q2) : mu * q1,
          compatible ? mu * (q1 - q2) : -mu * q2,
          p1 - p2};
  m[1] = {0.0, q2, compatible ? mu * q2 : 0.0, mu * q2, p2};
  m[2] = {1.0 / w, 0.0, 1.0, 0.0, 1.0};
  m[3] = {-1.0 / w, 1.0 / w, 0.0, 1.0, 0.0};
  const auto x = detail::solve4(m);
  MarketOutcome out;
  out.omega_hi = x[0];
  out.omega_lo = x[1];
  out.n1 = x[2];
  out.n2 = x[3];
  out.interior = 0.0 < out.omega_lo && out.omega_lo < out.omega_hi && out.omega_hi < w;
  return out;
}

// Quality-ratio condition for a unique price equilibrium with both firms
// pricing above marginal cost.
inline bool check_uniqueness(double q1, double q2, const GameParams& params) {
  if (!(q2 > 0.0)) throw std::invalid_argument("check_uniqueness: q2 must be > 0");
  const double w = params.omega_hat;
  const double mu = params.mu;
  if (mu >= w / 2.0) throw std::invalid_argument("check_uniqueness: mu >= omega_hat/2");
  return q1 / q2 > (w * w) / ((w - mu) * (w - 2.0 * mu));
}

enum class GameRegime { NoSharing, Sharing, Monopoly };

inline const char* to_string(GameRegime r) {
  switch (r) {
    case GameRegime::NoSharing: return "no_sharing";
    case GameRegime::Sharing: return "sharing";
    default: return "monopoly";
  }
}

struct DuopolyEquilibrium {
  GameRegime regime = GameRegime::NoSharing;
  double q1 = 0.0, q2 = 0.0;
  double p1 = 0.0, p2 = 0.0;
  MarketOutcome market;
  double pi1 = 0.0, pi2 = 0.0;
  bool unique_ok = false;    // quality-ratio condition at the equilibrium qualities
  bool interior_ok = false;  // both marginal consumers strictly inside (0, omega_hat)
};

namespace detail {

inline DuopolyEquilibrium finish_duopoly(GameRegime regime, double q1, double q2, double p1,
                                         double p2, const GameParams& params, bool compatible) {
  DuopolyEquilibrium eq;
  eq.regime = regime;
  eq.q1 = q1;
  eq.q2 = q2;
  eq.p1 = p1;
  eq.p2 = p2;
  eq.market = solve_shares(q1, q2, p1, p2, params, compatible);
  eq.pi1 = eq.market.n1 * (p1 - q1);
  eq.pi2 = eq.market.n2 * (p2 - q2);
  eq.unique_ok = check_uniqueness(q1, q2, params);
  eq.interior_ok = eq.market.interior;
  return eq;
}

}  // namespace detail

// Closed-form equilibrium without resource sharing (incompatible network
// goods). The high-end firm always uses the maximum inherent quality.
inline DuopolyEquilibrium equilibrium_no_sharing(const GameParams& params) {
  params.require_feasible();
  const double w = params.omega_hat;
  const double mu = params.mu;
  const double q1 = params.q_hat;
  const double wm = w - mu;
  const double q2 = params.q_hat * wm * wm *
                    (11.0 * w - 10.0 * mu -
                     std::sqrt(3.0 * (3.0 * w * w + 28.0 * w * mu - 20.0 * mu * mu))) /
                    (2.0 * w * w * (7.0 * w - 5.0 * mu));
  const double denom = 4.0 * q1 * wm * wm - q2 * w * w;
  const double p1 =
      q1 * (1.0 + (w - 1.0) * (2.0 * q1 * wm * wm - q2 * w * (2.0 * w - mu)) / denom);
  const double p2 =
      q2 * (1.0 + (w - 1.0) * (q1 * wm * (w - 2.0 * mu) - q2 * w * w) / denom);
  return detail::finish_duopoly(GameRegime::NoSharing, q1, q2, p1, p2, params, false);
}

// Closed-form equilibrium with resource sharing (compatible network goods:
// the externality argument is the pooled share n1+n2).
inline DuopolyEquilibrium equilibrium_sharing(const GameParams& params) {
  params.require_feasible();
  const double w = params.omega_hat;
  const double mu = params.mu;
  const double q1 = params.q_hat;
  const double q2 = params.q_hat * (4.0 * w - 3.0 * mu) / (7.0 * w - 6.0 * mu);
  const double denom = (4.0 * w - 3.0 * mu) * q1 - w * q2;
  const double p1 = q1 * (1.0 + 2.0 * w * (w - 1.0) * (q1 - q2) / denom);
  const double p2 = q2 * (1.0 + w * (w - 1.0) * (q1 - q2) / denom);
  return detail::finish_duopoly(GameRegime::Sharing, q1, q2, p1, p2, params, true);
}

// Monopoly benchmark: p* = q1(omega_hat - 1)/2 at q1 = q_hat; the share
// solves the single marginal-consumer equation. Profit is reported as
// computed (it is negative below omega_hat = 3).
inline DuopolyEquilibrium equilibrium_monopoly(const GameParams& params) {
  if (!(params.omega_hat > 1.0))
    throw std::invalid_argument("equilibrium_monopoly: omega_hat must be > 1");
  const double w = params.omega_hat;
  const double mu = params.mu;
  DuopolyEquilibrium eq;
  eq.regime = GameRegime::Monopoly;
  eq.q1 = params.q_hat;
  eq.q2 = 0.0;
  eq.p1 = params.q_hat * (w - 1.0) / 2.0;
  eq.p2 = 0.0;
  // omega_hi*q1 + mu*q1*n1 = p1 with n1 = (omega_hat - omega_hi)/omega_hat
  const double n1 = (w - eq.p1 / eq.q1) / (w - mu);
  eq.market.n1 = n1;
  eq.market.n2 = 0.0;
  eq.market.omega_hi = w * (1.0 - n1);
  eq.market.omega_lo = eq.market.omega_hi;
  eq.market.interior = 0.0 < eq.market.omega_hi && eq.market.omega_hi < w;
  eq.pi1 = n1 * (eq.p1 - eq.q1);
  eq.pi2 = 0.0;
  eq.unique_ok = true;
  eq.interior_ok = eq.market.interior;
  return eq;
}

// Largest profit gain firm `firm` can get by unilaterally moving its price
// across a relative grid around the equilibrium. Used to verify the closed
// forms are best responses.
inline double best_response_gap(const DuopolyEquilibrium& eq, const GameParams& params,
                                int firm, double rel_range = 0.10, int steps = 41) {
  const bool compatible = eq.regime == GameRegime::Sharing;
  const double base_p = firm == 1 ? eq.p1 : eq.p2;
  const double base_pi = firm == 1 ? eq.pi1 : eq.pi2;
  double worst = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double p = base_p * (1.0 - rel_range + 2.0 * rel_range * i / (steps - 1));
    const MarketOutcome m = firm == 1
        ? solve_shares(eq.q1, eq.q2, p, eq.p2, params, compatible)
        : solve_shares(eq.q1, eq.q2, eq.p1, p, params, compatible);
    const double pi = firm == 1 ? m.n1 * (p - eq.q1) : m.n2 * (p - eq.q2);
    worst = std::max(worst, pi - base_pi);
  }
  return worst;
}

struct SweepCell {
  double omega_hat = 0.0;
  double mu = 0.0;
  DuopolyEquilibrium no_sharing;
  DuopolyEquilibrium sharing;
  DuopolyEquilibrium monopoly;
};

struct SweepResult {
  std::vector<SweepCell> cells;
  std::vector<std::string> skipped;  // "omega_hat=...,mu=...: reason"
};

// Full parameter sweep behind the profit/coverage figures. Parameter-
// infeasible cells are skipped with a reason; condition violations at
// feasible cells are carried as flags on the equilibria.
inline SweepResult sweep(std::span<const double> omega_hat_grid, std::span<const double> mu_set,
                         double q_hat) {
  if (omega_hat_grid.empty() || mu_set.empty())
    throw std::invalid_argument("sweep: empty grid");
  SweepResult out;
  for (double mu : mu_set) {
    for (double w : omega_hat_grid) {
      GameParams p{q_hat, w, mu};
      if (!p.feasible()) {
        out.skipped.push_back("omega_hat=" + std::to_string(w) + ",mu=" + std::to_string(mu) +
                              ": mu outside [0, min(1, omega_hat/2)) or omega_hat <= 1");
        continue;
      }
      SweepCell cell;
      cell.omega_hat = w;
      cell.mu = mu;
      cell.no_sharing = equilibrium_no_sharing(p);
      cell.sharing = equilibrium_sharing(p);
      cell.monopoly = equilibrium_monopoly(p);
      out.cells.push_back(cell);
    }
  }
  return out;
}

// Default sweep axes: the three network-effect intensities discussed with
// the profit figures, and a dispersion axis wide enough to show the
// crossing.
inline std::vector<double> default_omega_hat_grid() {
  std::vector<double> g;
  for (double w = 1.5; w <= 4.0 + 1e-9; w += 0.05) g.push_back(w);
  return g;
}

inline std::vector<double> default_mu_set() { return {0.7, 0.25, 0.4}; }

}  // namespace mmshare
