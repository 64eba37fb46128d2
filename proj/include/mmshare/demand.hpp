#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmshare/externality.hpp"

namespace mmshare {

using HFunction = std::function<double(double)>;

// Piecewise-linear interpolant of an empirical externality curve, clamped
// to the end values outside the grid.
inline HFunction interpolate_h(const ExternalityCurve& curve) {
  if (curve.points.size() < 2) throw std::invalid_argument("interpolate_h: need >= 2 points");
  std::vector<double> xs, ys;
  xs.reserve(curve.points.size());
  for (const auto& p : curve.points) {
    if (!xs.empty() && p.n <= xs.back())
      throw std::invalid_argument("interpolate_h: grid not strictly increasing");
    xs.push_back(p.n);
    ys.push_back(p.h);
  }
  return [xs = std::move(xs), ys = std::move(ys)](double n) {
    if (n <= xs.front()) return ys.front();
    if (n >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), n);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double t = (n - xs[i - 1]) / (xs[i] - xs[i - 1]);
    return ys[i - 1] + t * (ys[i] - ys[i - 1]);
  };
}

// Consumer surplus of type omega at network size n and price p.
inline double surplus(double omega, double n, double price, const HFunction& h) {
  return omega * h(n) - price;
}

// Fulfilled-expectations demand for uniformly distributed types on
// [0, omega_hat]: at self-consistent size n the marginal buyer has type
// omega_hat*(1-n), so p(n;n) = omega_hat*(1-n)*h(n).
struct DemandCurve {
  double omega_hat = 1.0;
  HFunction h;

  double price(double n) const { return omega_hat * (1.0 - n) * h(n); }
  double revenue(double n) const { return n * price(n); }
};

inline DemandCurve fe_demand(HFunction h, double omega_hat) {
  if (!(omega_hat > 0.0)) throw std::invalid_argument("fe_demand: omega_hat must be > 0");
  if (!h) throw std::invalid_argument("fe_demand: empty externality function");
  return {omega_hat, std::move(h)};
}

inline DemandCurve fe_demand(const ExternalityCurve& curve, double omega_hat) {
  return fe_demand(interpolate_h(curve), omega_hat);
}

namespace detail {

constexpr int kScanPoints = 4001;

// Argmax of f over [0,1]: grid scan (ties -> smallest n) refined by
// golden-section search between the bracketing neighbours.
inline double refine_argmax(const std::function<double(double)>& f, double& grid_argmax) {
  const double step = 1.0 / (kScanPoints - 1);
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < kScanPoints; ++i) {
    const double v = f(i * step);
    if (v > best + 1e-15) {
      best = v;
      best_i = i;
    }
  }
  grid_argmax = best_i * step;
  double lo = std::max(0.0, (best_i - 1) * step);
  double hi = std::min(1.0, (best_i + 1) * step);
  const double gr = 0.6180339887498949;
  double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
  double fa = f(a), fb = f(b);
  while (hi - lo > 1e-10) {
    if (fa < fb) {
      lo = a;
      a = b;
      fa = fb;
      b = lo + gr * (hi - lo);
      fb = f(b);
    } else {
      hi = b;
      b = a;
      fb = fa;
      a = hi - gr * (hi - lo);
      fa = f(a);
    }
  }
  return 0.5 * (lo + hi);
}

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

struct CriticalMass {
  double n_grid = 0.0;     // argmax on the scan grid
  double n_refined = 0.0;  // golden-section refinement
};

// Critical mass: the network size maximizing p(n;n) under perfect
// competition.
inline CriticalMass critical_mass(const DemandCurve& demand) {
  double grid = 0.0;
  const double refined =
      detail::refine_argmax([&](double n) { return demand.price(n); }, grid);
  return {grid, refined};
}

enum class Stability { Stable, Unstable };

struct MarketEquilibrium {
  double n = 0.0;
  Stability stability = Stability::Stable;
  std::string kind;  // "zero", "tipping", "stable", "tangency"
};

struct EquilibriumSet {
  double cost = 0.0;
  double critical_mass_n = 0.0;
  double critical_mass_grid_n = 0.0;
  double peak_price = 0.0;
  std::vector<MarketEquilibrium> points;
};

// Perfect-competition equilibria at marginal cost c: always n=0; when c is
// below the peak of p(n;n), the tipping point n' and the stable size n''
// bracket the critical mass.
inline EquilibriumSet equilibria(const DemandCurve& demand, double cost) {
  if (cost < 0.0) throw std::invalid_argument("equilibria: negative cost");
  EquilibriumSet out;
  out.cost = cost;
  const CriticalMass cm = critical_mass(demand);
  out.critical_mass_n = cm.n_refined;
  out.critical_mass_grid_n = cm.n_grid;
  out.peak_price = demand.price(cm.n_refined);
  out.points.push_back({0.0, Stability::Stable, "zero"});

  const double gap = out.peak_price - cost;
  if (std::fabs(gap) <= 1e-12) {
    out.points.push_back({cm.n_refined, Stability::Stable, "tangency"});
    return out;
  }
  if (gap < 0.0) return out;  // cost above the curve: only the zero network

  auto excess = [&](double n) { return demand.price(n) - cost; };
  double n_lo;
  if (excess(0.0) >= 0.0) {
    n_lo = 0.0;  // demand already covers cost at zero size; no tipping barrier
  } else {
    n_lo = detail::bisect(excess, 0.0, cm.n_refined);
  }
  double n_hi;
  if (excess(1.0) >= 0.0) {
    n_hi = 1.0;
  } else {
    n_hi = detail::bisect(excess, cm.n_refined, 1.0);
  }
  out.points.push_back({n_lo, Stability::Unstable, "tipping"});
  out.points.push_back({n_hi, Stability::Stable, "stable"});
  return out;
}

// Monopoly choice: the network size maximizing n*(p(n;n) - c). Reported as
// a derived scalar next to the competitive equilibria.
inline double monopoly_optimum(const DemandCurve& demand, double cost) {
  double grid = 0.0;
  return detail::refine_argmax(
      [&](double n) { return n * (demand.price(n) - cost); }, grid);
}

}  // namespace mmshare
