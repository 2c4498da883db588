#include "ncpfr/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "ncpfr/parallel.hpp"

namespace ncpfr {

namespace {

constexpr double kMinLogWeight = -644.0;  // exp(-644) ~ 1e-280

// Pairwise summation keeps the reduction order fixed and the error O(log n).
Real pairwise_sum(const Real* v, std::size_t n) {
  if (n <= 8) {
    Real s = 0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

}  // namespace

Real log_sum_exp(const std::vector<Real>& v) {
  if (v.empty()) return -std::numeric_limits<Real>::infinity();
  const Real m = *std::max_element(v.begin(), v.end());
  std::vector<Real> e(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) e[i] = std::exp(v[i] - m);
  return m + std::log(pairwise_sum(e.data(), e.size()));
}

Real WeightedDiscreteMeasure::weight(std::size_t k) const { return std::exp(log_weights[k]); }

std::vector<double> WeightedDiscreteMeasure::weights() const {
  std::vector<double> w(size());
  for (std::size_t k = 0; k < size(); ++k) w[k] = static_cast<double>(weight(k));
  return w;
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::from_log_weights(std::vector<Real> nodes,
                                                                  std::vector<Real> log_weights) {
  if (nodes.size() != log_weights.size() || nodes.empty())
    throw DomainError("measure needs matching, non-empty node and weight lists");
  std::vector<std::size_t> order(nodes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return nodes[i] < nodes[j]; });
  WeightedDiscreteMeasure mu;
  for (std::size_t i : order) {
    if (!std::isfinite(static_cast<double>(log_weights[i])))
      throw DomainError("measure weights must be positive and finite");
    if (!mu.nodes.empty() && mu.nodes.back() == nodes[i]) {
      Real& lw = mu.log_weights.back();
      const Real m = std::max(lw, log_weights[i]);
      lw = m + std::log(std::exp(lw - m) + std::exp(log_weights[i] - m));
      mu.merged_collisions = true;
      continue;
    }
    mu.nodes.push_back(nodes[i]);
    mu.log_weights.push_back(log_weights[i]);
  }
  const Real z = log_sum_exp(mu.log_weights);
  for (Real& lw : mu.log_weights) lw -= z;
  return mu;
}

WeightedDiscreteMeasure WeightedDiscreteMeasure::from_weights(std::vector<Real> nodes,
                                                              std::vector<Real> weights) {
  std::vector<Real> lw(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0)) throw DomainError("measure weights must be positive");
    lw[i] = std::log(weights[i]);
  }
  return from_log_weights(std::move(nodes), std::move(lw));
}

void WeightedDiscreteMeasure::validate() const {
  if (nodes.empty() || nodes.size() != log_weights.size())
    throw DomainError("malformed measure");
  for (std::size_t k = 1; k < nodes.size(); ++k)
    if (!(nodes[k - 1] < nodes[k])) throw DomainError("measure nodes must be strictly increasing");
  if (std::fabs(static_cast<double>(log_sum_exp(log_weights))) > 1e-12)
    throw DomainError("measure is not normalized");
}

WeightedDiscreteMeasure balanced_measure(const BackwardOrbit& orbit, double t) {
  std::vector<Real> lw(orbit.size());
  for (std::size_t k = 0; k < orbit.size(); ++k) lw[k] = -static_cast<Real>(t) * orbit.log_abs_Tprime[k];
  const Real z = log_sum_exp(lw);
  WeightedDiscreteMeasure mu;
  mu.nodes = orbit.nodes;
  mu.log_weights.resize(lw.size());
  for (std::size_t k = 0; k < lw.size(); ++k) {
    mu.log_weights[k] = lw[k] - z;
    if (mu.log_weights[k] < kMinLogWeight)
      throw NumericalError(
          "balanced measure weight underflow: reduce n or use extended precision");
  }
  return mu;
}

WeightedDiscreteMeasure pfr_pullback(const ExpandingPolynomial& p,
                                     const WeightedDiscreteMeasure& mu, double t) {
  std::vector<Real> nodes, lw;
  nodes.reserve(mu.size() * static_cast<std::size_t>(p.degree()));
  lw.reserve(nodes.capacity());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (std::fabs(mu.nodes[j]) > 1) throw DomainError("pullback needs nodes inside [-1,1]");
    for (Real lam : preimages_one_step(p, mu.nodes[j])) {
      nodes.push_back(lam);
      lw.push_back(mu.log_weights[j] - static_cast<Real>(t) * std::log(std::fabs(p.derivative(lam))));
    }
  }
  return WeightedDiscreteMeasure::from_log_weights(std::move(nodes), std::move(lw));
}

double integrate(const WeightedDiscreteMeasure& mu, const std::function<double(double)>& psi) {
  std::vector<Real> terms(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k)
    terms[k] = mu.weight(k) * static_cast<Real>(psi(static_cast<double>(mu.nodes[k])));
  return static_cast<double>(pairwise_sum(terms.data(), terms.size()));
}

double transport_distance(const WeightedDiscreteMeasure& mu, const WeightedDiscreteMeasure& nu) {
  std::size_t i = 0, j = 0;
  Real Fm = 0, Fn = 0, total = 0;
  Real x = std::min(mu.nodes.front(), nu.nodes.front());
  while (i < mu.size() || j < nu.size()) {
    const Real next = (j >= nu.size() || (i < mu.size() && mu.nodes[i] <= nu.nodes[j]))
                          ? mu.nodes[i]
                          : nu.nodes[j];
    total += std::fabs(Fm - Fn) * (next - x);
    x = next;
    while (i < mu.size() && mu.nodes[i] == x) Fm += mu.weight(i++);
    while (j < nu.size() && nu.nodes[j] == x) Fn += nu.weight(j++);
  }
  return static_cast<double>(total);
}

OrbitLadder make_orbit_ladder(const ExpandingPolynomial& p, int n_lo, int n_hi, Real x) {
  if (n_lo < 1 || n_hi < n_lo + 1) throw DomainError("pressure needs at least two levels n >= 1");
  std::size_t cap = 1;
  for (int i = 0; i < n_hi; ++i) cap *= static_cast<std::size_t>(p.degree());
  OrbitLadder ladder;
  ladder.degree = p.degree();
  ladder.base_point = x;
  ladder.n_lo = n_lo;
  ladder.n_hi = n_hi;
  ladder.orbits.resize(static_cast<std::size_t>(n_hi - n_lo + 1));
  parallel_for(ladder.orbits.size(), [&](std::size_t i) {
    ladder.orbits[i] = backward_orbit(p, n_lo + static_cast<int>(i), x, cap);
  });
  return ladder;
}

OrbitLadder make_default_ladder(const ExpandingPolynomial& p, std::size_t cap, Real x) {
  int n_hi = 0;
  std::size_t d = 1;
  while (d * static_cast<std::size_t>(p.degree()) <= cap) {
    d *= static_cast<std::size_t>(p.degree());
    ++n_hi;
  }
  if (n_hi < 2) throw CapacityError("node cap too small for a pressure estimate");
  return make_orbit_ladder(p, std::max(1, n_hi / 2), n_hi, x);
}

double log_partition_sum(const BackwardOrbit& orbit, double t, int degree) {
  std::vector<Real> lw(orbit.size());
  for (std::size_t k = 0; k < orbit.size(); ++k) lw[k] = -static_cast<Real>(t) * orbit.log_abs_Tprime[k];
  return static_cast<double>(log_sum_exp(lw) / std::log(static_cast<Real>(degree)));
}

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("regression needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw DomainError("regression abscissae are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    fit.residuals.push_back(r);
    ssr += r * r;
  }
  fit.r2 = syy > 0 ? 1.0 - ssr / syy : 1.0;
  return fit;
}

PressureEstimate pressure_estimate(const OrbitLadder& ladder, double t) {
  PressureEstimate est;
  est.t = t;
  std::vector<double> xs;
  for (std::size_t i = 0; i < ladder.orbits.size(); ++i) {
    est.levels.push_back(ladder.n_lo + static_cast<int>(i));
    xs.push_back(est.levels.back());
    est.log_sums.push_back(log_partition_sum(ladder.orbits[i], t, ladder.degree));
  }
  const LinearFit fit = least_squares(xs, est.log_sums);
  est.P = fit.slope;
  est.intercept = fit.intercept;
  est.residuals = fit.residuals;
  for (double r : fit.residuals) est.warning = est.warning || std::fabs(r) > 0.05;
  return est;
}

PressureCurve pressure_curve(const OrbitLadder& ladder, const std::vector<double>& t_grid) {
  PressureCurve curve;
  curve.t_grid = t_grid;
  curve.n_lo = ladder.n_lo;
  curve.n_hi = ladder.n_hi;
  curve.P_values.resize(t_grid.size());
  curve.max_residual.resize(t_grid.size());
  parallel_for(t_grid.size(), [&](std::size_t i) {
    const PressureEstimate e = pressure_estimate(ladder, t_grid[i]);
    curve.P_values[i] = e.P;
    double m = 0;
    for (double r : e.residuals) m = std::max(m, std::fabs(r));
    curve.max_residual[i] = m;
  });
  curve.strictly_decreasing = true;
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    curve.strictly_decreasing = curve.strictly_decreasing && curve.P_values[i] < curve.P_values[i - 1];
  // Midpoint convexity on consecutive triples of a uniform grid.
  curve.midpoint_convex = true;
  for (std::size_t i = 1; i + 1 < t_grid.size(); ++i)
    curve.midpoint_convex = curve.midpoint_convex &&
                            curve.P_values[i] <= 0.5 * (curve.P_values[i - 1] + curve.P_values[i + 1]) + 1e-12;
  return curve;
}

double pressure_root(const OrbitLadder& ladder, double tol) {
  double lo = 0.0, hi = 1.0;
  if (!(pressure_estimate(ladder, hi).P < 0))
    throw NumericalError("pressure has no sign change on (0,1]: not hyperbolic enough or estimates too noisy");
  double mid = 0.5;
  for (int it = 0; it < 60; ++it) {
    mid = 0.5 * (lo + hi);
    const double P = pressure_estimate(ladder, mid).P;
    if (P > 0)
      lo = mid;
    else
      hi = mid;
    if (std::fabs(P) <= tol && hi - lo < 1e-12) break;
  }
  if (std::fabs(pressure_estimate(ladder, mid).P) > tol)
    throw NumericalError("pressure root bisection did not reach its tolerance");
  return mid;
}

TwoSidedCheck two_sided_pressure_check(const OrbitLadder& ladder, double eps_hat, int intervals) {
  if (intervals < 2) throw DomainError("two-sided check needs at least two intervals");
  TwoSidedCheck check;
  const int K = intervals;
  for (int k = 0; k <= K; ++k)
    check.t_grid.push_back(1.0 + (1.0 + eps_hat) * (2.0 * k / K - 1.0));
  std::vector<double> P(check.t_grid.size());
  parallel_for(P.size(), [&](std::size_t k) { P[k] = pressure_estimate(ladder, check.t_grid[k]).P; });
  check.max_sum = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= K; ++k) {
    // t_{K-k} = 2 - t_k; summing in index order keeps the table symmetric.
    const double s = k <= K - k ? P[k] + P[K - k] : P[K - k] + P[k];
    check.sums.push_back(s);
    check.max_sum = std::max(check.max_sum, s);
  }
  check.pass = check.max_sum < 0;
  return check;
}

Pressure2Fit pressure2_exponent(const OrbitLadder& ladder) {
  Pressure2Fit fit;
  std::vector<double> xs;
  const double logN = std::log(static_cast<double>(ladder.degree));
  for (std::size_t i = 0; i < ladder.orbits.size(); ++i) {
    const int n = ladder.n_lo + static_cast<int>(i);
    fit.levels.push_back(n);
    xs.push_back(n);
    const double log_d = std::log(static_cast<double>(ladder.orbits[i].size())) / logN;
    fit.log_d_sums.push_back(log_d + log_partition_sum(ladder.orbits[i], 2.0, ladder.degree));
  }
  const LinearFit lf = least_squares(xs, fit.log_d_sums);
  // d = N^n, so a slope s in n is the exponent -tau in d.
  fit.tau_hat = -lf.slope;
  fit.log_C = lf.intercept * logN;
  return fit;
}

std::vector<std::pair<double, double>> sample_julia_pairs(const ExpandingPolynomial& p,
                                                          std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::vector<double> pts = sample_julia_points(p, 2 * count, rng);
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < count; ++i) pairs.emplace_back(pts[2 * i], pts[2 * i + 1]);
  return pairs;
}

WeakPfrResult weak_pfr_experiment(const ExpandingPolynomial& p, double t, int n_lo, int n_hi,
                                  const std::vector<std::pair<double, double>>& pairs,
                                  double center, double alpha, std::size_t cap) {
  if (pairs.empty()) throw DomainError("weak PFR experiment needs x-pairs");
  WeakPfrResult res;
  res.t = t;
  auto psi = [&](double lam) { return std::pow(std::fabs(lam - center), alpha); };
  std::vector<double> xs;
  for (int n = n_lo; n <= n_hi; ++n) {
    std::vector<double> diffs(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
      const double v1 = integrate(balanced_measure(backward_orbit(p, n, pairs[i].first, cap), t), psi);
      const double v2 = integrate(balanced_measure(backward_orbit(p, n, pairs[i].second, cap), t), psi);
      diffs[i] = std::fabs(v1 - v2);
    });
    res.levels.push_back(n);
    xs.push_back(n);
    res.sup_difference.push_back(*std::max_element(diffs.begin(), diffs.end()));
  }
  // Differences at the round-off floor carry no rate information.
  std::vector<double> fx, logs;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (res.sup_difference[i] > kWeakPfrFloor) {
      fx.push_back(xs[i]);
      logs.push_back(std::log(res.sup_difference[i]));
    }
  res.fitted_levels = fx.size();
  if (fx.size() < 2) throw NumericalError("weak PFR: fewer than two levels above the round-off floor");
  const LinearFit fit = least_squares(fx, logs);
  res.q_hat = std::exp(fit.slope);
  res.r2 = fit.r2;
  return res;
}

}  // namespace ncpfr
