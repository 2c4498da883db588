#pragma once

// Balanced measures, transfer-operator pullbacks and the pressure function
// P(t) = lim (1/n) log_N sum_k |T'(lambda_k)|^{-t}.

#include <cstdint>
#include <functional>
#include <vector>

#include "ncpfr/common.hpp"
#include "ncpfr/polydyn.hpp"

namespace ncpfr {

/// Discrete probability measure with log-domain weights.
struct WeightedDiscreteMeasure {
  std::vector<Real> nodes;        // strictly increasing
  std::vector<Real> log_weights;  // natural log, sum of exp = 1
  bool merged_collisions = false;

  std::size_t size() const { return nodes.size(); }
  Real weight(std::size_t k) const;
  std::vector<double> weights() const;

  /// Sorts, merges exact duplicates and normalizes. Weights must be positive.
  static WeightedDiscreteMeasure from_weights(std::vector<Real> nodes, std::vector<Real> weights);
  static WeightedDiscreteMeasure from_log_weights(std::vector<Real> nodes,
                                                  std::vector<Real> log_weights);
  /// Throws DomainError if the invariants do not hold.
  void validate() const;
};

Real log_sum_exp(const std::vector<Real>& v);

/// Weights proportional to |T'(lambda_k)|^{-t}.
WeightedDiscreteMeasure balanced_measure(const BackwardOrbit& orbit, double t);

/// One step of the normalized adjoint transfer operator with potential
/// -t log|f'|: mass w_j at y_j is spread over f^{-1}(y_j) with weights
/// proportional to w_j |f'(lambda)|^{-t}.
WeightedDiscreteMeasure pfr_pullback(const ExpandingPolynomial& p,
                                     const WeightedDiscreteMeasure& mu, double t);

/// int psi d(mu).
double integrate(const WeightedDiscreteMeasure& mu, const std::function<double(double)>& psi);

/// Kantorovich distance int |F_mu - F_nu| dx between two measures on the line.
double transport_distance(const WeightedDiscreteMeasure& mu, const WeightedDiscreteMeasure& nu);

/// Backward orbits of one base point for a range of levels, shared by all
/// pressure evaluations.
struct OrbitLadder {
  int degree = 0;
  Real base_point = 0;
  std::vector<BackwardOrbit> orbits;  // levels n_lo..n_hi
  int n_lo = 0;
  int n_hi = 0;
};

/// Default regression window: the upper half of the levels allowed by `cap`.
OrbitLadder make_orbit_ladder(const ExpandingPolynomial& p, int n_lo, int n_hi, Real x = 0);
OrbitLadder make_default_ladder(const ExpandingPolynomial& p, std::size_t cap = kDefaultNodeCap,
                                Real x = 0);

/// log_N sum_k |T'(lambda_k)|^{-t}.
double log_partition_sum(const BackwardOrbit& orbit, double t, int degree);

struct PressureEstimate {
  double t = 0.0;
  double P = 0.0;          // slope of log_N Z_n against n
  double intercept = 0.0;
  std::vector<int> levels;
  std::vector<double> log_sums;   // log_N Z_n
  std::vector<double> residuals;  // regression residuals
  bool warning = false;           // residuals larger than the transient budget
};

PressureEstimate pressure_estimate(const OrbitLadder& ladder, double t);

struct PressureCurve {
  std::vector<double> t_grid;
  std::vector<double> P_values;
  std::vector<double> max_residual;
  int n_lo = 0;
  int n_hi = 0;
  bool strictly_decreasing = false;
  bool midpoint_convex = false;
};

PressureCurve pressure_curve(const OrbitLadder& ladder, const std::vector<double>& t_grid);

/// Bisection for P(delta) = 0 on (0, 1] until |P| <= tol.
double pressure_root(const OrbitLadder& ladder, double tol = 1e-3);

struct TwoSidedCheck {
  std::vector<double> t_grid;  // symmetric about 1
  std::vector<double> sums;    // P(t) + P(2 - t)
  double max_sum = 0.0;
  bool pass = false;
};

/// P(t) + P(2-t) on a grid over [-eps_hat, 2 + eps_hat] that is symmetric
/// about t = 1, so the table is exactly symmetric.
TwoSidedCheck two_sided_pressure_check(const OrbitLadder& ladder, double eps_hat = 0.05,
                                       int intervals = 42);

struct Pressure2Fit {
  double tau_hat = 0.0;  // d * sum 1/|T'|^2 ~ C d^{-tau_hat}
  double log_C = 0.0;
  std::vector<int> levels;
  std::vector<double> log_d_sums;  // log_N (d sum 1/|T'|^2)
};

Pressure2Fit pressure2_exponent(const OrbitLadder& ladder);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<double> residuals;
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y);

/// sup over x-pairs of |int psi d mu_{x1} - int psi d mu_{x2}| for
/// psi(lambda) = |lambda - center|^alpha, and the fitted geometric rate q.
struct WeakPfrResult {
  double t = 0.0;
  std::vector<int> levels;
  std::vector<double> sup_difference;
  double q_hat = 0.0;
  double r2 = 0.0;
  std::size_t fitted_levels = 0;  // levels above kWeakPfrFloor
};

inline constexpr double kWeakPfrFloor = 1e-14;

WeakPfrResult weak_pfr_experiment(const ExpandingPolynomial& p, double t, int n_lo, int n_hi,
                                  const std::vector<std::pair<double, double>>& pairs,
                                  double center = 0.3, double alpha = 0.5,
                                  std::size_t cap = kDefaultNodeCap);

/// Pairs of points of J(f) drawn by seeded inverse-branch walks.
std::vector<std::pair<double, double>> sample_julia_pairs(const ExpandingPolynomial& p,
                                                          std::size_t count, std::uint64_t seed);

}  // namespace ncpfr
