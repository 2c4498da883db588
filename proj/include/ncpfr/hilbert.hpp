#pragma once

// The matrix H_t of the two-weight discrete Hilbert transform on a backward
// orbit, and the box / Poisson testing conditions for the step weights
// u = |T'|^{t-1}, v = |T'|^{1-t} on the components of T^{-1}([-1,1]).

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "ncpfr/common.hpp"
#include "ncpfr/measures.hpp"
#include "ncpfr/polydyn.hpp"

namespace ncpfr {

/// Sign of the off-diagonal kernel. `Stated` is 1/(lambda_i - lambda_j);
/// `Conjugate` is 1/(lambda_j - lambda_i), the orientation under which the
/// matrix is the eigenbasis form of H itself.
enum class KernelSign { Stated, Conjugate };

struct HtMatrix {
  double t = 0.0;
  Eigen::MatrixXd M;          // full matrix
  Eigen::MatrixXd B;          // off-diagonal part
  std::vector<double> diag;   // diagonal part
};

/// Entries |T'_i|^{-(1-t/2)} K_ij |T'_j|^{-t/2}, K_ii = ((1-t)/2) T''/T'(lambda_i).
HtMatrix build_Ht(const BackwardOrbit& orbit, double t, KernelSign sign = KernelSign::Stated);

struct HtNormRow {
  double t = 0.0;
  int n = 0;
  double x = 0.0;
  double ht_norm = 0.0;
  double b_norm = 0.0;      // off-diagonal part alone
  double diag_max = 0.0;    // max |diagonal entry|
  double koebe = 0.0;       // max_i |T''/T'| / |T'| at lambda_i
};

std::vector<HtNormRow> ht_norm_scan(const ExpandingPolynomial& p, const std::vector<double>& t_grid,
                                    const std::vector<int>& n_range, const std::vector<double>& x_grid,
                                    KernelSign sign = KernelSign::Stated,
                                    std::size_t cap = kDefaultNodeCap);

/// ||B|| for the off-diagonal kernel between the weighted spaces.
double discrete_two_weight_norm(const BackwardOrbit& orbit, double t);

struct TwoWeightSystem {
  int level = 0;
  double t = 0.0;
  double eps_hat = 0.05;
  std::vector<Interval> intervals;  // components of T^{-1}([-1,1])
  std::vector<double> node;         // the preimage of the base point inside each component
  std::vector<double> log_abs_Tprime;
  std::vector<double> u_levels;     // |T'|^{t-1}
  std::vector<double> v_levels;     // |T'|^{1-t}
  std::vector<double> u_gauge;      // u^{1+eps}
  std::vector<double> v_gauge;      // v^{1+eps}
};

/// Step weights at level n with representatives at the preimages of x.
TwoWeightSystem step_weights(const ExpandingPolynomial& p, int n, double t, double eps_hat = 0.05,
                             double x = 0.0, std::size_t cap = kDefaultNodeCap);

/// Integral over I of the step function equal to values[i] on pieces[i].
double step_integral(const std::vector<Interval>& pieces, const std::vector<double>& values,
                     const Interval& I);

/// <u^{1+eps}>_I <v^{1+eps}>_I.
double box_test(const TwoWeightSystem& sys, const Interval& I);

/// Poisson extension of the step function at center(I) + i|I|.
double poisson_average(const std::vector<Interval>& pieces, const std::vector<double>& values,
                       const Interval& I);

/// P_I u^{1+eps} * P_I v^{1+eps}.
double poisson_product(const TwoWeightSystem& sys, const Interval& I);

/// tau0 = -[P(t') + P(2 - t')] with t' = t(1 + eps) - eps, the exponent in
/// <u^{1+eps}>_I <v^{1+eps}>_I ~ N^{-tau0 (n-k)}.
double gauge_exponent(const OrbitLadder& ladder, double t, double eps_hat);

struct PoissonTestReport {
  std::vector<int> depth;                 // n - k
  std::vector<double> sup_poisson;        // per dyadic level k
  std::vector<double> sup_box;
  bool monotone = false;                  // sup_poisson decreasing in n - k
  double fitted_exponent = 0.0;           // -slope of log_N sup_poisson vs n - k
  double fitted_exponent_box = 0.0;
  double tau0 = 0.0;                      // -[P(t') + P(2 - t')]
  std::vector<double> doubling_factor;    // per level m: min over parent/child of int u / int u_child
  double delta_hat = 0.0;                 // min doubling factor - 1
  double sup_dyadic = 0.0;
  double sup_random = 0.0;
  double sup_adversarial = 0.0;
  double min_poisson_over_box = 0.0;      // dyadic intervals
  double max_poisson_over_box = 0.0;
  double min_poisson_minus_lower = 0.0;   // min of P_I g - <g>_I / (2 pi)
  std::uint64_t seed = 0;
  std::size_t random_count = 0;
};

/// Dyadic-level profile, doubling factors and random/adversarial suprema for
/// the system at level hierarchy.back().level. tau0 is supplied by the caller.
PoissonTestReport poisson_test_scan(const TwoWeightSystem& sys,
                                    const std::vector<IntervalSystem>& hierarchy, double tau0,
                                    int degree, std::size_t random_count = 1000,
                                    std::uint64_t seed = 1);

}  // namespace ncpfr
