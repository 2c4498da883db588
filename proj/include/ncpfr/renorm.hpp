#pragma once

// Renormalization J~ -> J(0, J~; T) for one-sided finite Jacobi matrices,
// built by pulling back the spectral measure of J~ through T = f^n with
// branch weights 1/d, and the experiments around it.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "ncpfr/jacobi.hpp"
#include "ncpfr/polydyn.hpp"

namespace ncpfr {

inline const std::vector<std::complex<double>> kStandardZ = {
    {0.0, 2.0}, {3.0, 1.0}, {-1.7, 0.5}};

struct RenormResult {
  JacobiMatrix J_out;                       // size d * m
  std::vector<std::complex<double>> z;
  std::vector<double> re_residuals;         // relative, (0,0) entry
  double spectrum_escape = 0.0;             // max(0, |eigenvalue| - 1) over the input spectrum
};

/// One renormalization step with T = f^n.
RenormResult renorm_map(const ExpandingPolynomial& p, int n, const JacobiMatrix& Jt,
                        Precision precision = Precision::Double,
                        const std::vector<std::complex<double>>& z = kStandardZ,
                        std::size_t cap = kDefaultNodeCap);

/// Relative (0,0) residual of <(z-J)^{-1}e_0,e_0> = (T'(z)/d) <(T(z)-J~)^{-1}e_0,e_0>.
double re_residual(const ExpandingPolynomial& p, int n, const JacobiMatrix& Jt,
                   const JacobiMatrix& J_out, std::complex<double> z);

/// max over k, m < size(J~) of the relative residual of the decimated entries
/// <(z-J)^{-1} e_{dk}, e_{dm}> against (T'(z)/d) <(T(z)-J~)^{-1} e_k, e_m>.
double decimated_resolvent_residual(const ExpandingPolynomial& p, int n, const JacobiMatrix& Jt,
                                    const JacobiMatrix& J_out, std::complex<double> z);

/// max|da| + 2 max|db| over the first `window` diagonal entries.
double coefficient_norm(const JacobiMatrix& J1, const JacobiMatrix& J2, std::size_t window);

/// Jacobi matrix of a seeded random measure with m atoms in [-1, 1].
JacobiMatrix random_jacobi(std::size_t m, std::mt19937_64& rng);

struct ContractionEstimate {
  double c_hat = 0.0;
  std::vector<double> ratios;
  std::vector<double> input_norms;
  std::vector<double> output_norms;
  std::size_t resampled = 0;
  std::size_t window = 0;
};

ContractionEstimate contraction_estimate(const ExpandingPolynomial& p, int n, std::size_t m,
                                         std::size_t pairs, std::uint64_t seed,
                                         Precision precision = Precision::Double);

struct LimitPeriodicResult {
  JacobiMatrix J;                     // last iterate
  std::vector<std::size_t> periods;   // d^l
  std::vector<double> defect_a;
  std::vector<double> defect_b;
  std::vector<double> defect_ratio;   // defect(l+1) / defect(l) for the max of a and b defects
  std::size_t window = 0;
};

/// Iterates the map `steps` times from Jt0 and tabulates coefficient defects
/// |a_{k+d^l} - a_k|, |b_{k+d^l} - b_k| for l = 1..max_l over the interior window.
LimitPeriodicResult iterate_fixed_point(const ExpandingPolynomial& p, int n, const JacobiMatrix& Jt0,
                                        int steps, int max_l,
                                        Precision precision = Precision::Double);

/// max |coefficient difference| over the first `window` entries of two iterates.
double start_independence(const JacobiMatrix& A, const JacobiMatrix& B, std::size_t window);

struct ScalarContraction {
  double t = 0.0;
  std::vector<int> levels;
  std::vector<double> L;        // max over pairs of ||J(x1) - J(x2)|| / |x1 - x2|
  double c_hat = 0.0;           // exp(slope of log L_n)
  double r2 = 0.0;
  double lipschitz_bound = 0.0; // 1.5 max(L at the first two levels)
  bool lipschitz_uniform = false;
};

ScalarContraction scalar_contraction_experiment(const ExpandingPolynomial& p, double t,
                                                const std::vector<int>& levels,
                                                const std::vector<std::pair<double, double>>& pairs,
                                                Precision precision = Precision::Double,
                                                std::size_t cap = kDefaultNodeCap);

}  // namespace ncpfr
