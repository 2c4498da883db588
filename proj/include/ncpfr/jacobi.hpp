#pragma once

// Jacobi matrices of discrete measures and their spectral utilities.

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "ncpfr/common.hpp"
#include "ncpfr/measures.hpp"

namespace ncpfr {

/// Symmetric tridiagonal matrix with diagonal a_0..a_{d-1} and positive
/// off-diagonal b_1..b_{d-1}; b[m-1] holds b_m = J(m, m-1).
struct JacobiMatrix {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t size() const { return a.size(); }
  Eigen::MatrixXd dense() const;
};

enum class ReductionMethod { Givens, Lanczos };

struct ReductionOptions {
  Precision precision = Precision::Double;
  ReductionMethod method = ReductionMethod::Givens;
};

/// Recurrence coefficients of the orthonormal polynomials of mu. The default
/// path reduces the bordered diagonal matrix [[0, sqrt(w)^T], [sqrt(w), diag(x)]]
/// to tridiagonal form by Givens rotations, one node at a time (O(d^2)).
JacobiMatrix jacobi_from_measure(const WeightedDiscreteMeasure& mu, ReductionOptions opts = {});

struct SpectralData {
  std::vector<double> eigenvalues;  // increasing
  Eigen::MatrixXd eigvecs;          // columns; first row made non-negative
  std::vector<double> first_components;
};

SpectralData spectral_decomposition(const JacobiMatrix& J);

/// Eigenvalues with squared first eigenvector components as weights.
WeightedDiscreteMeasure spectral_measure(const JacobiMatrix& J);

/// <(z - J)^{-1} e_0, e_0> by the continued fraction from the bottom up.
std::complex<double> resolvent_00(const JacobiMatrix& J, std::complex<double> z);

/// Same entry through a dense complex solve, for cross-checking.
std::complex<double> resolvent_00_dense(const JacobiMatrix& J, std::complex<double> z);

/// sum_k w_k / (z - lambda_k).
std::complex<double> stieltjes_transform(const WeightedDiscreteMeasure& mu, std::complex<double> z);

struct OrthoPolyValues {
  std::vector<double> values;       // P_0(lambda) .. P_{d-1}(lambda)
  std::vector<double> derivatives;  // P'_0(lambda) .. P'_{d-1}(lambda)
};

OrthoPolyValues ortho_polys_at(const JacobiMatrix& J, double lambda);

/// Largest singular value. The symmetric path uses eigenvalues; matrices with
/// more than 512 rows go through power iteration on M^T M.
double opnorm(const Eigen::MatrixXd& M, bool symmetric = false);

/// Spectral norm of the symmetric tridiagonal matrix (diag, offdiag) via
/// Sturm-sequence bisection on the two extreme eigenvalues. O(d) per step.
double tridiagonal_norm(const std::vector<double>& diag, const std::vector<double>& offdiag);

/// ||J1 - J2|| for equal-size Jacobi matrices.
double jacobi_difference_norm(const JacobiMatrix& J1, const JacobiMatrix& J2);

}  // namespace ncpfr
