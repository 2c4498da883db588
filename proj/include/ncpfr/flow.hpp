#pragma once

// Operators of the x-flow J' = F(J) + [G, J] satisfied by J(x), and the
// commutator identities behind it.

#include <Eigen/Dense>
#include <vector>

#include "ncpfr/jacobi.hpp"
#include "ncpfr/measures.hpp"
#include "ncpfr/polydyn.hpp"

namespace ncpfr {

inline constexpr std::size_t kFlowMaxDim = 256;

/// J(x) for the balanced measure with exponent t at level n.
JacobiMatrix jacobi_of_point(const ExpandingPolynomial& p, int n, double t, double x,
                             Precision precision = Precision::Double,
                             std::size_t cap = kDefaultNodeCap);

struct FlowOperators {
  BackwardOrbit orbit;
  WeightedDiscreteMeasure measure;
  JacobiMatrix J;
  double t = 0.0;
  std::vector<double> lambda;     // nodes
  std::vector<double> Tprime;     // signed T'(lambda_i)
  std::vector<double> phi_prime;  // -t T''/T' at lambda_i
  Eigen::MatrixXd Pmat;           // P_k(lambda_i)
  Eigen::MatrixXd PPmat;          // orthogonal: sqrt(w_i) P_k(lambda_i)
  Eigen::MatrixXd Pinv;           // inverse of Pmat, diag(w) Pmat^T
  Eigen::MatrixXd Pderiv;         // P'_k(lambda_i)
  Eigen::MatrixXd D;
  Eigen::MatrixXd F;
  Eigen::MatrixXd H;
  Eigen::MatrixXd G;
  Eigen::MatrixXd R;
  Eigen::MatrixXd K;
};

FlowOperators build_flow_ops(const ExpandingPolynomial& p, int n, double t, double x,
                             Precision precision = Precision::Double);

/// Commutator helper [A, B] = AB - BA.
Eigen::MatrixXd commutator(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct DIdentityReport {
  double rows_residual = 0.0;       // rows 0..d-2 of [J,D] against the identity
  double c_fit = 0.0;               // last row = e_{d-1} - c F^{-1} e_0
  double last_row_residual = 0.0;
  double lar2_residual = 0.0;       // c Pmat^{-1} e_{d-1} against 1/T'(lambda_i)
  double dfeq_residual = 0.0;       // ([J, DF] - F) e_m, m >= 1
  bool degenerate = false;          // d = 1: nothing to check
};

DIdentityReport verify_D_identity(const FlowOperators& ops);

struct RClosedFormReport {
  double max_residual = 0.0;   // R against r_ij = 1/(T'_i (lambda_j - lambda_i)), r_ii = T''/(2T'^2)
  double column_sum = 0.0;     // max_j |sum_i R_ij|
  double lar_residual = 0.0;   // off-diagonal of [Lambda, R] against -1/T'(lambda_i)
  double lar_diagonal = 0.0;   // diagonal of [Lambda, R]
  double scale = 0.0;          // max |R_ij|
};

RClosedFormReport verify_R_closed_form(const FlowOperators& ops);

/// Closed-form R entries.
Eigen::MatrixXd R_closed_form(const FlowOperators& ops);

/// || (J(x+h) - J(x-h)) / 2h - F(J(x)) - [G(x), J(x)] ||.
double flow_residual(const ExpandingPolynomial& p, int n, double t, double x, double h,
                     Precision precision = Precision::Extended);

struct CommutatorRow {
  double t = 0.0;
  int n = 0;
  double x = 0.0;
  double norm_GJ = 0.0;
  double norm_Jdot = 0.0;    // central difference
  double norm_F = 0.0;
  double norm_G = 0.0;
  double h0_diag = 0.0;      // max |diag of H in the eigenbasis|, zero at t = 1
  double h2_exact = 0.0;     // [G,J]_{m-1,m} - b_m (H_mm - H_{m-1,m-1}) + F_{m-1,m}
  double h3_exact = 0.0;     // [G,J]_mm - 2 b_{m+1} H_{m+1,m} + 2 b_m H_{m,m-1} + 2 F_mm
  double h2_small = 0.0;     // same without the F terms
  double h3_small = 0.0;
  double small_budget = 0.0; // 10 ||F||
  double symmetry_defect = 0.0;  // ||[G,J] - [G,J]^T||
};

std::vector<CommutatorRow> commutator_uniformity_scan(const ExpandingPolynomial& p,
                                                      const std::vector<double>& t_grid,
                                                      const std::vector<int>& n_range,
                                                      const std::vector<double>& x_grid,
                                                      Precision precision = Precision::Double,
                                                      double h = 1e-4);

}  // namespace ncpfr
