#include "ncpfr/flow.hpp"

#include <algorithm>
#include <cmath>

#include "ncpfr/parallel.hpp"

namespace ncpfr {

namespace {

double max_abs(const Eigen::MatrixXd& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

JacobiMatrix jacobi_of_point(const ExpandingPolynomial& p, int n, double t, double x,
                             Precision precision, std::size_t cap) {
  const BackwardOrbit orbit = backward_orbit(p, n, x, cap);
  return jacobi_from_measure(balanced_measure(orbit, t), {precision, ReductionMethod::Givens});
}

Eigen::MatrixXd commutator(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return A * B - B * A;
}

namespace {

// Spectral data, polynomial tables and D in scalar type S, rounded to double
// at the end. Long double keeps the derivative recurrence from swamping the
// O(h^2) flow residual at d = 64.
template <class S>
void fill_spectral_ops(FlowOperators& ops) {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  const auto d = static_cast<Eigen::Index>(ops.J.size());
  Mat V;
  if (d == 1) {
    V = Mat::Ones(1, 1);
  } else {
    Vec diag(d), sub(d - 1);
    for (Eigen::Index i = 0; i < d; ++i) diag(i) = static_cast<S>(ops.J.a[static_cast<std::size_t>(i)]);
    for (Eigen::Index i = 0; i + 1 < d; ++i) sub(i) = static_cast<S>(ops.J.b[static_cast<std::size_t>(i)]);
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");
    V = es.eigenvectors();
    for (Eigen::Index i = 0; i < d; ++i)
      if (V(0, i) < 0) V.col(i) *= S(-1);
  }
  Mat Pmat(d, d), Pinv(d, d), Pd = Mat::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const S v0 = V(0, i);
    if (!(v0 > 0)) throw NumericalError("eigenvector with vanishing first component");
    Pmat.col(i) = V.col(i) / v0;
    Pinv.row(i) = v0 * V.col(i).transpose();
    // Differentiated three-term recurrence at the node.
    const S lam = static_cast<S>(ops.orbit.nodes[static_cast<std::size_t>(i)]);
    S p_prev = 0, p_cur = 1, dp_prev = 0, dp_cur = 0;
    for (Eigen::Index m = 0; m + 1 < d; ++m) {
      const auto sm = static_cast<std::size_t>(m);
      const S am = static_cast<S>(ops.J.a[sm]);
      const S bm = m > 0 ? static_cast<S>(ops.J.b[sm - 1]) : S(0);
      const S bn = static_cast<S>(ops.J.b[sm]);
      const S p_next = ((lam - am) * p_cur - bm * p_prev) / bn;
      const S dp_next = (p_cur + (lam - am) * dp_cur - bm * dp_prev) / bn;
      p_prev = p_cur;
      p_cur = p_next;
      dp_prev = dp_cur;
      dp_cur = dp_next;
      Pd(m + 1, i) = dp_cur;
    }
  }
  // D*(m, k) = sum_i w_i P'_k(lambda_i) P_m(lambda_i), with w_i P_m(lambda_i) = V(m,i) V(0,i).
  Mat WV = V;
  for (Eigen::Index i = 0; i < d; ++i) WV.col(i) *= V(0, i);
  const Mat D = (WV * Pd.transpose()).transpose();

  Vec inv_Tp(d), phi(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto si = static_cast<std::size_t>(i);
    inv_Tp(i) = S(1) / static_cast<S>(ops.orbit.Tprime(si));
    phi(i) = -static_cast<S>(ops.t) * static_cast<S>(ops.orbit.Tsecond_over_Tprime[si]);
  }
  const Mat F = V * inv_Tp.asDiagonal() * V.transpose();
  const Mat DF = D * F;
  const Mat H = DF + S(0.5) * (V * phi.asDiagonal() * V.transpose()) * F;
  const Mat U = H.template triangularView<Eigen::StrictlyUpper>();

  ops.PPmat = V.template cast<double>();
  ops.Pmat = Pmat.template cast<double>();
  ops.Pinv = Pinv.template cast<double>();
  ops.Pderiv = Pd.template cast<double>();
  ops.D = D.template cast<double>();
  ops.F = F.template cast<double>();
  ops.H = H.template cast<double>();
  ops.G = (U - U.transpose()).template cast<double>();
  ops.R = (Pinv * DF * Pmat).template cast<double>();
  ops.K = (V.transpose() * DF * V).template cast<double>();
}

}  // namespace

FlowOperators build_flow_ops(const ExpandingPolynomial& p, int n, double t, double x,
                             Precision precision) {
  FlowOperators ops;
  ops.t = t;
  ops.orbit = backward_orbit(p, n, x, kFlowMaxDim);
  ops.measure = balanced_measure(ops.orbit, t);
  ops.J = jacobi_from_measure(ops.measure, {precision, ReductionMethod::Givens});
  for (std::size_t i = 0; i < ops.orbit.size(); ++i) {
    ops.lambda.push_back(static_cast<double>(ops.orbit.nodes[i]));
    ops.Tprime.push_back(static_cast<double>(ops.orbit.Tprime(i)));
    ops.phi_prime.push_back(-t * static_cast<double>(ops.orbit.Tsecond_over_Tprime[i]));
  }
  if (precision == Precision::Extended)
    fill_spectral_ops<long double>(ops);
  else
    fill_spectral_ops<double>(ops);
  return ops;
}

DIdentityReport verify_D_identity(const FlowOperators& ops) {
  DIdentityReport rep;
  const auto d = ops.D.rows();
  if (d == 1) {
    rep.degenerate = true;
    return rep;
  }
  const Eigen::MatrixXd J = ops.J.dense();
  const Eigen::MatrixXd C = commutator(J, ops.D);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  rep.rows_residual = max_abs(C.topRows(d - 1) - I.topRows(d - 1));

  const Eigen::VectorXd last = I.row(d - 1).transpose() - C.row(d - 1).transpose();
  Eigen::VectorXd Tp(d);
  for (Eigen::Index i = 0; i < d; ++i) Tp(i) = ops.Tprime[static_cast<std::size_t>(i)];
  const Eigen::VectorXd Finv_e0 = ops.PPmat * Tp.asDiagonal() * ops.PPmat.row(0).transpose();
  rep.c_fit = last.dot(Finv_e0) / Finv_e0.squaredNorm();
  rep.last_row_residual = (last - rep.c_fit * Finv_e0).cwiseAbs().maxCoeff();

  const Eigen::VectorXd col = rep.c_fit * ops.Pinv.col(d - 1);
  double lar2 = 0;
  for (Eigen::Index i = 0; i < d; ++i) lar2 = std::max(lar2, std::fabs(col(i) - 1.0 / Tp(i)));
  rep.lar2_residual = lar2;

  const Eigen::MatrixXd DF = ops.D * ops.F;
  const Eigen::MatrixXd E = commutator(J, DF) - ops.F;
  rep.dfeq_residual = max_abs(E.rightCols(d - 1));
  return rep;
}

Eigen::MatrixXd R_closed_form(const FlowOperators& ops) {
  const auto d = static_cast<Eigen::Index>(ops.lambda.size());
  Eigen::MatrixXd Rc(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto si = static_cast<std::size_t>(i);
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      Rc(i, j) = i == j ? 0.5 * static_cast<double>(ops.orbit.Tsecond_over_Tprime[si]) / ops.Tprime[si]
                        : 1.0 / (ops.Tprime[si] * (ops.lambda[sj] - ops.lambda[si]));
    }
  }
  return Rc;
}

RClosedFormReport verify_R_closed_form(const FlowOperators& ops) {
  RClosedFormReport rep;
  const auto d = ops.R.rows();
  rep.max_residual = max_abs(ops.R - R_closed_form(ops));
  rep.column_sum = ops.R.colwise().sum().cwiseAbs().maxCoeff();
  rep.scale = max_abs(ops.R);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto si = static_cast<std::size_t>(i);
    for (Eigen::Index j = 0; j < d; ++j) {
      const double lr = (ops.lambda[si] - ops.lambda[static_cast<std::size_t>(j)]) * ops.R(i, j);
      if (i == j)
        rep.lar_diagonal = std::max(rep.lar_diagonal, std::fabs(lr));
      else
        rep.lar_residual = std::max(rep.lar_residual, std::fabs(lr + 1.0 / ops.Tprime[si]));
    }
  }
  return rep;
}

double flow_residual(const ExpandingPolynomial& p, int n, double t, double x, double h,
                     Precision precision) {
  if (!(h > 0) || std::fabs(x) + h > 1) throw DomainError("x +- h must stay inside [-1,1]");
  const FlowOperators ops = build_flow_ops(p, n, t, x, precision);
  const JacobiMatrix Jp = jacobi_of_point(p, n, t, x + h, precision, kFlowMaxDim);
  const JacobiMatrix Jm = jacobi_of_point(p, n, t, x - h, precision, kFlowMaxDim);
  const Eigen::MatrixXd Jdot = (Jp.dense() - Jm.dense()) / (2.0 * h);
  const Eigen::MatrixXd J = ops.J.dense();
  const Eigen::MatrixXd res = Jdot - ops.F - commutator(ops.G, J);
  return opnorm(0.5 * (res + res.transpose()), true);
}

std::vector<CommutatorRow> commutator_uniformity_scan(const ExpandingPolynomial& p,
                                                      const std::vector<double>& t_grid,
                                                      const std::vector<int>& n_range,
                                                      const std::vector<double>& x_grid,
                                                      Precision precision, double h) {
  struct Job {
    double t;
    int n;
    double x;
  };
  std::vector<Job> jobs;
  for (double t : t_grid)
    for (int n : n_range)
      for (double x : x_grid) jobs.push_back({t, n, x});
  std::vector<CommutatorRow> rows(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) {
    const Job& jb = jobs[k];
    const FlowOperators ops = build_flow_ops(p, jb.n, jb.t, jb.x, precision);
    const Eigen::MatrixXd J = ops.J.dense();
    const Eigen::MatrixXd GJ = commutator(ops.G, J);
    CommutatorRow row;
    row.t = jb.t;
    row.n = jb.n;
    row.x = jb.x;
    row.norm_GJ = opnorm(0.5 * (GJ + GJ.transpose()), true);
    row.symmetry_defect = max_abs(GJ - GJ.transpose());
    row.norm_F = opnorm(ops.F, true);
    row.norm_G = opnorm(ops.G);
    row.small_budget = 10.0 * row.norm_F;
    const double hh = std::min(h, 1.0 - std::fabs(jb.x));
    if (hh > 0) {
      const JacobiMatrix Jp = jacobi_of_point(p, jb.n, jb.t, jb.x + hh, precision, kFlowMaxDim);
      const JacobiMatrix Jm = jacobi_of_point(p, jb.n, jb.t, jb.x - hh, precision, kFlowMaxDim);
      const Eigen::MatrixXd Jdot = (Jp.dense() - Jm.dense()) / (2.0 * hh);
      row.norm_Jdot = opnorm(0.5 * (Jdot + Jdot.transpose()), true);
    } else {
      // x = +-1: one-sided difference.
      const double s = jb.x > 0 ? -1.0 : 1.0;
      const JacobiMatrix J1 = jacobi_of_point(p, jb.n, jb.t, jb.x + s * h, precision, kFlowMaxDim);
      const Eigen::MatrixXd Jdot = s * (J1.dense() - J) / h;
      row.norm_Jdot = opnorm(0.5 * (Jdot + Jdot.transpose()), true);
    }
    const Eigen::MatrixXd Heig = ops.PPmat.transpose() * ops.H * ops.PPmat;
    row.h0_diag = Heig.diagonal().cwiseAbs().maxCoeff();
    const auto d = J.rows();
    const auto& b = ops.J.b;
    for (Eigen::Index m = 1; m < d; ++m) {
      const double bm = b[static_cast<std::size_t>(m - 1)];
      const double lead = bm * (ops.H(m, m) - ops.H(m - 1, m - 1));
      row.h2_small = std::max(row.h2_small, std::fabs(GJ(m - 1, m) - lead));
      row.h2_exact = std::max(row.h2_exact, std::fabs(GJ(m - 1, m) - lead + ops.F(m - 1, m)));
    }
    for (Eigen::Index m = 0; m < d; ++m) {
      double lead = 0;
      if (m + 1 < d) lead += 2.0 * b[static_cast<std::size_t>(m)] * ops.H(m + 1, m);
      if (m > 0) lead -= 2.0 * b[static_cast<std::size_t>(m - 1)] * ops.H(m, m - 1);
      row.h3_small = std::max(row.h3_small, std::fabs(GJ(m, m) - lead));
      row.h3_exact = std::max(row.h3_exact, std::fabs(GJ(m, m) - lead + 2.0 * ops.F(m, m)));
    }
    rows[k] = row;
  });
  return rows;
}

}  // namespace ncpfr
