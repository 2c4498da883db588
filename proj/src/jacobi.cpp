#include "ncpfr/jacobi.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace ncpfr {

namespace {

template <class S>
JacobiMatrix givens_reduction(const std::vector<Real>& nodes, const std::vector<Real>& sqrt_w) {
  const std::size_t d = nodes.size();
  // Row/column 0 of the working matrix is the border; D[1..m], E[0..m-1] hold
  // the tridiagonal part after m insertions.
  std::vector<S> D{S(0)}, E;
  D.reserve(d + 1);
  E.reserve(d + 1);
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t m = D.size() - 1;
    S g = m >= 1 ? E[0] : S(0);
    D.insert(D.begin() + 1, static_cast<S>(nodes[k]));
    if (m >= 1) {
      E[0] = S(0);
      E.insert(E.begin(), static_cast<S>(sqrt_w[k]));
    } else {
      E.push_back(static_cast<S>(sqrt_w[k]));
    }
    // Chase the bulge g at (0, 2) down the diagonal.
    for (std::size_t j = 1; j <= m; ++j) {
      const S p = E[j - 1];
      // Entries are bounded by 1; hypot only when the squares could underflow.
      const S r2 = p * p + g * g;
      const S r = r2 > std::numeric_limits<S>::min() * 1e4 ? std::sqrt(r2) : std::hypot(p, g);
      S c = 1, s = 0;
      if (r != 0) {
        const S inv = S(1) / r;
        c = p * inv;
        s = g * inv;
      }
      E[j - 1] = r;
      const S a = D[j], b = D[j + 1], e = E[j];
      const S cc = c * c, ss = s * s, cs = c * s;
      D[j] = cc * a + 2 * cs * e + ss * b;
      D[j + 1] = ss * a - 2 * cs * e + cc * b;
      E[j] = cs * (b - a) + (cc - ss) * e;
      if (j + 1 < E.size()) {
        const S f = E[j + 1];
        g = s * f;
        E[j + 1] = c * f;
      }
    }
  }
  JacobiMatrix J;
  J.a.resize(d);
  J.b.resize(d - 1);
  for (std::size_t i = 0; i < d; ++i) J.a[i] = static_cast<double>(D[i + 1]);
  for (std::size_t i = 0; i + 1 < d; ++i) J.b[i] = static_cast<double>(std::fabs(E[i + 1]));
  return J;
}

template <class S>
JacobiMatrix lanczos_reduction(const std::vector<Real>& nodes, const std::vector<Real>& sqrt_w) {
  const std::size_t d = nodes.size();
  std::vector<std::vector<S>> Q;
  std::vector<S> q(d);
  for (std::size_t i = 0; i < d; ++i) q[i] = static_cast<S>(sqrt_w[i]);
  JacobiMatrix J;
  S beta_prev = 0;
  for (std::size_t k = 0; k < d; ++k) {
    Q.push_back(q);
    std::vector<S> r(d);
    S alpha = 0;
    for (std::size_t i = 0; i < d; ++i) {
      r[i] = static_cast<S>(nodes[i]) * q[i];
      alpha += q[i] * r[i];
    }
    for (std::size_t i = 0; i < d; ++i) {
      r[i] -= alpha * q[i];
      if (k > 0) r[i] -= beta_prev * Q[k - 1][i];
    }
    // Full reorthogonalization, applied twice.
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : Q) {
        S dot = 0;
        for (std::size_t i = 0; i < d; ++i) dot += v[i] * r[i];
        for (std::size_t i = 0; i < d; ++i) r[i] -= dot * v[i];
      }
    J.a.push_back(static_cast<double>(alpha));
    if (k + 1 == d) break;
    S beta = 0;
    for (S v : r) beta += v * v;
    beta = std::sqrt(beta);
    if (!(beta > 0)) throw NumericalError("Lanczos breakdown: measure has fewer support points than d");
    J.b.push_back(static_cast<double>(beta));
    for (std::size_t i = 0; i < d; ++i) q[i] = r[i] / beta;
    beta_prev = beta;
  }
  return J;
}

}  // namespace

Eigen::MatrixXd JacobiMatrix::dense() const {
  const auto d = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) M(i, i) = a[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < d; ++i) {
    M(i + 1, i) = b[static_cast<std::size_t>(i)];
    M(i, i + 1) = b[static_cast<std::size_t>(i)];
  }
  return M;
}

JacobiMatrix jacobi_from_measure(const WeightedDiscreteMeasure& mu, ReductionOptions opts) {
  if (mu.size() == 0) throw DomainError("cannot build a Jacobi matrix of an empty measure");
  for (std::size_t k = 1; k < mu.size(); ++k)
    if (!(mu.nodes[k - 1] < mu.nodes[k])) throw DomainError("duplicate or unsorted measure nodes");
  const Real log_min = std::log(std::numeric_limits<double>::min());
  std::vector<Real> sqrt_w(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    if (mu.log_weights[k] / 2 < log_min)
      throw NumericalError("weight underflow in Jacobi reduction");
    sqrt_w[k] = std::exp(mu.log_weights[k] / 2);
  }
  JacobiMatrix J;
  const bool ext = opts.precision == Precision::Extended;
  if (opts.method == ReductionMethod::Givens)
    J = ext ? givens_reduction<long double>(mu.nodes, sqrt_w) : givens_reduction<double>(mu.nodes, sqrt_w);
  else
    J = ext ? lanczos_reduction<long double>(mu.nodes, sqrt_w) : lanczos_reduction<double>(mu.nodes, sqrt_w);
  for (double v : J.b)
    if (!(v > 0) || !std::isfinite(v)) throw NumericalError("Jacobi reduction produced a non-positive off-diagonal");
  return J;
}

SpectralData spectral_decomposition(const JacobiMatrix& J) {
  SpectralData sd;
  const auto d = static_cast<Eigen::Index>(J.size());
  if (d == 1) {
    sd.eigenvalues = {J.a[0]};
    sd.eigvecs = Eigen::MatrixXd::Ones(1, 1);
    sd.first_components = {1.0};
    return sd;
  }
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(J.a.data(), d);
  Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(J.b.data(), d - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");
  sd.eigvecs = es.eigenvectors();
  for (Eigen::Index i = 0; i < d; ++i) {
    if (sd.eigvecs(0, i) < 0) sd.eigvecs.col(i) *= -1.0;
    sd.eigenvalues.push_back(es.eigenvalues()(i));
    sd.first_components.push_back(sd.eigvecs(0, i));
  }
  return sd;
}

WeightedDiscreteMeasure spectral_measure(const JacobiMatrix& J) {
  const SpectralData sd = spectral_decomposition(J);
  std::vector<Real> nodes(sd.eigenvalues.begin(), sd.eigenvalues.end());
  std::vector<Real> w;
  for (double c : sd.first_components) {
    if (!(c * c > 0)) throw NumericalError("spectral weight underflow");
    w.push_back(static_cast<Real>(c) * c);
  }
  return WeightedDiscreteMeasure::from_weights(std::move(nodes), std::move(w));
}

std::complex<double> resolvent_00(const JacobiMatrix& J, std::complex<double> z) {
  std::complex<double> r = 0.0;
  for (std::size_t m = J.size(); m-- > 0;) {
    std::complex<double> denom = z - J.a[m];
    if (m + 1 < J.size()) denom -= J.b[m] * J.b[m] * r;
    if (std::abs(denom) <= 1e-13) throw DomainError("resolvent evaluated at a pole");
    r = 1.0 / denom;
  }
  return r;
}

std::complex<double> resolvent_00_dense(const JacobiMatrix& J, std::complex<double> z) {
  const auto d = static_cast<Eigen::Index>(J.size());
  Eigen::MatrixXcd M = -J.dense().cast<std::complex<double>>();
  M.diagonal().array() += z;
  Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(d);
  e0(0) = 1.0;
  return M.partialPivLu().solve(e0)(0);
}

std::complex<double> stieltjes_transform(const WeightedDiscreteMeasure& mu, std::complex<double> z) {
  std::complex<double> s = 0.0;
  for (std::size_t k = 0; k < mu.size(); ++k)
    s += static_cast<double>(mu.weight(k)) / (z - static_cast<double>(mu.nodes[k]));
  return s;
}

OrthoPolyValues ortho_polys_at(const JacobiMatrix& J, double lambda) {
  const std::size_t d = J.size();
  OrthoPolyValues out;
  out.values.assign(d, 0.0);
  out.derivatives.assign(d, 0.0);
  out.values[0] = 1.0;
  for (std::size_t m = 0; m + 1 < d; ++m) {
    const double prev = m > 0 ? out.values[m - 1] : 0.0;
    const double dprev = m > 0 ? out.derivatives[m - 1] : 0.0;
    const double bm = m > 0 ? J.b[m - 1] : 0.0;
    out.values[m + 1] = ((lambda - J.a[m]) * out.values[m] - bm * prev) / J.b[m];
    out.derivatives[m + 1] =
        (out.values[m] + (lambda - J.a[m]) * out.derivatives[m] - bm * dprev) / J.b[m];
    if (!(std::fabs(out.values[m + 1]) < 1e300) || !(std::fabs(out.derivatives[m + 1]) < 1e300))
      throw NumericalError("orthonormal polynomial overflow");
  }
  return out;
}

double opnorm(const Eigen::MatrixXd& M, bool symmetric) {
  if (M.size() == 0) return 0.0;
  if (M.rows() > 512 || M.cols() > 512) {
    Eigen::VectorXd v(M.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
    v.normalize();
    double sigma2 = 0.0;
    for (int it = 0; it < 20000; ++it) {
      Eigen::VectorXd w = M.transpose() * (M * v);
      const double s = w.norm();
      if (s == 0) return 0.0;
      v = w / s;
      if (std::fabs(s - sigma2) <= 1e-13 * s) {
        sigma2 = s;
        break;
      }
      sigma2 = s;
    }
    return std::sqrt(sigma2);
  }
  if (symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M);
  return svd.singularValues()(0);
}

namespace {

// Number of eigenvalues strictly below x.
std::size_t sturm_count(const std::vector<double>& a, const std::vector<double>& b, double x) {
  std::size_t count = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double bb = i > 0 ? b[i - 1] * b[i - 1] : 0.0;
    q = a[i] - x - (i > 0 ? bb / q : 0.0);
    if (q == 0.0) q = -1e-300;
    if (q < 0) ++count;
  }
  return count;
}

}  // namespace

double tridiagonal_norm(const std::vector<double>& diag, const std::vector<double>& offdiag) {
  const std::size_t d = diag.size();
  if (d == 0) return 0.0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < d; ++i) {
    const double r = (i > 0 ? std::fabs(offdiag[i - 1]) : 0.0) + (i + 1 < d ? std::fabs(offdiag[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  auto extreme = [&](std::size_t target) {
    double l = lo, h = hi;
    for (int it = 0; it < 200 && h - l > 1e-15 * std::max({std::fabs(l), std::fabs(h), 1e-300}); ++it) {
      const double mid = 0.5 * (l + h);
      if (sturm_count(diag, offdiag, mid) >= target)
        h = mid;
      else
        l = mid;
    }
    return 0.5 * (l + h);
  };
  const double lmin = extreme(1);
  const double lmax = extreme(d);
  return std::max(std::fabs(lmin), std::fabs(lmax));
}

double jacobi_difference_norm(const JacobiMatrix& J1, const JacobiMatrix& J2) {
  if (J1.size() != J2.size()) throw DomainError("Jacobi matrices differ in size");
  std::vector<double> da(J1.size()), db(J1.b.size());
  for (std::size_t i = 0; i < da.size(); ++i) da[i] = J1.a[i] - J2.a[i];
  for (std::size_t i = 0; i < db.size(); ++i) db[i] = J1.b[i] - J2.b[i];
  return tridiagonal_norm(da, db);
}

}  // namespace ncpfr
