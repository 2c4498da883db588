#include "ncpfr/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ncpfr/flow.hpp"
#include "ncpfr/measures.hpp"
#include "ncpfr/parallel.hpp"

namespace ncpfr {

namespace {

constexpr double kSpectrumSlack = 1e-9;
constexpr double kDegeneratePair = 1e-12;

std::size_t checked_degree_power(const ExpandingPolynomial& p, int n, std::size_t m,
                                 std::size_t cap) {
  std::size_t d = 1;
  for (int k = 0; k < n; ++k) {
    d *= static_cast<std::size_t>(p.degree());
    if (d * m > cap) throw CapacityError("renormalized size exceeds the node cap");
  }
  return d;
}

std::size_t degree_power(const ExpandingPolynomial& p, int n) {
  std::size_t d = 1;
  for (int k = 0; k < n; ++k) d *= static_cast<std::size_t>(p.degree());
  return d;
}

Eigen::MatrixXcd resolvent_dense(const JacobiMatrix& J, std::complex<double> z) {
  Eigen::MatrixXcd M = -J.dense().cast<std::complex<double>>();
  M.diagonal().array() += z;
  return M.partialPivLu().inverse();
}

}  // namespace

RenormResult renorm_map(const ExpandingPolynomial& p, int n, const JacobiMatrix& Jt,
                        Precision precision, const std::vector<std::complex<double>>& z,
                        std::size_t cap) {
  if (n < 1) throw DomainError("renorm_map needs n >= 1");
  if (Jt.size() == 0) throw DomainError("renorm_map needs a non-empty matrix");
  const std::size_t d = checked_degree_power(p, n, Jt.size(), cap);
  const WeightedDiscreteMeasure sigma = spectral_measure(Jt);

  RenormResult out;
  std::vector<Real> nodes;
  std::vector<Real> logw;
  nodes.reserve(d * sigma.size());
  logw.reserve(d * sigma.size());
  const Real log_d = std::log(static_cast<Real>(d));
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    Real mu = sigma.nodes[j];
    const double escape = static_cast<double>(std::fabs(mu)) - 1.0;
    out.spectrum_escape = std::max(out.spectrum_escape, escape);
    if (escape > kSpectrumSlack) throw DomainError("spectrum of the input escapes [-1, 1]");
    mu = std::clamp(mu, Real(-1), Real(1));
    const BackwardOrbit orbit = backward_orbit(p, n, mu, cap);
    for (std::size_t k = 0; k < orbit.size(); ++k) {
      nodes.push_back(orbit.nodes[k]);
      logw.push_back(sigma.log_weights[j] - log_d);
    }
  }
  out.spectrum_escape = std::max(0.0, out.spectrum_escape);
  const auto pulled = WeightedDiscreteMeasure::from_log_weights(std::move(nodes), std::move(logw));
  if (pulled.merged_collisions) throw NumericalError("pulled-back atoms collided");
  out.J_out = jacobi_from_measure(pulled, {precision, ReductionMethod::Givens});
  out.z = z;
  for (const auto& zk : z) out.re_residuals.push_back(re_residual(p, n, Jt, out.J_out, zk));
  return out;
}

double re_residual(const ExpandingPolynomial& p, int n, const JacobiMatrix& Jt,
                   const JacobiMatrix& J_out, std::complex<double> z) {
  const auto [Tz, dTz] = iterate_with_derivative(p, n, z);
  const double d = static_cast<double>(J_out.size()) / static_cast<double>(Jt.size());
  const std::complex<double> lhs = resolvent_00(J_out, z);
  const std::complex<double> rhs = dTz / d * resolvent_00(Jt, Tz);
  return std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
}

double decimated_resolvent_residual(const ExpandingPolynomial& p, int n, const JacobiMatrix& Jt,
                                    const JacobiMatrix& J_out, std::complex<double> z) {
  const auto [Tz, dTz] = iterate_with_derivative(p, n, z);
  const std::size_t m = Jt.size();
  const std::size_t d = J_out.size() / m;
  const Eigen::MatrixXcd R = resolvent_dense(J_out, z);
  const Eigen::MatrixXcd Rt = resolvent_dense(Jt, Tz) * (dTz / static_cast<double>(d));
  const double scale = std::max(Rt.cwiseAbs().maxCoeff(), 1e-300);
  double worst = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      const auto ik = static_cast<Eigen::Index>(d * k);
      const auto il = static_cast<Eigen::Index>(d * l);
      const auto jk = static_cast<Eigen::Index>(k);
      const auto jl = static_cast<Eigen::Index>(l);
      worst = std::max(worst, std::abs(R(ik, il) - Rt(jk, jl)) / scale);
    }
  return worst;
}

double coefficient_norm(const JacobiMatrix& J1, const JacobiMatrix& J2, std::size_t window) {
  window = std::min({window, J1.size(), J2.size()});
  double da = 0.0, db = 0.0;
  for (std::size_t k = 0; k < window; ++k) da = std::max(da, std::fabs(J1.a[k] - J2.a[k]));
  for (std::size_t k = 0; k + 1 < window; ++k) db = std::max(db, std::fabs(J1.b[k] - J2.b[k]));
  return da + 2.0 * db;
}

JacobiMatrix random_jacobi(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> node(-1.0, 1.0);
  std::uniform_real_distribution<double> mass(0.1, 1.0);
  std::vector<Real> x(m), w(m);
  for (std::size_t k = 0; k < m; ++k) {
    x[k] = node(rng);
    w[k] = mass(rng);
  }
  auto mu = WeightedDiscreteMeasure::from_weights(std::move(x), std::move(w));
  if (mu.size() != m) throw NumericalError("random nodes collided");
  return jacobi_from_measure(mu);
}

ContractionEstimate contraction_estimate(const ExpandingPolynomial& p, int n, std::size_t m,
                                         std::size_t pairs, std::uint64_t seed,
                                         Precision precision) {
  if (m < 1 || pairs < 1) throw DomainError("contraction_estimate needs m >= 1 and pairs >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<JacobiMatrix, JacobiMatrix>> inputs;
  ContractionEstimate est;
  while (inputs.size() < pairs) {
    JacobiMatrix A = random_jacobi(m, rng);
    JacobiMatrix B = random_jacobi(m, rng);
    if (coefficient_norm(A, B, m) < kDegeneratePair) {
      ++est.resampled;
      continue;
    }
    inputs.emplace_back(std::move(A), std::move(B));
  }
  std::vector<JacobiMatrix> out1(pairs), out2(pairs);
  parallel_for(pairs, [&](std::size_t i) {
    out1[i] = renorm_map(p, n, inputs[i].first, precision, {}).J_out;
    out2[i] = renorm_map(p, n, inputs[i].second, precision, {}).J_out;
  });
  const std::size_t d = out1[0].size() / m;
  est.window = out1[0].size() - d;
  for (std::size_t i = 0; i < pairs; ++i) {
    const double in = coefficient_norm(inputs[i].first, inputs[i].second, m);
    const double outn = coefficient_norm(out1[i], out2[i], est.window);
    est.input_norms.push_back(in);
    est.output_norms.push_back(outn);
    est.ratios.push_back(outn / in);
    est.c_hat = std::max(est.c_hat, outn / in);
  }
  return est;
}

LimitPeriodicResult iterate_fixed_point(const ExpandingPolynomial& p, int n, const JacobiMatrix& Jt0,
                                        int steps, int max_l, Precision precision) {
  if (steps < 1 || max_l < 1) throw DomainError("iterate_fixed_point needs steps, max_l >= 1");
  LimitPeriodicResult res;
  res.J = Jt0;
  for (int s = 0; s < steps; ++s) res.J = renorm_map(p, n, res.J, precision, {}).J_out;
  const std::size_t d = degree_power(p, n);
  const std::size_t size = res.J.size();
  const std::size_t trailing = d * static_cast<std::size_t>(steps);
  std::size_t period = 1;
  double prev = -1.0;
  for (int l = 1; l <= max_l; ++l) {
    period *= d;
    if (period + trailing >= size) break;
    const std::size_t W = size - trailing - period;
    double da = 0.0, db = 0.0;
    for (std::size_t k = 0; k < W; ++k) da = std::max(da, std::fabs(res.J.a[k + period] - res.J.a[k]));
    for (std::size_t k = 0; k + 1 < W; ++k)
      db = std::max(db, std::fabs(res.J.b[k + period] - res.J.b[k]));
    res.periods.push_back(period);
    res.defect_a.push_back(da);
    res.defect_b.push_back(db);
    const double cur = std::max(da, db);
    if (prev >= 0.0) res.defect_ratio.push_back(prev > 0.0 ? cur / prev : 0.0);
    prev = cur;
    if (l == 1) res.window = W;
  }
  return res;
}

double start_independence(const JacobiMatrix& A, const JacobiMatrix& B, std::size_t window) {
  window = std::min({window, A.size(), B.size()});
  double worst = 0.0;
  for (std::size_t k = 0; k < window; ++k) worst = std::max(worst, std::fabs(A.a[k] - B.a[k]));
  for (std::size_t k = 0; k + 1 < window; ++k) worst = std::max(worst, std::fabs(A.b[k] - B.b[k]));
  return worst;
}

ScalarContraction scalar_contraction_experiment(const ExpandingPolynomial& p, double t,
                                                const std::vector<int>& levels,
                                                const std::vector<std::pair<double, double>>& pairs,
                                                Precision precision, std::size_t cap) {
  if (levels.empty() || pairs.empty()) throw DomainError("scalar contraction needs levels and pairs");
  ScalarContraction sc;
  sc.t = t;
  sc.levels = levels;
  std::vector<double> xs;
  for (const auto& [x1, x2] : pairs) {
    xs.push_back(x1);
    xs.push_back(x2);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::map<double, std::size_t> index;
  for (std::size_t i = 0; i < xs.size(); ++i) index[xs[i]] = i;

  for (int n : levels) {
    const std::size_t d = degree_power(p, n);
    const Precision prec = auto_precision(d, t, n, precision);
    std::vector<JacobiMatrix> J(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { J[i] = jacobi_of_point(p, n, t, xs[i], prec, cap); });
    double L = 0.0;
    for (const auto& [x1, x2] : pairs) {
      if (x1 == x2) continue;
      L = std::max(L, jacobi_difference_norm(J[index[x1]], J[index[x2]]) / std::fabs(x1 - x2));
    }
    sc.L.push_back(L);
  }
  std::vector<double> nx, ly;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(sc.L[i] > 0.0)) continue;
    nx.push_back(levels[i]);
    ly.push_back(std::log(sc.L[i]));
  }
  if (nx.size() >= 2) {
    const LinearFit fit = least_squares(nx, ly);
    sc.c_hat = std::exp(fit.slope);
    sc.r2 = fit.r2;
  }
  sc.lipschitz_bound = 1.5 * std::max(sc.L[0], sc.L.size() > 1 ? sc.L[1] : sc.L[0]);
  sc.lipschitz_uniform = std::all_of(sc.L.begin(), sc.L.end(),
                                     [&](double v) { return v <= sc.lipschitz_bound; });
  return sc;
}

}  // namespace ncpfr
