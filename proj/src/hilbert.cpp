#include "ncpfr/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "ncpfr/jacobi.hpp"
#include "ncpfr/measures.hpp"
#include "ncpfr/parallel.hpp"

namespace ncpfr {

HtMatrix build_Ht(const BackwardOrbit& orbit, double t, KernelSign sign) {
  const auto d = static_cast<Eigen::Index>(orbit.size());
  for (std::size_t k = 1; k < orbit.size(); ++k)
    if (!(orbit.nodes[k] - orbit.nodes[k - 1] >= 1e-13))
      throw NumericalError("preimage nodes closer than 1e-13");
  HtMatrix H;
  H.t = t;
  H.M.resize(d, d);
  H.B = Eigen::MatrixXd::Zero(d, d);
  std::vector<double> A(static_cast<std::size_t>(d)), Bw(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    A[i] = static_cast<double>(std::exp(-(1 - static_cast<Real>(t) / 2) * orbit.log_abs_Tprime[i]));
    Bw[i] = static_cast<double>(std::exp(-(static_cast<Real>(t) / 2) * orbit.log_abs_Tprime[i]));
  }
  const double s = sign == KernelSign::Stated ? 1.0 : -1.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto si = static_cast<std::size_t>(i);
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      if (i == j) {
        const double dg = 0.5 * (1.0 - t) * static_cast<double>(orbit.Tsecond_over_Tprime[si]) *
                          static_cast<double>(std::exp(-orbit.log_abs_Tprime[si]));
        H.M(i, i) = dg;
        H.diag.push_back(dg);
      } else {
        const double k = s / static_cast<double>(orbit.nodes[si] - orbit.nodes[sj]);
        H.B(i, j) = A[si] * k * Bw[sj];
        H.M(i, j) = H.B(i, j);
      }
    }
  }
  return H;
}

double discrete_two_weight_norm(const BackwardOrbit& orbit, double t) {
  return opnorm(build_Ht(orbit, t).B);
}

std::vector<HtNormRow> ht_norm_scan(const ExpandingPolynomial& p, const std::vector<double>& t_grid,
                                    const std::vector<int>& n_range, const std::vector<double>& x_grid,
                                    KernelSign sign, std::size_t cap) {
  struct Job {
    int n;
    double x;
  };
  std::vector<Job> jobs;
  for (int n : n_range)
    for (double x : x_grid) jobs.push_back({n, x});
  std::vector<std::vector<HtNormRow>> per_job(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t k) {
    const BackwardOrbit orbit = backward_orbit(p, jobs[k].n, jobs[k].x, cap);
    double koebe = 0;
    for (std::size_t i = 0; i < orbit.size(); ++i)
      koebe = std::max(koebe, static_cast<double>(std::fabs(orbit.Tsecond_over_Tprime[i]) *
                                                  std::exp(-orbit.log_abs_Tprime[i])));
    for (double t : t_grid) {
      const HtMatrix H = build_Ht(orbit, t, sign);
      HtNormRow row;
      row.t = t;
      row.n = jobs[k].n;
      row.x = jobs[k].x;
      row.ht_norm = opnorm(H.M);
      row.b_norm = opnorm(H.B);
      for (double v : H.diag) row.diag_max = std::max(row.diag_max, std::fabs(v));
      row.koebe = koebe;
      per_job[k].push_back(row);
    }
  });
  // Ordered t-major for reporting.
  std::vector<HtNormRow> rows;
  for (std::size_t ti = 0; ti < t_grid.size(); ++ti)
    for (const auto& job_rows : per_job) rows.push_back(job_rows[ti]);
  return rows;
}

TwoWeightSystem step_weights(const ExpandingPolynomial& p, int n, double t, double eps_hat, double x,
                             std::size_t cap) {
  TwoWeightSystem sys;
  sys.level = n;
  sys.t = t;
  sys.eps_hat = eps_hat;
  sys.intervals = dyadic_intervals(p, n, cap).dyadic;
  const BackwardOrbit orbit = backward_orbit(p, n, x, cap);
  if (orbit.size() != sys.intervals.size()) throw NumericalError("one node per component expected");
  for (std::size_t i = 0; i < orbit.size(); ++i) {
    const double lam = static_cast<double>(orbit.nodes[i]);
    if (!sys.intervals[i].contains(lam)) throw NumericalError("node outside its component");
    const double L = static_cast<double>(orbit.log_abs_Tprime[i]);
    sys.node.push_back(lam);
    sys.log_abs_Tprime.push_back(L);
    sys.u_levels.push_back(std::exp((t - 1.0) * L));
    sys.v_levels.push_back(std::exp((1.0 - t) * L));
    sys.u_gauge.push_back(std::exp((1.0 + eps_hat) * (t - 1.0) * L));
    sys.v_gauge.push_back(std::exp((1.0 + eps_hat) * (1.0 - t) * L));
  }
  return sys;
}

double step_integral(const std::vector<Interval>& pieces, const std::vector<double>& values,
                     const Interval& I) {
  auto it = std::lower_bound(pieces.begin(), pieces.end(), I.lo,
                             [](const Interval& P, double x) { return P.hi < x; });
  double s = 0;
  for (; it != pieces.end() && it->lo <= I.hi; ++it) {
    const double overlap = std::min(it->hi, I.hi) - std::max(it->lo, I.lo);
    if (overlap > 0) s += values[static_cast<std::size_t>(it - pieces.begin())] * overlap;
  }
  return s;
}

double box_test(const TwoWeightSystem& sys, const Interval& I) {
  const double len = I.length();
  if (!(len > 0)) throw DomainError("box test needs an interval of positive length");
  return step_integral(sys.intervals, sys.u_gauge, I) / len *
         (step_integral(sys.intervals, sys.v_gauge, I) / len);
}

double poisson_average(const std::vector<Interval>& pieces, const std::vector<double>& values,
                       const Interval& I) {
  const double h = I.length();
  if (!(h > 0)) throw DomainError("Poisson average needs an interval of positive length");
  const double c = I.center();
  double s = 0;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const double alpha = (pieces[i].lo - c) / h;
    const double beta = (pieces[i].hi - c) / h;
    // atan(beta) - atan(alpha) without cancellation for distant pieces.
    const double angle = alpha * beta > -1.0 ? std::atan((beta - alpha) / (1.0 + alpha * beta))
                                             : std::atan(beta) - std::atan(alpha);
    s += values[i] * angle;
  }
  return s / std::numbers::pi;
}

double poisson_product(const TwoWeightSystem& sys, const Interval& I) {
  return poisson_average(sys.intervals, sys.u_gauge, I) * poisson_average(sys.intervals, sys.v_gauge, I);
}

PoissonTestReport poisson_test_scan(const TwoWeightSystem& sys,
                                    const std::vector<IntervalSystem>& hierarchy, double tau0,
                                    int degree, std::size_t random_count, std::uint64_t seed) {
  if (hierarchy.empty() || hierarchy.back().level != sys.level)
    throw DomainError("interval hierarchy must end at the system level");
  PoissonTestReport rep;
  rep.tau0 = tau0;
  rep.seed = seed;
  rep.random_count = random_count;
  rep.min_poisson_over_box = std::numeric_limits<double>::infinity();
  rep.min_poisson_minus_lower = std::numeric_limits<double>::infinity();
  const int n = sys.level;

  // Level profile, k = n down to 0 so that depth n - k increases.
  for (int k = n; k >= 0; --k) {
    const auto& comps = hierarchy[static_cast<std::size_t>(k)].dyadic;
    std::vector<double> pp(comps.size()), bb(comps.size());
    parallel_for(comps.size(), [&](std::size_t i) {
      pp[i] = poisson_product(sys, comps[i]);
      bb[i] = box_test(sys, comps[i]);
    });
    double sp = 0, sb = 0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      sp = std::max(sp, pp[i]);
      sb = std::max(sb, bb[i]);
      if (bb[i] > 0) {
        rep.min_poisson_over_box = std::min(rep.min_poisson_over_box, pp[i] / bb[i]);
        rep.max_poisson_over_box = std::max(rep.max_poisson_over_box, pp[i] / bb[i]);
      }
      const double len = comps[i].length();
      const double pu = poisson_average(sys.intervals, sys.u_gauge, comps[i]);
      const double pv = poisson_average(sys.intervals, sys.v_gauge, comps[i]);
      const double lu = step_integral(sys.intervals, sys.u_gauge, comps[i]) / len / (2 * std::numbers::pi);
      const double lv = step_integral(sys.intervals, sys.v_gauge, comps[i]) / len / (2 * std::numbers::pi);
      rep.min_poisson_minus_lower = std::min({rep.min_poisson_minus_lower, pu - lu, pv - lv});
    }
    rep.depth.push_back(n - k);
    rep.sup_poisson.push_back(sp);
    rep.sup_box.push_back(sb);
    rep.sup_dyadic = std::max(rep.sup_dyadic, sp);
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.sup_poisson.size(); ++i)
    rep.monotone = rep.monotone && rep.sup_poisson[i] < rep.sup_poisson[i - 1];
  const double logN = std::log(static_cast<double>(degree));
  std::vector<double> xs, yp, yb;
  for (std::size_t i = 0; i < rep.depth.size(); ++i) {
    xs.push_back(rep.depth[i]);
    yp.push_back(std::log(rep.sup_poisson[i]) / logN);
    yb.push_back(std::log(rep.sup_box[i]) / logN);
  }
  rep.fitted_exponent = -least_squares(xs, yp).slope;
  rep.fitted_exponent_box = -least_squares(xs, yb).slope;

  // Doubling: parent mass against each child mass, for both gauged weights.
  rep.delta_hat = std::numeric_limits<double>::infinity();
  for (int m = 0; m < n; ++m) {
    const auto& parents = hierarchy[static_cast<std::size_t>(m)].dyadic;
    const auto& children = hierarchy[static_cast<std::size_t>(m + 1)].dyadic;
    double factor = std::numeric_limits<double>::infinity();
    std::size_t c = 0;
    for (const Interval& P : parents) {
      const double pu = step_integral(sys.intervals, sys.u_gauge, P);
      const double pv = step_integral(sys.intervals, sys.v_gauge, P);
      for (; c < children.size() && children[c].hi <= P.hi; ++c) {
        if (!P.contains(children[c])) throw NumericalError("dyadic hierarchy is not nested");
        factor = std::min({factor, pu / step_integral(sys.intervals, sys.u_gauge, children[c]),
                           pv / step_integral(sys.intervals, sys.v_gauge, children[c])});
      }
    }
    rep.doubling_factor.push_back(factor);
    rep.delta_hat = std::min(rep.delta_hat, factor - 1.0);
  }

  // Seeded random intervals inside [-1, 1].
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Interval> random;
  while (random.size() < random_count) {
    double a = U(rng), b = U(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    random.push_back({a, b});
  }
  std::vector<double> rv(random.size());
  parallel_for(random.size(), [&](std::size_t i) { rv[i] = poisson_product(sys, random[i]); });
  for (double v : rv) rep.sup_random = std::max(rep.sup_random, v);

  // Intervals straddling gaps, widened by fixed fractions of the gap.
  std::vector<Interval> adversarial;
  for (const auto& level : hierarchy)
    for (const Interval& g : level.gaps)
      for (double s : {0.1, 0.5, 1.0, 2.0}) {
        const double w = 0.5 * g.length() * (1.0 + s);
        adversarial.push_back({std::max(-1.0, g.center() - w), std::min(1.0, g.center() + w)});
      }
  std::vector<double> av(adversarial.size());
  parallel_for(adversarial.size(), [&](std::size_t i) { av[i] = poisson_product(sys, adversarial[i]); });
  for (double v : av) rep.sup_adversarial = std::max(rep.sup_adversarial, v);
  return rep;
}

double gauge_exponent(const OrbitLadder& ladder, double t, double eps_hat) {
  const double tp = t * (1.0 + eps_hat) - eps_hat;
  return -(pressure_estimate(ladder, tp).P + pressure_estimate(ladder, 2.0 - tp).P);
}

}  // namespace ncpfr
