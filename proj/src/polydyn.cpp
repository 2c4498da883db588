#include "ncpfr/polydyn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace ncpfr {

namespace {

std::vector<Real> derivative_coeffs(const std::vector<Real>& c) {
  std::vector<Real> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(static_cast<Real>(k) * c[k]);
  if (d.empty()) d.push_back(0);
  return d;
}

template <class T>
T horner(const std::vector<Real>& c, T z) {
  T acc = T(static_cast<double>(c.back()));
  for (std::size_t k = c.size() - 1; k-- > 0;) acc = acc * z + T(static_cast<double>(c[k]));
  return acc;
}

Real horner_real(const std::vector<Real>& c, Real z) {
  Real acc = c.back();
  for (std::size_t k = c.size() - 1; k-- > 0;) acc = acc * z + c[k];
  return acc;
}

int sign_of(Real v) { return v < 0 ? -1 : 1; }

// Safeguarded Newton on a bracket where f - y changes sign.
Real solve_branch(const ExpandingPolynomial& p, Real y, Real lo, Real hi, double tol,
                  std::size_t branch) {
  Real flo = p.value(lo) - y;
  Real fhi = p.value(hi) - y;
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo < 0) == (fhi < 0)) {
    std::ostringstream msg;
    msg << "preimage bracket failure on branch " << branch << " for y=" << static_cast<double>(y);
    throw NumericalError(msg.str());
  }
  // Orient so that g(lo) < 0 < g(hi).
  const bool increasing = flo < 0;
  auto g = [&](Real z) { return increasing ? p.value(z) - y : y - p.value(z); };
  auto dg = [&](Real z) { return increasing ? p.derivative(z) : -p.derivative(z); };

  // Runs to working precision: finite differences in x need nodes far more
  // accurate than `tol`, which is only the failure threshold.
  const Real floor_step = 4 * std::numeric_limits<Real>::epsilon();
  bool met_tol = false;
  Real x = (lo + hi) / 2;
  for (int iter = 0; iter < 400; ++iter) {
    const Real gx = g(x);
    if (gx == 0) return x;
    if (gx < 0)
      lo = x;
    else
      hi = x;
    const Real dgx = dg(x);
    Real next = (dgx != 0) ? x - gx / dgx : (lo + hi) / 2;
    if (!(next > lo && next < hi)) next = (lo + hi) / 2;
    const Real step = std::fabs(next - x);
    const Real scale = std::max<Real>(1, std::fabs(next));
    if (step <= floor_step * scale || !(lo < next && next < hi)) return x;
    x = next;
    met_tol = met_tol || step <= static_cast<Real>(tol) * scale;
  }
  if (met_tol) return x;
  std::ostringstream msg;
  msg << "root tolerance not met on branch " << branch;
  throw NumericalError(msg.str());
}

std::size_t checked_power(int base, int exponent, std::size_t cap) {
  std::size_t d = 1;
  for (int i = 0; i < exponent; ++i) {
    d *= static_cast<std::size_t>(base);
    if (d > cap) {
      std::ostringstream msg;
      msg << "node count " << base << "^" << exponent << " exceeds cap " << cap;
      throw CapacityError(msg.str());
    }
  }
  return d;
}

}  // namespace

const char* to_string(Family f) {
  switch (f) {
    case Family::quadratic_a:
      return "quadratic_a";
    case Family::scaled_cheb3:
      return "scaled_cheb3";
    case Family::custom:
      return "custom";
  }
  return "custom";
}

Family parse_family(const std::string& name) {
  if (name == "quadratic_a") return Family::quadratic_a;
  if (name == "scaled_cheb3") return Family::scaled_cheb3;
  if (name == "custom") return Family::custom;
  throw DomainError("unknown polynomial family '" + name + "'");
}

ExpandingPolynomial::ExpandingPolynomial(std::vector<Real> coeffs, Family family,
                                         double parameter)
    : coeffs_(std::move(coeffs)), family_(family), parameter_(parameter) {
  while (coeffs_.size() > 1 && coeffs_.back() == 0) coeffs_.pop_back();
  if (coeffs_.size() < 3) throw DomainError("polynomial degree must be at least 2");
  d1_ = derivative_coeffs(coeffs_);
  d2_ = derivative_coeffs(d1_);
  Real mx = 0;
  for (std::size_t k = 0; k + 1 < coeffs_.size(); ++k)
    mx = std::max(mx, std::fabs(coeffs_[k]) + (k == 0 ? 1 : 0));
  root_bound_ = (1 + mx / std::fabs(coeffs_.back())) * Real(1.01);
  compute_critical_data();
}

void ExpandingPolynomial::compute_critical_data() {
  const int m = static_cast<int>(d1_.size()) - 1;  // degree of f'
  crit_points_.clear();
  if (m == 1) {
    crit_points_.push_back(-d1_[0] / d1_[1]);
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
    for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < m; ++i)
      companion(i, m - 1) = -static_cast<double>(d1_[i] / d1_[m]);
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
    for (int i = 0; i < m; ++i) {
      const auto ev = es.eigenvalues()(i);
      if (std::abs(ev.imag()) > 1e-8 * (1.0 + std::abs(ev.real())))
        throw DomainError("polynomial has non-real critical points");
      Real z = ev.real();
      for (int k = 0; k < 8; ++k) {
        const Real dd = horner_real(d2_, z);
        if (dd == 0) break;
        z -= horner_real(d1_, z) / dd;
      }
      crit_points_.push_back(z);
    }
    std::sort(crit_points_.begin(), crit_points_.end());
  }
  crit_values_.clear();
  for (Real c : crit_points_) crit_values_.push_back(value(c));
}

void ExpandingPolynomial::check_invariants() const {
  for (std::size_t i = 0; i + 1 < crit_points_.size(); ++i)
    if (!(crit_points_[i] < crit_points_[i + 1]))
      throw DomainError("critical points must be simple");
  for (std::size_t i = 0; i < crit_values_.size(); ++i) {
    if (!(std::fabs(crit_values_[i]) > 1))
      throw DomainError("critical value inside [-1,1]: Julia set is not hyperbolic-real");
    if (i > 0 && (crit_values_[i] > 0) == (crit_values_[i - 1] > 0))
      throw DomainError("consecutive critical values must alternate in sign");
  }
  for (Real y : {Real(-1), Real(1)})
    for (Real r : preimages_one_step(*this, y))
      if (std::fabs(r) > 1 + 1e-12)
        throw DomainError("normalization violated: a solution of f = +-1 lies outside [-1,1]");
}

ExpandingPolynomial ExpandingPolynomial::make_quadratic(double a) {
  if (!(a > 2)) throw DomainError("quadratic family requires a > 2");
  const Real beta = (1 + std::sqrt(1 + 4 * static_cast<Real>(a))) / 2;
  ExpandingPolynomial p({-static_cast<Real>(a) / beta, 0, beta}, Family::quadratic_a, a);
  p.check_invariants();
  return p;
}

ExpandingPolynomial ExpandingPolynomial::make_scaled_cheb3(double c) {
  if (!(c > 1)) throw DomainError("scaled Chebyshev family requires c > 1");
  const Real cc = c;
  ExpandingPolynomial p({0, -3 * cc, 0, 4 * cc}, Family::scaled_cheb3, c);
  p.check_invariants();
  return p;
}

ExpandingPolynomial ExpandingPolynomial::make_unchecked(std::vector<double> coefficients) {
  std::vector<Real> c(coefficients.begin(), coefficients.end());
  return ExpandingPolynomial(std::move(c), Family::custom,
                             std::numeric_limits<double>::quiet_NaN());
}

ExpandingPolynomial ExpandingPolynomial::make_custom(std::vector<double> coefficients) {
  ExpandingPolynomial raw = make_unchecked(std::move(coefficients));
  const double min_t = raw.min_abs_critical_value();
  // outer(xi) = max |f^{-1}(+-xi)|; the polynomial is normalized at scale xi
  // when outer(xi) <= xi.
  auto outer = [&](Real xi) {
    Real m = 0;
    for (Real y : {-xi, xi})
      for (Real r : preimages_one_step(raw, y)) m = std::max(m, std::fabs(r));
    return m;
  };
  for (std::size_t i = 1; i < raw.crit_values_.size(); ++i)
    if ((raw.crit_values_[i] > 0) == (raw.crit_values_[i - 1] > 0))
      throw DomainError("consecutive critical values must alternate in sign");
  if (min_t > 1 && outer(1) <= 1) {
    raw.check_invariants();
    return raw;
  }
  Real lo = 0, hi = static_cast<Real>(min_t) * (1 - 1e-9L);
  if (!(outer(hi) < hi))
    throw DomainError("no normalization scale: f^{-1}([-xi,xi]) never fits inside [-xi,xi]");
  for (int i = 0; i < 200 && hi - lo > 1e-18L * hi; ++i) {
    const Real mid = (lo + hi) / 2;
    if (outer(mid) <= mid)
      hi = mid;
    else
      lo = mid;
  }
  const Real xi = hi;
  std::vector<Real> scaled(raw.coeffs_.size());
  Real pw = 1 / xi;
  for (std::size_t k = 0; k < scaled.size(); ++k) {
    scaled[k] = raw.coeffs_[k] * pw;
    pw *= xi;
  }
  ExpandingPolynomial p(std::move(scaled), Family::custom,
                        std::numeric_limits<double>::quiet_NaN());
  p.check_invariants();
  return p;
}

Real ExpandingPolynomial::value(Real z) const { return horner_real(coeffs_, z); }
Real ExpandingPolynomial::derivative(Real z) const { return horner_real(d1_, z); }
Real ExpandingPolynomial::second_derivative(Real z) const { return horner_real(d2_, z); }
std::complex<double> ExpandingPolynomial::value(std::complex<double> z) const {
  return horner(coeffs_, z);
}
std::complex<double> ExpandingPolynomial::derivative(std::complex<double> z) const {
  return horner(d1_, z);
}

double ExpandingPolynomial::min_abs_critical_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (Real t : crit_values_) m = std::min(m, static_cast<double>(std::fabs(t)));
  return m;
}

std::vector<Real> preimages_one_step(const ExpandingPolynomial& p, Real y, double tol) {
  std::vector<Real> sentinels;
  sentinels.push_back(-p.root_bound());
  for (Real c : p.critical_points()) sentinels.push_back(c);
  sentinels.push_back(p.root_bound());
  std::vector<Real> roots;
  roots.reserve(sentinels.size() - 1);
  for (std::size_t i = 0; i + 1 < sentinels.size(); ++i)
    roots.push_back(solve_branch(p, y, sentinels[i], sentinels[i + 1], tol, i));
  return roots;
}

Real BackwardOrbit::Tprime(std::size_t k) const {
  return sign_Tprime[k] * std::exp(log_abs_Tprime[k]);
}

BackwardOrbit backward_orbit(const ExpandingPolynomial& p, int n, Real x, std::size_t cap,
                             double tol) {
  if (n < 0) throw DomainError("orbit level must be non-negative");
  if (std::fabs(x) > 1) throw DomainError("base point must lie in [-1,1]");
  const std::size_t d = checked_power(p.degree(), n, cap);

  std::vector<Real> nodes{x}, logd{0}, ratio{0};
  std::vector<int> sign{1};
  for (int level = 0; level < n; ++level) {
    std::vector<Real> nn, nl, nr;
    std::vector<int> ns;
    const std::size_t next = nodes.size() * static_cast<std::size_t>(p.degree());
    nn.reserve(next);
    nl.reserve(next);
    nr.reserve(next);
    ns.reserve(next);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      for (Real lam : preimages_one_step(p, nodes[k], tol)) {
        const Real fp = p.derivative(lam);
        const Real fpp = p.second_derivative(lam);
        nn.push_back(lam);
        nl.push_back(logd[k] + std::log(std::fabs(fp)));
        ns.push_back(sign[k] * sign_of(fp));
        nr.push_back(ratio[k] * fp + fpp / fp);
      }
    }
    nodes.swap(nn);
    logd.swap(nl);
    ratio.swap(nr);
    sign.swap(ns);
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return nodes[i] < nodes[j]; });
  BackwardOrbit orbit;
  orbit.base_point = x;
  orbit.level = n;
  orbit.nodes.reserve(d);
  for (std::size_t i : order) {
    orbit.nodes.push_back(nodes[i]);
    orbit.log_abs_Tprime.push_back(logd[i]);
    orbit.sign_Tprime.push_back(sign[i]);
    orbit.Tsecond_over_Tprime.push_back(ratio[i]);
  }
  for (std::size_t k = 1; k < d; ++k)
    if (!(orbit.nodes[k - 1] < orbit.nodes[k]))
      throw NumericalError("backward orbit nodes are not strictly increasing");
  if (orbit_root_residual(p, orbit) > 10 * tol)
    throw NumericalError("backward orbit root tolerance not met");
  return orbit;
}

double orbit_root_residual(const ExpandingPolynomial& p, const BackwardOrbit& orbit) {
  double worst = 0;
  for (std::size_t k = 0; k < orbit.size(); ++k) {
    Real z = orbit.nodes[k];
    for (int j = 0; j < orbit.level; ++j) z = p.value(z);
    const Real scale = 1 + std::exp(orbit.log_abs_Tprime[k]);
    worst = std::max(worst, static_cast<double>(std::fabs(z - orbit.base_point) / scale));
  }
  return worst;
}

std::pair<std::complex<double>, std::complex<double>> iterate_with_derivative(
    const ExpandingPolynomial& p, int n, std::complex<double> z) {
  std::complex<double> dz = 1.0;
  for (int j = 0; j < n; ++j) {
    dz *= p.derivative(z);
    z = p.value(z);
  }
  return {z, dz};
}

IntervalSystem dyadic_intervals(const ExpandingPolynomial& p, int m, std::size_t cap) {
  IntervalSystem sys;
  sys.level = m;
  if (m == 0) {
    sys.dyadic.push_back({-1.0, 1.0});
    return sys;
  }
  const BackwardOrbit left = backward_orbit(p, m, -1, cap);
  const BackwardOrbit right = backward_orbit(p, m, 1, cap);
  struct Endpoint {
    Real x;
    int tag;
  };
  std::vector<Endpoint> ends;
  ends.reserve(2 * left.size());
  for (Real x : left.nodes) ends.push_back({x, -1});
  for (Real x : right.nodes) ends.push_back({x, +1});
  std::sort(ends.begin(), ends.end(), [](const Endpoint& a, const Endpoint& b) { return a.x < b.x; });
  for (std::size_t i = 0; i < ends.size(); i += 2) {
    if (ends[i].tag == ends[i + 1].tag || !(ends[i].x < ends[i + 1].x))
      throw NumericalError("overlapping dyadic components: hyperbolicity broken");
    sys.dyadic.push_back({static_cast<double>(ends[i].x), static_cast<double>(ends[i + 1].x)});
  }
  for (std::size_t i = 1; i < sys.dyadic.size(); ++i)
    if (!(sys.dyadic[i - 1].hi < sys.dyadic[i].lo))
      throw NumericalError("overlapping dyadic components: hyperbolicity broken");
  if (sys.dyadic.front().lo > -1.0) sys.gaps.push_back({-1.0, sys.dyadic.front().lo});
  for (std::size_t i = 1; i < sys.dyadic.size(); ++i)
    sys.gaps.push_back({sys.dyadic[i - 1].hi, sys.dyadic[i].lo});
  if (sys.dyadic.back().hi < 1.0) sys.gaps.push_back({sys.dyadic.back().hi, 1.0});
  return sys;
}

std::vector<IntervalSystem> dyadic_hierarchy(const ExpandingPolynomial& p, int n,
                                             std::size_t cap) {
  std::vector<IntervalSystem> out;
  for (int m = 0; m <= n; ++m) out.push_back(dyadic_intervals(p, m, cap));
  return out;
}

DyadicContainment smallest_dyadic_containing(const std::vector<IntervalSystem>& systems,
                                             const Interval& I0) {
  if (systems.empty()) throw DomainError("empty interval hierarchy");
  if (!(I0.length() > 0)) throw DomainError("interval must have positive length");
  const auto& deepest = systems.back().dyadic;
  auto first = std::lower_bound(deepest.begin(), deepest.end(), I0.lo,
                                [](const Interval& I, double x) { return I.hi < x; });
  if (first == deepest.end() || first->lo > I0.hi)
    throw EmptyIntersectionError("interval does not meet J_n(f)");
  auto last = first;
  while (std::next(last) != deepest.end() && std::next(last)->lo <= I0.hi) ++last;
  const Interval hull{std::max(I0.lo, first->lo), std::min(I0.hi, last->hi)};

  for (auto sys = systems.rbegin(); sys != systems.rend(); ++sys) {
    const auto& comps = sys->dyadic;
    auto it = std::upper_bound(comps.begin(), comps.end(), hull.lo,
                               [](double x, const Interval& I) { return x < I.lo; });
    if (it == comps.begin()) continue;
    --it;
    if (it->contains(hull)) return {*it, sys->level, I0.length() / it->length()};
  }
  throw DomainError("interval is not contained in [-1,1]");
}

std::vector<double> sample_julia_points(const ExpandingPolynomial& p, std::size_t count,
                                        std::mt19937_64& rng, int depth) {
  std::vector<double> pts;
  pts.reserve(count);
  const auto N = static_cast<std::uint64_t>(p.degree());
  for (std::size_t i = 0; i < count; ++i) {
    Real y = 0;
    for (int s = 0; s < depth; ++s) y = preimages_one_step(p, y)[rng() % N];
    pts.push_back(static_cast<double>(y));
  }
  return pts;
}

HyperbolicityCertificate verify_hyperbolic(const ExpandingPolynomial& p, int max_level,
                                           double A_threshold) {
  HyperbolicityCertificate cert;
  double A = std::numeric_limits<double>::infinity();
  for (Real t : p.critical_values())
    A = std::min(A, std::max(0.0, static_cast<double>(std::fabs(t)) - 1.0));
  if (A <= 0) {
    cert.sufficiency_A = 0;
    return cert;
  }
  const std::size_t cap = std::size_t{1} << 20;
  const IntervalSystem cover = dyadic_intervals(p, max_level, cap);
  auto dist_to_cover = [&](double z) {
    double best = std::numeric_limits<double>::infinity();
    for (const Interval& I : cover.dyadic) {
      if (I.contains(z)) return 0.0;
      best = std::min(best, std::min(std::fabs(z - I.lo), std::fabs(z - I.hi)));
    }
    return best;
  };
  bool outside = true;
  A = std::numeric_limits<double>::infinity();
  for (Real t : p.critical_values()) {
    const double dist = dist_to_cover(static_cast<double>(t));
    A = std::min(A, dist);
    outside = outside && dist > 0;
  }
  for (Real c : p.critical_points()) outside = outside && dist_to_cover(static_cast<double>(c)) > 0;

  std::vector<double> min_log;
  double Q = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= max_level; ++n) {
    const BackwardOrbit orbit = backward_orbit(p, n, 0, cap);
    const Real m = *std::min_element(orbit.log_abs_Tprime.begin(), orbit.log_abs_Tprime.end());
    min_log.push_back(static_cast<double>(m));
    Q = std::min(Q, std::exp(static_cast<double>(m) / n));
  }
  double c = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= max_level; ++n) c = std::min(c, std::exp(min_log[n - 1] - n * std::log(Q)));

  cert.expansion_Q = Q;
  cert.expansion_c = c;
  cert.sufficiency_A = A;
  cert.levels_checked = max_level;
  cert.is_hyperbolic = outside && Q > 1;
  cert.is_sufficient = cert.is_hyperbolic && A >= A_threshold;
  return cert;
}

}  // namespace ncpfr
