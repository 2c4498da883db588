#pragma once

// Expanding polynomials with real Julia set, their backward orbits and the
// dynamical "dyadic" interval systems built from preimages of [-1, 1].

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ncpfr/common.hpp"

namespace ncpfr {

enum class Family { quadratic_a, scaled_cheb3, custom };

const char* to_string(Family f);
Family parse_family(const std::string& name);

/// A real polynomial f of degree N >= 2, affinely normalized so that every
/// real solution of f(z) = +-1 lies in [-1, 1]. All critical points are real
/// and every critical value satisfies |f(c_i)| > 1, so the N monotone branches
/// between consecutive critical points each cover [-1, 1] once.
class ExpandingPolynomial {
 public:
  /// Conjugate of z^2 - a rescaled by its fixed point beta = (1 + sqrt(1+4a))/2,
  /// giving beta z^2 - a/beta. Requires a > 2.
  static ExpandingPolynomial make_quadratic(double a);
  /// c (4z^3 - 3z). Requires c > 1.
  static ExpandingPolynomial make_scaled_cheb3(double c);
  /// Ascending coefficients. Rescaled when f^{-1}([-1,1]) is not inside [-1,1].
  static ExpandingPolynomial make_custom(std::vector<double> coefficients);
  /// Skips the expanding-family invariants. Only for diagnostics such as
  /// certifying that a polynomial is *not* hyperbolic.
  static ExpandingPolynomial make_unchecked(std::vector<double> coefficients);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  Family family() const { return family_; }
  /// Family parameter (a or c); NaN for custom polynomials.
  double parameter() const { return parameter_; }
  const std::vector<Real>& coefficients() const { return coeffs_; }
  const std::vector<Real>& critical_points() const { return crit_points_; }
  const std::vector<Real>& critical_values() const { return crit_values_; }

  Real value(Real z) const;
  Real derivative(Real z) const;
  Real second_derivative(Real z) const;
  std::complex<double> value(std::complex<double> z) const;
  std::complex<double> derivative(std::complex<double> z) const;

  /// Smallest |f(c_i)|.
  double min_abs_critical_value() const;
  /// Bound R with every solution of f(z) = y, |y| <= 1, inside (-R, R).
  Real root_bound() const { return root_bound_; }

 private:
  ExpandingPolynomial(std::vector<Real> coeffs, Family family, double parameter);
  void compute_critical_data();
  void check_invariants() const;

  std::vector<Real> coeffs_;
  std::vector<Real> d1_;
  std::vector<Real> d2_;
  std::vector<Real> crit_points_;
  std::vector<Real> crit_values_;
  Family family_ = Family::custom;
  double parameter_ = 0.0;
  Real root_bound_ = 2;
};

struct HyperbolicityCertificate {
  bool is_hyperbolic = false;
  /// sufficiency_A >= the threshold passed to verify_hyperbolic.
  bool is_sufficient = false;
  double expansion_Q = 0.0;
  double expansion_c = 0.0;
  double sufficiency_A = 0.0;
  int levels_checked = 0;
};

/// Estimates the expansion constants (Q, c) from backward orbits up to
/// max_level and the distance A from the critical values to the level-
/// max_level cover of J(f).
HyperbolicityCertificate verify_hyperbolic(const ExpandingPolynomial& p, int max_level,
                                           double A_threshold = 9.0);

inline constexpr double kDefaultRootTol = 1e-14;

/// The N real roots of f(z) = y, |y| <= 1, in increasing order.
std::vector<Real> preimages_one_step(const ExpandingPolynomial& p, Real y,
                                     double tol = kDefaultRootTol);

/// All d = N^n preimages of a base point under T = f^n with T' and T''/T'
/// accumulated through the chain rule.
struct BackwardOrbit {
  Real base_point = 0;
  int level = 0;
  std::vector<Real> nodes;            // strictly increasing
  std::vector<Real> log_abs_Tprime;   // log|T'(lambda_k)|
  std::vector<int> sign_Tprime;       // sign of T'(lambda_k)
  std::vector<Real> Tsecond_over_Tprime;

  std::size_t size() const { return nodes.size(); }
  /// Signed T'(lambda_k), computed from the log-domain representation.
  Real Tprime(std::size_t k) const;
};

BackwardOrbit backward_orbit(const ExpandingPolynomial& p, int n, Real x,
                             std::size_t cap = kDefaultNodeCap, double tol = kDefaultRootTol);

/// max_k |T(lambda_k) - x| / (1 + |T'(lambda_k)|), evaluated by forward iteration.
double orbit_root_residual(const ExpandingPolynomial& p, const BackwardOrbit& orbit);

/// T = f^n and T' at a complex point by forward iteration.
std::pair<std::complex<double>, std::complex<double>> iterate_with_derivative(
    const ExpandingPolynomial& p, int n, std::complex<double> z);

/// Components D_m of (f^m)^{-1}([-1,1]) and the open gaps between them.
struct IntervalSystem {
  int level = 0;
  std::vector<Interval> dyadic;
  std::vector<Interval> gaps;
};

IntervalSystem dyadic_intervals(const ExpandingPolynomial& p, int m,
                                std::size_t cap = kDefaultNodeCap);

/// Systems D_0, ..., D_n.
std::vector<IntervalSystem> dyadic_hierarchy(const ExpandingPolynomial& p, int n,
                                             std::size_t cap = kDefaultNodeCap);

/// Raised when I0 does not meet J_n(f); callers fall back to the smallest
/// enclosing interval that does (u = v = 0 away from its endpoints).
class EmptyIntersectionError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct DyadicContainment {
  Interval interval;
  int level = 0;
  double ratio = 0.0;  // |I0| / |I|
};

/// Smallest interval of D = D_0 u ... u D_n containing I0 n J_n(f), where
/// J_n(f) is the union of the deepest level in `systems`.
DyadicContainment smallest_dyadic_containing(const std::vector<IntervalSystem>& systems,
                                             const Interval& I0);

/// Points of J(f) up to |D_depth| by a seeded random walk through inverse branches.
std::vector<double> sample_julia_points(const ExpandingPolynomial& p, std::size_t count,
                                        std::mt19937_64& rng, int depth = 40);

}  // namespace ncpfr
