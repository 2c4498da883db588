#include <doctest.h>

#include <cmath>
#include <random>

#include "ncpfr/polydyn.hpp"

using namespace ncpfr;

namespace {

// Coefficients of f o g by Horner in coefficient space.
std::vector<long double> compose(const std::vector<Real>& f, const std::vector<long double>& g) {
  std::vector<long double> out{f.back()};
  for (std::size_t k = f.size() - 1; k-- > 0;) {
    std::vector<long double> next(out.size() + g.size() - 1, 0.0L);
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) next[i + j] += out[i] * g[j];
    next[0] += f[k];
    out = std::move(next);
  }
  return out;
}

long double horner(const std::vector<long double>& c, long double z) {
  long double v = 0;
  for (std::size_t k = c.size(); k-- > 0;) v = v * z + c[k];
  return v;
}

std::vector<long double> deriv(const std::vector<long double>& c) {
  std::vector<long double> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(c[k] * static_cast<long double>(k));
  return d;
}

}  // namespace

TEST_SUITE("polydyn") {
  TEST_CASE("quadratic normalization fixes 1 and sends 0 outside") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const double beta = (1 + std::sqrt(13.0)) / 2;
    CHECK(static_cast<double>(p.value(1.0L)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(static_cast<double>(p.value(0.0L)) == doctest::Approx(-3 / beta).epsilon(1e-14));
    CHECK(beta == doctest::Approx(2.302776).epsilon(1e-6));
    CHECK(std::fabs(static_cast<double>(p.value(0.0L))) > 1.0);
  }

  TEST_CASE("quadratic preimages of +-1") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto up = preimages_one_step(p, 1);
    REQUIRE(up.size() == 2);
    CHECK(static_cast<double>(up[0]) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(static_cast<double>(up[1]) == doctest::Approx(1.0).epsilon(1e-15));
    const double beta = (1 + std::sqrt(13.0)) / 2;
    const double s = std::sqrt((-1 + 3 / beta) / beta);
    const auto dn = preimages_one_step(p, -1);
    CHECK(static_cast<double>(dn[1]) == doctest::Approx(s).epsilon(1e-14));
    CHECK(static_cast<double>(dn[0]) == doctest::Approx(-s).epsilon(1e-14));
    CHECK(s == doctest::Approx(0.36261).epsilon(1e-4));
  }

  TEST_CASE("scaled Chebyshev: roots and critical values") {
    const auto p = ExpandingPolynomial::make_scaled_cheb3(10);
    const auto r = preimages_one_step(p, 0);
    REQUIRE(r.size() == 3);
    CHECK(static_cast<double>(r[0]) == doctest::Approx(-std::sqrt(3.0) / 2).epsilon(1e-15));
    CHECK(std::fabs(static_cast<double>(r[1])) < 1e-18);
    CHECK(static_cast<double>(r[2]) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-15));
    CHECK(p.min_abs_critical_value() == doctest::Approx(10.0));
  }

  TEST_CASE("hyperbolicity certificates") {
    CHECK(verify_hyperbolic(ExpandingPolynomial::make_quadratic(3), 8).is_hyperbolic);
    const auto c10 = verify_hyperbolic(ExpandingPolynomial::make_scaled_cheb3(10), 6);
    CHECK(c10.is_hyperbolic);
    CHECK(c10.sufficiency_A >= 9.0);
    const auto c15 = verify_hyperbolic(ExpandingPolynomial::make_scaled_cheb3(1.5), 6);
    CHECK(c15.is_hyperbolic);
    CHECK_FALSE(c15.is_sufficient);
    // Raw Chebyshev: critical values +-1 on [-1, 1].
    const auto raw = ExpandingPolynomial::make_unchecked({0, -3, 0, 4});
    CHECK_FALSE(verify_hyperbolic(raw, 4).is_hyperbolic);
    CHECK_THROWS_AS(ExpandingPolynomial::make_scaled_cheb3(1.0), DomainError);
  }

  TEST_CASE("backward orbit: n = 1 is one step, n = 2 keeps the outer nodes") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto o1 = backward_orbit(p, 1, 0.3L);
    const auto pre = preimages_one_step(p, 0.3L);
    REQUIRE(o1.size() == 2);
    CHECK(o1.nodes[0] == pre[0]);
    CHECK(o1.nodes[1] == pre[1]);
    const auto o2 = backward_orbit(p, 2, 1.0L);
    REQUIRE(o2.size() == 4);
    CHECK(static_cast<double>(o2.nodes.front()) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(static_cast<double>(o2.nodes.back()) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(orbit_root_residual(p, o2) < 1e-15);
  }

  TEST_CASE("chain rule against the expanded iterate, n <= 4") {
    for (double a : {3.0, 5.0}) {
      const auto p = ExpandingPolynomial::make_quadratic(a);
      std::vector<long double> T{0.0L, 1.0L};
      for (int n = 1; n <= 4; ++n) {
        T = compose(p.coefficients(), T);
        const auto dT = deriv(T);
        const auto d2T = deriv(dT);
        const auto o = backward_orbit(p, n, 0.25L);
        for (std::size_t k = 0; k < o.size(); ++k) {
          const long double lam = o.nodes[k];
          const long double v1 = horner(dT, lam);
          // The expanded iterate loses digits to cancellation.
          CHECK(static_cast<double>(horner(T, lam)) == doctest::Approx(0.25).epsilon(1e-9));
          CHECK(static_cast<double>(o.log_abs_Tprime[k]) == doctest::Approx(static_cast<double>(std::log(std::fabs(v1)))).epsilon(1e-12));
          CHECK(o.sign_Tprime[k] == (v1 > 0 ? 1 : -1));
          CHECK(static_cast<double>(o.Tsecond_over_Tprime[k]) ==
                doctest::Approx(static_cast<double>(horner(d2T, lam) / v1)).epsilon(1e-10));
        }
      }
    }
  }

  TEST_CASE("Green-type bound: d / |T'| stays bounded") {
    const auto p = ExpandingPolynomial::make_quadratic(5);
    double C2 = 0;
    for (int n = 2; n <= 8; ++n) {
      const auto o = backward_orbit(p, n, 0.1L);
      double worst = 0;
      for (std::size_t k = 0; k < o.size(); ++k)
        worst = std::max(worst, static_cast<double>(o.size()) * std::exp(-static_cast<double>(o.log_abs_Tprime[k])));
      if (n == 2) C2 = worst;
      // |T'| grows like (2 beta)^n > 2^n, so d/|T'| decays.
      CHECK(worst <= C2 * (1 + 1e-12));
    }
  }

  TEST_CASE("complex iteration agrees with the real chain rule") {
    const auto p = ExpandingPolynomial::make_scaled_cheb3(10);
    const auto o = backward_orbit(p, 3, -0.2L);
    for (std::size_t k = 0; k < o.size(); k += 5) {
      const auto [Tz, dTz] = iterate_with_derivative(p, 3, {static_cast<double>(o.nodes[k]), 0.0});
      CHECK(Tz.real() == doctest::Approx(-0.2).epsilon(1e-9));
      CHECK(std::log(std::fabs(dTz.real())) == doctest::Approx(static_cast<double>(o.log_abs_Tprime[k])).epsilon(1e-12));
    }
  }

  TEST_CASE("dyadic intervals") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto D0 = dyadic_intervals(p, 0);
    REQUIRE(D0.dyadic.size() == 1);
    CHECK(D0.dyadic[0].lo == -1.0);
    CHECK(D0.dyadic[0].hi == 1.0);
    const auto D1 = dyadic_intervals(p, 1);
    REQUIRE(D1.dyadic.size() == 2);
    REQUIRE(D1.gaps.size() == 1);
    const double s = static_cast<double>(preimages_one_step(p, -1)[1]);
    CHECK(D1.dyadic[0].hi == doctest::Approx(-s).epsilon(1e-15));
    CHECK(D1.dyadic[1].lo == doctest::Approx(s).epsilon(1e-15));
    CHECK(D1.gaps[0].lo == doctest::Approx(-s).epsilon(1e-15));

    // |I| |T'(lambda)| comparable to a constant across intervals.
    const auto D6 = dyadic_intervals(p, 6);
    const auto o = backward_orbit(p, 6, 0.0L);
    REQUIRE(o.size() == D6.dyadic.size());
    double lo = 1e300, hi = 0;
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double v = D6.dyadic[i].length() * std::exp(static_cast<double>(o.log_abs_Tprime[i]));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi / lo < 4.0);
  }

  TEST_CASE("smallest dyadic containing") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto H = dyadic_hierarchy(p, 5);
    const auto whole = smallest_dyadic_containing(H, {-1, 1});
    CHECK(whole.level == 0);
    CHECK(whole.ratio == doctest::Approx(1.0));
    const Interval comp = H[3].dyadic[2];
    const auto c = smallest_dyadic_containing(H, comp);
    CHECK(c.level == 3);
    CHECK(c.ratio == doctest::Approx(1.0));
    const Interval gap = H[1].gaps[0];
    CHECK_THROWS_AS(smallest_dyadic_containing(H, {gap.center() - 1e-3, gap.center() + 1e-3}),
                    EmptyIntersectionError);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    double worst = 1;
    for (int k = 0; k < 1000; ++k) {
      double a = U(rng), b = U(rng);
      if (a > b) std::swap(a, b);
      try {
        worst = std::min(worst, smallest_dyadic_containing(H, {a, b}).ratio);
      } catch (const EmptyIntersectionError&) {
      }
    }
    CHECK(worst > 0.0);
  }

  TEST_CASE("caps and bad arguments") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    CHECK_THROWS_AS(backward_orbit(p, 13, 0.0L, 4096), CapacityError);
    CHECK_THROWS_AS(preimages_one_step(p, -5.0L), Error);
    CHECK_THROWS_AS(ExpandingPolynomial::make_quadratic(1.0), DomainError);
  }
}
