#include <doctest.h>

#include <cmath>

#include "ncpfr/measures.hpp"

using namespace ncpfr;

TEST_SUITE("measures") {
  TEST_CASE("t = 0 charges 1/d at every preimage") {
    const auto p = ExpandingPolynomial::make_quadratic(5);
    for (int n = 1; n <= 6; ++n) {
      const auto mu = balanced_measure(backward_orbit(p, n, 0.2L), 0.0);
      for (std::size_t k = 0; k < mu.size(); ++k)
        CHECK(static_cast<double>(mu.weight(k)) == doctest::Approx(1.0 / mu.size()).epsilon(1e-15));
    }
  }

  TEST_CASE("two nodes: weights sum to one, symmetric case is 1/2 each") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto mu = balanced_measure(backward_orbit(p, 1, 0.4L), 1.3);
    CHECK(static_cast<double>(mu.weight(0) + mu.weight(1)) == doctest::Approx(1.0).epsilon(1e-15));
    const auto sym = balanced_measure(backward_orbit(p, 1, 1.0L), 2.0);
    CHECK(static_cast<double>(sym.nodes[0]) == doctest::Approx(-1.0));
    CHECK(static_cast<double>(sym.weight(0)) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(static_cast<double>(sym.weight(1)) == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("pullback iterated n times equals the balanced measure") {
    const auto p = ExpandingPolynomial::make_quadratic(4);
    for (double t : {0.0, 0.7, 2.0}) {
      auto mu = WeightedDiscreteMeasure::from_weights({0.35L}, {1.0L});
      for (int n = 1; n <= 5; ++n) {
        mu = pfr_pullback(p, mu, t);
        const auto ref = balanced_measure(backward_orbit(p, n, 0.35L), t);
        REQUIRE(mu.size() == ref.size());
        double worst = 0;
        for (std::size_t k = 0; k < mu.size(); ++k) {
          CHECK(mu.nodes[k] == ref.nodes[k]);
          worst = std::max(worst, static_cast<double>(std::fabs(mu.weight(k) - ref.weight(k))));
        }
        CHECK(worst <= 1e-12);
      }
    }
  }

  TEST_CASE("two starts converge to the same t = 0 invariant measure") {
    const auto p = ExpandingPolynomial::make_quadratic(5);
    auto a = WeightedDiscreteMeasure::from_weights({0.0L}, {1.0L});
    auto b = WeightedDiscreteMeasure::from_weights({0.7L}, {1.0L});
    for (int k = 0; k < 12; ++k) {
      a = pfr_pullback(p, a, 0.0);
      b = pfr_pullback(p, b, 0.0);
    }
    CHECK(transport_distance(a, b) <= 1e-6);
  }

  TEST_CASE("log-sum-exp and normalization") {
    CHECK(static_cast<double>(log_sum_exp({0.0L, 0.0L})) == doctest::Approx(std::log(2.0)));
    CHECK(static_cast<double>(log_sum_exp({-1000.0L, -1000.0L})) == doctest::Approx(-1000 + std::log(2.0)));
    const auto mu = WeightedDiscreteMeasure::from_weights({0.5L, -0.5L, 0.5L}, {1.0L, 2.0L, 1.0L});
    CHECK(mu.size() == 2);
    CHECK(mu.merged_collisions);
    CHECK(static_cast<double>(mu.weight(1)) == doctest::Approx(0.5));
    CHECK_THROWS_AS(WeightedDiscreteMeasure::from_weights({0.0L}, {-1.0L}), DomainError);
  }

  TEST_CASE("transport distance of point masses is their separation") {
    const auto a = WeightedDiscreteMeasure::from_weights({0.1L}, {1.0L});
    const auto b = WeightedDiscreteMeasure::from_weights({0.4L}, {1.0L});
    CHECK(transport_distance(a, b) == doctest::Approx(0.3));
    CHECK(transport_distance(a, a) == 0.0);
  }

  TEST_CASE("pressure: P(0) = 1, P(1) < 0, P(0) + P(2) < 0") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto L = make_default_ladder(p);
    for (int n = L.n_lo; n <= L.n_hi; ++n)
      CHECK(log_partition_sum(L.orbits[static_cast<std::size_t>(n - L.n_lo)], 0.0, 2) ==
            doctest::Approx(n).epsilon(1e-14));
    CHECK(std::fabs(pressure_estimate(L, 0.0).P - 1.0) <= 1e-9);
    CHECK(pressure_estimate(L, 1.0).P < 0);
    CHECK(pressure_estimate(L, 0.0).P + pressure_estimate(L, 2.0).P < 0);
  }

  TEST_CASE("pressure root and monotonicity") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto L = make_default_ladder(p);
    const double delta = pressure_root(L);
    CHECK(delta > 0);
    CHECK(delta < 1);
    CHECK(pressure_estimate(L, delta + 0.1).P < 0);
    CHECK(pressure_estimate(L, delta - 0.1).P > 0);
    const auto curve = pressure_curve(L, {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0});
    CHECK(curve.strictly_decreasing);
    CHECK(curve.midpoint_convex);
    // More hyperbolic means a thinner Julia set.
    const double d10 = pressure_root(make_default_ladder(ExpandingPolynomial::make_scaled_cheb3(10)));
    const double d15 = pressure_root(make_default_ladder(ExpandingPolynomial::make_scaled_cheb3(1.5)));
    MESSAGE("delta(c=10) = " << d10 << ", delta(c=1.5) = " << d15);
  }

  TEST_CASE("two-sided check is symmetric and negative") {
    const auto L = make_default_ladder(ExpandingPolynomial::make_quadratic(5));
    const auto c = two_sided_pressure_check(L, 0.05);
    const std::size_t m = c.t_grid.size();
    for (std::size_t i = 0; i < m; ++i) {
      CHECK(c.t_grid[i] + c.t_grid[m - 1 - i] == doctest::Approx(2.0).epsilon(1e-15));
      CHECK(c.sums[i] == c.sums[m - 1 - i]);
    }
    CHECK(c.t_grid.front() == doctest::Approx(-0.05));
    CHECK(c.max_sum < 0);
    CHECK(c.pass);
    const double P1 = pressure_estimate(L, 1.0).P;
    CHECK(c.sums[m / 2] == doctest::Approx(2 * P1).epsilon(1e-12));
  }

  TEST_CASE("pressure-2 exponent is positive") {
    CHECK(pressure2_exponent(make_default_ladder(ExpandingPolynomial::make_quadratic(3))).tau_hat > 0);
  }

  TEST_CASE("least squares on exact data") {
    const auto f = least_squares({1, 2, 3, 4}, {3, 5, 7, 9});
    CHECK(f.slope == doctest::Approx(2.0));
    CHECK(f.intercept == doctest::Approx(1.0));
    CHECK(f.r2 == doctest::Approx(1.0));
  }

  TEST_CASE("weak PFR: identical points give zero, distinct points decay") {
    const auto p = ExpandingPolynomial::make_quadratic(5);
    const auto r = weak_pfr_experiment(p, 1.0, 2, 6, {{0.2, 0.6}});
    CHECK(r.q_hat < 1.0);
    CHECK(r.fitted_levels >= 2);
    CHECK_THROWS_AS(weak_pfr_experiment(p, 1.0, 2, 6, {{0.2, 0.2}}), NumericalError);
  }

  TEST_CASE("Julia samples are deterministic and inside [-1, 1]") {
    const auto p = ExpandingPolynomial::make_quadratic(5);
    const auto a = sample_julia_pairs(p, 10, 42), b = sample_julia_pairs(p, 10, 42);
    CHECK(a == b);
    for (const auto& [x, y] : a) {
      CHECK(std::fabs(x) <= 1.0);
      CHECK(std::fabs(y) <= 1.0);
    }
  }
}
