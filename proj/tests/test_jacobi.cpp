#include <doctest.h>

#include <cmath>
#include <random>

#include "ncpfr/flow.hpp"
#include "ncpfr/jacobi.hpp"

using namespace ncpfr;

namespace {

WeightedDiscreteMeasure uniform(std::vector<Real> x) {
  std::vector<Real> w(x.size(), 1.0L);
  return WeightedDiscreteMeasure::from_weights(std::move(x), std::move(w));
}

}  // namespace

TEST_SUITE("jacobi") {
  TEST_CASE("two-point and three-point Gram-Schmidt oracles") {
    for (auto method : {ReductionMethod::Givens, ReductionMethod::Lanczos}) {
      const auto J2 = jacobi_from_measure(uniform({-1, 1}), {Precision::Double, method});
      REQUIRE(J2.size() == 2);
      CHECK(std::fabs(J2.a[0]) < 1e-15);
      CHECK(std::fabs(J2.a[1]) < 1e-15);
      CHECK(J2.b[0] == doctest::Approx(1.0).epsilon(1e-15));
      const auto J3 = jacobi_from_measure(uniform({-1, 0, 1}), {Precision::Extended, method});
      REQUIRE(J3.size() == 3);
      for (double a : J3.a) CHECK(std::fabs(a) < 1e-15);
      CHECK(J3.b[0] == doctest::Approx(std::sqrt(2.0 / 3)).epsilon(1e-15));
      CHECK(J3.b[1] == doctest::Approx(std::sqrt(1.0 / 3)).epsilon(1e-15));
    }
    const auto J1 = jacobi_from_measure(uniform({0.3L}));
    REQUIRE(J1.size() == 1);
    CHECK(J1.a[0] == 0.3);
  }

  TEST_CASE("[[0,1],[1,0]] has spectral measure (delta_-1 + delta_1)/2") {
    const auto mu = spectral_measure(JacobiMatrix{{0, 0}, {1}});
    REQUIRE(mu.size() == 2);
    CHECK(static_cast<double>(mu.nodes[0]) == doctest::Approx(-1.0));
    CHECK(static_cast<double>(mu.nodes[1]) == doctest::Approx(1.0));
    CHECK(static_cast<double>(mu.weight(0)) == doctest::Approx(0.5));
  }

  TEST_CASE("roundtrip with weight ratios up to 1e12") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 10; ++k) {
      const std::size_t d = 2 + rng() % 200;
      std::vector<Real> x, w;
      for (std::size_t i = 0; i < d; ++i) {
        x.push_back(U(rng));
        w.push_back(std::pow(10.0, 6 * U(rng)));
      }
      const auto mu = WeightedDiscreteMeasure::from_weights(x, w);
      const auto nu = spectral_measure(jacobi_from_measure(mu));
      REQUIRE(nu.size() == mu.size());
      for (std::size_t i = 0; i < mu.size(); ++i) {
        CHECK(std::fabs(static_cast<double>(mu.nodes[i] - nu.nodes[i])) <= 1e-9);
        CHECK(std::fabs(static_cast<double>(mu.weight(i) - nu.weight(i))) <= 1e-8);
      }
    }
  }

  TEST_CASE("duplicates and underflow are rejected") {
    WeightedDiscreteMeasure mu;
    mu.nodes = {0.1L, 0.1L};
    mu.log_weights = {std::log(0.5L), std::log(0.5L)};
    CHECK_THROWS_AS(jacobi_from_measure(mu), DomainError);
  }

  TEST_CASE("eigenvalues of J(x) are the preimage nodes") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    for (double t : {0.0, 1.0, 2.0}) {
      const auto o = backward_orbit(p, 5, 0.1L);
      const auto sd = spectral_decomposition(jacobi_of_point(p, 5, t, 0.1));
      for (std::size_t k = 0; k < o.size(); ++k)
        CHECK(sd.eigenvalues[k] == doctest::Approx(static_cast<double>(o.nodes[k])).epsilon(1e-12));
    }
  }

  TEST_CASE("resolvent: point mass, Stieltjes transform, total mass") {
    const JacobiMatrix one{{0.4}, {}};
    const std::complex<double> z{0, 2};
    CHECK(std::abs(resolvent_00(one, z) - 1.0 / (z - 0.4)) < 1e-16);
    const auto p = ExpandingPolynomial::make_quadratic(5);
    const auto mu = balanced_measure(backward_orbit(p, 6, 0.3L), 0.8);
    const auto J = jacobi_from_measure(mu);
    for (auto zz : {std::complex<double>{3, 1}, std::complex<double>{0, 2}}) {
      const auto r = resolvent_00(J, zz);
      CHECK(std::abs(r - stieltjes_transform(mu, zz)) <= 1e-8 * std::abs(r));
      CHECK(std::abs(r - resolvent_00_dense(J, zz)) <= 1e-12 * std::abs(r));
    }
    const std::complex<double> far{0, 1e8};
    CHECK(std::abs(far * resolvent_00(J, far) - 1.0) < 1e-8);
    CHECK_THROWS_AS(resolvent_00(one, {0.4, 0.0}), DomainError);
  }

  TEST_CASE("orthonormal polynomials") {
    const auto two = jacobi_from_measure(uniform({-1, 1}));
    const auto v = ortho_polys_at(two, 0.7);
    CHECK(v.values[0] == 1.0);
    CHECK(v.values[1] == doctest::Approx(0.7));
    CHECK(v.derivatives[1] == doctest::Approx(1.0));

    const auto p = ExpandingPolynomial::make_quadratic(5);
    const auto mu = balanced_measure(backward_orbit(p, 7, 0.0L), 1.0);
    const auto J = jacobi_from_measure(mu);
    const std::size_t d = J.size();
    std::vector<std::vector<double>> P;
    for (std::size_t k = 0; k < d; ++k) P.push_back(ortho_polys_at(J, static_cast<double>(mu.nodes[k])).values);
    double worst = 0;
    for (std::size_t i = 0; i < d; i += 7)
      for (std::size_t j = 0; j < d; j += 5) {
        double s = 0;
        for (std::size_t k = 0; k < d; ++k) s += static_cast<double>(mu.weight(k)) * P[k][i] * P[k][j];
        worst = std::max(worst, std::fabs(s - (i == j ? 1.0 : 0.0)));
      }
    CHECK(worst <= 1e-8);
  }

  TEST_CASE("operator norms") {
    CHECK(opnorm(Eigen::MatrixXd::Identity(5, 5), true) == doctest::Approx(1.0));
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = 3;
    D(1, 1) = -7;
    CHECK(opnorm(D) == doctest::Approx(7.0));
    const JacobiMatrix S{{0, 0}, {1}};
    CHECK(opnorm(S.dense(), true) == doctest::Approx(1.0));
    CHECK(tridiagonal_norm(S.a, S.b) == doctest::Approx(1.0).epsilon(1e-14));
    const auto J = jacobi_of_point(ExpandingPolynomial::make_quadratic(3), 6, 0.5, 0.2);
    CHECK(tridiagonal_norm(J.a, J.b) == doctest::Approx(opnorm(J.dense(), true)).epsilon(1e-12));
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(600, 600);
    for (int i = 0; i < 600; ++i) big(i, i) = 1.0 + i * 1e-3;
    CHECK(opnorm(big, true) == doctest::Approx(1.599).epsilon(1e-9));
    CHECK(jacobi_difference_norm(J, J) == 0.0);
  }
}
