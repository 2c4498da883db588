#include <doctest.h>

#include <cmath>

#include "ncpfr/flow.hpp"
#include "ncpfr/renorm.hpp"

using namespace ncpfr;

TEST_SUITE("renorm") {
  TEST_CASE("1 x 1 input gives J(x) at t = 0") {
    const auto p = ExpandingPolynomial::make_quadratic(5);
    const auto r = renorm_map(p, 3, JacobiMatrix{{0.3}, {}});
    const auto ref = jacobi_of_point(p, 3, 0.0, 0.3);
    REQUIRE(r.J_out.size() == 8);
    CHECK(jacobi_difference_norm(r.J_out, ref) <= 1e-13);
  }

  TEST_CASE("spectral mapping and size law") {
    const auto p = ExpandingPolynomial::make_quadratic(12);
    const auto r = renorm_map(p, 1, JacobiMatrix{{0, 0}, {1}});
    REQUIRE(r.J_out.size() == 4);
    const auto ev = spectral_decomposition(r.J_out).eigenvalues;
    const auto lo = preimages_one_step(p, -1), hi = preimages_one_step(p, 1);
    std::vector<double> expect{static_cast<double>(lo[0]), static_cast<double>(lo[1]), static_cast<double>(hi[0]),
                               static_cast<double>(hi[1])};
    std::sort(expect.begin(), expect.end());
    for (std::size_t k = 0; k < 4; ++k) CHECK(ev[k] == doctest::Approx(expect[k]).epsilon(1e-12));
    for (double res : r.re_residuals) CHECK(res <= 1e-8);
    for (auto z : kStandardZ) MESSAGE("decimated residual " << decimated_resolvent_residual(p, 1, {{0, 0}, {1}}, r.J_out, z));
  }

  TEST_CASE("resolvent equation with a random input, n = 2") {
    const auto p = ExpandingPolynomial::make_scaled_cheb3(10);
    std::mt19937_64 rng(9);
    const auto Jt = random_jacobi(5, rng);
    const auto r = renorm_map(p, 2, Jt);
    CHECK(r.J_out.size() == 45);
    for (double res : r.re_residuals) CHECK(res <= 1e-8);
  }

  TEST_CASE("determinism and escape detection") {
    const auto p = ExpandingPolynomial::make_quadratic(12);
    std::mt19937_64 a(1), b(1);
    const auto Ja = random_jacobi(4, a), Jb = random_jacobi(4, b);
    const auto ra = renorm_map(p, 1, Ja), rb = renorm_map(p, 1, Jb);
    CHECK(ra.J_out.a == rb.J_out.a);
    CHECK(ra.J_out.b == rb.J_out.b);
    CHECK_THROWS_AS(renorm_map(p, 1, JacobiMatrix{{1.5}, {}}), DomainError);
    CHECK_THROWS_AS(renorm_map(p, 13, JacobiMatrix{{0.0}, {}}), CapacityError);
  }

  TEST_CASE("contraction: sufficiently hyperbolic and diagnostic regimes") {
    const auto c = contraction_estimate(ExpandingPolynomial::make_quadratic(12), 1, 4, 10, 3);
    CHECK(c.ratios.size() == 10);
    CHECK(c.c_hat <= 0.99);
    const auto weak = contraction_estimate(ExpandingPolynomial::make_scaled_cheb3(1.5), 1, 4, 5, 3);
    CHECK(std::isfinite(weak.c_hat));
    MESSAGE("c_hat(scaled_cheb3 c=1.5) = " << weak.c_hat);
  }

  TEST_CASE("fixed point: start independence and defect decay") {
    const auto p = ExpandingPolynomial::make_quadratic(12);
    const auto A = iterate_fixed_point(p, 1, {{0.0}, {}}, 5, 1);
    const auto B = iterate_fixed_point(p, 1, {{0, 0}, {1}}, 5, 1);
    CHECK(start_independence(A.J, B.J, 32 - 10) <= 1e-6);
    const auto F = iterate_fixed_point(p, 1, {{0.0}, {}}, 8, 4);
    REQUIRE(F.defect_ratio.size() >= 3);
    for (std::size_t l = 0; l < 3; ++l) CHECK(F.defect_ratio[l] <= 0.9);
  }

  TEST_CASE("scalar contraction") {
    const auto p = ExpandingPolynomial::make_quadratic(12);
    const auto same = scalar_contraction_experiment(p, 0.0, {2, 3}, {{0.4, 0.4}});
    CHECK(same.L[0] == 0.0);
    const auto sc = scalar_contraction_experiment(p, 0.0, {2, 3, 4, 5}, {{0.4, -0.3}, {0.1, 0.9}});
    CHECK(sc.c_hat < 0.9);
    CHECK(sc.lipschitz_uniform);
  }
}
