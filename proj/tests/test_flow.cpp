#include <doctest.h>

#include <cmath>

#include "ncpfr/flow.hpp"

using namespace ncpfr;

namespace {

// d = 2, t = 0: nodes -s, s with s(x) = sqrt((x + a/beta)/beta), weights 1/2.
// J(x) = [[0, s], [s, 0]], dJ/dx = s' [[0,1],[1,0]], s' = 1/(2 beta s) = 1/T'(s).
struct TwoByTwo {
  double beta, s;
  explicit TwoByTwo(double a, double x) {
    beta = (1 + std::sqrt(1 + 4 * a)) / 2;
    s = std::sqrt((x + a / beta) / beta);
  }
};

}  // namespace

TEST_SUITE("flow") {
  TEST_CASE("d = 1: D = 0, G = 0, F = 1/T'") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto ops = build_flow_ops(p, 0, 0.0, 0.3);
    REQUIRE(ops.J.size() == 1);
    CHECK(ops.D(0, 0) == 0.0);
    CHECK(ops.G(0, 0) == 0.0);
    CHECK(ops.F(0, 0) == doctest::Approx(1.0));
    CHECK(verify_D_identity(ops).degenerate);
    CHECK(flow_residual(p, 0, 0.0, 0.3, 1e-3) < 1e-12);
  }

  TEST_CASE("d = 2 symbolic oracle, quadratic a = 3, x = 0.5, t = 0") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const TwoByTwo o(3, 0.5);
    const auto ops = build_flow_ops(p, 1, 0.0, 0.5, Precision::Extended);
    REQUIRE(ops.J.size() == 2);
    CHECK(std::fabs(ops.J.a[0]) < 1e-15);
    CHECK(ops.J.b[0] == doctest::Approx(o.s).epsilon(1e-15));
    const double sp = 1 / (2 * o.beta * o.s);
    // F = V diag(1/T') V^T.
    CHECK(std::fabs(ops.F(0, 0)) < 1e-15);
    CHECK(ops.F(0, 1) == doctest::Approx(sp).epsilon(1e-14));
    CHECK(ops.F(1, 0) == doctest::Approx(sp).epsilon(1e-14));
    // D carries P'_1 = 1/s against P_0.
    CHECK(ops.D(1, 0) == doctest::Approx(1 / o.s).epsilon(1e-14));
    CHECK(std::fabs(ops.D(0, 0)) < 1e-14);
    CHECK(std::fabs(ops.D(0, 1)) < 1e-14);
    CHECK(std::fabs(ops.D(1, 1)) < 1e-14);
    const Eigen::MatrixXd JD = commutator(ops.J.dense(), ops.D);
    CHECK(JD(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::fabs(JD(0, 1)) < 1e-14);
    // R entries: r_01 = r_10 = -1/(4 beta s^2), r_ii = 1/(4 beta s^2).
    const double r = 1 / (4 * o.beta * o.s * o.s);
    CHECK(ops.R(0, 1) == doctest::Approx(-r).epsilon(1e-13));
    CHECK(ops.R(1, 0) == doctest::Approx(-r).epsilon(1e-13));
    CHECK(ops.R(0, 0) == doctest::Approx(r).epsilon(1e-13));
    CHECK(ops.R(1, 1) == doctest::Approx(r).epsilon(1e-13));
    // J' = F + [G, J] against the analytic derivative.
    const Eigen::MatrixXd Jdot = ops.F + commutator(ops.G, ops.J.dense());
    CHECK(std::fabs(Jdot(0, 0)) < 1e-14);
    CHECK(Jdot(0, 1) == doctest::Approx(sp).epsilon(1e-13));
    const auto dr = verify_D_identity(ops);
    CHECK(dr.rows_residual < 1e-14);
    CHECK(dr.last_row_residual < 1e-14);
    CHECK(dr.lar2_residual < 1e-14);
    const auto rr = verify_R_closed_form(ops);
    CHECK(rr.max_residual < 1e-13);
    CHECK(rr.column_sum < 1e-13);
  }

  TEST_CASE("identities up to d = 64, quadratic a = 3") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    for (double t : {0.0, 1.0, 2.0})
      for (int n = 2; n <= 6; ++n) {
        const auto ops = build_flow_ops(p, n, t, 0.4, Precision::Extended);
        const auto dr = verify_D_identity(ops);
        const auto rr = verify_R_closed_form(ops);
        CHECK(dr.rows_residual <= 1e-6);
        CHECK(dr.last_row_residual <= 1e-6);
        CHECK(dr.lar2_residual <= 1e-6);
        CHECK(dr.dfeq_residual <= 1e-6);
        CHECK(rr.max_residual <= 1e-6);
        CHECK(rr.column_sum <= 1e-8);
        CHECK(rr.lar_residual <= 1e-6);
      }
  }

  TEST_CASE("flow residual is second order in h") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    for (double t : {0.0, 1.0, 2.0}) {
      const double r3 = flow_residual(p, 5, t, 0.4, 1e-3);
      const double r4 = flow_residual(p, 5, t, 0.4, 1e-4);
      CHECK(r4 <= 1e-4);
      CHECK(r3 / r4 >= 30);
      CHECK(r3 / r4 <= 300);
    }
  }

  TEST_CASE("F decays geometrically in n") {
    const auto p = ExpandingPolynomial::make_quadratic(5);
    std::vector<double> n, logF;
    for (int k = 2; k <= 8; ++k) {
      const auto ops = build_flow_ops(p, k, 0.0, 0.1);
      n.push_back(k);
      logF.push_back(std::log(opnorm(ops.F, true)));
    }
    const auto fit = least_squares(n, logF);
    CHECK(std::exp(fit.slope) < 1.0);
  }

  TEST_CASE("commutator scan: exact forms, t = 1 diagonal, triangle inequality") {
    const auto p = ExpandingPolynomial::make_quadratic(3);
    const auto rows = commutator_uniformity_scan(p, {0.0, 1.0, 2.0}, {2, 3, 4, 5}, {0.1, -0.5});
    for (const auto& r : rows) {
      CHECK(r.h2_exact <= 1e-10);
      CHECK(r.h3_exact <= 1e-10);
      CHECK(r.symmetry_defect <= 1e-10);
      CHECK(r.norm_Jdot <= (r.norm_F + r.norm_GJ) * (1 + 1e-6) + 1e-9);
      if (r.t == 1.0) CHECK(r.h0_diag <= 1e-12);
    }
  }

  TEST_CASE("flow operators refuse large d") {
    CHECK_THROWS_AS(build_flow_ops(ExpandingPolynomial::make_quadratic(3), 9, 0.0, 0.0), CapacityError);
  }
}
