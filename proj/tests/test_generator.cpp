#include <doctest.h>

#include "generator.hpp"
#include "helpers.hpp"

using namespace yaglom;
using Eigen::MatrixXd;

TEST_CASE("two-phase generator blocks at s = 0 and shifted s") {
  FluidModel m = testing::two_phase(3, 1);
  GeneratorBlocks g0 = q_blocks(m, 0.0);
  CHECK(g0.Q11(0, 0) == doctest::Approx(-3.0));
  CHECK(g0.Q12(0, 0) == doctest::Approx(3.0));
  CHECK(g0.Q21(0, 0) == doctest::Approx(1.0));
  CHECK(g0.Q22(0, 0) == doctest::Approx(-1.0));
  CHECK(g0.R00.size() == 0);

  // Affine in s without zero-rate phases: the diagonal shifts by -s.
  GeneratorBlocks g = q_blocks(m, -0.1);
  CHECK(g.Q11(0, 0) == doctest::Approx(-2.9));
  CHECK(g.Q22(0, 0) == doctest::Approx(-0.9));
  CHECK(g.Q12(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("three-phase generator blocks at s = 0") {
  FluidModel m = testing::three_phase(2.5);
  GeneratorBlocks g = q_blocks(m, 0.0);
  CHECK(g.Q11(0, 0) == doctest::Approx(-5.0));
  CHECK(g.Q12(0, 0) == doctest::Approx(5.0));
  CHECK(g.Q12(0, 1) == doctest::Approx(0.0));
  CHECK(g.Q21(0, 0) == doctest::Approx(1.0));
  CHECK(g.Q21(1, 0) == doctest::Approx(0.0));
  CHECK(g.Q22(0, 0) == doctest::Approx(-3.5));
  CHECK(g.Q22(0, 1) == doctest::Approx(2.5));
  CHECK(g.Q22(1, 0) == doctest::Approx(2.0));
  CHECK(g.Q22(1, 1) == doctest::Approx(-2.0));
}

TEST_CASE("derivative blocks without zero-rate phases are the rate inverses") {
  FluidModel m = testing::two_phase(3, 1);
  DerivativeBlocks d = a_blocks(m, -0.2);
  CHECK(d.A11(0, 0) == doctest::Approx(1.0));
  CHECK(d.A22(0, 0) == doctest::Approx(1.0));
  CHECK(d.A12.cwiseAbs().maxCoeff() == 0.0);
  CHECK(d.A21.cwiseAbs().maxCoeff() == 0.0);

  FluidModel m3 = testing::three_phase(2.5);
  DerivativeBlocks d3 = a_blocks(m3, 0.0);
  CHECK((d3.A11 - MatrixXd::Identity(1, 1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d3.A22 - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero-rate model: resolvent properties and admissibility") {
  FluidModel m = testing::zero_rate_model();
  REQUIRE(m.n0 == 1);
  double floor = s_admissible_floor(m);
  CHECK(floor == doctest::Approx(-1.2));  // T00 = [-1.2]

  GeneratorBlocks g = q_blocks(m, -0.5);
  CHECK(g.R00.minCoeff() >= 0.0);
  CHECK(g.Q12.minCoeff() >= 0.0);
  CHECK(g.Q21.minCoeff() >= 0.0);
  CHECK_THROWS_AS(q_blocks(m, -1.5), NumericalError);
  CHECK_THROWS_AS(a_blocks(m, -1.2), NumericalError);
}

TEST_CASE("derivative blocks match finite differences of the generator blocks") {
  FluidModel m = testing::zero_rate_model();
  const double h = 1e-6;
  for (double s : {-1.0, -0.25, 0.5}) {
    GeneratorBlocks lo = q_blocks(m, s);
    GeneratorBlocks hi = q_blocks(m, s + h);
    DerivativeBlocks d = a_blocks(m, s);
    auto rel = [](const MatrixXd& got, const MatrixXd& want) {
      return (got - want).cwiseAbs().maxCoeff() / std::max(1.0, want.cwiseAbs().maxCoeff());
    };
    CHECK(rel((lo.Q11 - hi.Q11) / h, d.A11) <= 1e-4);
    CHECK(rel((lo.Q12 - hi.Q12) / h, d.A12) <= 1e-4);
    CHECK(rel((lo.Q21 - hi.Q21) / h, d.A21) <= 1e-4);
    CHECK(rel((lo.Q22 - hi.Q22) / h, d.A22) <= 1e-4);
  }
}

TEST_CASE("derivative blocks are entrywise nonnegative") {
  FluidModel m = testing::zero_rate_model();
  for (double s : {-2.0, -1.0, 0.0, 1.0}) {
    DerivativeBlocks d = a_blocks(m, s);
    CHECK(d.A11.minCoeff() >= 0.0);
    CHECK(d.A22.minCoeff() >= 0.0);
    CHECK(d.A12.minCoeff() >= 0.0);
    CHECK(d.A21.minCoeff() >= 0.0);
    CHECK(d.A11.diagonal().minCoeff() > 0.0);
    CHECK(d.A22.diagonal().minCoeff() > 0.0);
  }
}
