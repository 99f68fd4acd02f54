#include <gtest/gtest.h>

#include <hjhomog/domain.hpp>

#include <random>

using namespace hjhomog;
using V2 = Vec<2>;

namespace {

ImplicitDomain<2> lattice03() { return ball_lattice<2>(0.3); }

}  // namespace

TEST(Classify, BallLatticeExamples) {
  auto d = lattice03();
  EXPECT_EQ(classify(d, V2(0.5, 0.5)), Region::Interior);
  EXPECT_EQ(classify(d, V2(0.3, 0.0)), Region::Boundary);
  EXPECT_EQ(classify(d, V2(0.1, 0.0)), Region::Exterior);
}

TEST(Normal, PointsIntoHole) {
  auto d = lattice03();
  auto n1 = normal(d, V2(0.3, 0.0));
  EXPECT_NEAR(n1[0], -1.0, 1e-12);
  EXPECT_NEAR(n1[1], 0.0, 1e-12);
  auto n2 = normal(d, V2(0.0, 0.3));
  EXPECT_NEAR(n2[0], 0.0, 1e-12);
  EXPECT_NEAR(n2[1], -1.0, 1e-12);
  double a = 0.3 / std::sqrt(2.0);
  auto n3 = normal(d, V2(a, a));
  EXPECT_NEAR(n3[0], -1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(n3[1], -1 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(n3.norm(), 1.0, 1e-14);
}

TEST(Normal, OffBoundaryThrows) {
  auto d = lattice03();
  try {
    normal(d, V2(0.5, 0.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotOnBoundary);
  }
}

TEST(Projection, Examples) {
  auto d = lattice03();
  V2 in(0.5, 0.4);
  EXPECT_EQ(project_to_closure(d, in), in);
  auto p1 = project_to_closure(d, V2(0.29, 0.0));
  EXPECT_NEAR(p1[0], 0.3, 1e-8);
  EXPECT_NEAR(p1[1], 0.0, 1e-8);
  V2 x(0.2, 0.1);
  V2 want = 0.3 * x / x.norm();
  auto p2 = project_to_closure(d, x);
  EXPECT_NEAR((p2 - want).norm(), 0.0, 1e-8);
  EXPECT_LE(std::abs(d.psi(p2)), d.boundary_tol);
}

TEST(Projection, DeepInsideHoleDiverges) {
  auto d = lattice03();
  try {
    project_to_closure(d, V2(0.0, 0.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProjectionDiverged);
  }
}

TEST(Projection, Idempotent) {
  auto d = lattice03();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int i = 0; i < 500; ++i) {
    V2 x(U(rng), U(rng));
    if (d.psi(x) > 0.25) continue;
    auto p = project_to_closure(d, x);
    auto q = project_to_closure(d, p);
    EXPECT_LE((p - q).norm(), 1e-10);
    EXPECT_LE(d.psi(p), d.boundary_tol);
  }
}

TEST(Properties, PeriodicityGradientObliqueness) {
  auto d = lattice03();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  std::uniform_int_distribution<int> Z(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    V2 y(U(rng), U(rng));
    V2 z(Z(rng), Z(rng));
    EXPECT_LE(std::abs(d.psi(y + z) - d.psi(y)), 1e-12);
  }
  auto rep = validate_domain(d, ObliqueField<2>::normal(), 9, 200);
  EXPECT_LE(rep.periodicity_defect, 1e-12);
  EXPECT_LE(rep.gradient_rel_error, 1e-5);
  EXPECT_GE(rep.min_obliqueness, 1.0 - 1e-12);
  auto rot = validate_domain(d, ObliqueField<2>::rotated(0.4), 9, 200);
  EXPECT_GE(rot.min_obliqueness, std::cos(0.4) - 1e-12);
}

TEST(Properties, ThreeDimensionalLattice) {
  auto d = ball_lattice<3>(0.25);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int i = 0; i < 200; ++i) {
    Vec<3> y(U(rng), U(rng), U(rng));
    EXPECT_LE(std::abs(d.psi(y + Vec<3>(1, -2, 3)) - d.psi(y)), 1e-12);
  }
  auto pts = boundary_sample<3>(d, Vec<3>::Zero(), 6);
  ASSERT_GE(pts.size(), 6u);
  for (const auto& p : pts) EXPECT_LE(std::abs(d.psi(p)), d.boundary_tol);
}

TEST(BoundarySample, CircleAndPeriodicCopy) {
  auto d = lattice03();
  auto pts = boundary_sample(d, V2(0, 0), 8);
  ASSERT_GE(pts.size(), 8u);
  for (const auto& p : pts) {
    EXPECT_NEAR(p.norm(), 0.3, 1e-9);
    EXPECT_LE(p.cwiseAbs().maxCoeff(), 0.5);
  }
  auto one = boundary_sample(d, V2(0, 0), 1);
  ASSERT_GE(one.size(), 1u);
  EXPECT_NEAR(one[0].norm(), 0.3, 1e-9);
  auto sh = boundary_sample(d, V2(1, 0), 4);
  ASSERT_GE(sh.size(), 4u);
  for (const auto& p : sh) EXPECT_NEAR((p - V2(1, 0)).norm(), 0.3, 1e-9);
}

TEST(BoundarySample, NoBoundaryThrows) {
  auto d = free_space<2>();
  try {
    boundary_sample(d, V2(0, 0), 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyBoundary);
  }
}

TEST(Scaled, MembershipMatchesUnitCell) {
  auto d = lattice03();
  ScaledDomain<2> s(d, 0.25, 1e-9);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int i = 0; i < 500; ++i) {
    V2 x(U(rng), U(rng));
    EXPECT_EQ(s.psi(x) < 0, d.psi(x / 0.25) < 0);
  }
}

TEST(External, ValidatesPlugin) {
  auto psi = [](const V2& y) {
    V2 f(y[0] - std::round(y[0]), y[1] - std::round(y[1]));
    return 0.2 - f.norm();
  };
  auto grad = [](const V2& y) {
    V2 f(y[0] - std::round(y[0]), y[1] - std::round(y[1]));
    return V2(-f / f.norm());
  };
  auto d = external_domain<2>(psi, grad, true, "disk0.2");
  EXPECT_EQ(classify(d, V2(0.2, 0)), Region::Boundary);
  auto bad_grad = [](const V2&) { return V2(1, 0); };
  EXPECT_THROW(external_domain<2>(psi, bad_grad, true, "bad"), Error);
}
