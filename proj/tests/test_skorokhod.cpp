#include <gtest/gtest.h>

#include <hjhomog/core.hpp>
#include <hjhomog/skorokhod.hpp>

#include <random>

using namespace hjhomog;
using V2 = Vec<2>;

TEST(Sliding, Decomposition) {
  ScaledDomain<2> dom(ball_lattice<2>(0.3), 1.0, 1e-9);
  auto g = ObliqueField<2>::normal();
  V2 y(0.3, 0.0);
  V2 nu(-1, 0), tau(0, 1);
  auto a = sliding_decomposition(dom, g, y, V2(0, 2));
  EXPECT_EQ(a.l, 0.0);
  EXPECT_EQ(a.eta_dot, V2(0, 2));
  auto b = sliding_decomposition(dom, g, y, nu);
  EXPECT_NEAR(b.l, 1.0, 1e-14);
  EXPECT_NEAR(b.eta_dot.norm(), 0.0, 1e-14);
  double al = 0.4;
  auto c = sliding_decomposition(dom, g, y, V2(std::cos(al) * nu + std::sin(al) * tau));
  EXPECT_NEAR(c.l, std::cos(al), 1e-14);
  EXPECT_NEAR((c.eta_dot - std::sin(al) * tau).norm(), 0.0, 1e-14);
  EXPECT_NEAR(c.eta_dot.dot(nu), 0.0, 1e-14);
}

TEST(Sliding, DegenerateObliqueness) {
  ScaledDomain<2> dom(ball_lattice<2>(0.3), 1.0, 1e-9);
  auto bad = ObliqueField<2>::rotated(1.2);
  bad.rho = 0.9;
  EXPECT_THROW(sliding_decomposition(dom, bad, V2(0.3, 0), V2(-1, 0)), Error);
}

TEST(SolveSp, InteriorStraightLine) {
  ScaledDomain<2> dom(ball_lattice<2>(0.3), 1.0, 1e-9);
  auto g = ObliqueField<2>::normal();
  V2 x0(0.5, 0.5), v(0.1, -0.05);
  auto p = solve_sp(x0, ControlSignal<2>::constant(v, 0.01, 100), dom, g);
  for (std::size_t i = 0; i < p.eta.size(); ++i) EXPECT_NEAR((p.eta[i] - (x0 + 0.01 * i * v)).norm(), 0.0, 1e-12);
  for (double l : p.l) EXPECT_EQ(l, 0.0);
  auto r = residual(p, dom, g);
  EXPECT_LE(r.max_ode_defect, 1e-12);
  EXPECT_LE(r.max_complementarity, 1e-12);
  EXPECT_LE(r.max_psi_violation, 1e-12);
}

TEST(SolveSp, HalfSpaceSliding) {
  ScaledDomain<2> dom(half_space<2>(1), 1.0, 1e-9);
  auto g = ObliqueField<2>::normal();
  const double dt = 1e-3;
  auto p = solve_sp(V2(0, 0.1), ControlSignal<2>::constant(V2(1, -1), dt, 300), dom, g);
  for (std::size_t i = 0; i < p.l.size(); ++i) {
    double s = (i + 1) * dt;
    if (s > 0.1 + 2 * dt) {
      EXPECT_NEAR(p.l[i], 1.0, 1e-9);
      V2 d = (p.eta[i + 1] - p.eta[i]) / dt;
      EXPECT_NEAR((d - V2(1, 0)).norm(), 0.0, 1e-9);
    }
    if (s < 0.1 - 2 * dt) {
      EXPECT_EQ(p.l[i], 0.0);
    }
  }
  auto r = residual(p, dom, g);
  EXPECT_LE(r.max_ode_defect, 5 * dt);
  EXPECT_LE(r.max_psi_violation, dom.tol);
  EXPECT_LE(r.max_ratio_l_over_v, 1.0 + 10 * dt);
}

TEST(SolveSp, DiskContactAngleSlide) {
  ScaledDomain<2> dom(disk_complement<2>(1.0), 1.0, 1e-9);
  auto g = ObliqueField<2>::normal();
  const double th = 2 * kPi / 3;
  const double lstar = -std::cos(th) / (std::sin(th) * std::sin(th));
  const double speed = 1.0 / std::sin(th);
  EXPECT_NEAR(lstar, 2.0 / 3.0, 1e-14);
  EXPECT_NEAR(speed, 2.0 / std::sqrt(3.0), 1e-14);
  const double dt = 1e-4;
  ReflectedPath<2> p;
  p.dt = dt;
  p.eta = {V2(0, 1)};
  for (int i = 0; i < 5000; ++i) {
    V2 x = p.eta.back();
    V2 radial = x.normalized();
    V2 tau(-radial[1], radial[0]);
    V2 v = speed * tau - lstar * radial;
    auto s = sp_step(dom, g, x, v, dt);
    p.eta.push_back(s.next);
    p.l.push_back(s.l);
    p.v.push_back(v);
  }
  for (std::size_t i = 0; i < p.l.size(); ++i) {
    EXPECT_NEAR(p.eta[i + 1].norm(), 1.0, 1e-8);
    EXPECT_NEAR((p.eta[i + 1] - p.eta[i]).norm() / dt, speed, 1e-3);
    EXPECT_NEAR(p.l[i], lstar, 1e-3);
  }
  auto r = residual(p, dom, g);
  EXPECT_LE(r.max_ratio_l_over_v, 1.0 + 10 * dt);
  EXPECT_LE(r.max_psi_violation, dom.tol);
}

TEST(Residual, FlagsInteriorReflection) {
  ScaledDomain<2> dom(ball_lattice<2>(0.3), 1.0, 1e-9);
  auto g = ObliqueField<2>::normal();
  ReflectedPath<2> p;
  p.dt = 0.01;
  p.eta = {V2(0.5, 0.5), V2(0.5, 0.5)};
  p.l = {1.0};
  p.v = {V2(0, 0)};
  EXPECT_GT(residual(p, dom, g).max_complementarity, 0.0);
}

TEST(SolveSp, RejectsExteriorStart) {
  ScaledDomain<2> dom(ball_lattice<2>(0.3), 1.0, 1e-9);
  EXPECT_THROW(solve_sp(V2(0.1, 0), ControlSignal<2>::constant(V2(1, 0), 0.01, 3), dom, ObliqueField<2>::normal()),
               Error);
}

TEST(Properties, RandomPathsOnLattice) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-1, 1);
  for (double eps : {1.0, 0.25}) {
    ScaledDomain<2> dom(ball_lattice<2>(0.3), eps, 1e-9);
    for (auto g : {ObliqueField<2>::normal(), ObliqueField<2>::rotated(0.5)}) {
      for (int trial = 0; trial < 40; ++trial) {
        V2 x0(0.5 * eps, 0.5 * eps);
        const double dt = 0.002 * eps;
        auto c = ControlSignal<2>::sampled([&](double) { return V2(2 * U(rng), 2 * U(rng)); }, dt, 400);
        auto p = solve_sp(x0, c, dom, g);
        auto r = residual(p, dom, g);
        EXPECT_LE(r.max_psi_violation, dom.tol);
        EXPECT_LE(r.max_complementarity, 0.0);
        double C = g.is_normal ? 1.0 : g.reflection_bound();
        for (std::size_t i = 0; i < p.l.size(); ++i) EXPECT_LE(p.l[i], C * p.v[i].norm() + 10 * dt);
      }
    }
  }
}

namespace {

// Closed form on {x2 > 0}: gamma is nu rotated by alpha, v(s) = (1, -1 - s), x0 = (0, 0.1).
double exact_x1(double alpha, double T) {
  double s0 = -1 + std::sqrt(1.2);
  if (T <= s0) return T;
  double ta = std::tan(alpha);
  auto F = [&](double s) { return s - ta * (s + 0.5 * s * s); };
  return s0 + F(T) - F(s0);
}

}  // namespace

TEST(Properties, HalfSpaceConvergenceOrder) {
  const double alpha = 0.3, T = 0.5;
  ScaledDomain<2> dom(half_space<2>(1), 1.0, 1e-9);
  auto g = ObliqueField<2>::rotated(alpha);
  std::vector<double> dts{1e-2, 5e-3, 2.5e-3}, errs;
  for (double dt : dts) {
    int n = static_cast<int>(std::lround(T / dt));
    auto c = ControlSignal<2>::sampled([](double s) { return V2(1, -1 - s); }, dt, n);
    auto p = solve_sp(V2(0, 0.1), c, dom, g);
    double e = 0;
    for (int i = 0; i <= n; ++i) {
      double s = i * dt;
      double s0 = -1 + std::sqrt(1.2);
      V2 ex(exact_x1(alpha, s), s <= s0 ? 0.1 - s - 0.5 * s * s : 0.0);
      e = std::max(e, (p.eta[i] - ex).norm());
    }
    errs.push_back(e);
  }
  auto fit = fit_loglog(dts, errs);
  EXPECT_NEAR(fit.slope, 1.0, 0.2);
}

TEST(Properties, FlatWallConstantControlIsExact) {
  ScaledDomain<2> dom(half_space<2>(1), 1.0, 1e-9);
  auto g = ObliqueField<2>::normal();
  const double dt = 0.01;
  auto p = solve_sp(V2(0, 0.1), ControlSignal<2>::constant(V2(1, -1), dt, 50), dom, g);
  for (int i = 0; i <= 50; ++i) {
    double s = i * dt;
    V2 ex(s, std::max(0.0, 0.1 - s));
    EXPECT_NEAR((p.eta[i] - ex).norm(), 0.0, 1e-12);
  }
}
