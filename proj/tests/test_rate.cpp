#include <hjhomog/rate.hpp>

#include <gtest/gtest.h>

using namespace hjhomog;

namespace {

Scenario<2> lattice(InitialData<2> u0) {
  return {ball_lattice<2>(0.3), Hamiltonian<2>::quadratic(), BoundaryCondition<2>::oblique(ScalarField<2>::constant_field(0)),
          std::move(u0)};
}

}  // namespace

TEST(Rate, LatticeProbesAvoidHoles) {
  auto probes = lattice_probes<2>(60, 5);
  ASSERT_EQ(probes.size(), 60u);
  auto dom = ball_lattice<2>(0.3);
  for (double eps : {0.25, 0.125, 0.0625, 0.03125}) {
    ScaledDomain<2> d(dom, eps, 1e-9);
    for (const auto& p : probes) {
      EXPECT_LT(d.psi(p.x), 0.0) << p.x.transpose() << " eps=" << eps;
      EXPECT_GE(p.t, 0.25);
      EXPECT_LE(p.t, 1.0);
    }
  }
  auto again = lattice_probes<2>(60, 5);
  for (std::size_t i = 0; i < probes.size(); ++i) EXPECT_EQ(probes[i].x, again[i].x);
}

TEST(Rate, DegenerateWithoutPerforation) {
  Scenario<2> sc{free_space<2>(), Hamiltonian<2>::quadratic(), BoundaryCondition<2>::oblique(ScalarField<2>::constant_field(0)),
                 InitialData<2>::linear(Vec<2>(0.5, 0.0), 0.0)};
  RateOptions<2> o;
  o.h_rel = 1.0 / 8;
  o.T = 0.5;
  auto probes = lattice_probes<2>(10, 2, 0.5);
  auto r = run_rate_experiment(sc, {0.25, 0.125}, probes, o);
  EXPECT_TRUE(r.degenerate);
  for (double e : r.errors) EXPECT_LE(e, 1e-9);
  EXPECT_EQ(r.slope, 0.0);
  EXPECT_TRUE(r.resolution_ok);
  ASSERT_EQ(r.resolutions.size(), 2u);
  EXPECT_DOUBLE_EQ(r.resolutions[1].h, 0.125 / 8);
}

TEST(Rate, LadderValidation) {
  auto sc = lattice(InitialData<2>::sine(1 / (2 * kPi), 0));
  RateOptions<2> o;
  o.control_run = false;
  EXPECT_THROW(run_rate_experiment(sc, {0.125, 0.25}, lattice_probes<2>(4, 1), o), Error);
  std::vector<Probe<2>> bad{{Vec<2>(0.0, 0.0), 0.5}};
  try {
    run_rate_experiment(sc, {0.25}, bad, o);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}

TEST(Rate, SmallTimeBound) {
  auto sc = lattice(InitialData<2>::sine(1 / (2 * kPi), 0));
  sc.bc = BoundaryCondition<2>::contact_angle(0.6 * kPi);
  RateOptions<2> o;
  std::vector<Probe<2>> probes;
  for (auto p : lattice_probes<2>(20, 9)) probes.push_back({p.x, 0.25 * p.t});
  auto r = small_time_check(sc, 0.25, probes, o);
  EXPECT_TRUE(r.ok) << r.worst_ratio << " vs " << r.C;
  EXPECT_GT(r.worst_ratio, 0.0);
  std::vector<Probe<2>> late{{Vec<2>(0.5, 0.5), 0.5}};
  EXPECT_THROW(small_time_check(sc, 0.25, late, o), Error);
}

TEST(Rate, MetricRateFreeSpaceExactScaling) {
  Scenario<2> sc{free_space<2>(), Hamiltonian<2>::quadratic(), BoundaryCondition<2>::oblique(ScalarField<2>::constant_field(0)),
                 InitialData<2>::linear(Vec<2>(0, 0), 0.0)};
  MetricOptions<2> mo;
  mo.h = 1.0 / 8;
  mo.record_path = false;
  auto r = metric_rate_check(sc, 1.0, Vec<2>(0, 0), Vec<2>(0.5, 0.0), {0.5, 0.25}, 2, mo);
  for (double g : r.gaps) EXPECT_LE(g, 0.02);
  EXPECT_NEAR(r.limit, 0.125, 0.02);
}
