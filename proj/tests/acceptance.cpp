// Acceptance driver: `acceptance N` runs criterion N and prints one PASS/FAIL line.
#include <hjhomog/oracles.hpp>
#include <hjhomog/rate.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>

using namespace hjhomog;

namespace {

using V2 = Vec<2>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void info(const std::string& s) { std::cout << "  " << s << std::endl; }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool verdict(int id, bool ok, const std::string& detail) {
  std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
  return ok;
}

Scenario<2> quadratic_lattice() {
  return {ball_lattice<2>(0.3), Hamiltonian<2>::quadratic(ScalarField<2>::constant_field(0.0)),
          BoundaryCondition<2>::oblique(ScalarField<2>::constant_field(0.0)), InitialData<2>::sine(1.0 / (2 * kPi), 0)};
}

Scenario<2> structured_lattice(bool contact) {
  auto H = Hamiltonian<2>::quadratic(ScalarField<2>::harmonic(0.0, 0.3, 1, true));
  auto bc = contact ? BoundaryCondition<2>::contact_angle(0.6 * kPi)
                    : BoundaryCondition<2>::oblique(ScalarField<2>::harmonic(0.2, 0.1, 0, false));
  return {ball_lattice<2>(0.25), H, bc, InitialData<2>::sine(0.5, 0)};
}

SpaceTimeGrid<2> torus(double eps, double h, double vmax, double T) {
  SpaceTimeGrid<2> g;
  g.space = GridSpec<2>::box(V2(0, 0), V2(1, 1), h, {true, true});
  g.dt = h / vmax;
  g.steps = static_cast<int>(std::lround(T / g.dt));
  g.eps = eps;
  return g;
}

ControlNet<2> net(double vmax, int speeds = 8) {
  return ControlNet<2>::polar(32, ControlNet<2>::uniform_speeds(vmax, speeds), 4, vmax);
}

MetricOptions<2> metric_opts(double h, double vmax) {
  MetricOptions<2> o;
  o.h = h;
  o.net = net(vmax);
  o.record_path = false;
  return o;
}

double golden_argmax(double theta) {
  const long double c = std::cos(static_cast<long double>(theta));
  auto f = [c](long double l) { return (1 - l * c) * (1 - l * c) - l * l; };
  long double a = 0.0L, b = 50.0L;
  const long double g = (std::sqrt(5.0L) - 1) / 2;
  long double x1 = b - g * (b - a), x2 = a + g * (b - a);
  long double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 400 && b - a > 1e-16L; ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    }
  }
  return static_cast<double>(0.5L * (a + b));
}

// Eikonal flow outside the unit disk, theta = pi/2, u0 = x1 + 2, h = dt = 1/64.
bool criterion1() {
  auto t0 = Clock::now();
  Scenario<2> sc{disk_complement<2>(1.0), Hamiltonian<2>::eikonal(), BoundaryCondition<2>::contact_angle(kPi / 2),
                 InitialData<2>::linear(V2(1, 0), 2)};
  const double h = 1.0 / 64, T = 3.0;
  SpaceTimeGrid<2> g;
  g.space = GridSpec<2>::box(V2(-2.5, -3.0), V2(5.5, 4.0), h);
  g.dt = h;
  g.steps = static_cast<int>(std::lround(T / h));
  SolverOptions o;
  o.store_levels = {g.steps};
  o.roi = std::make_pair(std::vector<double>{0.5, 0.0}, std::vector<double>{2.5, 1.0});
  DpEngine<2> eng(sc, g, ControlNet<2>::polar(64, {1.0}, 8, 1.0), o);
  auto f = eng.run(eng.sample(sc.u0.eval));
  const double tol = 3 * (h + g.dt) * sc.u0.lipschitz;
  std::vector<V2> probes{V2(1, 0.5), V2(1.5, 0.2), V2(1.2, 0.8), V2(1.4, 0.6), V2(1.0, 0.2),
                         V2(2.0, 0.5), V2(1.1, 0.0), V2(0.5, 0.9), V2(1.8, 1.0), V2(2.5, 0.3)};
  double worst_printed = 0, worst_geo = 0;
  for (const auto& x : probes) {
    double v = eng.interpolate(f.at_level(g.steps), x);
    double p = disk_value_theta_half(x, T);
    double q = disk_value_geodesic(x, T);
    worst_printed = std::max(worst_printed, std::abs(v - p));
    worst_geo = std::max(worst_geo, std::abs(v - q));
    info("x=(" + num(x[0]) + "," + num(x[1]) + ") t=3 dp=" + num(v) + " printed=" + num(p) + " geodesic=" + num(q));
  }
  double secs = seconds_since(t0);
  info("max |dp - geodesic| = " + num(worst_geo) + " (tolerance " + num(tol) + ")");
  bool ok = worst_printed <= tol && secs <= 120;
  return verdict(1, ok,
                 "max |dp - printed closed form| = " + num(worst_printed) + " tol " + num(tol) + ", runtime " +
                     num(secs) + " s");
}

// Boundary-sliding minimizer on a flat wall with contact angle theta.
bool criterion2() {
  bool ok = true;
  std::string detail;
  for (double f : {0.6, 0.7, 0.8}) {
    double th = f * kPi;
    Scenario<2> sc{half_space<2>(1), Hamiltonian<2>::eikonal(), BoundaryCondition<2>::contact_angle(th),
                   InitialData<2>::linear(V2(1, 0), 0)};
    const double h = 1.0 / 32, T = 1.0;
    SpaceTimeGrid<2> g;
    g.space = GridSpec<2>::box(V2(-3.25, -1.25), V2(3.25, 1.25), h);
    g.dt = h;
    g.steps = static_cast<int>(std::lround(T / h));
    SolverOptions o;
    o.roi = std::make_pair(std::vector<double>{-0.5, 0.0}, std::vector<double>{0.5, 0.25});
    DpEngine<2> eng(sc, g, ControlNet<2>::polar(64, {1.0}, 8, 1.0), o);
    auto fld = eng.run(eng.sample(sc.u0.eval));
    V2 x(0, 0);
    double v = eng.interpolate(fld.at_level(g.steps), x);
    double speed = (x[0] - v) / T;
    auto path = extract_path(eng, fld, g.steps, x);
    double lsum = 0;
    int ln = 0;
    for (double l : path.l)
      if (l > 0) {
        lsum += l;
        ++ln;
      }
    double lbar = ln ? lsum / ln : 0.0;
    double lstar = optimal_reflection(th), sstar = sliding_speed(th);
    double el = std::abs(lbar - lstar) / lstar, es = std::abs(speed - sstar) / sstar;
    double lg = golden_argmax(th);
    double c = std::cos(th);
    double sg = std::sqrt((1 - lg * c) * (1 - lg * c) - lg * lg);
    double eg = std::max(std::abs(lg - lstar), std::abs(sg - sstar));
    bool good = el <= 0.05 && es <= 0.02 && eg <= 1e-8 && ln > 0;
    ok = ok && good;
    info("theta=" + num(f) + "pi l=" + num(lbar) + " (exact " + num(lstar) + ", rel " + num(el) + ") speed=" +
         num(speed) + " (exact " + num(sstar) + ", rel " + num(es) + ") golden-section gap " + num(eg) +
         " boundary steps " + std::to_string(ln) + "/" + std::to_string(path.l.size()));
    detail += num(f) + "pi: dl " + num(el) + " ds " + num(es) + "; ";
  }
  return verdict(2, ok, detail + "limits 5% / 2% / 1e-8");
}

// Closed form of L_C against the numeric supremum, and the two-sided bound.
bool criterion3() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0, 1);
  auto pot = ScalarField<2>::harmonic(0.0, 0.3, 0, true);
  double worst = 0, sandwich = 0;
  const int total = 1000;
  for (int i = 0; i < total; ++i) {
    double th = (0.5 + 0.45 * U(rng)) * kPi;
    LagrangianEvaluator<2> ev(Hamiltonian<2>::quadratic(pot), BoundaryCondition<2>::contact_angle(th));
    double K0 = ev.hamiltonian().K0;
    double a = 2 * kPi * U(rng);
    V2 v = 3 * U(rng) * V2(std::cos(a), std::sin(a));
    double l = 3 * U(rng);
    V2 y(U(rng), U(rng));
    double num_sup = ev.lagrangian_C_numeric(y, -v, -l);
    double cf = ev.lagrangian_C(y, -v, -l);
    double r = std::max(v.norm() + std::cos(th) * l, 0.0);
    double pure = 0.5 * r * r;
    worst = std::max(worst, std::abs(num_sup - cf));
    worst = std::max(worst, std::abs(cf - (pure - pot(y))));
    sandwich = std::max(sandwich, std::max(pure - K0 - num_sup, num_sup - pure - K0));
  }
  bool ok = worst <= 1e-6 && sandwich <= 1e-6;
  return verdict(3, ok,
                 std::to_string(total) + " triples: max |closed - numeric| = " + num(worst) +
                     ", max sandwich violation = " + num(sandwich) + " (limit 1e-6)");
}

double exact_x1(double alpha, double T) {
  double s0 = -1 + std::sqrt(1.2);
  if (T <= s0) return T;
  double ta = std::tan(alpha);
  auto F = [&](double s) { return s - ta * (s + 0.5 * s * s); };
  return s0 + F(T) - F(s0);
}

// Reflected-path contracts on random controls plus the half-space order.
bool criterion4() {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-1, 1);
  double psi = -1, comp = -1, ratio_excess = -1e300;
  int paths = 0;
  auto run = [&](const ScaledDomain<2>& dom, const ObliqueField<2>& g, const V2& x0, double dt) {
    auto c = ControlSignal<2>::sampled([&](double) { return V2(2 * U(rng), 2 * U(rng)); }, dt, 400);
    auto p = solve_sp(x0, c, dom, g);
    auto r = residual(p, dom, g);
    psi = std::max(psi, r.max_psi_violation - dom.tol);
    comp = std::max(comp, r.max_complementarity);
    if (g.is_normal)
      for (std::size_t i = 0; i < p.l.size(); ++i) ratio_excess = std::max(ratio_excess, p.l[i] - p.v[i].norm() - 10 * dt);
    ++paths;
  };
  for (double eps : {1.0, 0.25}) {
    ScaledDomain<2> dom(ball_lattice<2>(0.3), eps, 1e-9);
    for (auto g : {ObliqueField<2>::normal(), ObliqueField<2>::rotated(0.5)})
      for (int k = 0; k < 50; ++k) run(dom, g, V2(0.5 * eps, 0.5 * eps), 0.002 * eps);
  }
  ScaledDomain<2> disk(disk_complement<2>(1.0), 1.0, 1e-9);
  for (int k = 0; k < 50; ++k) run(disk, ObliqueField<2>::normal(), V2(1.5, 0.0), 0.005);
  ScaledDomain<2> half(half_space<2>(1), 1.0, 1e-9);
  for (int k = 0; k < 50; ++k) run(half, ObliqueField<2>::normal(), V2(0.0, 0.2), 0.005);

  const double alpha = 0.3, T = 0.5;
  auto g = ObliqueField<2>::rotated(alpha);
  std::vector<double> dts{1e-2, 5e-3, 2.5e-3}, errs;
  for (double dt : dts) {
    int n = static_cast<int>(std::lround(T / dt));
    auto c = ControlSignal<2>::sampled([](double s) { return V2(1, -1 - s); }, dt, n);
    auto p = solve_sp(V2(0, 0.1), c, half, g);
    double e = 0;
    for (int i = 0; i <= n; ++i) {
      double s = i * dt;
      double s0 = -1 + std::sqrt(1.2);
      V2 ex(exact_x1(alpha, s), s <= s0 ? 0.1 - s - 0.5 * s * s : 0.0);
      e = std::max(e, (p.eta[i] - ex).norm());
    }
    errs.push_back(e);
  }
  double order = fit_loglog(dts, errs).slope;
  bool ok = psi <= 0 && comp <= 0 && ratio_excess <= 0 && std::abs(order - 1.0) <= 0.2;
  return verdict(4, ok,
                 std::to_string(paths) + " paths: containment excess " + num(std::max(psi, 0.0)) +
                     ", complementarity " + num(std::max(comp, 0.0)) + ", max l - |v| - 10dt = " +
                     num(ratio_excess) + "; half-space order " + num(order) + " (1.0 +- 0.2)");
}

// Time bound, constant shift, dynamic programming residual and comparison.
bool criterion5() {
  bool ok = true;
  std::string detail;
  const double h = 1.0 / 32, vmax = 2.0, T = 0.25;
  double worst_bound = -1e300, shift = 0, dpp_ratio = 0;
  int ordered = 0, pairs = 0;
  for (bool contact : {true, false}) {
    auto sc = structured_lattice(contact);
    auto g = torus(0.25, h, vmax, T);
    auto f = solve_value(sc, g, net(vmax));
    auto [up, lo] = time_bound_constants(sc, sc.u0.lipschitz);
    const double C = std::max(up, lo);
    for (std::size_t s = 1; s < f.levels.size(); ++s) {
      double t = f.time(f.levels[s]);
      for (std::size_t i = 0; i < g.space.size(); ++i)
        if (f.admissible[i])
          worst_bound = std::max(worst_bound, std::abs(f.values[s][i] - sc.u0(g.space.node(i))) - C * t);
    }
    auto sc1 = sc;
    sc1.u0 = sc.u0.shifted(1.0);
    auto f1 = solve_value(sc1, g, net(vmax));
    for (std::size_t s = 0; s < f.levels.size(); ++s)
      for (std::size_t i = 0; i < g.space.size(); ++i)
        if (f.admissible[i]) shift = std::max(shift, std::abs(f1.values[s][i] - f.values[s][i] - 1.0));
    auto [lx, lt] = discrete_lipschitz(f);
    double lip = std::max(lx, lt);
    double r = dpp_residual(sc, net(vmax), f, 2 * g.dt).abs_max;
    dpp_ratio = std::max(dpp_ratio, r / (2 * (h + g.dt) * lip));
    info(std::string(contact ? "contact" : "oblique") + ": dpp(2dt) = " + num(r) + " vs " +
         num(2 * (h + g.dt) * lip) + " (Lip " + num(lip) + "), C = " + num(C));

    auto base = sc.u0;
    std::vector<std::pair<InitialData<2>, InitialData<2>>> plan{
        {base, base.shifted(1.0)},
        {base, base.plus(InitialData<2>::sine(0.2, 1, 1.0, 0.2))},
        {base, base.plus(InitialData<2>::sine(0.1, 0, 0.5, 0.1))},
        {InitialData<2>::sine(0.3, 1), InitialData<2>::sine(0.3, 1).shifted(0.01)},
        {InitialData<2>::sine(0.5, 0, 1.0, -1.0), InitialData<2>::sine(0.6, 0)}};
    for (auto& [a, b] : plan) {
      auto sa = sc, sb = sc;
      sa.u0 = a;
      sb.u0 = b;
      auto fa = solve_value(sa, g, net(vmax));
      auto fb = solve_value(sb, g, net(vmax));
      bool init_ordered = true;
      for (std::size_t i = 0; i < g.space.size(); ++i)
        if (fa.admissible[i] && fa.values[0][i] > fb.values[0][i]) init_ordered = false;
      ++pairs;
      if (init_ordered && discrete_comparison(fa, fb)) ++ordered;
    }
  }
  ok = worst_bound <= 1e-12 && shift <= 1e-12 && dpp_ratio <= 1.0 && ordered == pairs;
  detail = "max(|V-u0| - Ct) = " + num(worst_bound) + ", shift error " + num(shift) + ", dpp(2dt)/limit " +
           num(dpp_ratio) + ", comparison " + std::to_string(ordered) + "/" + std::to_string(pairs);
  return verdict(5, ok, detail);
}

// Additivity plan, triangle and star-difference constants, free-space floor.
bool criterion6() {
  auto sc = quadratic_lattice();
  auto o = metric_opts(1.0 / 16, 2.0);
  std::vector<std::pair<double, V2>> plan;
  for (double t : {1.0, 2.0, 4.0})
    for (double y : {0.5, 1.0, 1.5}) plan.push_back({t, V2(y, 0)});
  auto r = check_additivity<2>(sc, plan, o);
  std::map<double, double> per_t;
  for (const auto& s : r.samples) {
    double d = std::max(std::abs(s.sub_defect), std::abs(s.super_defect));
    per_t[s.t] = std::max(per_t[s.t], d);
    info("t=" + num(s.t) + " y=" + num(s.y[0]) + " m*(t)=" + num(s.m_t) + " m*(2t)=" + num(s.m_2t) +
         " sub=" + num(s.sub_defect) + " super=" + num(s.super_defect));
  }
  double C = std::max(std::abs(r.max_sub_defect), std::abs(r.max_super_defect));
  bool finite = std::isfinite(C) && C < kSentinel / 2;
  bool t_uniform = per_t[4.0] <= per_t[1.0] + 4 * o.h;
  info("C over plan = " + num(C) + "; row maxima t=1: " + num(per_t[1.0]) + " t=2: " + num(per_t[2.0]) +
       " t=4: " + num(per_t[4.0]));

  std::vector<TripleSample<2>> triples;
  for (auto [t, tau] : {std::pair{1.0, 1.0}, {1.0, 2.0}, {2.0, 1.0}}) {
    TripleSample<2> s;
    s.t = t;
    s.tau = tau;
    s.x = V2(0, 0);
    s.y = V2(0.5 * t, 0.25 * t);
    s.z = V2(s.y[0] + 0.5 * tau, s.y[1]);
    triples.push_back(s);
  }
  auto tri = check_triangle<2>(sc, triples, o);
  info("triangle constant = " + num(tri.C));

  std::vector<std::tuple<double, V2, V2>> diff;
  for (double t : {1.0, 2.0, 4.0}) diff.emplace_back(t, V2(0.5, 0.5), V2(0.5 + 0.5 * t, 0.5));
  for (double t : {1.0, 2.0}) diff.emplace_back(t, V2(0.5, 0), V2(0.5 + t, 0));
  auto dm = check_star_difference<2>(sc, diff, o);
  info("star difference constant = " + num(dm.C));

  Scenario<2> fs{free_space<2>(), Hamiltonian<2>::quadratic(), BoundaryCondition<2>::oblique(ScalarField<2>::constant_field(0)),
                 InitialData<2>::linear(V2(0, 0), 0)};
  auto fo = metric_opts(1.0 / 16, 2.0);
  auto rf = check_additivity<2>(fs, plan, fo);
  double floor_defect = std::max(std::abs(rf.max_sub_defect), std::abs(rf.max_super_defect));
  info("free-space defect = " + num(floor_defect) + " (floor " + num(4 * fo.h) + ")");

  bool ok = finite && t_uniform && std::isfinite(tri.C) && tri.C < kSentinel / 2 && std::isfinite(dm.C) &&
            dm.C < kSentinel / 2 && floor_defect <= 4 * fo.h;
  return verdict(6, ok,
                 "additivity C = " + num(C) + " (t=4 row " + num(per_t[4.0]) + " vs t=1 row " + num(per_t[1.0]) +
                     "), triangle C = " + num(tri.C) + ", star difference C = " + num(dm.C) +
                     ", free-space defect " + num(floor_defect));
}

// Doubling gaps of the effective metric and the metric rate in epsilon.
bool criterion7() {
  auto sc = quadratic_lattice();
  auto o = metric_opts(1.0 / 16, 2.0);
  V2 x(0, 0), y(0.5, 0);
  auto r = metric_rate_check<2>(sc, 1.0, x, y, {0.5, 0.25, 0.125}, 4, o);
  const auto& e = r.effective;
  bool halves = true;
  std::string ratios;
  for (std::size_t i = 0; i < e.a.size(); ++i) info("k=" + std::to_string(e.ks[i]) + " a_k=" + num(e.a[i]));
  // gaps[i] is the cauchy gap at depth i + 1; depths start at 2.
  for (std::size_t i = 2; i < e.gaps.size(); ++i) {
    double q = e.gaps[i] / e.gaps[i - 1];
    ratios += num(q) + " ";
    if (std::abs(q - 0.5) > 0.35 * 0.5) halves = false;
  }
  info("limit " + num(r.limit) + " (raw " + num(e.raw) + ")");
  for (std::size_t i = 0; i < r.epsilons.size(); ++i)
    info("eps=" + num(r.epsilons[i]) + " eps m* = " + num(r.scaled[i]) + " gap " + num(r.gaps[i]));
  bool slope_ok = std::abs(r.slope - 1.0) <= 0.25;
  return verdict(7, halves && slope_ok,
                 "gap ratios " + ratios + "(0.5 +- 35%), metric-rate slope " + num(r.slope) + " (1.0 +- 0.25)");
}

bool criterion8() {
  auto t0 = Clock::now();
  auto sc = quadratic_lattice();
  RateOptions<2> o;
  o.throw_on_resolution = false;
  auto probes = lattice_probes<2>(40, 1);
  auto r = run_rate_experiment(sc, {0.25, 0.125, 0.0625, 0.03125}, probes, o);
  double worst_change = 0;
  for (std::size_t i = 0; i < r.errors.size(); ++i) {
    info("eps=" + num(r.epsilons[i]) + " h=" + num(r.resolutions[i].h) + " error " + num(r.errors[i]) +
         " control " + num(r.control_errors[i]) + " change " + num(r.control_change[i]));
    worst_change = std::max(worst_change, r.control_change[i]);
  }
  double secs = seconds_since(t0);
  info("table cauchy gap " + num(r.table_gap) + ", C_fit " + num(r.C_fit) + ", runtime " + num(secs) + " s");
  bool ok = r.monotone && r.slope >= 0.8 && r.resolution_ok && !r.degenerate && secs <= 1800;
  return verdict(8, ok,
                 std::string("monotone ") + (r.monotone ? "yes" : "no") + ", slope " + num(r.slope) +
                     " (>= 0.8), max control change " + num(worst_change) + " (< 0.25), runtime " + num(secs) +
                     " s");
}

bool criterion9() {
  bool ok = true;
  std::string detail;
  for (bool contact : {false, true}) {
    auto sc = quadratic_lattice();
    if (contact) sc.bc = BoundaryCondition<2>::contact_angle(0.6 * kPi);
    for (double eps : {0.25, 0.125}) {
      RateOptions<2> o;
      o.h_rel = 1.0 / 8;
      auto probes = lattice_probes<2>(30, 9, eps);
      auto r = small_time_check(sc, eps, probes, o);
      ok = ok && r.ok;
      detail += std::string(contact ? "contact" : "oblique") + " eps " + num(eps) + ": " + num(r.worst_ratio) + " <= " +
                num(r.C) + "; ";
    }
  }
  return verdict(9, ok, "max |u - u0|/t vs C: " + detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  bool all = true;
  for (int c : which) {
    try {
      bool ok = false;
      switch (c) {
        case 1: ok = criterion1(); break;
        case 2: ok = criterion2(); break;
        case 3: ok = criterion3(); break;
        case 4: ok = criterion4(); break;
        case 5: ok = criterion5(); break;
        case 6: ok = criterion6(); break;
        case 7: ok = criterion7(); break;
        case 8: ok = criterion8(); break;
        case 9: ok = criterion9(); break;
        default: std::cerr << "unknown criterion " << c << "\n"; return 2;
      }
      all = all && ok;
    } catch (const Error& e) {
      verdict(c, false, std::string("error: ") + e.what());
      all = false;
    }
  }
  return all ? 0 : 1;
}
