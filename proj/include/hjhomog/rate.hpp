#pragma once

#include "metric.hpp"

namespace hjhomog {

template <int N>
struct Probe {
  Vec<N> x;
  double t = 0.0;
};

template <int N>
struct RateOptions {
  double h_rel = 1.0 / 16;  // h = h_rel * eps
  double T = 1.0;
  ControlNet<N> net = ControlNet<N>::polar(32, ControlNet<N>::uniform_speeds(4.0, 16), 4, 4.0);
  int depth = 4;
  double q_max = 1.25;
  double q_step = 1.0 / 16;
  bool axis_table = true;  // tabulate L-bar on the q1 axis only
  bool control_run = true;
  bool control_table = false;  // recompute L-bar at the control resolution too
  double control_tolerance = 0.25;
  int workers = 1;
  int boundary_samples = 32;
  double floor = 1e-9;
  bool throw_on_resolution = true;
};

struct Resolution {
  double h = 0, dt = 0;
};

template <int N>
struct RateReport {
  std::vector<double> epsilons;
  std::vector<double> errors;
  std::vector<double> control_errors;
  std::vector<double> control_change;
  std::vector<Resolution> resolutions;
  std::vector<Probe<N>> probes;
  double slope = 0.0;
  double C_fit = 0.0;
  bool degenerate = false;
  bool monotone = true;
  bool resolution_ok = true;
  double table_gap = 0.0;
  double control_table_gap = 0.0;
};

// Probes x1 = m/12 (m not divisible by 3), x2 on hole rows, t in [1/4, 1].
template <int N>
std::vector<Probe<N>> lattice_probes(int count, unsigned seed, double T = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<int> ms;
  for (int m = 1; m < 12; ++m)
    if (m % 3) ms.push_back(m);
  std::uniform_int_distribution<std::size_t> M(0, ms.size() - 1);
  std::uniform_int_distribution<int> R(0, 3), Tq(1, 4);
  std::vector<Probe<N>> out;
  for (int i = 0; i < count; ++i) {
    Probe<N> p;
    p.x = Vec<N>::Zero();
    p.x[0] = ms[M(rng)] / 12.0;
    for (int a = 1; a < N; ++a) p.x[a] = R(rng) / 4.0;
    p.t = T * Tq(rng) / 4.0;
    out.push_back(p);
  }
  return out;
}

// Window for u^eps: one-cell torus along axes where u0 is constant, period torus where compatible.
template <int N>
SpaceTimeGrid<N> rate_grid(const Scenario<N>& sc, double eps, double h, double dt, double T,
                           const std::vector<Probe<N>>& probes, double reach, SolverOptions& so) {
  SpaceTimeGrid<N> g;
  Vec<N> lo, hi;
  std::array<bool, N> per{};
  std::vector<double> rlo(N), rhi(N);
  for (int a = 0; a < N; ++a) {
    double p = sc.u0.period[a];
    if (sc.u0.constant_along[a]) {
      lo[a] = 0;
      hi[a] = eps;
      per[a] = true;
    } else if (p > 0 && std::abs(p / eps - std::round(p / eps)) < 1e-9) {
      lo[a] = 0;
      hi[a] = p;
      per[a] = true;
    } else {
      double mn = probes[0].x[a], mx = mn;
      for (const auto& q : probes) {
        mn = std::min(mn, q.x[a]);
        mx = std::max(mx, q.x[a]);
      }
      lo[a] = std::floor((mn - reach) / eps) * eps;
      hi[a] = std::ceil((mx + reach) / eps) * eps;
      rlo[a] = mn;
      rhi[a] = mx;
    }
  }
  g.space = GridSpec<N>::box(lo, hi, h, per);
  g.dt = dt;
  g.steps = static_cast<int>(std::lround(T / dt));
  g.eps = eps;
  so.roi = std::make_pair(rlo, rhi);
  return g;
}

template <int N>
EffectiveLagrangian<N> rate_table(const Scenario<N>& sc, const RateOptions<N>& opt, double h_rel) {
  MetricOptions<N> mo;
  mo.h = h_rel;
  mo.dt = h_rel / opt.net.vmax();
  mo.net = opt.net;
  mo.workers = opt.workers;
  mo.boundary_samples = opt.boundary_samples;
  mo.record_path = false;
  mo.budget = 4e8;
  int n = static_cast<int>(std::lround(opt.q_max / opt.q_step));
  GridSpec<N> q;
  q.h = opt.q_step;
  for (int a = 0; a < N; ++a) {
    bool full = !opt.axis_table || a == 0;
    q.lo[a] = full ? -n * opt.q_step : 0.0;
    q.dims[a] = full ? 2 * n + 1 : 1;
  }
  const auto& H = sc.hamiltonian;
  bool flat = !sc.domain.has_boundary && ((H.kind == HamiltonianKind::Quadratic && H.potential.constant) ||
                                          (H.kind == HamiltonianKind::Eikonal && H.speed.constant));
  if (flat) {
    // Nothing oscillates, so L-bar is L itself.
    EffectiveLagrangian<N> T;
    T.q = q;
    T.depth = opt.depth;
    auto ev = sc.evaluator();
    for (std::size_t j = 0; j < q.size(); ++j) T.values.push_back(ev.running_cost(Vec<N>::Zero(), -q.node(j), 0.0));
    T.raw = T.values;
    T.gap.assign(T.values.size(), 0.0);
    return T;
  }
  return effective_lagrangian_table(sc, q, opt.depth, mo);
}

template <int N>
std::vector<double> rate_errors(const Scenario<N>& sc, const std::vector<double>& eps_ladder,
                                const std::vector<Probe<N>>& probes, const EffectiveLagrangian<N>& Lbar,
                                const RateOptions<N>& opt, double h_rel, std::vector<Resolution>* res) {
  std::vector<double> errs;
  const double vmax = opt.net.vmax();
  for (double eps : eps_ladder) {
    double h = h_rel * eps;
    double dt = h / vmax;
    SolverOptions so;
    so.workers = opt.workers;
    auto g = rate_grid(sc, eps, h, dt, opt.T, probes, vmax * opt.T + 2 * h, so);
    std::vector<int> lv;
    for (const auto& p : probes) lv.push_back(static_cast<int>(std::lround(p.t / dt)));
    std::sort(lv.begin(), lv.end());
    lv.erase(std::unique(lv.begin(), lv.end()), lv.end());
    so.store_levels = lv;
    DpEngine<N> eng(sc, g, opt.net, so);
    auto f = eng.run(eng.sample(sc.u0.eval), sc.u0.description);
    double e = 0;
    for (const auto& p : probes) {
      int k = static_cast<int>(std::lround(p.t / dt));
      double v = eng.interpolate(f.at_level(k), p.x);
      double u = homogenized_value(Lbar, sc.u0, p.x, k * dt);
      e = std::max(e, std::abs(v - u));
    }
    errs.push_back(e);
    if (res) res->push_back({h, dt});
  }
  return errs;
}

template <int N>
RateReport<N> run_rate_experiment(const Scenario<N>& sc, const std::vector<double>& eps_ladder,
                                  const std::vector<Probe<N>>& probes, const RateOptions<N>& opt = {}) {
  for (std::size_t i = 1; i < eps_ladder.size(); ++i)
    if (!(eps_ladder[i] < eps_ladder[i - 1])) throw Error(ErrorCode::InvalidConfig, "epsilon ladder must decrease");
  for (double eps : eps_ladder) {
    ScaledDomain<N> d(sc.domain, eps, opt.h_rel * eps / 10);
    for (const auto& p : probes)
      if (d.psi(p.x) > d.tol) throw Error(ErrorCode::InvalidConfig, "probe outside the perforated domain");
  }
  RateReport<N> r;
  r.epsilons = eps_ladder;
  r.probes = probes;
  auto Lbar = rate_table(sc, opt, opt.h_rel);
  r.table_gap = Lbar.cauchy_gap;
  r.errors = rate_errors(sc, eps_ladder, probes, Lbar, opt, opt.h_rel, &r.resolutions);
  r.degenerate = *std::max_element(r.errors.begin(), r.errors.end()) <= opt.floor;
  for (std::size_t i = 1; i < r.errors.size(); ++i)
    if (r.errors[i] > 1.1 * r.errors[i - 1]) r.monotone = false;
  if (!r.degenerate) {
    std::vector<double> e = r.errors;
    for (double& v : e) v = std::max(v, 1e-300);
    auto fit = fit_loglog(eps_ladder, e);
    r.slope = fit.slope;
    r.C_fit = fit.constant;
  }
  if (opt.control_run) {
    auto Lc = opt.control_table ? rate_table(sc, opt, opt.h_rel / 2) : Lbar;
    r.control_table_gap = Lc.cauchy_gap;
    r.control_errors = rate_errors(sc, eps_ladder, probes, Lc, opt, opt.h_rel / 2, nullptr);
    for (std::size_t i = 0; i < r.errors.size(); ++i) {
      double c = std::abs(r.control_errors[i] - r.errors[i]) / std::max(r.errors[i], opt.floor);
      r.control_change.push_back(c);
      if (c >= opt.control_tolerance && !r.degenerate) r.resolution_ok = false;
    }
    if (!r.resolution_ok && opt.throw_on_resolution)
      throw Error(ErrorCode::ResolutionInsufficient, "half-resolution control run moved an error by 25% or more");
  }
  return r;
}

struct MetricRateReport {
  double limit = 0;
  EffectiveMetric effective;
  std::vector<double> epsilons, scaled, gaps;
  double slope = 0, C_fit = 0;
};

// gap(eps) = |m-bar*(t,x,y) - eps m*(t/eps, x/eps, y/eps)|.
template <int N>
MetricRateReport metric_rate_check(const Scenario<N>& sc, double t, const Vec<N>& x, const Vec<N>& y,
                                   const std::vector<double>& eps_ladder, int depth, const MetricOptions<N>& opt = {}) {
  MetricRateReport r;
  r.effective = effective_metric(sc, t, x, y, depth, opt);
  r.limit = r.effective.value;
  r.epsilons = eps_ladder;
  for (double eps : eps_ladder) {
    auto s = metric_auto(sc, t / eps, Vec<N>(x / eps), Vec<N>(y / eps), opt);
    r.scaled.push_back(eps * s.value);
    r.gaps.push_back(std::abs(r.limit - eps * s.value));
  }
  std::vector<double> g = r.gaps;
  for (double& v : g) v = std::max(v, 1e-300);
  auto fit = fit_loglog(eps_ladder, g);
  r.slope = fit.slope;
  r.C_fit = fit.constant;
  return r;
}

// max over probes with t <= eps of |u^eps - u0| / t, next to the bound constant.
template <int N>
struct SmallTimeReport {
  double worst_ratio = 0;
  double C = 0;
  bool ok = true;
};

template <int N>
SmallTimeReport<N> small_time_check(const Scenario<N>& sc, double eps, const std::vector<Probe<N>>& probes,
                                    const RateOptions<N>& opt = {}) {
  SmallTimeReport<N> r;
  auto [cu, cl] = time_bound_constants(sc, sc.u0.lipschitz);
  r.C = std::max(cu, cl);
  const double vmax = opt.net.vmax();
  double h = opt.h_rel * eps, dt = h / vmax;
  double T = 0;
  for (const auto& p : probes) T = std::max(T, p.t);
  if (T > eps + 1e-12) throw Error(ErrorCode::InvalidConfig, "small-time probes need t <= eps");
  SolverOptions so;
  so.workers = opt.workers;
  auto g = rate_grid(sc, eps, h, dt, std::ceil(T / dt - 1e-9) * dt, probes, vmax * T + 2 * h, so);
  DpEngine<N> eng(sc, g, opt.net, so);
  auto f = eng.run(eng.sample(sc.u0.eval), sc.u0.description);
  for (const auto& p : probes) {
    int k = static_cast<int>(std::lround(p.t / dt));
    double t = k * dt;
    if (t <= 0) continue;
    double v = eng.interpolate(f.at_level(k), p.x);
    double ratio = std::abs(v - sc.u0(p.x)) / t;
    r.worst_ratio = std::max(r.worst_ratio, ratio);
  }
  r.ok = r.worst_ratio <= r.C;
  return r;
}

}  // namespace hjhomog
