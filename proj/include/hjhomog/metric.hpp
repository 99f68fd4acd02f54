#pragma once

#include "value_function.hpp"

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/astar_search.hpp>

#include <unordered_map>

namespace hjhomog {

enum class TerminalMode { Hard, Soft };

template <int N>
struct MetricOptions {
  double h = 1.0 / 16;
  double dt = 0.0;  // 0: h / V_max
  ControlNet<N> net = ControlNet<N>::polar(32, ControlNet<N>::uniform_speeds(4.0, 16), 4, 4.0);
  std::optional<TerminalMode> terminal;  // default: Soft for eikonal, Hard otherwise
  double penalty = 0.0;                  // soft terminal slope, 0: automatic
  double margin = 1.0;
  int boundary_samples = 32;
  int max_sample_doublings = 2;
  double sample_tol = 1e-3;
  bool record_path = true;
  double budget = 8e7;  // nodes * stored levels
  int workers = 1;
};

template <int N>
struct MetricSample {
  double t = 0.0;
  Vec<N> x, y;
  double value = kSentinel;
  std::optional<std::pair<Vec<N>, Vec<N>>> endpoints_star;
  std::optional<ReflectedPath<N>> path;
};

// Backward run from a terminal point set on the unit-scale domain.
template <int N>
struct BackwardRun {
  std::unique_ptr<DpEngine<N>> engine;
  ValueField<N> field;
  TerminalMode mode = TerminalMode::Hard;
  double penalty = 0.0;
  int steps = 0;

  double at(const Vec<N>& x) const { return engine->interpolate(field.at_level(steps), x); }
};

namespace detail {

template <int N>
TerminalMode terminal_mode(const Scenario<N>& sc, const MetricOptions<N>& opt) {
  if (opt.terminal) return *opt.terminal;
  return sc.hamiltonian.kind == HamiltonianKind::Eikonal ? TerminalMode::Soft : TerminalMode::Hard;
}

template <int N>
Scenario<N> unit_scale(const Scenario<N>& sc) {
  return sc;
}

}  // namespace detail

template <int N>
BackwardRun<N> backward_run(const Scenario<N>& sc, double t, const Vec<N>& lo, const Vec<N>& hi,
                            const std::vector<Vec<N>>& targets, const MetricOptions<N>& opt, bool keep_all) {
  if (t <= 0) throw Error(ErrorCode::InvalidConfig, "metric horizon must be positive");
  const double vmax = opt.net.vmax();
  double dt = opt.dt > 0 ? opt.dt : opt.h / vmax;
  int steps = std::max(1, static_cast<int>(std::ceil(t / dt - 1e-9)));
  dt = t / steps;
  SpaceTimeGrid<N> g;
  Vec<N> alo, ahi;
  for (int a = 0; a < N; ++a) {
    alo[a] = std::floor(lo[a] / opt.h) * opt.h;
    ahi[a] = std::ceil(hi[a] / opt.h) * opt.h;
  }
  g.space = GridSpec<N>::box(alo, ahi, opt.h);
  g.dt = dt;
  g.steps = steps;
  g.eps = 1.0;
  double stored = static_cast<double>(g.space.size()) * (keep_all ? steps + 1 : 2);
  if (stored > opt.budget) throw Error(ErrorCode::BudgetExceeded, "metric window exceeds the memory budget");
  SolverOptions so;
  so.check_window = false;
  so.workers = opt.workers;
  if (!keep_all) so.store_levels = {steps};
  BackwardRun<N> run;
  run.engine = std::make_unique<DpEngine<N>>(sc, g, opt.net, so);
  run.mode = detail::terminal_mode(sc, opt);
  run.penalty = opt.penalty > 0 ? opt.penalty : 4.0 * (1.0 + vmax * vmax);
  run.steps = steps;
  const auto& adm = run.engine->admissible();
  std::vector<double> init(g.space.size(), kSentinel);
  if (run.mode == TerminalMode::Hard) {
    const double rad = opt.h * std::sqrt(double(N)) * (1 + 1e-9);
    for (const auto& y : targets) {
      bool any = false;
      for (double r : {rad, 2 * rad, 3 * rad}) {
        std::array<int, N> b{};
        int w = static_cast<int>(std::ceil(r / opt.h)) + 1;
        for (int a = 0; a < N; ++a) b[a] = static_cast<int>(std::floor((y[a] - g.space.lo[a]) / opt.h)) - w + 1;
        std::array<int, N> o{};
        while (true) {
          std::array<int, N> m{};
          bool inside = true;
          for (int a = 0; a < N; ++a) {
            m[a] = b[a] + o[a];
            if (m[a] < 0 || m[a] >= g.space.dims[a]) inside = false;
          }
          if (inside) {
            std::size_t i = g.space.linear(m);
            if (adm[i] && (g.space.node(m) - y).norm() <= r) {
              init[i] = 0.0;
              any = true;
            }
          }
          int a = 0;
          while (a < N && ++o[a] == 2 * w) o[a++] = 0;
          if (a == N) break;
        }
        if (any) break;
      }
    }
  } else {
    for (std::size_t i = 0; i < init.size(); ++i) {
      if (!adm[i]) continue;
      double d = std::numeric_limits<double>::infinity();
      Vec<N> z = g.space.node(i);
      for (const auto& y : targets) d = std::min(d, (z - y).norm());
      init[i] = run.penalty * d;
    }
  }
  run.field = run.engine->run(std::move(init));
  return run;
}

namespace detail {

template <int N>
void hull(const std::vector<Vec<N>>& pts, double margin, Vec<N>& lo, Vec<N>& hi) {
  lo = pts[0];
  hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  lo.array() -= margin;
  hi.array() += margin;
}

// Reads W at x under the terminal mode; sentinel when unreachable.
template <int N>
double metric_value(const BackwardRun<N>& run, const Vec<N>& x, double reach_tol) {
  double w = run.at(x);
  if (is_infinite_cost(w)) return kSentinel;
  if (run.mode == TerminalMode::Soft && run.engine->evaluator().hamiltonian().kind == HamiltonianKind::Eikonal)
    return w <= run.penalty * reach_tol ? 0.0 : kSentinel;
  return w;
}

template <int N>
double reach_tol(const MetricOptions<N>& opt) {
  return 2.0 * opt.h * std::sqrt(double(N));
}

}  // namespace detail

// Minimal action from x to y in time t (terminal relaxed to nodes within h of y).
template <int N>
MetricSample<N> metric(const Scenario<N>& sc, double t, const Vec<N>& x, const Vec<N>& y,
                       const MetricOptions<N>& opt = {}) {
  if ((x - y).norm() > opt.net.vmax() * t + opt.h) throw Error(ErrorCode::Unreachable, "|x - y| exceeds V_max t");
  Vec<N> lo, hi;
  detail::hull<N>({x, y}, opt.margin, lo, hi);
  double est = static_cast<double>(1);
  for (int a = 0; a < N; ++a) est *= (hi[a] - lo[a]) / opt.h + 2;
  bool keep = opt.record_path && est * (t / (opt.dt > 0 ? opt.dt : opt.h / opt.net.vmax()) + 2) <= opt.budget;
  auto run = backward_run<N>(sc, t, lo, hi, {y}, opt, keep);
  MetricSample<N> s;
  s.t = t;
  s.x = x;
  s.y = y;
  s.value = detail::metric_value(run, x, detail::reach_tol(opt));
  if (keep && !is_infinite_cost(s.value)) s.path = extract_path(*run.engine, run.field, run.steps, x);
  return s;
}

// Metric with endpoints relaxed to boundary points of the unit cubes around x and y.
template <int N>
MetricSample<N> metric_star(const Scenario<N>& sc, double t, const Vec<N>& x, const Vec<N>& y,
                            const MetricOptions<N>& opt = {}) {
  if ((x - y).norm() > opt.net.vmax() * t + std::sqrt(double(N)))
    throw Error(ErrorCode::Unreachable, "|x - y| exceeds V_max t");
  MetricSample<N> best;
  best.t = t;
  best.x = x;
  best.y = y;
  double prev = kSentinel;
  int count = opt.boundary_samples;
  for (int round = 0; round <= opt.max_sample_doublings; ++round, count *= 2) {
    auto xs = boundary_sample<N>(sc.domain, x, count);
    auto ys = boundary_sample<N>(sc.domain, y, count);
    std::vector<Vec<N>> all = xs;
    all.insert(all.end(), ys.begin(), ys.end());
    Vec<N> lo, hi;
    detail::hull<N>(all, opt.margin, lo, hi);
    double est = 1;
    for (int a = 0; a < N; ++a) est *= (hi[a] - lo[a]) / opt.h + 2;
    double steps = t / (opt.dt > 0 ? opt.dt : opt.h / opt.net.vmax()) + 2;
    bool keep = opt.record_path && est * steps <= opt.budget;
    auto run = backward_run<N>(sc, t, lo, hi, ys, opt, keep);
    double v = kSentinel;
    Vec<N> xh = xs[0];
    for (const auto& p : xs) {
      double w = detail::metric_value(run, p, detail::reach_tol(opt));
      if (w < v) {
        v = w;
        xh = p;
      }
    }
    best.value = v;
    if (!is_infinite_cost(v)) {
      Vec<N> yh = ys[0];
      if (keep) {
        auto path = extract_path(*run.engine, run.field, run.steps, xh);
        double d = std::numeric_limits<double>::infinity();
        for (const auto& q : ys)
          if ((q - path.eta.back()).norm() < d) {
            d = (q - path.eta.back()).norm();
            yh = q;
          }
        best.path = std::move(path);
      }
      best.endpoints_star = std::make_pair(xh, yh);
    }
    if (round > 0 && std::abs(v - prev) <= opt.sample_tol) break;
    if (is_infinite_cost(v) && is_infinite_cost(prev) && round > 0) break;
    prev = v;
  }
  return best;
}

// Metric used by additivity checks: m* with holes, m in free space.
template <int N>
MetricSample<N> metric_auto(const Scenario<N>& sc, double t, const Vec<N>& x, const Vec<N>& y,
                            const MetricOptions<N>& opt) {
  if (sc.domain.has_boundary) return metric_star(sc, t, x, y, opt);
  return metric(sc, t, x, y, opt);
}

// Boundary-to-boundary path in the closure with l = 0, constant speed over the given duration.
template <int N>
ReflectedPath<N> connect_boundary_points(const ImplicitDomain<N>& dom, const Vec<N>& a, const Vec<N>& b,
                                         double duration, double spacing = 1.0 / 64, int samples = 256) {
  ReflectedPath<N> out;
  out.dt = duration / samples;
  auto inside = [&](const Vec<N>& p) { return dom.psi(p) <= dom.boundary_tol; };
  auto segment_ok = [&](const Vec<N>& p, const Vec<N>& q) {
    int n = std::max(2, static_cast<int>(std::ceil((q - p).norm() / (spacing / 8))));
    for (int i = 0; i <= n; ++i)
      if (!inside(p + (q - p) * (double(i) / n))) return false;
    return true;
  };
  std::vector<Vec<N>> poly;
  if ((a - b).norm() < 1e-14) {
    poly = {a};
  } else if (segment_ok(a, b)) {
    poly = {a, b};
  } else {
    Vec<N> lo, hi;
    detail::hull<N>({a, b}, 1.0, lo, hi);
    auto grid = GridSpec<N>::box(lo, hi, spacing);
    using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::undirectedS, boost::no_property,
                                        boost::property<boost::edge_weight_t, double>>;
    std::vector<long> vid(grid.size(), -1);
    std::vector<std::size_t> node_of;
    for (std::size_t i = 0; i < grid.size(); ++i)
      if (dom.psi(grid.node(i)) <= 0.0) {
        vid[i] = static_cast<long>(node_of.size());
        node_of.push_back(i);
      }
    const std::size_t na = node_of.size(), nb = na + 1;
    Graph G(node_of.size() + 2);
    std::array<int, N> o{};
    std::vector<std::array<int, N>> offs;
    for (int k = 0; k < static_cast<int>(std::pow(3, N)); ++k) {
      int r = k;
      bool zero = true;
      for (int d = 0; d < N; ++d) {
        o[d] = r % 3 - 1;
        r /= 3;
        if (o[d]) zero = false;
      }
      if (!zero) offs.push_back(o);
    }
    for (std::size_t v = 0; v < node_of.size(); ++v) {
      auto m = grid.multi(node_of[v]);
      Vec<N> p = grid.node(m);
      for (const auto& off : offs) {
        auto q = m;
        bool ok = true;
        for (int d = 0; d < N; ++d) {
          q[d] += off[d];
          if (q[d] < 0 || q[d] >= grid.dims[d]) ok = false;
        }
        if (!ok) continue;
        long w = vid[grid.linear(q)];
        if (w < 0 || static_cast<std::size_t>(w) < v) continue;
        Vec<N> pq = grid.node(q);
        if (!inside(0.5 * (p + pq))) continue;
        boost::add_edge(v, static_cast<std::size_t>(w), (pq - p).norm(), G);
      }
    }
    // Attach the endpoints to every visible lattice node within two cells.
    for (auto [src, id] : {std::pair<Vec<N>, std::size_t>{a, na}, std::pair<Vec<N>, std::size_t>{b, nb}}) {
      bool any = false;
      for (std::size_t v = 0; v < node_of.size(); ++v) {
        Vec<N> p = grid.node(node_of[v]);
        if ((p - src).norm() <= 2.0 * spacing * std::sqrt(double(N)) && segment_ok(src, p)) {
          boost::add_edge(id, v, (p - src).norm(), G);
          any = true;
        }
      }
      if (!any) throw Error(ErrorCode::NoPath, "endpoint cannot be attached to the search lattice");
    }
    auto pos = [&](std::size_t v) { return v == na ? a : v == nb ? b : grid.node(node_of[v]); };
    struct Heuristic : boost::astar_heuristic<Graph, double> {
      std::function<double(std::size_t)> f;
      double operator()(std::size_t v) const { return f(v); }
    } heur;
    heur.f = [&](std::size_t v) { return (pos(v) - b).norm(); };
    struct Found {};
    struct Visitor : boost::default_astar_visitor {
      std::size_t goal;
      void examine_vertex(std::size_t v, const Graph&) const {
        if (v == goal) throw Found{};
      }
    } vis;
    vis.goal = nb;
    std::vector<std::size_t> pred(boost::num_vertices(G));
    std::vector<double> dist(boost::num_vertices(G));
    bool found = false;
    try {
      boost::astar_search(G, na, heur,
                          boost::predecessor_map(boost::make_iterator_property_map(pred.begin(),
                                                                                   boost::get(boost::vertex_index, G)))
                              .distance_map(boost::make_iterator_property_map(dist.begin(),
                                                                              boost::get(boost::vertex_index, G)))
                              .visitor(vis));
    } catch (const Found&) {
      found = true;
    }
    if (!found) throw Error(ErrorCode::NoPath, "lattice search found no path");
    std::vector<Vec<N>> raw;
    for (std::size_t v = nb; v != na; v = pred[v]) raw.push_back(pos(v));
    raw.push_back(a);
    std::reverse(raw.begin(), raw.end());
    // String pulling.
    poly.push_back(raw[0]);
    std::size_t i = 0;
    while (i + 1 < raw.size()) {
      std::size_t j = raw.size() - 1;
      while (j > i + 1 && !segment_ok(raw[i], raw[j])) --j;
      poly.push_back(raw[j]);
      i = j;
    }
  }
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < poly.size(); ++i) cum.push_back(cum.back() + (poly[i] - poly[i - 1]).norm());
  const double len = cum.back();
  std::size_t seg = 0;
  for (int k = 0; k <= samples; ++k) {
    double s = len * k / samples;
    while (seg + 2 < poly.size() && cum[seg + 1] < s) ++seg;
    Vec<N> p = poly[0];
    if (poly.size() > 1) {
      double L = cum[seg + 1] - cum[seg];
      double u = L > 0 ? std::clamp((s - cum[seg]) / L, 0.0, 1.0) : 0.0;
      p = poly[seg] + u * (poly[seg + 1] - poly[seg]);
    }
    out.eta.push_back(p);
  }
  for (int k = 0; k < samples; ++k) {
    out.l.push_back(0.0);
    out.v.push_back((out.eta[k + 1] - out.eta[k]) / out.dt);
  }
  return out;
}

template <int N>
double path_length(const ReflectedPath<N>& p) {
  double s = 0;
  for (std::size_t i = 1; i < p.eta.size(); ++i) s += (p.eta[i] - p.eta[i - 1]).norm();
  return s;
}

// Largest ratio of connector length to chord over boundary pairs of neighbouring cells.
template <int N>
double estimate_M_omega(const ImplicitDomain<N>& dom, int per_cell = 8) {
  auto base = boundary_sample<N>(dom, Vec<N>::Zero(), per_cell);
  std::vector<Vec<N>> others = base;
  for (int a = 0; a < N; ++a) {
    Vec<N> e = Vec<N>::Zero();
    e[a] = 1.0;
    for (const auto& p : boundary_sample<N>(dom, e, per_cell / 2)) others.push_back(p);
  }
  double M = 1.0;
  for (const auto& p : base)
    for (const auto& q : others) {
      double c = (p - q).norm();
      if (c < 1e-9) continue;
      M = std::max(M, path_length(connect_boundary_points(dom, p, q, 1.0)) / c);
    }
  return M;
}

template <int N>
struct AdditivitySample {
  double t = 0;
  Vec<N> y;
  double m_t = 0, m_2t = 0;
  double sub_defect = 0, super_defect = 0;
};

template <int N>
struct AdditivityReport {
  std::vector<AdditivitySample<N>> samples;
  double max_sub_defect = -std::numeric_limits<double>::infinity();
  double max_super_defect = -std::numeric_limits<double>::infinity();
  double C_estimate() const { return std::max(max_sub_defect, max_super_defect); }
};

template <int N>
AdditivityReport<N> check_additivity(const Scenario<N>& sc, const std::vector<std::pair<double, Vec<N>>>& plan,
                                     const MetricOptions<N>& opt = {}) {
  AdditivityReport<N> r;
  for (const auto& [t, y] : plan) {
    AdditivitySample<N> s;
    s.t = t;
    s.y = y;
    s.m_t = metric_auto(sc, t, Vec<N>(Vec<N>::Zero()), y, opt).value;
    s.m_2t = metric_auto(sc, 2 * t, Vec<N>(Vec<N>::Zero()), Vec<N>(2 * y), opt).value;
    s.sub_defect = s.m_2t - 2 * s.m_t;
    s.super_defect = 2 * s.m_t - s.m_2t;
    r.max_sub_defect = std::max(r.max_sub_defect, s.sub_defect);
    r.max_super_defect = std::max(r.max_super_defect, s.super_defect);
    r.samples.push_back(s);
  }
  return r;
}

template <int N>
struct TripleSample {
  double t = 1, tau = 1;
  Vec<N> x, y, z;
};

struct ConstantReport {
  std::vector<double> defects;
  double C = -std::numeric_limits<double>::infinity();
};

// m*(t + tau, x, z) - m*(t, x, y) - m*(tau, y, z) per triple.
template <int N>
ConstantReport check_triangle(const Scenario<N>& sc, const std::vector<TripleSample<N>>& triples,
                              const MetricOptions<N>& opt = {}) {
  ConstantReport r;
  for (const auto& s : triples) {
    double whole = metric_star(sc, s.t + s.tau, s.x, s.z, opt).value;
    double a = metric_star(sc, s.t, s.x, s.y, opt).value;
    double b = metric_star(sc, s.tau, s.y, s.z, opt).value;
    double d = whole - a - b;
    r.defects.push_back(d);
    r.C = std::max(r.C, d);
  }
  return r;
}

// |m*(t, x, y) - m(t, x, y)| per sample; x and y must lie in the closure.
template <int N>
ConstantReport check_star_difference(const Scenario<N>& sc,
                                     const std::vector<std::tuple<double, Vec<N>, Vec<N>>>& samples,
                                     const MetricOptions<N>& opt = {}) {
  ConstantReport r;
  for (const auto& [t, x, y] : samples) {
    double d = std::abs(metric_star(sc, t, x, y, opt).value - metric(sc, t, x, y, opt).value);
    r.defects.push_back(d);
    r.C = std::max(r.C, d);
  }
  return r;
}

struct EffectiveMetric {
  std::vector<int> ks;
  std::vector<double> a;  // a_k = m*(k t, k x, k y) / k
  double raw = kSentinel;
  double value = kSentinel;  // Richardson-extrapolated limit
  double cauchy_gap = 0.0;
  std::vector<double> gaps;
};

inline EffectiveMetric finish_effective(std::vector<int> ks, std::vector<double> a) {
  EffectiveMetric e;
  e.ks = std::move(ks);
  e.a = std::move(a);
  std::size_t n = e.a.size();
  e.raw = e.a.back();
  for (std::size_t i = 1; i < n; ++i) e.gaps.push_back(std::abs(e.a[i] - e.a[i - 1]));
  e.cauchy_gap = e.gaps.empty() ? 0.0 : e.gaps.back();
  e.value = n >= 2 ? 2 * e.a[n - 1] - e.a[n - 2] : e.raw;
  return e;
}

template <int N>
EffectiveMetric effective_metric(const Scenario<N>& sc, double t, const Vec<N>& x, const Vec<N>& y, int depth,
                                 const MetricOptions<N>& opt = {}) {
  if (depth < 2) throw Error(ErrorCode::InvalidConfig, "depth must be at least 2");
  std::vector<int> ks;
  std::vector<double> a;
  for (int d = 0, k = 1; d <= depth; ++d, k *= 2) {
    auto s = metric_auto(sc, k * t, Vec<N>(k * x), Vec<N>(k * y), opt);
    ks.push_back(k);
    a.push_back(s.value / k);
  }
  return finish_effective(std::move(ks), std::move(a));
}

// Regular table of L-bar over velocities q = lo + j * dq; axes with one entry are fixed.
template <int N>
struct EffectiveLagrangian {
  GridSpec<N> q;
  std::vector<double> values;
  std::vector<double> raw;
  std::vector<double> gap;
  int depth = 4;
  double cauchy_gap = 0.0;

  bool defined(const Vec<N>& v) const {
    for (int a = 0; a < N; ++a) {
      double u = (v[a] - q.lo[a]) / q.h;
      if (q.dims[a] == 1) {
        if (std::abs(u) > 1e-9) return false;
      } else if (u < -1e-9 || u > q.dims[a] - 1 + 1e-9) {
        return false;
      }
    }
    return true;
  }

  double operator()(const Vec<N>& v) const {
    if (!defined(v)) throw Error(ErrorCode::TableGap, "velocity outside the L-bar table");
    detail::InterpStencil<N> st;
    Vec<N> w = v;
    for (int a = 0; a < N; ++a)
      if (q.dims[a] == 1) w[a] = q.lo[a];
    auto all = [](const std::array<int, N>&) { return true; };
    GridSpec<N> g = q;
    for (int a = 0; a < N; ++a)
      if (g.dims[a] == 1) g.dims[a] = 2;
    for (int a = 0; a < N; ++a) {
      double u = (w[a] - g.lo[a]) / g.h;
      w[a] = g.lo[a] + std::clamp(u, 0.0, double(q.dims[a] == 1 ? 0 : q.dims[a] - 1)) * g.h;
    }
    if (!detail::build_stencil<N>(g, w, all, st)) throw Error(ErrorCode::TableGap, "velocity outside the L-bar table");
    double s = 0;
    for (int c = 0; c < st.count; ++c) {
      auto m = st.corner[c];
      for (int a = 0; a < N; ++a) m[a] = std::min(m[a], q.dims[a] - 1);
      double v2 = values[q.linear(m)];
      if (is_infinite_cost(v2)) return kSentinel;
      s += st.w[c] * v2;
    }
    return s;
  }

  Vec<N> node(std::size_t i) const { return q.node(i); }
};

// L-bar(q) = lim m*(k, 0, -k q) / k, one backward run per terminal offset class and horizon.
template <int N>
EffectiveLagrangian<N> effective_lagrangian_table(const Scenario<N>& sc, const GridSpec<N>& qgrid, int depth,
                                                  const MetricOptions<N>& opt = {}) {
  if (depth < 2) throw Error(ErrorCode::InvalidConfig, "depth must be at least 2");
  EffectiveLagrangian<N> T;
  T.q = qgrid;
  T.depth = depth;
  const std::size_t nq = qgrid.size();
  std::vector<std::vector<double>> a(depth + 1, std::vector<double>(nq, kSentinel));
  const double vmax = opt.net.vmax();
  for (int d = 0, k = 1; d <= depth; ++d, k *= 2) {
    std::map<std::vector<long>, std::vector<std::size_t>> groups;
    std::vector<Vec<N>> starts(nq), centers(nq);
    for (std::size_t j = 0; j < nq; ++j) {
      Vec<N> kq = k * qgrid.node(j);
      if (qgrid.node(j).norm() > vmax) continue;
      Vec<N> z, c;
      std::vector<long> key;
      for (int i = 0; i < N; ++i) {
        z[i] = std::round(kq[i]);
        c[i] = z[i] - kq[i];
        key.push_back(std::lround(c[i] * 1e9));
      }
      starts[j] = z;
      centers[j] = c;
      groups[key].push_back(j);
    }
    for (const auto& [key, idx] : groups) {
      Vec<N> c = centers[idx.front()];
      const bool holes = sc.domain.has_boundary;
      auto ys = holes ? boundary_sample<N>(sc.domain, c, opt.boundary_samples) : std::vector<Vec<N>>{c};
      std::vector<Vec<N>> pts = ys;
      for (std::size_t j : idx) pts.push_back(starts[j]);
      Vec<N> lo, hi;
      detail::hull<N>(pts, opt.margin + 0.5, lo, hi);
      auto run = backward_run<N>(sc, double(k), lo, hi, ys, opt, false);
      for (std::size_t j : idx) {
        double best = kSentinel;
        auto xs = holes ? boundary_sample<N>(sc.domain, starts[j], opt.boundary_samples) : std::vector<Vec<N>>{starts[j]};
        for (const auto& p : xs)
          best = std::min(best, detail::metric_value(run, p, detail::reach_tol(opt)));
        a[d][j] = is_infinite_cost(best) ? kSentinel : best / k;
      }
    }
  }
  T.values.assign(nq, kSentinel);
  T.raw.assign(nq, kSentinel);
  T.gap.assign(nq, 0.0);
  for (std::size_t j = 0; j < nq; ++j) {
    double hi = a[depth][j], lo = a[depth - 1][j];
    if (is_infinite_cost(hi) || is_infinite_cost(lo)) continue;
    T.raw[j] = hi;
    T.values[j] = 2 * hi - lo;
    T.gap[j] = std::abs(hi - lo);
    T.cauchy_gap = std::max(T.cauchy_gap, T.gap[j]);
  }
  return T;
}

// H-bar(p) = max over the table of p.q - L-bar(q).
template <int N>
double effective_hamiltonian(const EffectiveLagrangian<N>& L, const Vec<N>& p) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < L.values.size(); ++j) {
    if (is_infinite_cost(L.values[j])) continue;
    best = std::max(best, p.dot(L.node(j)) - L.values[j]);
  }
  return best;
}

// Convex envelope of the table via the double transform over a p grid.
template <int N>
std::vector<double> double_transform(const EffectiveLagrangian<N>& L, const std::vector<Vec<N>>& ps) {
  std::vector<double> H;
  for (const auto& p : ps) H.push_back(effective_hamiltonian(L, p));
  std::vector<double> out(L.values.size(), kSentinel);
  for (std::size_t j = 0; j < L.values.size(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ps.size(); ++i) best = std::max(best, ps[i].dot(L.node(j)) - H[i]);
    out[j] = best;
  }
  return out;
}

// u(x,t) = min over the table of t L-bar(q) + u0(x - t q), refined on the interpolated table.
template <int N>
double homogenized_value(const EffectiveLagrangian<N>& L, const InitialData<N>& u0, const Vec<N>& x, double t) {
  if (t <= 0) return u0(x);
  auto F = [&](const Vec<N>& q) {
    if (!L.defined(q)) return kSentinel;
    double l = L(q);
    if (is_infinite_cost(l)) return kSentinel;
    return t * l + u0(x - t * q);
  };
  double best = kSentinel;
  Vec<N> bq = Vec<N>::Zero();
  for (std::size_t j = 0; j < L.values.size(); ++j) {
    if (is_infinite_cost(L.values[j])) continue;
    double v = t * L.values[j] + u0(x - t * L.node(j));
    if (v < best) {
      best = v;
      bq = L.node(j);
    }
  }
  if (is_infinite_cost(best)) throw Error(ErrorCode::TableGap, "empty L-bar table");
  double s = L.q.h;
  while (s > 1e-10) {
    bool moved = false;
    for (int a = 0; a < N; ++a) {
      if (L.q.dims[a] == 1) continue;
      for (int sg : {-1, 1}) {
        Vec<N> q = bq;
        q[a] += sg * s;
        double v = F(q);
        if (v < best) {
          best = v;
          bq = q;
          moved = true;
        }
      }
    }
    if (!moved) s *= 0.5;
  }
  for (int a = 0; a < N; ++a) {
    if (L.q.dims[a] == 1) continue;
    double u = (bq[a] - L.q.lo[a]) / L.q.h;
    if (u < 1e-6 || u > L.q.dims[a] - 1 - 1e-6) throw Error(ErrorCode::TableGap, "minimizer on the edge of the q table");
  }
  return best;
}

// Homogenized Hopf-Lax solution sampled on a space-time grid.
template <int N>
ValueField<N> homogenized_solve(const EffectiveLagrangian<N>& L, const InitialData<N>& u0, const SpaceTimeGrid<N>& g,
                                std::vector<int> levels = {}) {
  ValueField<N> f;
  f.grid = g;
  f.u0_description = u0.description;
  f.admissible.assign(g.space.size(), 1);
  if (levels.empty())
    for (int k = 0; k <= g.steps; ++k) levels.push_back(k);
  for (int k : levels) {
    std::vector<double> v(g.space.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = homogenized_value(L, u0, g.space.node(i), k * g.dt);
    f.levels.push_back(k);
    f.values.push_back(std::move(v));
  }
  return f;
}

}  // namespace hjhomog
