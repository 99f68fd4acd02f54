#pragma once

#include "domain.hpp"

#include <boost/math/tools/roots.hpp>

namespace hjhomog {

// Piecewise-constant control on a uniform grid s_i = i * dt.
template <int N>
struct ControlSignal {
  double dt = 0.0;
  std::vector<Vec<N>> v;

  std::size_t steps() const { return v.size(); }

  static ControlSignal constant(const Vec<N>& v0, double dt, std::size_t steps) {
    return ControlSignal{dt, std::vector<Vec<N>>(steps, v0)};
  }

  template <class F>
  static ControlSignal sampled(F&& fn, double dt, std::size_t steps) {
    ControlSignal c{dt, {}};
    c.v.reserve(steps);
    for (std::size_t i = 0; i < steps; ++i) c.v.push_back(fn(i * dt));
    return c;
  }
};

// Discrete Skorokhod solution: eta has steps+1 samples, l and v have steps.
// l_i is the reflection acting over [s_i, s_i+1) and is supported at eta_{i+1}.
template <int N>
struct ReflectedPath {
  double dt = 0.0;
  std::vector<Vec<N>> eta;
  std::vector<double> l;
  std::vector<Vec<N>> v;

  double duration() const { return dt * l.size(); }
};

template <int N>
struct Sliding {
  Vec<N> eta_dot;
  double l = 0.0;
};

template <int N>
Sliding<N> sliding_decomposition(const ScaledDomain<N>& dom, const ObliqueField<N>& gamma, const Vec<N>& y,
                                 const Vec<N>& v) {
  Vec<N> nu = dom.normal(y);
  Vec<N> g = gamma.gamma(y / dom.eps, nu);
  double nv = nu.dot(v);
  if (nv <= 0.0) return {v, 0.0};
  double ng = nu.dot(g);
  if (ng < 0.5 * gamma.rho) throw Error(ErrorCode::DegenerateObliqueness, "gamma . nu below rho/2");
  double l = nv / ng;
  return {v - l * g, l};
}

template <int N>
struct SpStep {
  Vec<N> next;
  double l = 0.0;
};

// Predictor-projector step: move by dt*v, pull back along gamma(x) with minimal l.
template <int N>
SpStep<N> sp_step(const ScaledDomain<N>& dom, const ObliqueField<N>& gamma, const Vec<N>& x, const Vec<N>& v,
                  double dt) {
  Vec<N> xp = x + dt * v;
  if (!dom.base.has_boundary || dom.psi(xp) <= 0.0) return {xp, 0.0};
  Vec<N> g = gamma.at(dom, x);
  double lmax = gamma.reflection_bound() * v.norm() + 1.0;
  auto f = [&](double l) { return dom.psi(xp - dt * l * g); };
  if (f(lmax) > 0.0) {
    // One extra doubling absorbs curvature of the boundary within the step.
    lmax *= 2.0;
    if (f(lmax) > 0.0) throw Error(ErrorCode::StepTooLarge, "pull-back bracket failed; shrink dt");
  }
  auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-15 * (1.0 + std::abs(b)); };
  boost::uintmax_t it = 200;
  auto br = boost::math::tools::bisect(f, 0.0, lmax, tol, it);
  double l = br.second;
  Vec<N> next = xp - dt * l * g;
  if (dom.psi(next) > 0.0) next = dom.project_to_closure(next);
  return {next, l};
}

template <int N>
ReflectedPath<N> solve_sp(const Vec<N>& x0, const ControlSignal<N>& control, const ScaledDomain<N>& dom,
                          const ObliqueField<N>& gamma) {
  double p0 = dom.psi(x0);
  if (p0 > dom.tol) throw Error(ErrorCode::InvalidConfig, "start point lies outside the closure");
  ReflectedPath<N> path;
  path.dt = control.dt;
  path.v = control.v;
  path.eta.reserve(control.steps() + 1);
  path.l.reserve(control.steps());
  path.eta.push_back(p0 > 0.0 ? dom.project_to_closure(x0) : x0);
  for (std::size_t i = 0; i < control.steps(); ++i) {
    auto s = sp_step(dom, gamma, path.eta.back(), control.v[i], control.dt);
    path.eta.push_back(s.next);
    path.l.push_back(s.l);
  }
  return path;
}

struct SpResidual {
  double max_psi_violation = 0.0;
  double max_complementarity = 0.0;
  double max_ode_defect = 0.0;
  double max_ratio_l_over_v = 0.0;
};

template <int N>
SpResidual residual(const ReflectedPath<N>& path, const ScaledDomain<N>& dom, const ObliqueField<N>& gamma) {
  SpResidual r;
  for (const auto& e : path.eta) r.max_psi_violation = std::max(r.max_psi_violation, dom.psi(e));
  for (std::size_t i = 0; i < path.l.size(); ++i) {
    double li = path.l[i];
    r.max_complementarity = std::max(r.max_complementarity, li * std::max(0.0, -dom.psi(path.eta[i + 1]) - dom.tol));
    Vec<N> d = (path.eta[i + 1] - path.eta[i]) / path.dt - path.v[i];
    if (li > 0.0) {
      Vec<N> gr = dom.grad(path.eta[i]);
      if (gr.norm() > 0.0) d += li * gamma.gamma(path.eta[i] / dom.eps, gr.normalized());
    }
    r.max_ode_defect = std::max(r.max_ode_defect, d.norm());
    double vn = path.v[i].norm();
    if (vn > 0.0) r.max_ratio_l_over_v = std::max(r.max_ratio_l_over_v, li / vn);
    else if (li > 0.0) r.max_ratio_l_over_v = std::numeric_limits<double>::infinity();
  }
  return r;
}

}  // namespace hjhomog
