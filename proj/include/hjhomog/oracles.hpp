#pragma once

#include "value_function.hpp"

namespace hjhomog {

inline void check_angle(double theta) {
  if (theta < kPi / 2 - 1e-14) throw Error(ErrorCode::InvalidConfig, "contact angle below pi/2");
  if (theta >= kPi - 1e-6) throw Error(ErrorCode::DegenerateAngle, "contact angle too close to pi");
}

// l* = -cos(theta) / sin(theta)^2
inline double optimal_reflection(double theta) {
  check_angle(theta);
  double s = std::sin(theta);
  return -std::cos(theta) / (s * s);
}

// sqrt(1 + cot(theta)^2) = 1 / sin(theta)
inline double sliding_speed(double theta) {
  check_angle(theta);
  return 1.0 / std::sin(theta);
}

// Eikonal disk example with u0 = x1 + 2 and theta = pi/2, printed closed form.
inline double disk_value_theta_half(const Vec<2>& x, double t) {
  const double x1 = x[0], x2 = x[1];
  const bool region = x1 > 0 && x2 >= 0 && x2 <= 1 && x.norm() >= 1 - 1e-12;
  if (region && t > 2) {
    double r = std::sqrt(std::max(0.0, 1 - x2 * x2));
    double at = x2 >= 1 ? kPi / 2 : std::atan(x2 / r);
    double eta1 = -t - (kPi / 2 - at) - (x1 - r);
    return eta1 + 2;
  }
  if (t <= 2 && t >= 0) {
    bool clear = std::abs(x2) >= 1;
    if (!clear) {
      double r = std::sqrt(1 - x2 * x2);
      clear = x1 <= -r || x1 - t >= r;
    }
    if (clear) return x1 + 2 - t;
  }
  throw Error(ErrorCode::OutsideValidatedRegion, "disk example formula is not validated at this (x, t)");
}

// Geodesic distance from x to the top (or bottom) of the unit disk, wrapping around it.
inline double disk_wrap_length(const Vec<2>& x) {
  Vec<2> y(x[0], std::abs(x[1]));
  double rho = y.norm();
  double phi = std::atan2(y[1], y[0]);
  return std::sqrt(rho * rho - 1) + kPi / 2 - phi - std::acos(1 / rho);
}

// Taut-string value of the same example: straight transport or wrap over the disk.
inline double disk_value_geodesic(const Vec<2>& x, double t) {
  if (x.norm() < 1 - 1e-12 || t < 0) throw Error(ErrorCode::OutsideValidatedRegion, "point inside the disk");
  const double x1 = x[0], x2 = x[1];
  if (std::abs(x2) >= 1 || x1 <= 0) return x1 + 2 - t;
  double r = std::sqrt(1 - x2 * x2);
  if (x1 - t >= r) return x1 + 2 - t;
  double D = disk_wrap_length(x);
  if (t >= D) return 2 - t + D;
  throw Error(ErrorCode::OutsideValidatedRegion, "front still on the disk at this time");
}

// inf over a y-net of t L((x - y)/t) + u0(y), refined by compass search.
template <int N>
double hopf_lax_free(const Vec<N>& x, double t, const std::function<double(const Vec<N>&)>& u0,
                     const std::function<double(const Vec<N>&)>& L, double qmax, int per_axis = 41) {
  if (t <= 0) return u0(x);
  auto F = [&](const Vec<N>& q) {
    double l = L(q);
    if (is_infinite_cost(l)) return kSentinel;
    return t * l + u0(x - t * q);
  };
  Vec<N> best_q = Vec<N>::Zero();
  double best = F(best_q);
  std::array<int, N> idx{};
  const double step = 2 * qmax / (per_axis - 1);
  while (true) {
    Vec<N> q;
    for (int a = 0; a < N; ++a) q[a] = -qmax + idx[a] * step;
    double v = F(q);
    if (v < best) {
      best = v;
      best_q = q;
    }
    int a = 0;
    while (a < N && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == N) break;
  }
  double s = step;
  while (s > 1e-12) {
    bool moved = false;
    for (int a = 0; a < N; ++a)
      for (int sg : {-1, 1}) {
        Vec<N> q = best_q;
        q[a] += sg * s;
        double v = F(q);
        if (v < best) {
          best = v;
          best_q = q;
          moved = true;
        }
      }
    if (!moved) s *= 0.5;
  }
  return best;
}

template <int N>
struct BruteForceSpec {
  std::vector<Vec<N>> velocities;
  std::vector<double> pushes{0.0};
  int segments = 2;
  int substeps = 8;
  double eps = 1.0;
  std::size_t cap = 1000000;
};

// Exhaustive minimum over piecewise-constant control sequences; boundary segments may add l*gamma pushes.
template <int N>
double brute_force_value(const Vec<N>& x, double t, const Scenario<N>& sc, const BruteForceSpec<N>& spec) {
  if (spec.segments > 4 || spec.velocities.size() > 9 || spec.pushes.size() > 3)
    throw Error(ErrorCode::BudgetExceeded, "brute force instance too large");
  double per = static_cast<double>(spec.velocities.size() * spec.pushes.size());
  if (std::pow(per, spec.segments) > static_cast<double>(spec.cap))
    throw Error(ErrorCode::BudgetExceeded, "enumeration cap exceeded");
  ScaledDomain<N> dom(sc.domain, spec.eps, 1e-9);
  auto ev = sc.evaluator();
  const double dt = t / (spec.segments * spec.substeps);
  double best = kSentinel;
  std::function<void(int, const Vec<N>&, double)> rec = [&](int k, const Vec<N>& at, double acc) {
    if (k == spec.segments) {
      best = std::min(best, acc + sc.u0(at));
      return;
    }
    bool on_boundary = dom.base.has_boundary && std::abs(dom.psi(at)) <= 1e-6 * spec.eps;
    for (const auto& v0 : spec.velocities) {
      for (double push : spec.pushes) {
        if (push != 0.0 && !on_boundary) continue;
        Vec<N> v = v0;
        if (push != 0.0) v += push * sc.bc.gamma.at(dom, at);
        Vec<N> eta = at;
        double cost = acc;
        bool ok = true;
        for (int j = 0; j < spec.substeps && ok; ++j) {
          try {
            auto s = sp_step(dom, sc.bc.gamma, eta, v, dt);
            double L = ev.running_cost(eta / spec.eps, v, s.l);
            if (is_infinite_cost(L)) ok = false;
            cost += dt * L;
            eta = s.next;
          } catch (const Error&) {
            ok = false;
          }
        }
        if (ok) rec(k + 1, eta, cost);
      }
    }
  };
  rec(0, x, 0.0);
  return best;
}

}  // namespace hjhomog
