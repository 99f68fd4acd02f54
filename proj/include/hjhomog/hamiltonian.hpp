#pragma once

#include "domain.hpp"
#include "fields.hpp"

#include <boost/math/tools/minima.hpp>

#include <optional>

namespace hjhomog {

enum class HamiltonianKind { Quadratic, Eikonal, Custom };

inline const char* to_string(HamiltonianKind k) {
  switch (k) {
    case HamiltonianKind::Quadratic: return "quadratic";
    case HamiltonianKind::Eikonal: return "eikonal";
    case HamiltonianKind::Custom: return "custom";
  }
  return "?";
}

// Quadratic: |p|^2/2 + c(y).  Eikonal: c(y)|p|.  Custom: user callable.
template <int N>
struct Hamiltonian {
  HamiltonianKind kind = HamiltonianKind::Quadratic;
  ScalarField<N> potential = ScalarField<N>::constant_field(0.0);
  ScalarField<N> speed = ScalarField<N>::constant_field(1.0);
  std::function<double(const Vec<N>&, const Vec<N>&)> custom;
  double K0 = 0.0;
  std::optional<double> truncation_radius;
  std::string description = "quadratic";

  double raw(const Vec<N>& y, const Vec<N>& p) const {
    switch (kind) {
      case HamiltonianKind::Quadratic: return 0.5 * p.squaredNorm() + potential(y);
      case HamiltonianKind::Eikonal: return speed(y) * p.norm();
      case HamiltonianKind::Custom: return custom(y, p);
    }
    return 0.0;
  }

  double operator()(const Vec<N>& y, const Vec<N>& p) const {
    double v = raw(y, p);
    if (truncation_radius && p.norm() > *truncation_radius) {
      double q = 0.5 * p.squaredNorm();
      v = std::min(std::max(v, q - K0), q + K0);
    }
    return v;
  }

  // True when H differs from a y-independent function only by an additive c(y).
  bool separable() const {
    if (kind == HamiltonianKind::Quadratic) return true;
    if (kind == HamiltonianKind::Eikonal) return speed.constant;
    return false;
  }

  static Hamiltonian quadratic(ScalarField<N> c = ScalarField<N>::constant_field(0.0)) {
    Hamiltonian h;
    h.kind = HamiltonianKind::Quadratic;
    h.K0 = c.sup_abs;
    h.description = "quadratic+" + c.description;
    h.potential = std::move(c);
    return h;
  }

  static Hamiltonian eikonal(ScalarField<N> c = ScalarField<N>::constant_field(1.0)) {
    if (c.min_value <= 0.0) throw Error(ErrorCode::InvalidConfig, "eikonal speed must be positive");
    Hamiltonian h;
    h.kind = HamiltonianKind::Eikonal;
    h.description = "eikonal*" + c.description;
    h.speed = std::move(c);
    return h;
  }

  static Hamiltonian custom_hamiltonian(std::function<double(const Vec<N>&, const Vec<N>&)> f, double K0,
                                        std::optional<double> trunc, std::string name) {
    Hamiltonian h;
    h.kind = HamiltonianKind::Custom;
    h.custom = std::move(f);
    h.K0 = K0;
    h.truncation_radius = trunc;
    h.description = std::move(name);
    return h;
  }
};

enum class BoundaryKind { Oblique, ContactAngle };

template <int N>
struct BoundaryCondition {
  BoundaryKind kind = BoundaryKind::Oblique;
  ScalarField<N> g = ScalarField<N>::constant_field(0.0);
  ObliqueField<N> gamma = ObliqueField<N>::normal();
  ScalarField<N> theta = ScalarField<N>::constant_field(kPi / 2);

  static BoundaryCondition oblique(ScalarField<N> g, ObliqueField<N> gamma = ObliqueField<N>::normal()) {
    BoundaryCondition b;
    b.kind = BoundaryKind::Oblique;
    b.g = std::move(g);
    b.gamma = std::move(gamma);
    return b;
  }

  static BoundaryCondition contact_angle(ScalarField<N> theta) {
    if (theta.min_value < kPi / 2 - 1e-14 || theta.max_value >= kPi)
      throw Error(ErrorCode::InvalidConfig, "contact angle must lie in [pi/2, pi)");
    BoundaryCondition b;
    b.kind = BoundaryKind::ContactAngle;
    b.theta = std::move(theta);
    b.gamma = ObliqueField<N>::normal();
    return b;
  }

  static BoundaryCondition contact_angle(double theta) {
    return contact_angle(ScalarField<N>::constant_field(theta));
  }

  double h(const Vec<N>& y) const { return kind == BoundaryKind::ContactAngle ? std::cos(theta(y)) : 0.0; }

  // sup |h| for contact angle; must stay below 1.
  double h_sup() const {
    if (kind != BoundaryKind::ContactAngle) return 0.0;
    return std::max(std::abs(std::cos(theta.min_value)), std::abs(std::cos(theta.max_value)));
  }

  std::string description() const {
    if (kind == BoundaryKind::Oblique) return "oblique(g=" + g.description + ",gamma=" + gamma.description + ")";
    return "contact-angle(theta=" + theta.description + ")";
  }
};

struct LagrangianOptions {
  int rays = 64;
  double sentinel = kSentinel;
};

// H, its Legendre transform and the modified Lagrangians L_N, L_C.
template <int N>
class LagrangianEvaluator {
 public:
  LagrangianEvaluator(Hamiltonian<N> h, BoundaryCondition<N> bc, LagrangianOptions opt = {})
      : h_(std::move(h)), bc_(std::move(bc)), opt_(opt), rays_(direction_net<N>(N == 2 ? opt.rays : 2 * opt.rays)) {}

  const Hamiltonian<N>& hamiltonian() const { return h_; }
  const BoundaryCondition<N>& bc() const { return bc_; }
  double sentinel() const { return opt_.sentinel; }

  double legendre(const Vec<N>& y, const Vec<N>& q) const {
    if (!h_.truncation_radius) {
      if (h_.kind == HamiltonianKind::Quadratic) return 0.5 * q.squaredNorm() - h_.potential(y);
      if (h_.kind == HamiltonianKind::Eikonal) return q.norm() <= h_.speed(y) * (1 + 1e-12) ? 0.0 : opt_.sentinel;
    }
    return sup_numeric(y, q, 0.0);
  }

  double legendre_numeric(const Vec<N>& y, const Vec<N>& q) const { return sup_numeric(y, q, 0.0); }

  double lagrangian_N(const Vec<N>& y, const Vec<N>& q, double l) const {
    double L = legendre(y, q);
    if (is_infinite_cost(L)) return opt_.sentinel;
    return L - bc_.g(y) * l;
  }

  double lagrangian_C(const Vec<N>& y, const Vec<N>& q, double l) const {
    double hl = bc_.h(y) * l;
    if (!h_.truncation_radius) {
      if (h_.kind == HamiltonianKind::Quadratic) {
        double r = std::max(q.norm() - hl, 0.0);
        return 0.5 * r * r - h_.potential(y);
      }
      if (h_.kind == HamiltonianKind::Eikonal) return q.norm() <= (h_.speed(y) + hl) * (1 + 1e-12) ? 0.0 : opt_.sentinel;
    }
    return sup_numeric(y, q, hl);
  }

  double lagrangian_C_numeric(const Vec<N>& y, const Vec<N>& q, double l) const {
    return sup_numeric(y, q, bc_.h(y) * l);
  }

  // Running cost L(y, -v, -l) for the configured boundary condition.
  double running_cost(const Vec<N>& y, const Vec<N>& v, double l) const {
    if (bc_.kind == BoundaryKind::Oblique) return lagrangian_N(y, -v, -l);
    return lagrangian_C(y, -v, -l);
  }

  double boundary_operator(const ScaledDomain<N>& dom, const Vec<N>& x, const Vec<N>& p) const {
    Vec<N> nu = dom.normal(x);
    Vec<N> y = x / dom.eps;
    if (bc_.kind == BoundaryKind::Oblique) return bc_.gamma.gamma(y, nu).dot(p) - bc_.g(y);
    return nu.dot(p) - bc_.h(y) * p.norm();
  }

  // Lower bound constant for L_N.
  double K1() const {
    double C = bc_.gamma.reflection_bound();
    double gs = bc_.kind == BoundaryKind::Oblique ? bc_.g.sup_abs : 0.0;
    return h_.K0 + 0.5 * (C * gs) * (C * gs);
  }

  // sup_p { p.q - H(y,p) - a|p| }, polar search with local refinement.
  double sup_numeric(const Vec<N>& y, const Vec<N>& q, double a) const {
    double R0 = q.norm() + std::abs(a) + 2.0 * std::sqrt(2.0 * h_.K0) + 1.0;
    auto f = [&](const Vec<N>& p) { return p.dot(q) - h_(y, p) - a * p.norm(); };
    double best = f(Vec<N>::Zero());
    if constexpr (N == 2) {
      int best_k = -1;
      for (std::size_t k = 0; k < rays_.size(); ++k) {
        double v = radial_max(f, rays_[k], R0);
        if (v >= opt_.sentinel) return opt_.sentinel;
        if (v > best) {
          best = v;
          best_k = static_cast<int>(k);
        }
      }
      if (best_k >= 0) {
        double phi0 = std::atan2(rays_[best_k][1], rays_[best_k][0]);
        double dphi = 2.0 * kPi / rays_.size();
        auto g = [&](double phi) { return -radial_max(f, Vec<N>(std::cos(phi), std::sin(phi)), R0); };
        boost::uintmax_t it = 200;
        auto r = boost::math::tools::brent_find_minima(g, phi0 - dphi, phi0 + dphi, 52, it);
        best = std::max(best, -r.second);
      }
    } else {
      Vec<N> bp = Vec<N>::Zero();
      for (const auto& w : rays_) {
        double r;
        double v = radial_max(f, w, R0, &r);
        if (v >= opt_.sentinel) return opt_.sentinel;
        if (v > best) {
          best = v;
          bp = r * w;
        }
      }
      double step = R0 / 8;
      while (step > 1e-11) {
        bool moved = false;
        for (int i = 0; i < N; ++i) {
          for (int s : {-1, 1}) {
            Vec<N> t = bp;
            t[i] += s * step;
            double v = f(t);
            if (v > best) {
              best = v;
              bp = t;
              moved = true;
            }
          }
        }
        if (!moved) step *= 0.5;
      }
    }
    return best;
  }

 private:
  template <class F>
  double radial_max(const F& f, const Vec<N>& w, double R0, double* arg = nullptr) const {
    double R = R0;
    for (int grow = 0; grow < 40; ++grow) {
      auto g = [&](double r) { return -f(r * w); };
      boost::uintmax_t it = 200;
      auto res = boost::math::tools::brent_find_minima(g, 0.0, R, 52, it);
      if (res.first < 0.98 * R) {
        double v = -res.second;
        double v0 = f(Vec<N>::Zero());
        if (v0 > v) {
          if (arg) *arg = 0.0;
          return v0;
        }
        if (arg) *arg = res.first;
        return v;
      }
      R *= 2.0;
      if (R > 1e8) break;
    }
    return opt_.sentinel;
  }

  Hamiltonian<N> h_;
  BoundaryCondition<N> bc_;
  LagrangianOptions opt_;
  std::vector<Vec<N>> rays_;
};

}  // namespace hjhomog
