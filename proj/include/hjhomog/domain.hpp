#pragma once

#include "core.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace hjhomog {

enum class Region { Interior, Boundary, Exterior };

enum class DomainKind { BallLattice, DiskComplement, HalfSpace, FreeSpace, External };

// Level-set description of a (usually Z^n-periodic) domain: Omega = {psi < 0}.
template <int N>
struct ImplicitDomain {
  std::function<double(const Vec<N>&)> psi;
  std::function<Vec<N>(const Vec<N>&)> grad_psi;
  DomainKind kind = DomainKind::External;
  bool periodic = true;
  bool has_boundary = true;
  double radius = 0.0;  // ball-lattice and disk-complement only
  double boundary_tol = 1e-9;
  double psi_max = 0.45;
  int max_iter = 60;
  std::string description = "external";
};

template <int N>
ImplicitDomain<N> ball_lattice(double r) {
  if (!(r > 0.0 && r < 0.5)) throw Error(ErrorCode::InvalidConfig, "ball-lattice radius must lie in (0, 1/2)");
  ImplicitDomain<N> d;
  d.kind = DomainKind::BallLattice;
  d.radius = r;
  d.psi = [r](const Vec<N>& x) { return r - (x - round_lattice<N>(x)).norm(); };
  d.grad_psi = [](const Vec<N>& x) {
    Vec<N> dx = x - round_lattice<N>(x);
    double n = dx.norm();
    if (n == 0.0) {
      Vec<N> e = Vec<N>::Zero();
      e[0] = -1.0;
      return e;
    }
    return Vec<N>(-dx / n);
  };
  d.psi_max = r - 1e-6;
  d.description = "ball-lattice(r=" + std::to_string(r) + ")";
  return d;
}

// R^n minus the closed ball B(0, R); not periodic.
template <int N>
ImplicitDomain<N> disk_complement(double R = 1.0) {
  ImplicitDomain<N> d;
  d.kind = DomainKind::DiskComplement;
  d.periodic = false;
  d.radius = R;
  d.psi = [R](const Vec<N>& x) { return R - x.norm(); };
  d.grad_psi = [](const Vec<N>& x) {
    double n = x.norm();
    if (n == 0.0) {
      Vec<N> e = Vec<N>::Zero();
      e[0] = -1.0;
      return e;
    }
    return Vec<N>(-x / n);
  };
  d.psi_max = R - 1e-6;
  d.description = "disk-complement(R=" + std::to_string(R) + ")";
  return d;
}

// {x : x[axis] > 0}; the wall normal points to -e_axis.
template <int N>
ImplicitDomain<N> half_space(int axis = N - 1) {
  ImplicitDomain<N> d;
  d.kind = DomainKind::HalfSpace;
  d.periodic = false;
  d.psi = [axis](const Vec<N>& x) { return -x[axis]; };
  d.grad_psi = [axis](const Vec<N>&) {
    Vec<N> g = Vec<N>::Zero();
    g[axis] = -1.0;
    return g;
  };
  d.psi_max = 1e300;
  d.description = "half-space";
  return d;
}

template <int N>
ImplicitDomain<N> free_space() {
  ImplicitDomain<N> d;
  d.kind = DomainKind::FreeSpace;
  d.has_boundary = false;
  d.psi = [](const Vec<N>&) { return -1.0; };
  d.grad_psi = [](const Vec<N>&) { return Vec<N>::Zero().eval(); };
  d.description = "free-space";
  return d;
}

// Geometry of eps * Omega with its own boundary tolerance.
template <int N>
struct ScaledDomain {
  ImplicitDomain<N> base;
  double eps = 1.0;
  double tol = 1e-9;

  ScaledDomain() = default;
  ScaledDomain(ImplicitDomain<N> b, double e, double t) : base(std::move(b)), eps(e), tol(t) {}
  explicit ScaledDomain(ImplicitDomain<N> b) : base(std::move(b)), eps(1.0), tol(base.boundary_tol) {}

  double psi(const Vec<N>& x) const { return eps * base.psi(x / eps); }
  Vec<N> grad(const Vec<N>& x) const { return base.grad_psi(x / eps); }

  Region classify(const Vec<N>& x) const {
    double p = psi(x);
    if (p < -tol) return Region::Interior;
    if (p > tol) return Region::Exterior;
    return Region::Boundary;
  }

  // Distance from x/eps to the nearest Voronoi ridge of the lattice (ball lattice only).
  double ridge_distance(const Vec<N>& x) const {
    Vec<N> y = x / eps;
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < N; ++i) m = std::min(m, 0.5 - std::abs(y[i] - std::round(y[i])));
    return m * eps;
  }

  Vec<N> normal(const Vec<N>& y) const {
    if (classify(y) != Region::Boundary) throw Error(ErrorCode::NotOnBoundary, "normal requested off the boundary band");
    return unit_normal(y);
  }

  // Normal without the band check (used on points known to be near the boundary).
  Vec<N> unit_normal(const Vec<N>& y) const {
    if (base.kind == DomainKind::BallLattice && ridge_distance(y) <= tol)
      throw Error(ErrorCode::NotOnBoundary, "point lies on a lattice Voronoi ridge");
    Vec<N> g = grad(y);
    double n = g.norm();
    if (n == 0.0) throw Error(ErrorCode::NotOnBoundary, "vanishing level-set gradient");
    return g / n;
  }

  // Damped Newton along the level-set gradient, aiming slightly inside the closure.
  Vec<N> project_to_closure(const Vec<N>& x) const {
    double p = psi(x);
    if (p <= 0.0) return x;
    if (p > eps * base.psi_max) throw Error(ErrorCode::ProjectionDiverged, "point lies too deep inside a hole");
    const double target = -0.25 * tol;
    Vec<N> z = x;
    for (int it = 0; it < base.max_iter; ++it) {
      Vec<N> g = grad(z);
      double gg = g.squaredNorm();
      if (gg == 0.0) break;
      double step = (p - target) / gg;
      Vec<N> trial = z - step * g;
      double pt = psi(trial);
      for (int k = 0; k < 30 && std::abs(pt - target) > std::abs(p - target); ++k) {
        step *= 0.5;
        trial = z - step * g;
        pt = psi(trial);
      }
      z = trial;
      p = pt;
      if (p <= 0.0 && p >= -tol) return z;
    }
    throw Error(ErrorCode::ProjectionDiverged, "Newton projection did not converge");
  }
};

template <int N>
Region classify(const ImplicitDomain<N>& d, const Vec<N>& x) {
  return ScaledDomain<N>(d).classify(x);
}

template <int N>
Vec<N> normal(const ImplicitDomain<N>& d, const Vec<N>& y) {
  return ScaledDomain<N>(d).normal(y);
}

template <int N>
Vec<N> project_to_closure(const ImplicitDomain<N>& d, const Vec<N>& x) {
  return ScaledDomain<N>(d).project_to_closure(x);
}

namespace detail {

template <int N>
bool in_cube(const Vec<N>& p, const Vec<N>& c) {
  for (int i = 0; i < N; ++i)
    if (std::abs(p[i] - c[i]) > 0.5 + 1e-12) return false;
  return true;
}

// Greedy farthest-point selection, deterministic (starts at candidate 0).
template <int N>
std::vector<Vec<N>> farthest_points(const std::vector<Vec<N>>& cand, int count) {
  std::vector<Vec<N>> out;
  if (cand.empty()) return out;
  std::vector<double> dist(cand.size(), std::numeric_limits<double>::infinity());
  std::size_t pick = 0;
  for (int k = 0; k < count && k < static_cast<int>(cand.size()); ++k) {
    out.push_back(cand[pick]);
    std::size_t best = 0;
    double bestd = -1.0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      dist[i] = std::min(dist[i], (cand[i] - cand[pick]).squaredNorm());
      if (dist[i] > bestd) {
        bestd = dist[i];
        best = i;
      }
    }
    if (bestd <= 0.0) break;
    pick = best;
  }
  return out;
}

}  // namespace detail

// Boundary points p with p - center in Y, spread quasi-uniformly.
template <int N>
std::vector<Vec<N>> boundary_sample(const ImplicitDomain<N>& d, const Vec<N>& center, int count) {
  std::vector<Vec<N>> cand;
  if (!d.has_boundary) throw Error(ErrorCode::EmptyBoundary, "domain has no boundary");
  if constexpr (N == 2) {
    if (d.kind == DomainKind::BallLattice || d.kind == DomainKind::DiskComplement) {
      std::vector<Vec<N>> centers;
      if (d.kind == DomainKind::DiskComplement) {
        centers.push_back(Vec<N>::Zero());
      } else {
        Vec<N> base = round_lattice<N>(center);
        for (int i = -1; i <= 1; ++i)
          for (int j = -1; j <= 1; ++j) centers.push_back(base + Vec<N>(i, j));
      }
      const int per = std::max(64, 32 * count);
      for (const auto& z : centers) {
        for (int k = 0; k < per; ++k) {
          double a = 2.0 * kPi * k / per;
          Vec<N> p = z + d.radius * Vec<N>(std::cos(a), std::sin(a));
          if (detail::in_cube<N>(p, center)) cand.push_back(p);
        }
      }
      if (cand.empty()) throw Error(ErrorCode::EmptyBoundary, "no boundary point in the cube");
      return detail::farthest_points<N>(cand, count);
    }
  }
  // Generic: Newton-project a seed lattice onto {psi = 0}.
  const int per_axis = N == 2 ? 48 : (N == 3 ? 16 : 6);
  std::array<int, N> idx{};
  ScaledDomain<N> sd(d);
  while (true) {
    Vec<N> s;
    for (int i = 0; i < N; ++i) s[i] = center[i] - 0.5 + (idx[i] + 0.5) / per_axis;
    Vec<N> z = s;
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
      double p = d.psi(z);
      if (std::abs(p) <= 1e-13) {
        ok = true;
        break;
      }
      Vec<N> g = d.grad_psi(z);
      double gg = g.squaredNorm();
      if (gg == 0.0) break;
      z -= (p / gg) * g;
      if ((z - s).norm() > 1.0) break;
    }
    if (ok && std::abs(d.psi(z)) <= d.boundary_tol && detail::in_cube<N>(z, center)) cand.push_back(z);
    int a = 0;
    while (a < N && ++idx[a] == per_axis) idx[a++] = 0;
    if (a == N) break;
  }
  if (cand.empty()) throw Error(ErrorCode::EmptyBoundary, "no boundary point in the cube after seeding");
  return detail::farthest_points<N>(cand, count);
}

// Reflection direction field gamma with obliqueness bound rho.
template <int N>
struct ObliqueField {
  std::function<Vec<N>(const Vec<N>& y, const Vec<N>& nu)> gamma;
  double rho = 1.0;
  double sup_norm = 1.0;
  bool is_normal = true;
  std::string description = "normal";

  static ObliqueField normal() {
    ObliqueField f;
    f.gamma = [](const Vec<N>&, const Vec<N>& nu) { return nu; };
    return f;
  }

  // 2-D only: nu rotated counter-clockwise by a fixed angle |angle| < pi/2.
  static ObliqueField rotated(double angle) {
    static_assert(N == 2, "rotated oblique fields are two-dimensional");
    if (!(std::abs(angle) < kPi / 2)) throw Error(ErrorCode::InvalidConfig, "rotation angle must satisfy |a| < pi/2");
    ObliqueField f;
    double c = std::cos(angle), s = std::sin(angle);
    f.gamma = [c, s](const Vec<N>&, const Vec<N>& nu) { return Vec<N>(c * nu[0] - s * nu[1], s * nu[0] + c * nu[1]); };
    f.rho = c;
    f.sup_norm = 1.0;
    f.is_normal = angle == 0.0;
    f.description = "rotated(" + std::to_string(angle) + ")";
    return f;
  }

  // Constant C with l <= C |v| along Skorokhod paths.
  double reflection_bound() const { return 1.0 + sup_norm / rho; }

  Vec<N> at(const ScaledDomain<N>& dom, const Vec<N>& x) const {
    Vec<N> nu = dom.unit_normal(x);
    return gamma(x / dom.eps, nu);
  }
};

struct DomainValidation {
  double periodicity_defect = 0.0;
  double gradient_rel_error = 0.0;
  double min_obliqueness = std::numeric_limits<double>::infinity();
  double min_band_gradient = std::numeric_limits<double>::infinity();
  bool ok = true;
};

// Sampled checks of the domain invariants (periodicity, gradient, obliqueness).
template <int N>
DomainValidation validate_domain(const ImplicitDomain<N>& d, const ObliqueField<N>& gamma,
                                 unsigned seed = 7, int samples = 1000) {
  DomainValidation r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  std::uniform_int_distribution<int> Z(-3, 3);
  if (d.periodic) {
    for (int s = 0; s < samples; ++s) {
      Vec<N> y, z;
      for (int i = 0; i < N; ++i) {
        y[i] = U(rng);
        z[i] = Z(rng);
      }
      r.periodicity_defect = std::max(r.periodicity_defect, std::abs(d.psi(y + z) - d.psi(y)));
    }
    if (r.periodicity_defect > 1e-12) r.ok = false;
  }
  if (!d.has_boundary) return r;
  std::vector<Vec<N>> pts;
  if (d.periodic) {
    pts = boundary_sample<N>(d, Vec<N>::Zero(), 64);
  } else if (d.kind == DomainKind::DiskComplement) {
    pts = boundary_sample<N>(d, Vec<N>::Zero(), 64);
  }
  const double fd = 1e-6;
  for (const auto& p : pts) {
    Vec<N> g = d.grad_psi(p);
    Vec<N> num;
    for (int i = 0; i < N; ++i) {
      Vec<N> e = Vec<N>::Zero();
      e[i] = fd;
      num[i] = (d.psi(p + e) - d.psi(p - e)) / (2 * fd);
    }
    r.gradient_rel_error = std::max(r.gradient_rel_error, (num - g).norm() / std::max(1e-300, g.norm()));
    r.min_band_gradient = std::min(r.min_band_gradient, g.norm());
    Vec<N> nu = g / g.norm();
    r.min_obliqueness = std::min(r.min_obliqueness, gamma.gamma(p, nu).dot(nu));
  }
  if (r.gradient_rel_error > 1e-5 || r.min_band_gradient <= 0.0 || r.min_obliqueness < gamma.rho - 1e-12) r.ok = false;
  return r;
}

// Plug-in domain; invariants are validated on construction.
template <int N>
ImplicitDomain<N> external_domain(std::function<double(const Vec<N>&)> psi,
                                  std::function<Vec<N>(const Vec<N>&)> grad, bool periodic,
                                  std::string name, double psi_max = 0.45) {
  ImplicitDomain<N> d;
  d.kind = DomainKind::External;
  d.psi = std::move(psi);
  d.grad_psi = std::move(grad);
  d.periodic = periodic;
  d.psi_max = psi_max;
  d.description = std::move(name);
  if (periodic) {
    auto rep = validate_domain<N>(d, ObliqueField<N>::normal());
    if (!rep.ok) throw Error(ErrorCode::InvalidConfig, "external domain fails validation");
  }
  return d;
}

}  // namespace hjhomog
