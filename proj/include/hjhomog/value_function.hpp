#pragma once

#include "hamiltonian.hpp"
#include "skorokhod.hpp"

#include <map>
#include <optional>
#include <random>

namespace hjhomog {

template <int N>
struct Scenario {
  ImplicitDomain<N> domain;
  Hamiltonian<N> hamiltonian;
  BoundaryCondition<N> bc;
  InitialData<N> u0;

  LagrangianEvaluator<N> evaluator() const { return LagrangianEvaluator<N>(hamiltonian, bc); }
  const ObliqueField<N>& gamma() const { return bc.gamma; }
};

// Speed bound for minimizers, 2 (Lip u0 + sqrt(2 K0) + 1).
inline double m0_estimate(double lip_u0, double K0) { return 2.0 * (lip_u0 + std::sqrt(2.0 * K0) + 1.0); }

template <int N>
struct GridSpec {
  Vec<N> lo = Vec<N>::Zero();
  double h = 0.1;
  std::array<int, N> dims{};
  std::array<bool, N> periodic{};

  std::size_t size() const {
    std::size_t s = 1;
    for (int d : dims) s *= static_cast<std::size_t>(d);
    return s;
  }
  std::array<int, N> multi(std::size_t idx) const {
    std::array<int, N> m{};
    for (int a = 0; a < N; ++a) {
      m[a] = static_cast<int>(idx % dims[a]);
      idx /= dims[a];
    }
    return m;
  }
  std::size_t linear(const std::array<int, N>& m) const {
    std::size_t idx = 0;
    for (int a = N - 1; a >= 0; --a) idx = idx * dims[a] + m[a];
    return idx;
  }
  Vec<N> node(const std::array<int, N>& m) const {
    Vec<N> x;
    for (int a = 0; a < N; ++a) x[a] = lo[a] + m[a] * h;
    return x;
  }
  Vec<N> node(std::size_t idx) const { return node(multi(idx)); }
  Vec<N> hi() const {
    Vec<N> x;
    for (int a = 0; a < N; ++a) x[a] = lo[a] + (periodic[a] ? dims[a] : dims[a] - 1) * h;
    return x;
  }
  bool operator==(const GridSpec& o) const {
    return lo == o.lo && h == o.h && dims == o.dims && periodic == o.periodic;
  }

  // Grid with step h covering [lo, hi]; periodic axes use [lo, hi) with hi - lo = period.
  static GridSpec box(const Vec<N>& lo, const Vec<N>& hi, double h, std::array<bool, N> periodic = {}) {
    GridSpec g;
    g.lo = lo;
    g.h = h;
    g.periodic = periodic;
    for (int a = 0; a < N; ++a) {
      double n = (hi[a] - lo[a]) / h;
      int k = static_cast<int>(std::llround(n));
      if (std::abs(n - k) > 1e-9) k = static_cast<int>(std::ceil(n));
      g.dims[a] = periodic[a] ? k : k + 1;
    }
    return g;
  }
};

template <int N>
struct SpaceTimeGrid {
  GridSpec<N> space;
  double dt = 0.01;
  int steps = 0;
  double eps = 1.0;

  double T() const { return dt * steps; }
  bool operator==(const SpaceTimeGrid& o) const {
    return space == o.space && dt == o.dt && steps == o.steps && eps == o.eps;
  }
};

// Velocity samples plus reflection samples used at boundary nodes.
template <int N>
struct ControlNet {
  std::vector<Vec<N>> directions;
  std::vector<double> speeds;
  std::vector<double> l_samples;
  bool include_zero = true;

  double vmax() const {
    double m = 0.0;
    for (double s : speeds) m = std::max(m, s);
    return m;
  }
  double lmax() const {
    double m = 0.0;
    for (double s : l_samples) m = std::max(m, s);
    return m;
  }
  std::vector<Vec<N>> velocities() const {
    std::vector<Vec<N>> out;
    if (include_zero) out.push_back(Vec<N>::Zero());
    for (double s : speeds)
      if (s > 0.0)
        for (const auto& d : directions) out.push_back(s * d);
    return out;
  }

  static ControlNet polar(int ndirs, std::vector<double> speeds, int l_count, double lmax) {
    ControlNet c;
    c.directions = direction_net<N>(ndirs);
    c.speeds = std::move(speeds);
    for (int k = 1; k <= l_count; ++k) c.l_samples.push_back(lmax * k / l_count);
    return c;
  }

  // Speeds (vmax/count, 2 vmax/count, ..., vmax).
  static std::vector<double> uniform_speeds(double vmax, int count) {
    std::vector<double> s;
    for (int k = 1; k <= count; ++k) s.push_back(vmax * k / count);
    return s;
  }
};

struct SolverOptions {
  double boundary_tol = -1.0;  // negative: h/10
  int workers = 1;
  std::vector<int> store_levels;  // empty: all
  bool enforce_cfl = true;
  bool check_window = true;
  // Region whose values must be free of window effects (non-periodic axes).
  std::optional<std::pair<std::vector<double>, std::vector<double>>> roi;
};

template <int N>
struct ValueField {
  SpaceTimeGrid<N> grid;
  BoundaryKind bc_kind = BoundaryKind::Oblique;
  std::string u0_description;
  std::vector<int> levels;
  std::vector<std::vector<double>> values;
  std::vector<std::uint8_t> admissible;
  double boundary_tol = 0.0;

  bool has_level(int k) const { return level_slot(k) >= 0; }
  int level_slot(int k) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (levels[i] == k) return static_cast<int>(i);
    return -1;
  }
  const std::vector<double>& at_level(int k) const {
    int s = level_slot(k);
    if (s < 0) throw Error(ErrorCode::InvalidConfig, "time level not stored");
    return values[s];
  }
  double time(int k) const { return k * grid.dt; }
  int final_level() const { return levels.empty() ? 0 : levels.back(); }
};

namespace detail {

template <int N>
struct InterpStencil {
  static constexpr int K = 1 << N;
  std::array<std::array<int, N>, K> corner{};
  std::array<double, K> w{};
  int count = 0;
};

// Multilinear stencil restricted to admissible nodes; returns false if unusable.
template <int N, class Admissible>
bool build_stencil(const GridSpec<N>& g, const Vec<N>& x, const Admissible& adm, InterpStencil<N>& st,
                   bool wrap_check = true) {
  std::array<int, N> base{};
  std::array<double, N> frac{};
  for (int a = 0; a < N; ++a) {
    double u = (x[a] - g.lo[a]) / g.h;
    double f = std::floor(u);
    double r = u - f;
    if (r > 1.0 - 1e-12) {
      f += 1.0;
      r = 0.0;
    } else if (r < 1e-12) {
      r = 0.0;
    }
    base[a] = static_cast<int>(f);
    frac[a] = r;
    if (wrap_check && !g.periodic[a]) {
      if (base[a] < 0 || base[a] > g.dims[a] - 1) return false;
      if (base[a] == g.dims[a] - 1 && r > 0.0) return false;
    }
  }
  st.count = 0;
  double total = 0.0;
  for (int c = 0; c < InterpStencil<N>::K; ++c) {
    double w = 1.0;
    std::array<int, N> m{};
    for (int a = 0; a < N; ++a) {
      int bit = (c >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      m[a] = base[a] + bit;
    }
    if (w <= 1e-14) continue;
    if (!adm(m)) continue;
    st.corner[st.count] = m;
    st.w[st.count] = w;
    ++st.count;
    total += w;
  }
  if (st.count == 0 || total <= 1e-12) return false;
  for (int i = 0; i < st.count; ++i) st.w[i] /= total;
  return true;
}

}  // namespace detail

// One candidate move from a point: control v, realized reflection l, foot, running cost.
template <int N>
struct Move {
  Vec<N> v;
  double l = 0.0;
  Vec<N> foot;
  double cost = 0.0;
  detail::InterpStencil<N> stencil;
};

// Semi-Lagrangian dynamic programming engine on a (possibly periodic) window.
template <int N>
class DpEngine {
 public:
  static constexpr int K = 1 << N;

  DpEngine(const Scenario<N>& sc, SpaceTimeGrid<N> grid, ControlNet<N> net, SolverOptions opt = {})
      : sc_(sc), eval_(sc.evaluator()), grid_(grid), net_(std::move(net)), opt_(std::move(opt)) {
    tol_ = opt_.boundary_tol > 0 ? opt_.boundary_tol : grid_.space.h / 10.0;
    dom_ = ScaledDomain<N>(sc.domain, grid_.eps, tol_);
    velocities_ = net_.velocities();
    if (sc.bc.kind == BoundaryKind::ContactAngle && !sc.bc.gamma.is_normal)
      throw Error(ErrorCode::InvalidConfig, "contact-angle condition requires gamma = nu");
    const double vmax = net_.vmax();
    if (opt_.enforce_cfl && grid_.dt > grid_.space.h / std::max(vmax, 1e-300) * (1 + 1e-9))
      throw Error(ErrorCode::CFLViolation, "dt exceeds h / V_max");
    path_speed_ = vmax * (sc.bc.gamma.is_normal ? 1.0 : 1.0 + sc.bc.gamma.reflection_bound() * sc.bc.gamma.sup_norm);
    check_window();
    build_mask();
    build_classes();
  }

  const GridSpec<N>& space() const { return grid_.space; }
  const SpaceTimeGrid<N>& grid() const { return grid_; }
  const ScaledDomain<N>& domain() const { return dom_; }
  const LagrangianEvaluator<N>& evaluator() const { return eval_; }
  const std::vector<std::uint8_t>& admissible() const { return adm_; }
  double boundary_tol() const { return tol_; }
  std::size_t class_count() const { return classes_.size(); }

  bool admissible_multi(std::array<int, N> m) const {
    if (!wrap(m)) return false;
    return adm_[grid_.space.linear(m)] != 0;
  }

  // Candidate moves from an arbitrary point of the closure with time step dt.
  std::vector<Move<N>> moves_at(const Vec<N>& x, double dt) const {
    std::vector<Move<N>> out;
    auto adm = [this](const std::array<int, N>& m) { return admissible_multi(m); };
    auto push = [&](const Vec<N>& v) {
      Move<N> mv;
      mv.v = v;
      SpStep<N> s;
      try {
        s = sp_step(dom_, sc_.bc.gamma, x, v, dt);
      } catch (const Error&) {
        return false;
      }
      double L = eval_.running_cost(x / grid_.eps, v, s.l);
      if (is_infinite_cost(L)) return false;
      mv.l = s.l;
      mv.foot = s.next;
      mv.cost = dt * L;
      if (!detail::build_stencil<N>(grid_.space, mv.foot, adm, mv.stencil)) return false;
      out.push_back(mv);
      return true;
    };
    for (const auto& v : velocities_) push(v);
    if (dom_.base.has_boundary && std::abs(dom_.psi(x)) <= tol_) add_sliding(x, dt, push);
    return out;
  }

  double interpolate(const std::vector<double>& V, const Vec<N>& x) const {
    detail::InterpStencil<N> st;
    auto adm = [this](const std::array<int, N>& m) { return admissible_multi(m); };
    if (!detail::build_stencil<N>(grid_.space, x, adm, st)) return kSentinel;
    return apply(V, st);
  }

  double apply(const std::vector<double>& V, const detail::InterpStencil<N>& st) const {
    double s = 0.0;
    for (int c = 0; c < st.count; ++c) {
      auto m = st.corner[c];
      wrap(m);
      double v = V[grid_.space.linear(m)];
      if (is_infinite_cost(v)) return kSentinel;
      s += st.w[c] * v;
    }
    return s;
  }

  // One DP level: next(x) = min over moves of cost + interpolated prev(foot).
  void step(const std::vector<double>& prev, std::vector<double>& next) const {
    next.assign(prev.size(), kSentinel);
    parallel_for(prev.size(), opt_.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        if (!adm_[i]) continue;
        const auto& cls = classes_[class_of_[i]];
        double best = kSentinel;
        if (safe_[i]) {
          for (const auto& en : cls) {
            double val = en.cost;
            bool bad = false;
            for (int c = 0; c < en.n; ++c) {
              double v = prev[i + en.lin[c]];
              if (v >= kSentinel / 2) {
                bad = true;
                break;
              }
              val += en.w[c] * v;
            }
            if (!bad && val < best) best = val;
          }
        } else {
          auto m = grid_.space.multi(i);
          for (const auto& en : cls) {
            double val = en.cost;
            bool bad = false;
            for (int c = 0; c < en.n; ++c) {
              std::array<int, N> q = m;
              for (int a = 0; a < N; ++a) q[a] += en.off[c][a];
              wrap(q);
              double v = prev[grid_.space.linear(q)];
              if (v >= kSentinel / 2) {
                bad = true;
                break;
              }
              val += en.w[c] * v;
            }
            if (!bad && val < best) best = val;
          }
        }
        next[i] = best >= kSentinel / 2 ? kSentinel : best + shift_[i];
      }
    });
  }

  ValueField<N> run(std::vector<double> initial, const std::string& u0_desc = "") const {
    ValueField<N> f;
    f.grid = grid_;
    f.bc_kind = sc_.bc.kind;
    f.u0_description = u0_desc;
    f.admissible = adm_;
    f.boundary_tol = tol_;
    std::vector<int> want = opt_.store_levels;
    if (want.empty())
      for (int k = 0; k <= grid_.steps; ++k) want.push_back(k);
    std::sort(want.begin(), want.end());
    auto keep = [&](int k) { return std::binary_search(want.begin(), want.end(), k); };
    for (std::size_t i = 0; i < initial.size(); ++i)
      if (!adm_[i]) initial[i] = kSentinel;
    if (keep(0)) {
      f.levels.push_back(0);
      f.values.push_back(initial);
    }
    std::vector<double> cur = std::move(initial), nxt;
    for (int k = 1; k <= grid_.steps; ++k) {
      step(cur, nxt);
      std::swap(cur, nxt);
      if (keep(k)) {
        f.levels.push_back(k);
        f.values.push_back(cur);
      }
    }
    return f;
  }

  std::vector<double> sample(const std::function<double(const Vec<N>&)>& fn) const {
    std::vector<double> v(grid_.space.size(), kSentinel);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (adm_[i]) v[i] = fn(grid_.space.node(i));
    return v;
  }

  // Wraps periodic axes in place; false if outside a non-periodic axis.
  bool wrap(std::array<int, N>& m) const {
    for (int a = 0; a < N; ++a) {
      int d = grid_.space.dims[a];
      if (grid_.space.periodic[a]) {
        m[a] %= d;
        if (m[a] < 0) m[a] += d;
      } else if (m[a] < 0 || m[a] >= d) {
        return false;
      }
    }
    return true;
  }

 private:
  struct Entry {
    double cost = 0.0;
    int n = 0;
    std::array<std::array<int, N>, K> off{};
    std::array<std::ptrdiff_t, K> lin{};
    std::array<double, K> w{};
  };

  template <class Push>
  void add_sliding(const Vec<N>& x, double dt, Push& push) const {
    Vec<N> nu;
    try {
      nu = dom_.unit_normal(x);
    } catch (const Error&) {
      return;
    }
    Vec<N> y = x / grid_.eps;
    Vec<N> g = sc_.bc.gamma.gamma(y, nu);
    std::vector<Vec<N>> tangents;
    for (const auto& d : net_.directions) {
      Vec<N> t = d - d.dot(nu) * nu;
      if (t.norm() > 1e-9) tangents.push_back(t.normalized());
    }
    if constexpr (N == 2) tangents = {Vec<N>(-nu[1], nu[0]), Vec<N>(nu[1], -nu[0])};
    std::vector<double> ls = net_.l_samples;
    if (sc_.bc.kind == BoundaryKind::ContactAngle) {
      double th = sc_.bc.theta(y);
      double s = std::sin(th);
      ls.push_back(-std::cos(th) / (s * s));
    }
    const bool eik = sc_.hamiltonian.kind == HamiltonianKind::Eikonal;
    for (double l : ls) {
      if (l <= 0.0) continue;
      for (const auto& t : tangents) {
        if (eik) {
          // Largest tangential speed whose realized step stays feasible.
          auto feasible = [&](double s) {
            Vec<N> v = s * t + l * g;
            try {
              auto st = sp_step(dom_, sc_.bc.gamma, x, v, dt);
              return !is_infinite_cost(eval_.running_cost(y, v, st.l));
            } catch (const Error&) {
              return false;
            }
          };
          double hi = std::max(net_.vmax(), 1.0) * 4.0;
          if (!feasible(0.0)) continue;
          double lo = 0.0;
          if (feasible(hi)) {
            lo = hi;
          } else {
            for (int it = 0; it < 60; ++it) {
              double mid = 0.5 * (lo + hi);
              (feasible(mid) ? lo : hi) = mid;
            }
          }
          push(Vec<N>(lo * t + l * g));
        } else {
          for (double s : net_.speeds) push(Vec<N>(s * t + l * g));
          push(Vec<N>(l * g));
        }
      }
    }
  }

  void check_window() {
    if (!opt_.check_window) return;
    const auto& g = grid_.space;
    const double reach = path_speed_ * grid_.T();
    Vec<N> hi = g.hi();
    for (int a = 0; a < N; ++a) {
      if (g.periodic[a]) continue;
      double rlo, rhi;
      if (opt_.roi) {
        rlo = opt_.roi->first[a];
        rhi = opt_.roi->second[a];
      } else {
        rlo = rhi = 0.5 * (g.lo[a] + hi[a]);
      }
      if (rlo - reach < g.lo[a] - 1e-9 || rhi + reach > hi[a] + 1e-9)
        throw Error(ErrorCode::WindowTooSmall, "domain-of-dependence cone exits the window");
    }
  }

  bool aligned() const {
    if (!sc_.domain.periodic) return false;
    double m = grid_.eps / grid_.space.h;
    if (std::abs(m - std::round(m)) > 1e-9 || std::round(m) < 1) return false;
    for (int a = 0; a < N; ++a) {
      double u = grid_.space.lo[a] / grid_.space.h;
      if (std::abs(u - std::round(u)) > 1e-9) return false;
    }
    return true;
  }

  std::array<int, N> residue(const std::array<int, N>& m) const {
    int per = static_cast<int>(std::lround(grid_.eps / grid_.space.h));
    std::array<int, N> r{};
    for (int a = 0; a < N; ++a) {
      long u = std::lround(grid_.space.lo[a] / grid_.space.h) + m[a];
      r[a] = static_cast<int>(((u % per) + per) % per);
    }
    return r;
  }

  void build_mask() {
    const auto& g = grid_.space;
    adm_.assign(g.size(), 1);
    if (!dom_.base.has_boundary) return;
    const bool al = aligned();
    std::map<std::array<int, N>, std::uint8_t> cache;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto m = g.multi(i);
      if (al) {
        auto r = residue(m);
        auto it = cache.find(r);
        if (it == cache.end()) {
          Vec<N> x;
          for (int a = 0; a < N; ++a) x[a] = r[a] * g.h;
          it = cache.emplace(r, dom_.psi(x) <= tol_ ? 1 : 0).first;
        }
        adm_[i] = it->second;
      } else {
        adm_[i] = dom_.psi(g.node(i)) <= tol_ ? 1 : 0;
      }
    }
  }

  std::vector<Entry> entries_for(std::size_t node) const {
    const auto& g = grid_.space;
    auto m = g.multi(node);
    Vec<N> x = g.node(m);
    std::vector<Entry> out;
    for (const auto& mv : moves_at(x, grid_.dt)) {
      Entry e;
      e.cost = mv.cost;
      e.n = mv.stencil.count;
      for (int c = 0; c < K; ++c) {
        if (c < mv.stencil.count) {
          for (int a = 0; a < N; ++a) e.off[c][a] = mv.stencil.corner[c][a] - m[a];
          e.w[c] = mv.stencil.w[c];
        } else {
          e.off[c].fill(0);
          e.w[c] = 0.0;
        }
        std::ptrdiff_t lin = 0, stride = 1;
        for (int a = 0; a < N; ++a) {
          lin += e.off[c][a] * stride;
          stride *= g.dims[a];
        }
        e.lin[c] = lin;
      }
      out.push_back(e);
    }
    return out;
  }

  void build_classes() {
    const auto& g = grid_.space;
    const std::size_t n = g.size();
    class_of_.assign(n, 0);
    safe_.assign(n, 0);
    shift_.assign(n, 0.0);
    const double reach = path_speed_ * grid_.dt + 2.0 * g.h * std::sqrt(double(N)) + 2.0 * tol_;
    const int reach_cells = static_cast<int>(std::ceil(reach / g.h)) + 1;
    const bool al = aligned();
    const bool sep = sc_.hamiltonian.separable() && sc_.hamiltonian.kind != HamiltonianKind::Custom;
    std::map<std::array<int, N>, std::size_t> residue_class;
    std::optional<std::size_t> free_class;
    Vec<N> free_rep_y;
    for (std::size_t i = 0; i < n; ++i) {
      if (!adm_[i]) continue;
      auto m = g.multi(i);
      bool near_edge = false, near_seam = false;
      for (int a = 0; a < N; ++a) {
        bool close = m[a] < reach_cells || m[a] >= g.dims[a] - reach_cells;
        if (!close) continue;
        if (g.periodic[a]) near_seam = true;
        else near_edge = true;
      }
      safe_[i] = !(near_edge || near_seam);
      Vec<N> x = g.node(m);
      if (near_edge) {
        class_of_[i] = classes_.size();
        classes_.push_back(entries_for(i));
        continue;
      }
      if (al) {
        auto r = residue(m);
        auto it = residue_class.find(r);
        if (it == residue_class.end()) {
          it = residue_class.emplace(r, classes_.size()).first;
          classes_.push_back(entries_for(i));
        }
        class_of_[i] = it->second;
        continue;
      }
      bool is_free = !dom_.base.has_boundary || dom_.psi(x) < -2.0 * reach;
      if (is_free && sep) {
        Vec<N> y = x / grid_.eps;
        if (!free_class) {
          free_class = classes_.size();
          free_rep_y = y;
          classes_.push_back(entries_for(i));
        }
        class_of_[i] = *free_class;
        if (sc_.hamiltonian.kind == HamiltonianKind::Quadratic && !sc_.hamiltonian.potential.constant)
          shift_[i] = -grid_.dt * (sc_.hamiltonian.potential(y) - sc_.hamiltonian.potential(free_rep_y));
        continue;
      }
      class_of_[i] = classes_.size();
      classes_.push_back(entries_for(i));
    }
  }

  Scenario<N> sc_;
  LagrangianEvaluator<N> eval_;
  SpaceTimeGrid<N> grid_;
  ControlNet<N> net_;
  SolverOptions opt_;
  double tol_ = 0.0;
  double path_speed_ = 0.0;
  ScaledDomain<N> dom_;
  std::vector<Vec<N>> velocities_;
  std::vector<std::uint8_t> adm_;
  std::vector<std::vector<Entry>> classes_;
  std::vector<std::size_t> class_of_;
  std::vector<std::uint8_t> safe_;
  std::vector<double> shift_;
};

template <int N>
ValueField<N> solve_value(const Scenario<N>& sc, const SpaceTimeGrid<N>& grid, const ControlNet<N>& net,
                          const SolverOptions& opt = {}) {
  DpEngine<N> eng(sc, grid, net, opt);
  return eng.run(eng.sample(sc.u0.eval), sc.u0.description);
}

// Minimizing move at x for level k (uses level k-1 of the field).
template <int N>
std::optional<Move<N>> best_move(const DpEngine<N>& eng, const ValueField<N>& f, int k, const Vec<N>& x,
                                 double* value = nullptr) {
  const auto& prev = f.at_level(k - 1);
  std::optional<Move<N>> best;
  double bv = kSentinel;
  for (const auto& mv : eng.moves_at(x, f.grid.dt)) {
    double v = mv.cost + eng.apply(prev, mv.stencil);
    if (v < bv) {
      bv = v;
      best = mv;
    }
  }
  if (value) *value = bv;
  return best;
}

// Greedy discrete minimizer from x at level k down to level 0.
template <int N>
ReflectedPath<N> extract_path(const DpEngine<N>& eng, const ValueField<N>& f, int k, const Vec<N>& x) {
  ReflectedPath<N> p;
  p.dt = f.grid.dt;
  p.eta.push_back(x);
  Vec<N> cur = x;
  for (int j = k; j >= 1; --j) {
    auto mv = best_move(eng, f, j, cur);
    if (!mv) break;
    p.v.push_back(mv->v);
    p.l.push_back(mv->l);
    p.eta.push_back(mv->foot);
    cur = mv->foot;
  }
  return p;
}

template <int N>
double interpolate(const DpEngine<N>& eng, const ValueField<N>& f, int k, const Vec<N>& x) {
  return eng.interpolate(f.at_level(k), x);
}

// Discrete space and time Lipschitz constants over admissible neighbor pairs.
template <int N>
std::pair<double, double> discrete_lipschitz(const ValueField<N>& f) {
  const auto& g = f.grid.space;
  double lx = 0.0, lt = 0.0;
  for (std::size_t s = 0; s < f.levels.size(); ++s) {
    const auto& V = f.values[s];
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!f.admissible[i]) continue;
      auto m = g.multi(i);
      for (int a = 0; a < N; ++a) {
        auto q = m;
        q[a] += 1;
        if (q[a] >= g.dims[a]) {
          if (!g.periodic[a]) continue;
          q[a] = 0;
        }
        std::size_t j = g.linear(q);
        if (!f.admissible[j]) continue;
        lx = std::max(lx, std::abs(V[j] - V[i]) / g.h);
      }
      if (s > 0 && f.levels[s] == f.levels[s - 1] + 1)
        lt = std::max(lt, std::abs(V[i] - f.values[s - 1][i]) / f.grid.dt);
    }
  }
  return {lx, lt};
}

struct DppResidual {
  double signed_max = -std::numeric_limits<double>::infinity();
  double abs_max = 0.0;
};

// V(x,t) versus one coarse step of size tau from level t - tau, same control net.
template <int N>
DppResidual dpp_residual(const Scenario<N>& sc, const ControlNet<N>& net, const ValueField<N>& f, double tau,
                         int level = -1, const SolverOptions& opt = {}) {
  int m = static_cast<int>(std::lround(tau / f.grid.dt));
  if (m < 1 || std::abs(m * f.grid.dt - tau) > 1e-9 * tau) throw Error(ErrorCode::InvalidConfig, "tau must be a multiple of dt");
  int k = level < 0 ? f.final_level() : level;
  SolverOptions o = opt;
  o.enforce_cfl = false;
  o.check_window = false;
  o.boundary_tol = f.boundary_tol;
  DpEngine<N> eng(sc, f.grid, net, o);
  const auto& V = f.at_level(k);
  const auto& P = f.at_level(k - m);
  const auto& g = f.grid.space;
  DppResidual r;
  Vec<N> lo = g.lo, hi = g.hi();
  double margin = net.vmax() * tau + 2 * g.h;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!f.admissible[i]) continue;
    Vec<N> x = g.node(i);
    bool inside = true;
    for (int a = 0; a < N; ++a)
      if (!g.periodic[a] && (x[a] < lo[a] + margin || x[a] > hi[a] - margin)) inside = false;
    if (!inside) continue;
    double best = kSentinel;
    for (const auto& mv : eng.moves_at(x, tau)) best = std::min(best, mv.cost + eng.apply(P, mv.stencil));
    if (is_infinite_cost(best) || is_infinite_cost(V[i])) continue;
    double d = V[i] - best;
    r.signed_max = std::max(r.signed_max, d);
    r.abs_max = std::max(r.abs_max, std::abs(d));
  }
  return r;
}

template <int N>
bool discrete_comparison(const ValueField<N>& a, const ValueField<N>& b, double slack = 1e-12) {
  if (!(a.grid == b.grid) || a.levels != b.levels || a.admissible != b.admissible)
    throw Error(ErrorCode::GridMismatch, "fields live on different grids");
  for (std::size_t s = 0; s < a.levels.size(); ++s)
    for (std::size_t i = 0; i < a.values[s].size(); ++i)
      if (a.admissible[i] && a.values[s][i] > b.values[s][i] + slack) return false;
  return true;
}

// Two-sided constants with u0 - C_lower t <= V <= u0 + C_upper t.
template <int N>
std::pair<double, double> time_bound_constants(const Scenario<N>& sc, double lip_u0) {
  auto ev = sc.evaluator();
  const auto& H = sc.hamiltonian;
  const auto& bc = sc.bc;
  double upper = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  std::vector<Vec<N>> ys;
  for (int s = 0; s < 256; ++s) {
    Vec<N> y;
    for (int a = 0; a < N; ++a) y[a] = U(rng);
    ys.push_back(y);
  }
  for (const auto& y : ys) upper = std::max(upper, ev.running_cost(y, Vec<N>::Zero(), 0.0));
  double lower = 0.0;
  const double C = bc.gamma.reflection_bound();
  if (bc.kind == BoundaryKind::ContactAngle) {
    double a = 1.0 - bc.h_sup();
    if (H.kind == HamiltonianKind::Eikonal) lower = lip_u0 * H.speed.max_value / a;
    else lower = lip_u0 * lip_u0 / (2 * a * a) + H.K0;
  } else {
    double kappa = bc.gamma.is_normal ? 1.0 : 1.0 + C * bc.gamma.sup_norm;
    if (H.kind == HamiltonianKind::Eikonal) {
      double c = H.speed.max_value;
      lower = lip_u0 * c * kappa + bc.g.sup_abs * C * c;
    } else {
      double P = bc.g.sup_abs * C + lip_u0 * kappa;
      auto dirs = direction_net<N>(N == 2 ? 64 : 32);
      lower = -std::numeric_limits<double>::infinity();
      for (const auto& y : ys)
        for (const auto& d : dirs) lower = std::max(lower, H(y, P * d));
      if (H.kind == HamiltonianKind::Quadratic) lower = 0.5 * P * P + H.potential.max_value;
    }
  }
  return {std::max(upper, 0.0), std::max(lower, 0.0)};
}

struct OptimizeOptions {
  int segments = 4;
  int substeps = 16;
  double vmax = 2.0;
  int directions = 16;
  int speeds = 4;
  int max_evals = 20000;
  double tol = 1e-6;
  // Restricts every segment to these velocities when non-empty.
  std::vector<double> discrete_speeds;
};

template <int N>
struct PointOptimum {
  double value = kSentinel;
  ReflectedPath<N> best_path;
  std::vector<Vec<N>> controls;
};

// Cost of a piecewise-constant control integrated with the Skorokhod stepper.
template <int N>
double trajectory_cost(const Scenario<N>& sc, const LagrangianEvaluator<N>& ev, const ScaledDomain<N>& dom,
                       const Vec<N>& x, double t, const std::vector<Vec<N>>& controls, int substeps,
                       ReflectedPath<N>* path = nullptr) {
  const int K = static_cast<int>(controls.size());
  const double dt = t / (K * substeps);
  Vec<N> eta = x;
  double cost = 0.0;
  if (path) {
    path->dt = dt;
    path->eta = {x};
    path->l.clear();
    path->v.clear();
  }
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < substeps; ++j) {
      SpStep<N> s;
      try {
        s = sp_step(dom, sc.bc.gamma, eta, controls[k], dt);
      } catch (const Error&) {
        return kSentinel;
      }
      double L = ev.running_cost(eta / dom.eps, controls[k], s.l);
      if (is_infinite_cost(L)) return kSentinel;
      cost += dt * L;
      eta = s.next;
      if (path) {
        path->eta.push_back(eta);
        path->l.push_back(s.l);
        path->v.push_back(controls[k]);
      }
    }
  }
  return cost + sc.u0(eta);
}

// Direct search over piecewise-constant controls (upper bound for V(x,t)).
template <int N>
PointOptimum<N> optimize_point(const Scenario<N>& sc, double eps, const Vec<N>& x, double t,
                               const OptimizeOptions& opt = {}) {
  auto ev = sc.evaluator();
  ScaledDomain<N> dom(sc.domain, eps, 1e-9);
  PointOptimum<N> best;
  const int K = opt.segments;
  int evals = 0;
  auto cost = [&](const std::vector<Vec<N>>& c) {
    ++evals;
    return trajectory_cost(sc, ev, dom, x, t, c, opt.substeps);
  };
  std::vector<Vec<N>> cand{Vec<N>::Zero()};
  auto dirs = direction_net<N>(opt.directions);
  std::vector<double> speeds = opt.discrete_speeds;
  if (speeds.empty())
    for (int s = 1; s <= opt.speeds; ++s) speeds.push_back(opt.vmax * s / opt.speeds);
  for (double s : speeds)
    if (s > 0)
      for (const auto& d : dirs) cand.push_back(s * d);
  if (!opt.discrete_speeds.empty()) {
    // Coordinate descent over discrete choices, one segment at a time.
    std::vector<Vec<N>> c(K, Vec<N>::Zero());
    double cur = cost(c);
    bool changed = true;
    while (changed && evals < opt.max_evals) {
      changed = false;
      for (int k = 0; k < K; ++k) {
        for (const auto& v : cand) {
          auto trial = c;
          trial[k] = v;
          double val = cost(trial);
          if (val < cur - 1e-14) {
            cur = val;
            c = trial;
            changed = true;
          }
        }
      }
    }
    best.value = cur;
    best.controls = c;
  } else {
    std::vector<std::pair<double, Vec<N>>> starts;
    for (const auto& v : cand) starts.push_back({cost(std::vector<Vec<N>>(K, v)), v});
    std::sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t s = 0; s < std::min<std::size_t>(3, starts.size()); ++s) {
      std::vector<Vec<N>> c(K, starts[s].second);
      double cur = starts[s].first;
      double step = opt.vmax / 4;
      while (step > opt.tol && evals < opt.max_evals) {
        bool improved = false;
        for (int k = 0; k < K; ++k)
          for (int a = 0; a < N; ++a)
            for (int sg : {-1, 1}) {
              auto trial = c;
              trial[k][a] += sg * step;
              double val = cost(trial);
              if (val < cur) {
                cur = val;
                c = trial;
                improved = true;
              }
            }
        // Rotations and rescalings keep speed-capped controls on the feasible sphere.
        for (int k = 0; k < K; ++k) {
          double sp = c[k].norm();
          if (sp <= 0) continue;
          double ang = step / std::max(sp, 1e-3);
          for (int a = 0; a < N; ++a)
            for (int b = a + 1; b < N; ++b)
              for (int sg : {-1, 1}) {
                auto trial = c;
                double ca = std::cos(sg * ang), sa = std::sin(sg * ang);
                double va = c[k][a], vb = c[k][b];
                trial[k][a] = ca * va - sa * vb;
                trial[k][b] = sa * va + ca * vb;
                double val = cost(trial);
                if (val < cur) {
                  cur = val;
                  c = trial;
                  improved = true;
                }
              }
          for (int sg : {-1, 1}) {
            auto trial = c;
            trial[k] *= std::max(0.0, sp + sg * step) / sp;
            double val = cost(trial);
            if (val < cur) {
              cur = val;
              c = trial;
              improved = true;
            }
          }
        }
        // Whole-path moves help when segments must shift together.
        for (int a = 0; a < N; ++a)
          for (int sg : {-1, 1}) {
            auto trial = c;
            for (auto& v : trial) v[a] += sg * step;
            double val = cost(trial);
            if (val < cur) {
              cur = val;
              c = trial;
              improved = true;
            }
          }
        if (!improved) step *= 0.5;
      }
      if (cur < best.value) {
        best.value = cur;
        best.controls = c;
      }
    }
  }
  if (!best.controls.empty()) trajectory_cost(sc, ev, dom, x, t, best.controls, opt.substeps, &best.best_path);
  return best;
}

}  // namespace hjhomog
