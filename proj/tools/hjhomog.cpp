// Command line front end: hjhomog <command> [--config file] [--out path] ...
#include <hjhomog/io.hpp>
#include <hjhomog/oracles.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using namespace hjhomog;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  int workers = 1;
  unsigned seed = 1;
  std::vector<std::string> overrides;
};

struct Context {
  YAML::Node cfg;
  std::string hash;
  Common common;

  YAML::Node solver() const { return cfg["solver"]; }
  YAML::Node experiment(const std::string& name) const {
    return cfg["experiment"] ? cfg["experiment"][name] : YAML::Node();
  }
};

Context load(const Common& c, const std::map<std::string, std::string>& extra = {}) {
  Context ctx;
  ctx.common = c;
  ctx.cfg = c.config.empty() ? YAML::Node(YAML::NodeType::Map) : load_config(c.config);
  for (const auto& o : c.overrides) apply_override(ctx.cfg, o);
  YAML::Node keyed = YAML::Clone(ctx.cfg);
  for (const auto& [k, v] : extra) keyed["cli"][k] = v;
  ctx.hash = config_hash(keyed);
  return ctx;
}

// --out with an extension names the main file; otherwise it is a directory.
fs::path output_file(const Context& ctx, const std::string& fallback_name, const std::string& ext) {
  std::string out = ctx.common.out;
  if (out.empty() && ctx.cfg["output"] && ctx.cfg["output"]["directory"])
    out = ctx.cfg["output"]["directory"].as<std::string>();
  if (out.empty()) out = "out";
  fs::path p(out);
  if (p.has_extension()) {
    if (p.extension() == ext) return p;
    return p.parent_path() / (p.stem().string() + ext);
  }
  return p / (fallback_name + ext);
}

fs::path sibling(const fs::path& main, const std::string& suffix) {
  return main.parent_path() / (main.stem().string() + suffix);
}

bool wants(const Context& ctx, const std::string& fmt) {
  auto o = ctx.cfg["output"];
  if (!o || !o["formats"]) return true;
  for (const auto& f : o["formats"])
    if (f.as<std::string>() == fmt) return true;
  return false;
}

std::string tolerances_string(const YAML::Node& s) {
  std::ostringstream os;
  os << "h=" << (s && s["h"] ? s["h"].as<std::string>() : "default");
  if (s && s["dt"]) os << ";dt=" << s["dt"].as<std::string>();
  return os.str();
}

json provenance(const Context& ctx, const std::string& tolerances) {
  return json{{"config_hash", ctx.hash}, {"version", kToolVersion}, {"tolerances", tolerances}};
}

void write_json(const fs::path& p, const json& j) { write_atomic(p, j.dump(2) + "\n"); }

template <int N>
Vec<N> vec(const YAML::Node& n, const std::string& key, std::optional<Vec<N>> def = std::nullopt) {
  if (!n || !n[key]) {
    if (def) return *def;
    throw Error(ErrorCode::InvalidConfig, "missing key: " + key);
  }
  if (!n[key].IsSequence() || n[key].size() != N)
    throw Error(ErrorCode::InvalidConfig, key + " must list " + std::to_string(N) + " numbers");
  Vec<N> v;
  for (int a = 0; a < N; ++a) v[a] = parse_number(n[key][a].as<std::string>());
  return v;
}

template <int N>
json to_json(const Vec<N>& v) {
  json j = json::array();
  for (int a = 0; a < N; ++a) j.push_back(v[a]);
  return j;
}

// ---- solve ----

template <int N>
int cmd_solve(const Context& ctx) {
  auto sc = parse_scenario<N>(ctx.cfg);
  auto s = ctx.solver();
  double vmax = num(s, "v_max", 2.0);
  auto net = parse_net<N>(s, vmax);
  double h = num(s, "h", 1.0 / 32);
  double dt = num(s, "dt", h / net.vmax());
  double T = num(s, "T", 0.5);
  double eps = num(s, "eps", 1.0);
  Vec<N> lo = vec<N>(s["window"], "lo", Vec<N>(Vec<N>::Zero()));
  Vec<N> hi = vec<N>(s["window"], "hi", Vec<N>(Vec<N>::Ones()));
  std::array<bool, N> per{};
  if (s["window"] && s["window"]["periodic"])
    for (int a = 0; a < N; ++a) per[a] = s["window"]["periodic"][a].as<bool>();
  else if (!s["window"])
    per.fill(true);
  SpaceTimeGrid<N> g;
  g.space = GridSpec<N>::box(lo, hi, h, per);
  g.dt = dt;
  g.steps = static_cast<int>(std::lround(T / dt));
  g.eps = eps;
  SolverOptions so;
  so.workers = ctx.common.workers;
  if (s["roi"]) {
    auto rl = vec<N>(s["roi"], "lo"), rh = vec<N>(s["roi"], "hi");
    so.roi = std::make_pair(std::vector<double>(rl.data(), rl.data() + N), std::vector<double>(rh.data(), rh.data() + N));
  }
  int every = static_cast<int>(num(s, "store_every", std::max(1.0, std::round(g.steps / 4.0))));
  for (int k = 0; k <= g.steps; k += every) so.store_levels.push_back(k);
  if (so.store_levels.back() != g.steps) so.store_levels.push_back(g.steps);
  double m0 = m0_estimate(sc.u0.lipschitz, sc.hamiltonian.K0);
  std::cerr << "M0 estimate " << m0 << ", V_max " << net.vmax() << "\n";

  DpEngine<N> eng(sc, g, net, so);
  auto f = eng.run(eng.sample(sc.u0.eval), sc.u0.description);
  auto tol = tolerances_string(s);
  auto prov = provenance(ctx, tol);
  fs::path main = output_file(ctx, "value", ".json");
  auto [lx, lt] = discrete_lipschitz(f);
  json rep{{"provenance", prov},
           {"command", "solve"},
           {"grid", {{"h", h}, {"dt", dt}, {"steps", g.steps}, {"eps", eps}}},
           {"levels", f.levels},
           {"M0_estimate", m0},
           {"v_max", net.vmax()},
           {"lipschitz", {{"space", lx}, {"time", lt}}},
           {"classes", eng.class_count()}};
  if (wants(ctx, "json")) write_json(main, rep);
  if (wants(ctx, "csv")) write_atomic(sibling(main, ".csv"), field_csv(f, provenance_line(ctx.hash, tol)));
  if (wants(ctx, "bin")) store_field(sibling(main, ".hjvf"), f, prov.dump());
  if constexpr (N == 2) {
    if (wants(ctx, "svg")) {
      Svg svg;
      Vec<2> glo = g.space.lo, ghi = g.space.hi();
      double sx = 600 / (ghi[0] - glo[0]), sy = 440 / (ghi[1] - glo[1]);
      double sc2 = std::min(sx, sy);
      auto map = [&](double x, double y) { return std::pair{20 + (x - glo[0]) * sc2, 460 - (y - glo[1]) * sc2}; };
      std::vector<double> psi(g.space.size());
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = eng.domain().psi(g.space.node(i));
      contour(svg, g.space, psi, 0.0, map, "gray");
      double level = num(s, "contour", 0.0);
      const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
      for (std::size_t l = 0; l < f.levels.size(); ++l) contour(svg, g.space, f.values[l], level, map, colors[l % 6]);
      svg.body << "<!-- config_hash=" << ctx.hash << " -->\n";
      write_atomic(sibling(main, ".svg"), svg.str());
    }
  }
  std::cout << main.string() << "\n";
  return 0;
}

// ---- skorokhod ----

template <int N>
int cmd_skorokhod(const Context& ctx) {
  auto sc = parse_scenario<N>(ctx.cfg);
  auto e = ctx.experiment("skorokhod");
  double eps = num(e, "eps", 1.0);
  double dt = num(e, "dt", 1.0 / 256);
  int steps = static_cast<int>(num(e, "steps", 256));
  Vec<N> x0 = vec<N>(e, "x0");
  Vec<N> v = vec<N>(e, "v");
  ScaledDomain<N> dom(sc.domain, eps, num(e, "tol", 1e-9));
  auto path = solve_sp(x0, ControlSignal<N>::constant(v, dt, steps), dom, sc.gamma());
  auto res = residual(path, dom, sc.gamma());
  std::string tol = "dt=" + fmt(dt);
  fs::path main = output_file(ctx, "skorokhod", ".json");
  json rep{{"provenance", provenance(ctx, tol)},
           {"command", "skorokhod"},
           {"end", to_json<N>(path.eta.back())},
           {"residual",
            {{"containment", res.max_psi_violation},
             {"complementarity", res.max_complementarity},
             {"ode_defect", res.max_ode_defect},
             {"l_over_v", res.max_ratio_l_over_v}}}};
  if (wants(ctx, "json")) write_json(main, rep);
  if (wants(ctx, "csv")) write_atomic(sibling(main, ".csv"), path_csv(path, provenance_line(ctx.hash, tol)));
  std::cout << main.string() << "\n";
  return 0;
}

// ---- legendre ----

template <int N>
int cmd_legendre(const Context& ctx) {
  auto sc = parse_scenario<N>(ctx.cfg);
  auto e = ctx.experiment("legendre");
  auto ev = sc.evaluator();
  Vec<N> y = vec<N>(e, "y", Vec<N>(Vec<N>::Zero()));
  double vmax = num(e, "v_max", 2.0);
  int count = static_cast<int>(num(e, "count", 21));
  std::vector<double> ls{0.0};
  if (e && e["l"]) {
    ls.clear();
    for (const auto& l : e["l"]) ls.push_back(parse_number(l.as<std::string>()));
  }
  std::string tol = "closed-form";
  std::string csv = provenance_line(ctx.hash, tol) + "v1,l,L,L_numeric\n";
  json rows = json::array();
  for (double l : ls)
    for (int i = 0; i < count; ++i) {
      Vec<N> v = Vec<N>::Zero();
      v[0] = -vmax + 2 * vmax * i / (count - 1);
      double L = ev.running_cost(y, v, l);
      double Ln = sc.bc.kind == BoundaryKind::ContactAngle ? ev.lagrangian_C_numeric(y, v, l) : L;
      csv += fmt(v[0]) + "," + fmt(l) + "," + fmt(L) + "," + fmt(Ln) + "\n";
      rows.push_back({{"v1", v[0]}, {"l", l}, {"L", L}});
    }
  fs::path main = output_file(ctx, "legendre", ".json");
  if (wants(ctx, "json"))
    write_json(main, {{"provenance", provenance(ctx, tol)}, {"command", "legendre"}, {"K1", ev.K1()}, {"rows", rows}});
  if (wants(ctx, "csv")) write_atomic(sibling(main, ".csv"), csv);
  std::cout << main.string() << "\n";
  return 0;
}

// ---- metric ----

template <int N>
MetricOptions<N> metric_options(const Context& ctx, const YAML::Node& e) {
  MetricOptions<N> mo;
  auto s = ctx.solver();
  mo.h = num(s, "h", mo.h);
  mo.net = parse_net<N>(s, num(s, "v_max", 4.0));
  mo.dt = num(s, "dt", 0.0);
  mo.boundary_samples = static_cast<int>(num(e, "boundary_samples", mo.boundary_samples));
  mo.workers = ctx.common.workers;
  if (e && e["terminal"]) {
    auto t = e["terminal"].as<std::string>();
    if (t == "hard") mo.terminal = TerminalMode::Hard;
    else if (t == "soft") mo.terminal = TerminalMode::Soft;
    else throw Error(ErrorCode::InvalidConfig, "terminal must be hard or soft");
  }
  return mo;
}

template <int N>
int cmd_metric(const Context& ctx) {
  auto sc = parse_scenario<N>(ctx.cfg);
  auto e = ctx.experiment("metric");
  double t = num(e, "t");
  Vec<N> x = vec<N>(e, "x"), y = vec<N>(e, "y");
  bool star = e && e["star"] ? e["star"].as<bool>() : sc.domain.has_boundary;
  auto mo = metric_options<N>(ctx, e);
  std::string tol = "h=" + fmt(mo.h);
  fs::path main = output_file(ctx, "metric", ".json");

  const char* cache = std::getenv("HJHOMOG_CACHE");
  fs::path memo;
  if (cache && *cache) {
    memo = fs::path(cache) / (sha256_hex(ctx.hash + "|metric") + ".json");
    if (fs::exists(memo)) {
      auto j = json::parse(read_file(memo));
      if (wants(ctx, "json")) write_json(main, j);
      std::cerr << "cache hit " << memo.string() << "\n";
      std::cout << main.string() << "\n";
      return 0;
    }
  }
  auto s = star ? metric_star(sc, t, x, y, mo) : metric(sc, t, x, y, mo);
  json rep{{"provenance", provenance(ctx, tol)},
           {"command", "metric"},
           {"star", star},
           {"t", t},
           {"x", to_json<N>(x)},
           {"y", to_json<N>(y)},
           {"reachable", !is_infinite_cost(s.value)},
           {"value", is_infinite_cost(s.value) ? json(nullptr) : json(s.value)}};
  if (s.endpoints_star) rep["endpoints_star"] = {to_json<N>(s.endpoints_star->first), to_json<N>(s.endpoints_star->second)};
  if (wants(ctx, "json")) write_json(main, rep);
  if (s.path && wants(ctx, "csv")) write_atomic(sibling(main, "_path.csv"), path_csv(*s.path, provenance_line(ctx.hash, tol)));
  if (!memo.empty()) write_json(memo, rep);
  std::cout << main.string() << "\n";
  return 0;
}

// ---- effective ----

template <int N>
int cmd_effective(const Context& ctx) {
  auto sc = parse_scenario<N>(ctx.cfg);
  auto e = ctx.experiment("effective");
  auto mo = metric_options<N>(ctx, e);
  int depth = static_cast<int>(num(e, "depth", 4));
  double qmax = num(e, "q_max", 1.0), qstep = num(e, "q_step", 0.25);
  bool axis = e && e["axis_table"] ? e["axis_table"].as<bool>() : true;
  int n = static_cast<int>(std::lround(qmax / qstep));
  GridSpec<N> q;
  q.h = qstep;
  for (int a = 0; a < N; ++a) {
    bool full = !axis || a == 0;
    q.lo[a] = full ? -n * qstep : 0.0;
    q.dims[a] = full ? 2 * n + 1 : 1;
  }
  auto L = effective_lagrangian_table(sc, q, depth, mo);
  std::string tol = "h=" + fmt(mo.h) + ";depth=" + std::to_string(depth);
  fs::path main = output_file(ctx, "effective", ".json");
  std::string hcsv = provenance_line(ctx.hash, tol);
  for (int a = 0; a < N; ++a) hcsv += "p" + std::to_string(a + 1) + ",";
  hcsv += "Hbar\n";
  json hrows = json::array();
  for (int i = -n; i <= n; ++i) {
    Vec<N> p = Vec<N>::Zero();
    p[0] = i * qstep;
    double Hb = effective_hamiltonian(L, p);
    for (int a = 0; a < N; ++a) hcsv += fmt(p[a]) + ",";
    hcsv += fmt(Hb) + "\n";
    hrows.push_back({{"p", to_json<N>(p)}, {"Hbar", Hb}});
  }
  json lrows = json::array();
  for (std::size_t j = 0; j < L.values.size(); ++j)
    lrows.push_back({{"q", to_json<N>(L.node(j))},
                     {"Lbar", is_infinite_cost(L.values[j]) ? json(nullptr) : json(L.values[j])},
                     {"gap", L.gap[j]}});
  if (wants(ctx, "json"))
    write_json(main, {{"provenance", provenance(ctx, tol)},
                      {"command", "effective"},
                      {"cauchy_gap", L.cauchy_gap},
                      {"Lbar", lrows},
                      {"Hbar", hrows}});
  if (wants(ctx, "csv")) {
    write_atomic(sibling(main, "_Lbar.csv"), table_csv(L, provenance_line(ctx.hash, tol)));
    write_atomic(sibling(main, "_Hbar.csv"), hcsv);
  }
  std::cout << main.string() << "\n";
  return 0;
}

// ---- rate ----

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_number(item));
  return out;
}

template <int N>
int cmd_rate(const Context& ctx, const std::string& eps_flag, int probes_flag) {
  auto sc = parse_scenario<N>(ctx.cfg);
  auto e = ctx.experiment("rate");
  std::vector<double> ladder;
  if (!eps_flag.empty()) ladder = parse_list(eps_flag);
  else if (e && e["eps"])
    for (const auto& v : e["eps"]) ladder.push_back(parse_number(v.as<std::string>()));
  else ladder = {0.25, 0.125, 0.0625, 0.03125};
  int count = probes_flag > 0 ? probes_flag : static_cast<int>(num(e, "probes", 40));
  RateOptions<N> o;
  o.h_rel = num(e, "h_rel", o.h_rel);
  o.T = num(e, "T", o.T);
  o.depth = static_cast<int>(num(e, "depth", o.depth));
  o.q_max = num(e, "q_max", o.q_max);
  o.q_step = num(e, "q_step", o.q_step);
  o.control_run = e && e["control_run"] ? e["control_run"].as<bool>() : true;
  o.workers = ctx.common.workers;
  o.throw_on_resolution = false;
  if (ctx.solver() && ctx.solver()["v_max"]) o.net = parse_net<N>(ctx.solver(), 4.0);
  auto probes = lattice_probes<N>(count, ctx.common.seed, o.T);
  auto r = run_rate_experiment(sc, ladder, probes, o);
  std::string tol = "h_rel=" + fmt(o.h_rel) + ";depth=" + std::to_string(o.depth);
  fs::path main = output_file(ctx, "rate", ".json");
  json res = json::array();
  for (const auto& q : r.resolutions) res.push_back({{"h", q.h}, {"dt", q.dt}});
  json pj = json::array();
  for (const auto& p : r.probes) pj.push_back({{"x", to_json<N>(p.x)}, {"t", p.t}});
  json rep{{"provenance", provenance(ctx, tol)},
           {"scenario_hash", ctx.hash},
           {"command", "rate"},
           {"epsilons", r.epsilons},
           {"errors", r.errors},
           {"slope", r.slope},
           {"C_fit", r.C_fit},
           {"degenerate", r.degenerate},
           {"monotone", r.monotone},
           {"table_gap", r.table_gap},
           {"resolutions", res},
           {"probes", pj},
           {"control_run",
            {{"enabled", o.control_run},
             {"errors", r.control_errors},
             {"relative_change", r.control_change},
             {"table_gap", r.control_table_gap},
             {"ok", r.resolution_ok}}}};
  if (wants(ctx, "json")) write_json(main, rep);
  if (wants(ctx, "svg") && !r.degenerate)
    write_atomic(sibling(main, ".svg"), loglog_svg(r.epsilons, r.errors, r.slope, "error vs eps"));
  std::cout << main.string() << "\n";
  if (!r.resolution_ok) {
    std::cerr << "ResolutionInsufficient: half-resolution control run moved an error by 25% or more\n";
    return exit_status(ErrorCode::ResolutionInsufficient);
  }
  return 0;
}

// ---- example ----

int cmd_example(const Context& ctx, const std::string& theta_s, double t_end, double h) {
  double theta = parse_number(theta_s);
  check_angle(theta);
  Scenario<2> sc{disk_complement<2>(1.0), Hamiltonian<2>::eikonal(), BoundaryCondition<2>::contact_angle(theta),
                 InitialData<2>::linear(Vec<2>(1, 0), 2)};
  SpaceTimeGrid<2> g;
  g.space = GridSpec<2>::box(Vec<2>(-4, -3), Vec<2>(3, 3), h);
  g.dt = h;
  g.steps = static_cast<int>(std::lround(t_end / h));
  SolverOptions so;
  so.workers = ctx.common.workers;
  so.check_window = false;
  for (int k = 0; k <= 4; ++k) so.store_levels.push_back(static_cast<int>(std::lround(k * g.steps / 4.0)));
  double lmax = std::max(1.0, 2 * optimal_reflection(theta));
  DpEngine<2> eng(sc, g, ControlNet<2>::polar(64, {1.0}, 8, lmax), so);
  auto f = eng.run(eng.sample(sc.u0.eval), sc.u0.description);

  Svg svg;
  svg.w = 700;
  svg.h = 600;
  auto map = [&](double x, double y) { return std::pair{50 + (x + 4) * 90, 570 - (y + 3) * 90}; };
  auto c = map(0, 0);
  svg.body << "<circle cx=\"" << c.first << "\" cy=\"" << c.second << "\" r=\"90\" fill=\"#ddd\" stroke=\"black\"/>\n";
  const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
  json times = json::array();
  for (std::size_t l = 0; l < f.levels.size(); ++l) {
    contour(svg, g.space, f.values[l], 0.0, map, colors[l % 5]);
    times.push_back(f.time(f.levels[l]));
  }
  if (std::abs(theta - kPi / 2) < 1e-12 && t_end > 2) {
    // Printed closed form, on its validated region only.
    std::vector<double> ref(g.space.size(), kSentinel);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      try {
        ref[i] = disk_value_theta_half(g.space.node(i), t_end);
      } catch (const Error&) {
      }
    }
    contour(svg, g.space, ref, 0.0, map, "black");
  }
  std::ostringstream title;
  title << "zero level set, theta = " << theta / kPi << " pi, t up to " << t_end;
  svg.text(60, 24, title.str(), 14);
  svg.body << "<!-- config_hash=" << ctx.hash << " -->\n";
  fs::path out = output_file(ctx, "example", ".svg");
  write_atomic(out, svg.str());
  write_json(sibling(out, ".json"), {{"provenance", provenance(ctx, "h=" + fmt(h))},
                                     {"command", "example"},
                                     {"theta", theta},
                                     {"times", times},
                                     {"l_star", optimal_reflection(theta)},
                                     {"sliding_speed", sliding_speed(theta)}});
  std::cout << out.string() << "\n";
  return 0;
}

// ---- selftest ----

int cmd_selftest() {
  int failed = 0;
  auto check = [&](const std::string& name, bool ok) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failed;
  };
  check("optimal_reflection(pi/2) = 0", std::abs(optimal_reflection(kPi / 2)) < 1e-15);
  check("sliding_speed(pi/2) = 1", std::abs(sliding_speed(kPi / 2) - 1) < 1e-15);
  check("disk formula pre-contact value", std::abs(disk_value_theta_half(Vec<2>(-2, 0.5), 1) + 1) < 1e-14);

  Vec<2> p(0.6, -0.3);
  Scenario<2> sc{free_space<2>(), Hamiltonian<2>::quadratic(), BoundaryCondition<2>::oblique(ScalarField<2>::constant_field(0)),
                 InitialData<2>::linear(p, 0)};
  auto ev = sc.evaluator();
  check("free Lagrangian |q|^2/2", std::abs(ev.running_cost(Vec<2>::Zero(), Vec<2>(0.3, 0.4), 0) - 0.125) < 1e-12);
  auto Lq = [](const Vec<2>& q) { return 0.5 * q.squaredNorm(); };
  check("Hopf-Lax plane wave",
        std::abs(hopf_lax_free<2>(Vec<2>(0.1, 0.2), 0.5, sc.u0.eval, Lq, 2.0) - (p.dot(Vec<2>(0.1, 0.2)) - 0.25 * p.squaredNorm())) < 1e-9);

  SpaceTimeGrid<2> g;
  g.space = GridSpec<2>::box(Vec<2>(-2, -2), Vec<2>(2, 2), 0.125);
  g.dt = 0.0625;
  g.steps = 4;
  SolverOptions so;
  so.roi = std::make_pair(std::vector<double>{-0.5, -0.5}, std::vector<double>{0.5, 0.5});
  auto net = ControlNet<2>::polar(32, ControlNet<2>::uniform_speeds(2.0, 8), 4, 2.0);
  auto f = solve_value(sc, g, net, so);
  bool init = true, wave = true;
  for (std::size_t i = 0; i < g.space.size(); ++i) {
    Vec<2> x = g.space.node(i);
    init = init && f.values[0][i] == sc.u0(x);
    if (std::abs(x[0]) <= 0.5 && std::abs(x[1]) <= 0.5)
      wave = wave && std::abs(f.values.back()[i] - (p.dot(x) - 0.25 * p.squaredNorm() / 2)) <
                         (0.125 + 0.0625) * 1.0;
  }
  check("initialization exact", init);
  check("plane wave", wave);
  auto sc1 = sc;
  sc1.u0 = sc.u0.shifted(1.0);
  auto f1 = solve_value(sc1, g, net, so);
  bool shift = true;
  for (std::size_t i = 0; i < g.space.size(); ++i) shift = shift && std::abs(f1.values.back()[i] - f.values.back()[i] - 1) < 1e-12;
  check("constant shift equivariance", shift);
  check("discrete comparison", discrete_comparison(f, f1));
  std::string meta = "{}";
  auto bytes = encode_field(f, meta);
  check("field round trip", encode_field(decode_field<2>(bytes), meta) == bytes);
  return failed == 0 ? 0 : 3;
}

template <class F>
int dispatch(const Context& ctx, F&& f2, F&& f3) {
  int n = config_dimension(ctx.cfg);
  if (n == 2) return f2(ctx);
  if (n == 3) return f3(ctx);
  throw Error(ErrorCode::InvalidConfig, "dimension must be 2 or 3");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogenization toolkit for Hamilton-Jacobi equations on perforated domains"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,--scenario", common.config, "YAML configuration file");
    sub->add_option("--out", common.out, "output directory or file");
    sub->add_option("--workers", common.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seed, "seed for probe sampling");
    sub->add_option("--override", common.overrides, "key.path=value")->take_all();
  };
  std::map<std::string, CLI::App*> subs;
  for (const char* name : {"solve", "skorokhod", "legendre", "metric", "effective", "rate", "example", "selftest"}) {
    subs[name] = app.add_subcommand(name);
    add_common(subs[name]);
  }
  subs["solve"]->description("semi-Lagrangian value function on a window");
  subs["skorokhod"]->description("reflected path for a constant control");
  subs["legendre"]->description("modified Lagrangian tables");
  subs["metric"]->description("metric function m or m*");
  subs["effective"]->description("effective Lagrangian and Hamiltonian tables");
  subs["rate"]->description("homogenization rate experiment");
  subs["example"]->description("disk example front evolution as SVG");
  subs["selftest"]->description("fast built-in checks");
  std::string eps_flag;
  int probes_flag = 0;
  subs["rate"]->add_option("--eps", eps_flag, "comma separated ladder, e.g. 1/4,1/8");
  subs["rate"]->add_option("--probes", probes_flag, "probe count");
  std::string theta = "0.5pi";
  std::string t_flag = "3", step_flag = "1/32";
  subs["example"]->add_option("--theta", theta, "contact angle, e.g. 0.6pi");
  subs["example"]->add_option("--t", t_flag, "final time");
  subs["example"]->add_option("--step", step_flag, "grid step, e.g. 1/32");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (subs["selftest"]->parsed()) return cmd_selftest();
    if (subs["example"]->parsed()) {
      double t_end = parse_number(t_flag), ex_h = parse_number(step_flag);
      auto ctx = load(common, {{"theta", theta}, {"t", fmt(t_end)}, {"h", fmt(ex_h)}});
      return cmd_example(ctx, theta, t_end, ex_h);
    }
    if (subs["rate"]->parsed()) {
      auto ctx = load(common, {{"eps", eps_flag}, {"probes", std::to_string(probes_flag)}, {"seed", std::to_string(common.seed)}});
      using Fn = std::function<int(const Context&)>;
      return dispatch(ctx, Fn([&](const Context& c) { return cmd_rate<2>(c, eps_flag, probes_flag); }),
                      Fn([&](const Context& c) { return cmd_rate<3>(c, eps_flag, probes_flag); }));
    }
    auto ctx = load(common);
    using Fn = std::function<int(const Context&)>;
    if (subs["solve"]->parsed()) return dispatch(ctx, Fn(cmd_solve<2>), Fn(cmd_solve<3>));
    if (subs["skorokhod"]->parsed()) return dispatch(ctx, Fn(cmd_skorokhod<2>), Fn(cmd_skorokhod<3>));
    if (subs["legendre"]->parsed()) return dispatch(ctx, Fn(cmd_legendre<2>), Fn(cmd_legendre<3>));
    if (subs["metric"]->parsed()) return dispatch(ctx, Fn(cmd_metric<2>), Fn(cmd_metric<3>));
    if (subs["effective"]->parsed()) return dispatch(ctx, Fn(cmd_effective<2>), Fn(cmd_effective<3>));
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_status(e.code());
  } catch (const YAML::Exception& e) {
    std::cerr << "InvalidConfig: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "Io: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "InvalidConfig: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
