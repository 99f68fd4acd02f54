#pragma once

#include "rate.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>

namespace hjhomog {

inline constexpr const char* kToolVersion = "hjhomog 1.0.0";
inline constexpr std::uint32_t kFieldVersion = 1;

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

inline void write_atomic(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "rename failed for " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// "0.6pi", "2pi/3", "1/4", "-0.5" and plain numbers.
inline double parse_number(std::string s) {
  s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
  if (s.empty()) throw Error(ErrorCode::InvalidConfig, "empty number");
  double den = 1.0;
  if (auto p = s.find('/'); p != std::string::npos) {
    den = parse_number(s.substr(p + 1));
    s = s.substr(0, p);
  }
  double mul = 1.0;
  if (s.size() >= 2 && s.substr(s.size() - 2) == "pi") {
    mul = kPi;
    s = s.substr(0, s.size() - 2);
    if (s.empty() || s == "+") s = "1";
    if (s == "-") s = "-1";
  }
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidConfig, "not a number: " + s);
  }
  if (used != s.size()) throw Error(ErrorCode::InvalidConfig, "not a number: " + s);
  return v * mul / den;
}

inline double num(const YAML::Node& n, const std::string& key, std::optional<double> def = std::nullopt) {
  if (!n || !n[key]) {
    if (def) return *def;
    throw Error(ErrorCode::InvalidConfig, "missing key: " + key);
  }
  return parse_number(n[key].as<std::string>());
}

inline void deep_merge(YAML::Node base, const YAML::Node& over) {
  for (auto it = over.begin(); it != over.end(); ++it) {
    std::string k = it->first.as<std::string>();
    if (it->second.IsMap() && base[k] && base[k].IsMap()) deep_merge(base[k], it->second);
    else base[k] = YAML::Clone(it->second);
  }
}

// Loads a config; "include" entries are merged first, later keys win.
inline YAML::Node load_config(const std::filesystem::path& path, int depth = 0) {
  if (depth > 8) throw Error(ErrorCode::InvalidConfig, "include nesting too deep");
  YAML::Node doc;
  try {
    doc = YAML::Load(read_file(path));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config parse error: ") + e.what());
  }
  if (!doc || doc.IsNull()) doc = YAML::Node(YAML::NodeType::Map);
  YAML::Node merged(YAML::NodeType::Map);
  if (doc["include"]) {
    auto inc = doc["include"];
    std::vector<std::string> files;
    if (inc.IsSequence())
      for (const auto& f : inc) files.push_back(f.as<std::string>());
    else
      files.push_back(inc.as<std::string>());
    for (const auto& f : files) deep_merge(merged, load_config(path.parent_path() / f, depth + 1));
  }
  doc.remove("include");
  deep_merge(merged, doc);
  return merged;
}

// key.path=value
inline void apply_override(YAML::Node root, const std::string& kv) {
  auto eq = kv.find('=');
  if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "override needs key=value: " + kv);
  std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node cur = chain.back();
    if (!cur[parts[i]] || !cur[parts[i]].IsMap()) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
    chain.push_back(cur[parts[i]]);
  }
  chain.back()[parts.back()] = YAML::Load(val);
}

inline std::string canonical(const YAML::Node& n) {
  YAML::Emitter e;
  std::function<void(const YAML::Node&)> emit = [&](const YAML::Node& x) {
    if (x.IsMap()) {
      std::map<std::string, YAML::Node> sorted;
      for (auto it = x.begin(); it != x.end(); ++it) sorted[it->first.as<std::string>()] = it->second;
      e << YAML::BeginMap;
      for (auto& [k, v] : sorted) {
        e << YAML::Key << k << YAML::Value;
        emit(v);
      }
      e << YAML::EndMap;
    } else if (x.IsSequence()) {
      e << YAML::Flow << YAML::BeginSeq;
      for (const auto& v : x) emit(v);
      e << YAML::EndSeq;
    } else if (x.IsScalar()) {
      e << x.as<std::string>();
    } else {
      e << YAML::Null;
    }
  };
  emit(n);
  return e.c_str();
}

inline std::string config_hash(const YAML::Node& n) { return sha256_hex(canonical(n)); }

// Registry for plug-in domains referenced as kind = external.
template <int N>
std::map<std::string, std::function<ImplicitDomain<N>()>>& domain_registry() {
  static std::map<std::string, std::function<ImplicitDomain<N>()>> r;
  return r;
}

template <int N>
ScalarField<N> parse_field(const YAML::Node& n, double def) {
  if (!n) return ScalarField<N>::constant_field(def);
  if (n.IsScalar()) return ScalarField<N>::constant_field(parse_number(n.as<std::string>()));
  std::string trig = n["trig"] ? n["trig"].as<std::string>() : "sin";
  if (trig != "sin" && trig != "cos") throw Error(ErrorCode::InvalidConfig, "trig must be sin or cos");
  int axis = static_cast<int>(num(n, "axis", 1)) - 1;
  if (axis < 0 || axis >= N) throw Error(ErrorCode::InvalidConfig, "field axis out of range");
  return ScalarField<N>::harmonic(num(n, "offset", 0.0), num(n, "amplitude", 0.0), axis, trig == "cos",
                                  num(n, "phase", 0.0));
}

template <int N>
ImplicitDomain<N> parse_domain(const YAML::Node& n) {
  if (!n) throw Error(ErrorCode::InvalidConfig, "missing scenario.domain");
  std::string kind = n["kind"].as<std::string>("ball-lattice");
  if (n["dimension"] && n["dimension"].as<int>() != N) throw Error(ErrorCode::InvalidConfig, "dimension mismatch");
  if (kind == "ball-lattice") {
    double r = num(n, "radius");
    if (!(r > 0 && r < 0.5)) throw Error(ErrorCode::InvalidConfig, "radius must lie in (0, 1/2)");
    return ball_lattice<N>(r);
  }
  if (kind == "disk-complement") return disk_complement<N>(num(n, "radius", 1.0));
  if (kind == "free-space") return free_space<N>();
  if (kind == "half-space") return half_space<N>(static_cast<int>(num(n, "axis", N)) - 1);
  if (kind == "external") {
    auto name = n["name"].as<std::string>("");
    auto& reg = domain_registry<N>();
    auto it = reg.find(name);
    if (it == reg.end()) throw Error(ErrorCode::InvalidConfig, "unknown external domain: " + name);
    return it->second();
  }
  throw Error(ErrorCode::InvalidConfig, "unknown domain kind: " + kind);
}

template <int N>
Hamiltonian<N> parse_hamiltonian(const YAML::Node& n) {
  std::string kind = n && n["kind"] ? n["kind"].as<std::string>() : "quadratic";
  if (kind == "quadratic") return Hamiltonian<N>::quadratic(parse_field<N>(n["potential"], 0.0));
  if (kind == "eikonal") return Hamiltonian<N>::eikonal(parse_field<N>(n["speed"], 1.0));
  throw Error(ErrorCode::InvalidConfig, "hamiltonian kind must be quadratic or eikonal (custom needs the library API)");
}

template <int N>
BoundaryCondition<N> parse_bc(const YAML::Node& n) {
  std::string type = n && n["type"] ? n["type"].as<std::string>() : "oblique";
  if (type == "oblique") {
    ObliqueField<N> gamma = ObliqueField<N>::normal();
    if (n["gamma"] && n["gamma"].IsMap()) {
      if constexpr (N == 2) gamma = ObliqueField<N>::rotated(num(n["gamma"], "rotate"));
      else throw Error(ErrorCode::InvalidConfig, "rotated gamma is two-dimensional");
    } else if (n["gamma"] && n["gamma"].as<std::string>() != "normal") {
      throw Error(ErrorCode::InvalidConfig, "gamma must be normal or {rotate: angle}");
    }
    return BoundaryCondition<N>::oblique(parse_field<N>(n["g"], 0.0), gamma);
  }
  if (type == "contact-angle") {
    if (n["gamma"] && !(n["gamma"].IsScalar() && n["gamma"].as<std::string>() == "normal"))
      throw Error(ErrorCode::InvalidConfig, "contact-angle condition requires gamma = normal");
    auto theta = parse_field<N>(n["theta"], kPi / 2);
    if (theta.max_value >= kPi - 1e-6) throw Error(ErrorCode::DegenerateAngle, "contact angle too close to pi");
    return BoundaryCondition<N>::contact_angle(theta);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown boundary condition type: " + type);
}

template <int N>
InitialData<N> parse_u0(const YAML::Node& n) {
  std::string kind = n && n["kind"] ? n["kind"].as<std::string>() : "linear";
  if (kind == "linear") {
    Vec<N> s = Vec<N>::Zero();
    if (n["slope"]) {
      if (n["slope"].size() != N) throw Error(ErrorCode::InvalidConfig, "slope must have one entry per axis");
      for (int a = 0; a < N; ++a) s[a] = parse_number(n["slope"][a].as<std::string>());
    }
    return InitialData<N>::linear(s, num(n, "offset", 0.0));
  }
  if (kind == "sine")
    return InitialData<N>::sine(num(n, "amplitude", 1.0), static_cast<int>(num(n, "axis", 1)) - 1,
                                num(n, "wavelength", 1.0), num(n, "offset", 0.0));
  if (kind == "ramp")
    return InitialData<N>::ramp(static_cast<int>(num(n, "axis", 1)) - 1, num(n, "weight", 1.0), num(n, "shift", 0.0));
  throw Error(ErrorCode::InvalidConfig, "unknown u0 kind: " + kind);
}

template <int N>
Scenario<N> parse_scenario(const YAML::Node& root) {
  auto s = root["scenario"];
  if (!s) throw Error(ErrorCode::InvalidConfig, "missing scenario block");
  Scenario<N> sc{parse_domain<N>(s["domain"]), parse_hamiltonian<N>(s["hamiltonian"]),
                 parse_bc<N>(s["boundary_condition"]), parse_u0<N>(s["u0"])};
  if (sc.domain.periodic) {
    auto rep = validate_domain<N>(sc.domain, sc.bc.gamma);
    if (!rep.ok) throw Error(ErrorCode::InvalidConfig, "domain validation failed");
  }
  return sc;
}

inline int config_dimension(const YAML::Node& root) {
  auto s = root["scenario"];
  if (s && s["dimension"]) return s["dimension"].as<int>();
  if (s && s["domain"] && s["domain"]["dimension"]) return s["domain"]["dimension"].as<int>();
  return 2;
}

template <int N>
ControlNet<N> parse_net(const YAML::Node& solver, double vmax_default) {
  double vmax = num(solver, "v_max", vmax_default);
  int dirs = static_cast<int>(num(solver, "directions", 32));
  int speeds = static_cast<int>(num(solver, "speeds", 16));
  int ls = static_cast<int>(num(solver, "l_samples", 4));
  double lmax = num(solver, "l_max", vmax);
  return ControlNet<N>::polar(dirs, ControlNet<N>::uniform_speeds(vmax, speeds), ls, lmax);
}

// ---- binary value fields ----

namespace detail {

template <class T>
void put(std::string& b, const T& v) {
  b.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(const std::string& b, std::size_t& off) {
  if (off + sizeof(T) > b.size()) throw Error(ErrorCode::CorruptHeader, "truncated field file");
  T v;
  std::memcpy(&v, b.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace detail

template <int N>
std::string encode_field(const ValueField<N>& f, const std::string& metadata = "") {
  static_assert(N <= 4, "header holds at most four dimensions");
  std::string b;
  b.append("HJVF", 4);
  detail::put<std::uint32_t>(b, kFieldVersion);
  detail::put<std::uint16_t>(b, N);
  detail::put<std::uint8_t>(b, static_cast<std::uint8_t>(f.bc_kind));
  std::uint8_t mask = 0;
  for (int a = 0; a < N; ++a)
    if (f.grid.space.periodic[a]) mask |= 1u << a;
  detail::put<std::uint8_t>(b, mask);
  for (int a = 0; a < 4; ++a) detail::put<std::uint32_t>(b, a < N ? f.grid.space.dims[a] : 0);
  detail::put<std::uint32_t>(b, static_cast<std::uint32_t>(f.grid.steps));
  detail::put<std::uint32_t>(b, static_cast<std::uint32_t>(f.levels.size()));
  detail::put<std::uint32_t>(b, 0);
  detail::put<double>(b, f.grid.space.h);
  detail::put<double>(b, f.grid.dt);
  detail::put<double>(b, f.grid.eps);
  for (int a = 0; a < N; ++a) detail::put<double>(b, f.grid.space.lo[a]);
  detail::put<double>(b, f.boundary_tol);
  for (int k : f.levels) detail::put<std::int32_t>(b, k);
  b.append(reinterpret_cast<const char*>(f.admissible.data()), f.admissible.size());
  for (const auto& v : f.values) b.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
  detail::put<std::uint32_t>(b, static_cast<std::uint32_t>(f.u0_description.size()));
  b += f.u0_description;
  detail::put<std::uint32_t>(b, static_cast<std::uint32_t>(metadata.size()));
  b += metadata;
  return b;
}

template <int N>
ValueField<N> decode_field(const std::string& b, std::string* metadata = nullptr) {
  if (b.size() < 64 || b.compare(0, 4, "HJVF") != 0) throw Error(ErrorCode::CorruptHeader, "bad field header");
  std::size_t off = 4;
  auto ver = detail::get<std::uint32_t>(b, off);
  if (ver != kFieldVersion) throw Error(ErrorCode::VersionMismatch, "unsupported field version");
  auto n = detail::get<std::uint16_t>(b, off);
  if (n != N) throw Error(ErrorCode::CorruptHeader, "dimension mismatch");
  ValueField<N> f;
  f.bc_kind = static_cast<BoundaryKind>(detail::get<std::uint8_t>(b, off));
  auto mask = detail::get<std::uint8_t>(b, off);
  for (int a = 0; a < 4; ++a) {
    auto d = detail::get<std::uint32_t>(b, off);
    if (a < N) f.grid.space.dims[a] = static_cast<int>(d);
  }
  for (int a = 0; a < N; ++a) f.grid.space.periodic[a] = (mask >> a) & 1u;
  f.grid.steps = static_cast<int>(detail::get<std::uint32_t>(b, off));
  auto nl = detail::get<std::uint32_t>(b, off);
  detail::get<std::uint32_t>(b, off);
  f.grid.space.h = detail::get<double>(b, off);
  f.grid.dt = detail::get<double>(b, off);
  f.grid.eps = detail::get<double>(b, off);
  for (int a = 0; a < N; ++a) f.grid.space.lo[a] = detail::get<double>(b, off);
  f.boundary_tol = detail::get<double>(b, off);
  for (std::uint32_t i = 0; i < nl; ++i) f.levels.push_back(detail::get<std::int32_t>(b, off));
  std::size_t size = f.grid.space.size();
  if (off + size > b.size()) throw Error(ErrorCode::CorruptHeader, "truncated field file");
  f.admissible.assign(b.begin() + off, b.begin() + off + size);
  off += size;
  for (std::uint32_t i = 0; i < nl; ++i) {
    if (off + size * sizeof(double) > b.size()) throw Error(ErrorCode::CorruptHeader, "truncated field file");
    std::vector<double> v(size);
    std::memcpy(v.data(), b.data() + off, size * sizeof(double));
    off += size * sizeof(double);
    f.values.push_back(std::move(v));
  }
  auto dl = detail::get<std::uint32_t>(b, off);
  if (off + dl > b.size()) throw Error(ErrorCode::CorruptHeader, "truncated field file");
  f.u0_description = b.substr(off, dl);
  off += dl;
  auto ml = detail::get<std::uint32_t>(b, off);
  if (off + ml != b.size()) throw Error(ErrorCode::CorruptHeader, "field file length mismatch");
  if (metadata) *metadata = b.substr(off, ml);
  return f;
}

template <int N>
void store_field(const std::filesystem::path& path, const ValueField<N>& f, const std::string& metadata = "") {
  write_atomic(path, encode_field(f, metadata));
}

template <int N>
ValueField<N> load_field(const std::filesystem::path& path, std::string* metadata = nullptr) {
  return decode_field<N>(read_file(path), metadata);
}

// ---- text formats ----

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string provenance_line(const std::string& hash, const std::string& tolerances) {
  return "# config_hash=" + hash + " version=" + kToolVersion + " tolerances=" + tolerances + "\n";
}

template <int N>
std::string field_csv(const ValueField<N>& f, const std::string& header) {
  std::string s = header;
  for (int a = 0; a < N; ++a) s += "x" + std::to_string(a + 1) + ",";
  s += "t,V\n";
  for (std::size_t l = 0; l < f.levels.size(); ++l)
    for (std::size_t i = 0; i < f.admissible.size(); ++i) {
      if (!f.admissible[i]) continue;
      auto x = f.grid.space.node(i);
      for (int a = 0; a < N; ++a) s += fmt(x[a]) + ",";
      s += fmt(f.time(f.levels[l])) + "," + fmt(f.values[l][i]) + "\n";
    }
  return s;
}

template <int N>
std::string path_csv(const ReflectedPath<N>& p, const std::string& header) {
  std::string s = header + "s,";
  for (int a = 0; a < N; ++a) s += "eta_" + std::to_string(a + 1) + ",";
  s += "l";
  for (int a = 0; a < N; ++a) s += ",v_" + std::to_string(a + 1);
  s += "\n";
  for (std::size_t i = 0; i < p.eta.size(); ++i) {
    s += fmt(i * p.dt) + ",";
    for (int a = 0; a < N; ++a) s += fmt(p.eta[i][a]) + ",";
    s += i < p.l.size() ? fmt(p.l[i]) : "";
    for (int a = 0; a < N; ++a) s += "," + (i < p.v.size() ? fmt(p.v[i][a]) : std::string());
    s += "\n";
  }
  return s;
}

template <int N>
std::string table_csv(const EffectiveLagrangian<N>& L, const std::string& header) {
  std::string s = header;
  for (int a = 0; a < N; ++a) s += "q" + std::to_string(a + 1) + ",";
  s += "Lbar,Lbar_raw,cauchy_gap\n";
  for (std::size_t j = 0; j < L.values.size(); ++j) {
    auto q = L.node(j);
    for (int a = 0; a < N; ++a) s += fmt(q[a]) + ",";
    s += fmt(L.values[j]) + "," + fmt(L.raw[j]) + "," + fmt(L.gap[j]) + "\n";
  }
  return s;
}

// ---- SVG ----

struct Svg {
  double w = 640, h = 480;
  std::ostringstream body;

  std::string str() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
       << " " << h << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << body.str() << "</svg>\n";
    return os.str();
  }
  void line(double x1, double y1, double x2, double y2, const std::string& color, double width = 1.0) {
    body << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2 << "\" stroke=\"" << color
         << "\" stroke-width=\"" << width << "\"/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& fill) {
    body << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << r << "\" fill=\"" << fill << "\"/>\n";
  }
  void text(double x, double y, const std::string& t, int size = 12) {
    body << "<text x=\"" << x << "\" y=\"" << y << "\" font-size=\"" << size << "\" font-family=\"sans-serif\">" << t
         << "</text>\n";
  }
};

// Zero level set of a 2-D nodal field by marching squares.
inline void contour(Svg& svg, const GridSpec<2>& g, const std::vector<double>& v, double level,
                    const std::function<std::pair<double, double>(double, double)>& map, const std::string& color) {
  for (int j = 0; j + 1 < g.dims[1]; ++j)
    for (int i = 0; i + 1 < g.dims[0]; ++i) {
      std::array<std::array<int, 2>, 4> c{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
      std::array<double, 4> f;
      bool ok = true;
      for (int k = 0; k < 4; ++k) {
        f[k] = v[g.linear(c[k])];
        if (is_infinite_cost(f[k])) ok = false;
      }
      if (!ok) continue;
      std::vector<std::pair<double, double>> pts;
      for (int k = 0; k < 4; ++k) {
        int m = (k + 1) % 4;
        double a = f[k] - level, b = f[m] - level;
        if ((a < 0) == (b < 0)) continue;
        double s = a / (a - b);
        auto p = g.node(c[k]), q = g.node(c[m]);
        pts.push_back(map(p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])));
      }
      for (std::size_t k = 0; k + 1 < pts.size(); k += 2)
        svg.line(pts[k].first, pts[k].second, pts[k + 1].first, pts[k + 1].second, color, 1.5);
    }
}

inline std::string loglog_svg(const std::vector<double>& x, const std::vector<double>& y, double slope,
                              const std::string& title) {
  Svg s;
  double lx0 = std::log(*std::min_element(x.begin(), x.end())) - 0.2;
  double lx1 = std::log(*std::max_element(x.begin(), x.end())) + 0.2;
  double ly0 = std::log(std::max(1e-300, *std::min_element(y.begin(), y.end()))) - 0.5;
  double ly1 = std::log(std::max(1e-300, *std::max_element(y.begin(), y.end()))) + 0.5;
  auto X = [&](double v) { return 60 + (std::log(v) - lx0) / (lx1 - lx0) * 540; };
  auto Y = [&](double v) { return 420 - (std::log(std::max(v, 1e-300)) - ly0) / (ly1 - ly0) * 380; };
  s.line(60, 420, 600, 420, "black");
  s.line(60, 40, 60, 420, "black");
  for (std::size_t i = 0; i < x.size(); ++i) {
    s.circle(X(x[i]), Y(y[i]), 4, "steelblue");
    if (i + 1 < x.size()) s.line(X(x[i]), Y(y[i]), X(x[i + 1]), Y(y[i + 1]), "steelblue");
  }
  std::ostringstream os;
  os << title << " (slope " << std::setprecision(3) << slope << ")";
  s.text(70, 30, os.str(), 14);
  return s.str();
}

}  // namespace hjhomog
