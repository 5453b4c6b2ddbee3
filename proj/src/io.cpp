#include "vortexlab/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include <unistd.h>

#include "json.hpp"

namespace vortexlab {

using nlohmann::json;

namespace {

// Strict view of a JSON object: every key must be consumed.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw Error(ErrorKind::SchemaError, "`" + name() + "` must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number()) throw Error(ErrorKind::SchemaError, "field `" + path(key) + "` must be a number");
    return v.get<double>();
  }
  double required_number(const std::string& key) {
    if (!has(key)) throw Error(ErrorKind::SchemaError, "missing required field `" + path(key) + "`");
    return number(key, 0.0);
  }
  long long integer(const std::string& key, long long def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw Error(ErrorKind::SchemaError, "field `" + path(key) + "` must be an integer");
    return v.get<long long>();
  }
  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_boolean()) throw Error(ErrorKind::SchemaError, "field `" + path(key) + "` must be true or false");
    return v.get<bool>();
  }
  std::string text(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_string()) throw Error(ErrorKind::SchemaError, "field `" + path(key) + "` must be a string");
    return v.get<std::string>();
  }
  std::string choice(const std::string& key, const std::string& def, std::initializer_list<const char*> allowed) {
    const std::string v = text(key, def);
    for (const char* a : allowed)
      if (v == a) return v;
    std::string list;
    for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
    throw Error(ErrorKind::SchemaError, "field `" + path(key) + "` must be one of: " + list);
  }
  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (v.is_string()) return parse_list(v.get<std::string>(), path(key));
    if (!v.is_array()) throw Error(ErrorKind::SchemaError, "field `" + path(key) + "` must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw Error(ErrorKind::SchemaError, "field `" + path(key) + "` must hold numbers only");
      out.push_back(e.get<double>());
    }
    return out;
  }
  Vec2 point(const std::string& key, Vec2 def) {
    if (!has(key)) return def;
    const std::vector<double> v = numbers(key);
    if (v.size() != 2) throw Error(ErrorKind::SchemaError, "field `" + path(key) + "` must be [x, y]");
    return {v[0], v[1]};
  }
  Fields object(const std::string& key) { return Fields(raw(key), path(key)); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw Error(ErrorKind::SchemaError, "unknown field `" + path(it.key()) + "`");
  }

 private:
  std::string name() const { return path_.empty() ? "config" : path_; }
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw Error(ErrorKind::RangeError, "`" + field + "` " + what);
}

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

DomainShape parse_shape(Fields f) {
  const std::string kind = f.choice("kind", "", {"disk", "ellipse", "star"});
  const Vec2 c = f.point("center", {0.0, 0.0});
  require(std::isfinite(c.x) && std::isfinite(c.y), f.path("center"), "must be finite");
  if (kind == "disk") {
    const double r = f.required_number("radius");
    require(positive(r), f.path("radius"), "must be positive");
    f.finish();
    return DomainShape::disk(c, r);
  }
  if (kind == "ellipse") {
    const double a = f.required_number("a"), b = f.required_number("b");
    require(positive(a), f.path("a"), "must be positive");
    require(positive(b), f.path("b"), "must be positive");
    f.finish();
    return DomainShape::ellipse(c, a, b);
  }
  Star s;
  s.center = c;
  if (!f.has("cos")) throw Error(ErrorKind::SchemaError, "missing required field `" + f.path("cos") + "`");
  s.cos_coeffs = f.numbers("cos");
  if (f.has("sin")) s.sin_coeffs = f.numbers("sin");
  require(!s.cos_coeffs.empty() && positive(s.cos_coeffs[0]), f.path("cos"), "needs a positive mean radius");
  double wiggle = 0.0;
  for (std::size_t k = 1; k < s.cos_coeffs.size(); ++k) wiggle += std::abs(s.cos_coeffs[k]);
  for (double v : s.sin_coeffs) wiggle += std::abs(v);
  require(wiggle < s.cos_coeffs[0], f.path("cos"), "must keep r(theta) positive (sum of |harmonics| < mean radius)");
  f.finish();
  return DomainShape(s);
}

json shape_json(const DomainShape& shape) {
  return std::visit(
      [](const auto& k) -> json {
        using K = std::decay_t<decltype(k)>;
        json j;
        j["center"] = {k.center.x, k.center.y};
        if constexpr (std::is_same_v<K, Disk>) {
          j["kind"] = "disk";
          j["radius"] = k.radius;
        } else if constexpr (std::is_same_v<K, Ellipse>) {
          j["kind"] = "ellipse";
          j["a"] = k.a;
          j["b"] = k.b;
        } else {
          j["kind"] = "star";
          j["cos"] = k.cos_coeffs;
          j["sin"] = k.sin_coeffs;
        }
        return j;
      },
      shape.kind());
}

const char* method_name(GreenOptions::Method m) {
  switch (m) {
    case GreenOptions::Method::Auto: return "auto";
    case GreenOptions::Method::ClosedForm: return "closed_form";
    case GreenOptions::Method::Numeric: return "numeric";
  }
  return "auto";
}

std::vector<double> schedule(Fields& f, const std::string& single, const std::string& list, std::vector<double> def) {
  if (f.has(single) && f.has(list))
    throw Error(ErrorKind::SchemaError, "give only one of `" + f.path(single) + "` and `" + f.path(list) + "`");
  if (f.has(single)) return {f.number(single, 0.0)};
  if (f.has(list)) return f.numbers(list);
  return def;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<double> parse_list(const std::string& text, const std::string& field) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    while (end && *end == ' ') ++end;
    if (item.empty() || end == item.c_str() || (end && *end != '\0'))
      throw Error(ErrorKind::SchemaError, "`" + field + "` must be a comma-separated list of numbers");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::SchemaError, "`" + field + "` is empty");
  return out;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("config is not valid JSON: ") + e.what());
  }
  Fields top(root, "");
  RunConfig cfg;

  if (!top.has("seed")) throw Error(ErrorKind::SchemaError, "missing required field `seed`");
  const long long seed = top.integer("seed", 0);
  require(seed >= 0, "seed", "must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.search.seed = cfg.seed;

  if (!top.has("shape")) throw Error(ErrorKind::SchemaError, "missing required field `shape`");
  cfg.shape = parse_shape(top.object("shape"));

  if (top.has("grid")) {
    Fields g = top.object("grid");
    cfg.n = static_cast<int>(g.integer("n", cfg.n));
    cfg.bubble_resolution = g.number("bubble_resolution", cfg.bubble_resolution);
    cfg.growth = g.number("growth", cfg.growth);
    cfg.auto_refine = g.boolean("auto_refine", cfg.auto_refine);
    g.finish();
  }
  if (top.has("green")) {
    Fields g = top.object("green");
    const std::string m = g.choice("method", "auto", {"auto", "closed_form", "numeric"});
    cfg.green.method = m == "auto" ? GreenOptions::Method::Auto
                       : m == "numeric" ? GreenOptions::Method::Numeric
                                        : GreenOptions::Method::ClosedForm;
    cfg.green.numeric.n = static_cast<int>(g.integer("n", cfg.green.numeric.n));
    cfg.green.numeric.boundary_subtraction = g.boolean("boundary_subtraction", cfg.green.numeric.boundary_subtraction);
    const long long cap = g.integer("cache_capacity", static_cast<long long>(cfg.green.numeric.cache_capacity));
    require(cap >= 1, "green.cache_capacity", "must be at least 1");
    cfg.green.numeric.cache_capacity = static_cast<std::size_t>(cap);
    g.finish();
  }
  if (top.has("params")) {
    Fields p = top.object("params");
    cfg.rhos = schedule(p, "rho", "rho_schedule", cfg.rhos);
    cfg.gammas = schedule(p, "gamma", "gamma_schedule", cfg.gammas);
    cfg.tau = p.number("tau", cfg.tau);
    p.finish();
  }
  if (top.has("config")) {
    Fields c = top.object("config");
    if (!c.has("xi1") || !c.has("xi2"))
      throw Error(ErrorKind::SchemaError, "`config` needs both `config.xi1` and `config.xi2`");
    VortexConfig v;
    v.xi1 = c.point("xi1", {});
    v.xi2 = c.point("xi2", {});
    cfg.xi = v;
    c.finish();
  }
  if (top.has("search")) {
    Fields s = top.object("search");
    cfg.search.starts = static_cast<int>(s.integer("starts", cfg.search.starts));
    cfg.search.eta = s.number("eta", cfg.search.eta);
    const std::string gauge = s.choice("gauge", "auto", {"auto", "on", "off"});
    cfg.search.gauge = gauge == "auto" ? -1 : gauge == "on" ? 1 : 0;
    cfg.search.tol_rel = s.number("tol", cfg.search.tol_rel);
    cfg.search.max_iter = static_cast<int>(s.integer("max_iter", cfg.search.max_iter));
    cfg.select = s.choice("select", cfg.select, {"maximum", "saddle", "any"});
    s.finish();
  }
  if (top.has("solver")) {
    Fields s = top.object("solver");
    const std::string mode = s.choice("projection", "exact", {"exact", "expansion"});
    cfg.projection = mode == "exact" ? ProjectionMode::Exact : ProjectionMode::Expansion;
    cfg.newton.tol_rel = s.number("tol", cfg.newton.tol_rel);
    cfg.newton.max_iter = static_cast<int>(s.integer("max_iter", cfg.newton.max_iter));
    cfg.newton.max_halvings = static_cast<int>(s.integer("max_halvings", cfg.newton.max_halvings));
    s.finish();
  }
  if (top.has("output")) {
    Fields o = top.object("output");
    cfg.output_dir = o.text("dir", cfg.output_dir);
    o.finish();
  }
  top.finish();
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  require(cfg.n >= 17, "grid.n", "must be at least 17");
  require(positive(cfg.bubble_resolution) && cfg.bubble_resolution >= 8.0, "grid.bubble_resolution",
          "must be at least 8");
  require(positive(cfg.growth) && cfg.growth < 1.0, "grid.growth", "must lie in (0, 1)");
  require(cfg.green.numeric.n >= 17, "green.n", "must be at least 17");
  require(positive(cfg.tau), "params.tau", "must be positive");
  require(!cfg.rhos.empty(), "params.rho", "needs at least one value");
  require(!cfg.gammas.empty(), "params.gamma", "needs at least one value");
  for (double r : cfg.rhos) require(positive(r), "params.rho", "values must be positive");
  for (double g : cfg.gammas) require(positive(g), "params.gamma", "values must be positive");
  for (std::size_t k = 1; k < cfg.rhos.size(); ++k)
    require(cfg.rhos[k] < cfg.rhos[k - 1], "params.rho_schedule", "must be strictly decreasing");
  if (cfg.gammas.size() > 1) {
    const bool up = cfg.gammas[1] > cfg.gammas[0];
    for (std::size_t k = 1; k < cfg.gammas.size(); ++k)
      require(up ? cfg.gammas[k] > cfg.gammas[k - 1] : cfg.gammas[k] < cfg.gammas[k - 1], "params.gamma_schedule",
              "must be strictly monotone");
  }
  require(cfg.search.starts >= 1, "search.starts", "must be at least 1");
  require(positive(cfg.search.tol_rel), "search.tol", "must be positive");
  require(cfg.search.max_iter >= 1, "search.max_iter", "must be at least 1");
  require(cfg.search.eta < 0.0 || positive(cfg.search.eta), "search.eta", "must be positive");
  require(positive(cfg.newton.tol_rel), "solver.tol", "must be positive");
  require(cfg.newton.max_iter >= 1, "solver.max_iter", "must be at least 1");
  require(cfg.newton.max_halvings >= 0, "solver.max_halvings", "must be non-negative");
  if (cfg.xi) {
    require(cfg.shape.contains(cfg.xi->xi1), "config.xi1", "must lie inside the domain");
    require(cfg.shape.contains(cfg.xi->xi2), "config.xi2", "must lie inside the domain");
    require(norm(cfg.xi->xi1 - cfg.xi->xi2) > 0.0, "config", "points must be distinct");
  }
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string RunConfig::canonical() const {
  json j;
  j["seed"] = seed;
  j["shape"] = shape_json(shape);
  j["grid"] = {{"n", n}, {"bubble_resolution", bubble_resolution}, {"growth", growth}, {"auto_refine", auto_refine}};
  j["green"] = {{"method", method_name(green.method)},
                {"n", green.numeric.n},
                {"boundary_subtraction", green.numeric.boundary_subtraction},
                {"cache_capacity", green.numeric.cache_capacity}};
  j["params"] = {{"rho_schedule", rhos}, {"gamma_schedule", gammas}, {"tau", tau}};
  if (xi) j["config"] = {{"xi1", {xi->xi1.x, xi->xi1.y}}, {"xi2", {xi->xi2.x, xi->xi2.y}}};
  j["search"] = {{"starts", search.starts},
                 {"eta", search.eta},
                 {"gauge", search.gauge < 0 ? "auto" : search.gauge ? "on" : "off"},
                 {"tol", search.tol_rel},
                 {"max_iter", search.max_iter},
                 {"select", select}};
  j["solver"] = {{"projection", to_string(projection)},
                 {"tol", newton.tol_rel},
                 {"max_iter", newton.max_iter},
                 {"max_halvings", newton.max_halvings}};
  j["output"] = {{"dir", output_dir}};
  return j.dump();
}

std::string RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return hex64(h);
}

std::string format_field(const GridField& f, const std::string& comment) {
  const Grid& g = *f.grid;
  std::string out;
  out.reserve(g.size() * 24 + 256);
  if (!comment.empty()) {
    std::stringstream ss(comment);
    std::string line;
    while (std::getline(ss, line)) out += "# " + line + "\n";
  }
  const double hx = g.uniform ? g.hx : 0.0, hy = g.uniform ? g.hy : 0.0;
  out += std::to_string(g.nx) + " " + std::to_string(g.ny) + " " + fmt(g.xs.front()) + " " + fmt(g.ys.front()) + " " +
         fmt(hx) + " " + fmt(hy) + "\n";
  if (!g.uniform) {
    for (int i = 0; i < g.nx; ++i) out += (i ? " " : "") + fmt(g.xs[i]);
    out += "\n";
    for (int j = 0; j < g.ny; ++j) out += (j ? " " : "") + fmt(g.ys[j]);
    out += "\n";
  }
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      if (i) out += ' ';
      out += g.inside(i, j) ? fmt(f.at(i, j)) : "nan";
    }
    out += '\n';
  }
  return out;
}

GridField parse_field(const std::string& text, const DomainShape* shape) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    const std::size_t nl = text.find('\n', pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
  }
  const char* p = text.c_str() + pos;
  const char* end = text.c_str() + text.size();
  auto next = [&](const char* what) {
    while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (p >= end) throw Error(ErrorKind::FormatError, std::string("field file ends before ") + what);
    char* stop = nullptr;
    const double v = std::strtod(p, &stop);
    if (stop == p) throw Error(ErrorKind::FormatError, std::string("unreadable number in ") + what);
    p = stop;
    return v;
  };
  const double nxd = next("header"), nyd = next("header");
  if (nxd != std::floor(nxd) || nyd != std::floor(nyd) || nxd < 2 || nyd < 2 || nxd * nyd > 1e9)
    throw Error(ErrorKind::FormatError, "header needs integer nx, ny >= 2");
  const int nx = static_cast<int>(nxd), ny = static_cast<int>(nyd);
  const double x0 = next("header"), y0 = next("header"), hx = next("header"), hy = next("header");
  std::vector<double> xs(nx), ys(ny);
  if (hx == 0.0 && hy == 0.0) {
    for (auto& x : xs) x = next("x coordinates");
    for (auto& y : ys) y = next("y coordinates");
  } else {
    if (!(hx > 0.0) || !(hy > 0.0)) throw Error(ErrorKind::FormatError, "spacings must be positive");
    for (int i = 0; i < nx; ++i) xs[i] = x0 + i * hx;
    for (int j = 0; j < ny; ++j) ys[j] = y0 + j * hy;
  }
  std::vector<double> values(static_cast<std::size_t>(nx) * ny);
  for (auto& v : values) v = next("values (payload shorter than nx * ny)");
  while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
  if (p != end) throw Error(ErrorKind::FormatError, "payload longer than nx * ny");

  DomainShape s = shape ? *shape
                        : DomainShape::disk({0.5 * (xs.front() + xs.back()), 0.5 * (ys.front() + ys.back())},
                                            0.5 * std::hypot(xs.back() - xs.front(), ys.back() - ys.front()));
  GridPtr base;
  try {
    base = grid_from_coordinates(s, std::move(xs), std::move(ys));
  } catch (const Error& e) {
    throw Error(ErrorKind::FormatError, std::string("bad grid coordinates: ") + e.what());
  }
  auto grid = std::make_shared<Grid>(*base);
  for (std::size_t k = 0; k < values.size(); ++k) {
    grid->mask[k] = std::isnan(values[k]) ? 0 : 1;
    if (std::isnan(values[k])) values[k] = 0.0;
  }
  return GridField(std::move(grid), std::move(values));
}

void write_field(const GridField& f, const std::string& path, const std::string& comment) {
  write_file_atomic(path, format_field(f, comment));
}

GridField read_field(const std::string& path, const DomainShape* shape) { return parse_field(read_file(path), shape); }

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const std::string tmp = path + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IOError, "cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      throw Error(ErrorKind::IOError, "write failed for " + path);
    }
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IOError, "cannot move output into place at " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IOError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IOError, "read failed for " + path);
  return ss.str();
}

std::string sweep_csv(const BranchReport& report) {
  std::string out = "gamma,xi1x,xi1y,xi2x,xi2y,dist_boundary,dist_argmax,nu_gap\n";
  for (const SweepRecord& r : report.records) {
    out += fmt(r.gamma) + "," + fmt(r.cfg.xi1.x) + "," + fmt(r.cfg.xi1.y) + "," + fmt(r.cfg.xi2.x) + "," +
           fmt(r.cfg.xi2.y) + "," + fmt(r.dist_boundary) + "," + fmt(r.dist_argmax) + "," + fmt(r.nu_gap) + "\n";
  }
  return out;
}

}  // namespace vortexlab
