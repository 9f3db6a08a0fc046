#include "fracperim/config.hpp"

#include "fracperim/expression.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <set>
#include <sstream>

namespace fracperim {

using json = nlohmann::json;

ConfigError::ConfigError(int line, int column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      detail_(message) {}

// ---------------------------------------------------------------------------
// Source positions

namespace {

SourcePos pos_at(const std::string& text, std::size_t offset) {
  SourcePos p;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++p.line;
      p.column = 1;
    } else {
      ++p.column;
    }
  }
  return p;
}

std::string escape_pointer_token(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

/// Walks syntactically valid JSON and records where each value starts.
class PositionScanner {
 public:
  PositionScanner(const std::string& text, std::map<std::string, SourcePos>& out) : text_(text), out_(out) {}

  void run() {
    skip_ws();
    value("");
  }

 private:
  void skip_ws() {
    while (i_ < text_.size()) {
      const char c = text_[i_];
      if (c != ' ' && c != '\t' && c != '\n' && c != '\r') break;
      advance();
    }
  }
  void advance() {
    if (text_[i_] == '\n') {
      ++pos_.line;
      pos_.column = 1;
    } else {
      ++pos_.column;
    }
    ++i_;
  }
  std::string string_token() {
    std::string s;
    advance();  // opening quote
    while (i_ < text_.size() && text_[i_] != '"') {
      if (text_[i_] == '\\') {
        advance();
        if (i_ < text_.size()) s += text_[i_];
      } else {
        s += text_[i_];
      }
      advance();
    }
    if (i_ < text_.size()) advance();
    return s;
  }
  void value(const std::string& ptr) {
    out_.emplace(ptr, pos_);
    if (i_ >= text_.size()) return;
    const char c = text_[i_];
    if (c == '{') {
      advance();
      skip_ws();
      while (i_ < text_.size() && text_[i_] != '}') {
        const SourcePos key_pos = pos_;
        const std::string key = string_token();
        const std::string child = ptr + "/" + escape_pointer_token(key);
        skip_ws();
        advance();  // colon
        skip_ws();
        out_.emplace(child, key_pos);
        value(child);
        skip_ws();
        if (i_ < text_.size() && text_[i_] == ',') advance();
        skip_ws();
      }
      if (i_ < text_.size()) advance();
    } else if (c == '[') {
      advance();
      skip_ws();
      std::size_t k = 0;
      while (i_ < text_.size() && text_[i_] != ']') {
        value(ptr + "/" + std::to_string(k++));
        skip_ws();
        if (i_ < text_.size() && text_[i_] == ',') advance();
        skip_ws();
      }
      if (i_ < text_.size()) advance();
    } else if (c == '"') {
      string_token();
    } else {
      while (i_ < text_.size() && std::string(",]} \t\r\n").find(text_[i_]) == std::string::npos) advance();
    }
  }

  const std::string& text_;
  std::map<std::string, SourcePos>& out_;
  std::size_t i_ = 0;
  SourcePos pos_;
};

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& text) {
  ConfigDocument doc;
  try {
    doc.root_ = json::parse(text);
  } catch (const json::parse_error& e) {
    const SourcePos p = pos_at(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    // drop the library's "[json.exception.parse_error.101] parse error at line 1, column 2: " prefix
    const auto colon = msg.find(": ");
    if (colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ConfigError(p.line, p.column, "invalid JSON: " + msg);
  }
  PositionScanner(text, doc.positions_).run();
  return doc;
}

SourcePos ConfigDocument::position(const std::string& pointer) const {
  std::string p = pointer;
  for (;;) {
    const auto it = positions_.find(p);
    if (it != positions_.end()) return it->second;
    if (p.empty()) return {};
    p = p.substr(0, p.rfind('/'));
  }
}

void ConfigDocument::fail(const std::string& pointer, const std::string& message) const {
  const SourcePos p = position(pointer);
  throw ConfigError(p.line, p.column, message);
}

// ---------------------------------------------------------------------------
// Typed readers

namespace {

std::string key_label(const std::string& pointer) {
  const auto slash = pointer.rfind('/');
  return slash == std::string::npos ? pointer : pointer.substr(slash + 1);
}

/// Reads one JSON object; every consumed key is copied into `canon` with its
/// default applied, and finish() rejects the keys that were never consumed.
class ObjectReader {
 public:
  ObjectReader(const ConfigDocument& doc, const json& obj, std::string pointer, json& canon)
      : doc_(doc), obj_(obj), ptr_(std::move(pointer)), canon_(canon) {
    if (!obj_.is_object()) doc_.fail(ptr_, "'" + label() + "' must be an object");
    if (!canon_.is_object()) canon_ = json::object();
  }

  bool has(const std::string& key) const { return obj_.contains(key); }
  std::string ptr(const std::string& key) const { return ptr_ + "/" + escape_pointer_token(key); }
  const json& raw(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) doc_.fail(ptr_, "missing required key '" + key + "'");
    return obj_.at(key);
  }
  json& canon() { return canon_; }
  const ConfigDocument& doc() const { return doc_; }

  double number(const std::string& key, std::optional<double> def = std::nullopt) {
    used_.insert(key);
    double v;
    if (!obj_.contains(key)) {
      if (!def) doc_.fail(ptr_, "missing required key '" + key + "'");
      v = *def;
    } else {
      v = as_number(obj_.at(key), ptr(key));
    }
    canon_[key] = v;
    return v;
  }
  std::optional<double> optional_number(const std::string& key) {
    used_.insert(key);
    if (!obj_.contains(key)) return std::nullopt;
    const double v = as_number(obj_.at(key), ptr(key));
    canon_[key] = v;
    return v;
  }
  std::int64_t integer(const std::string& key, std::optional<std::int64_t> def = std::nullopt) {
    used_.insert(key);
    std::int64_t v;
    if (!obj_.contains(key)) {
      if (!def) doc_.fail(ptr_, "missing required key '" + key + "'");
      v = *def;
    } else {
      const json& j = obj_.at(key);
      if (!j.is_number_integer()) doc_.fail(ptr(key), "'" + key + "' must be an integer");
      v = j.get<std::int64_t>();
    }
    canon_[key] = v;
    return v;
  }
  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t def) {
    used_.insert(key);
    std::uint64_t v = def;
    if (obj_.contains(key)) {
      const json& j = obj_.at(key);
      if (!j.is_number_unsigned()) doc_.fail(ptr(key), "'" + key + "' must be a non-negative integer");
      v = j.get<std::uint64_t>();
    }
    canon_[key] = v;
    return v;
  }
  std::string string(const std::string& key, std::optional<std::string> def = std::nullopt) {
    used_.insert(key);
    std::string v;
    if (!obj_.contains(key)) {
      if (!def) doc_.fail(ptr_, "missing required key '" + key + "'");
      v = *def;
    } else {
      const json& j = obj_.at(key);
      if (!j.is_string()) doc_.fail(ptr(key), "'" + key + "' must be a string");
      v = j.get<std::string>();
    }
    canon_[key] = v;
    return v;
  }
  bool boolean(const std::string& key, bool def) {
    used_.insert(key);
    bool v = def;
    if (obj_.contains(key)) {
      const json& j = obj_.at(key);
      if (!j.is_boolean()) doc_.fail(ptr(key), "'" + key + "' must be true or false");
      v = j.get<bool>();
    }
    canon_[key] = v;
    return v;
  }
  /// A number or a list of numbers.
  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
    used_.insert(key);
    std::vector<double> v;
    if (!obj_.contains(key)) {
      if (!def) doc_.fail(ptr_, "missing required key '" + key + "'");
      v = *def;
    } else {
      const json& j = obj_.at(key);
      if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) v.push_back(as_number(j[i], ptr(key) + "/" + std::to_string(i)));
      } else {
        v.push_back(as_number(j, ptr(key)));
      }
    }
    canon_[key] = v;
    return v;
  }
  Vec vec(const std::string& key, int dim) {
    const json& j = raw(key);
    const Vec v = as_vec(j, ptr(key), dim);
    canon_[key] = std::vector<double>(v.data(), v.data() + v.size());
    return v;
  }

  Vec as_vec(const json& j, const std::string& p, int dim) const {
    if (!j.is_array() || static_cast<int>(j.size()) != dim)
      doc_.fail(p, "'" + key_label(p) + "' must be a list of " + std::to_string(dim) + " numbers");
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = as_number(j[i], p + "/" + std::to_string(i));
    return v;
  }
  /// Numbers, or the strings "inf" and "-inf".
  double as_number(const json& j, const std::string& p) const {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
      if (s == "-inf" || s == "-infinity") return -std::numeric_limits<double>::infinity();
    }
    doc_.fail(p, "'" + key_label(p) + "' must be a number");
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!used_.count(key)) doc_.fail(ptr(key), "unknown key '" + key + "'");
  }

 private:
  std::string label() const { return ptr_.empty() ? "config" : key_label(ptr_); }

  const ConfigDocument& doc_;
  const json& obj_;
  std::string ptr_;
  json& canon_;
  std::set<std::string> used_;
};

template <typename F>
auto guard(const ConfigDocument& doc, const std::string& pointer, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    doc.fail(pointer, e.what());
  }
}

std::vector<Halfspace> halfspace_rows(ObjectReader& r, const std::string& key, int dim) {
  const json& rows = r.raw(key);
  const std::string p = r.ptr(key);
  if (!rows.is_array() || rows.empty()) r.doc().fail(p, "'" + key + "' must be a non-empty list of [a_1, ..., a_n, b]");
  std::vector<Halfspace> hs;
  json canon = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vec row = r.as_vec(rows[i], p + "/" + std::to_string(i), dim + 1);
    hs.push_back({row.head(dim), row[dim]});
    canon.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  }
  r.canon()[key] = canon;
  return hs;
}

std::vector<Vec> vector_rows(ObjectReader& r, const std::string& key, int dim) {
  const json& rows = r.raw(key);
  const std::string p = r.ptr(key);
  if (!rows.is_array() || rows.empty()) r.doc().fail(p, "'" + key + "' must be a non-empty list of points");
  std::vector<Vec> out;
  json canon = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(r.as_vec(rows[i], p + "/" + std::to_string(i), dim));
    canon.push_back(std::vector<double>(out.back().data(), out.back().data() + dim));
  }
  r.canon()[key] = canon;
  return out;
}

std::vector<double> checked_s_list(ObjectReader& r, const std::string& key, std::optional<std::vector<double>> def,
                                   bool increasing) {
  const auto v = r.numbers(key, def);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0 && v[i] < 1.0)) r.doc().fail(r.ptr(key), "values of '" + key + "' must lie in (0, 1)");
    if (increasing && i > 0 && !(v[i] > v[i - 1]))
      r.doc().fail(r.ptr(key), "'" + key + "' must be strictly increasing");
  }
  return v;
}

KernelFamily kernel_from_json(const ConfigDocument& doc, const json& j, const std::string& p, int dim, json& canon) {
  ObjectReader r(doc, j, p, canon);
  const std::string gauge = r.string("gauge", "euclidean");
  QuasiNorm q;
  if (gauge == "euclidean") {
    q = euclidean_norm(dim);
  } else if (gauge == "lp") {
    const double pval = r.number("p");
    q = guard(doc, r.ptr("p"), [&] { return lp_norm(dim, pval); });
  } else if (gauge == "polytope") {
    if (r.has("halfspaces") == r.has("vertices"))
      doc.fail(p, "a polytope kernel needs exactly one of 'halfspaces' and 'vertices'");
    if (r.has("halfspaces")) {
      const auto hs = halfspace_rows(r, "halfspaces", dim);
      q = guard(doc, r.ptr("halfspaces"), [&] { return quasi_norm_from_convex_body(dim, hs); });
    } else {
      const auto vs = vector_rows(r, "vertices", dim);
      q = guard(doc, r.ptr("vertices"), [&] { return quasi_norm_from_vertices(dim, vs); });
    }
  } else if (gauge == "expression") {
    const std::string src = r.string("expression");
    const auto tau = r.optional_number("tau");
    try {
      q = quasi_norm_from_expression(Expression::parse(src, dim), tau);
    } catch (const ExpressionError& e) {
      const SourcePos at = doc.position(r.ptr("expression"));
      throw ConfigError(at.line, at.column, "expression column " + std::to_string(e.column()) + ": " + e.what());
    } catch (const std::exception& e) {
      doc.fail(r.ptr("expression"), e.what());
    }
  } else {
    doc.fail(r.ptr("gauge"), "unknown gauge '" + gauge + "' (expected euclidean, lp, polytope or expression)");
  }
  const auto c = r.optional_number("c");
  const double drift = r.number("drift", 0.0);
  r.finish();
  return guard(doc, p, [&] {
    return drift > 0.0 ? KernelFamily::drifting(q, drift, c) : KernelFamily::from_gauge(q, c);
  });
}

}  // namespace

SetRegion region_from_json(const ConfigDocument& doc, const json& j, const std::string& p, int dim, json& canon) {
  ObjectReader r(doc, j, p, canon);
  const std::string type = r.string("type");
  auto sub = [&](const json& child, const std::string& cp, json& cc) { return region_from_json(doc, child, cp, dim, cc); };
  auto need_dim = [&](std::initializer_list<int> dims) {
    for (int d : dims)
      if (d == dim) return;
    doc.fail(r.ptr("type"), "region type '" + type + "' is not available in dimension " + std::to_string(dim));
  };
  SetRegion out = SetRegion::empty(dim);
  if (type == "empty") {
  } else if (type == "intervals") {
    need_dim({1});
    const json& list = r.raw("intervals");
    const std::string lp = r.ptr("intervals");
    if (!list.is_array()) doc.fail(lp, "'intervals' must be a list of [lo, hi] pairs");
    std::vector<Interval> parts;
    json cl = json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Vec v = r.as_vec(list[i], lp + "/" + std::to_string(i), 2);
      parts.push_back({v[0], v[1]});
      cl.push_back({v[0], v[1]});
    }
    r.canon()["intervals"] = cl;
    out = guard(doc, lp, [&] { return SetRegion::intervals(Intervals1D::from_list(parts)); });
  } else if (type == "ball") {
    const Vec c = r.vec("center", dim);
    const double radius = r.number("radius");
    out = guard(doc, p, [&] { return SetRegion::ball(c, radius); });
  } else if (type == "box") {
    const Vec lo = r.vec("lo", dim), hi = r.vec("hi", dim);
    out = guard(doc, p, [&] { return SetRegion::box(lo, hi); });
  } else if (type == "unit_cube") {
    out = unit_cube(dim);
  } else if (type == "halfspace") {
    const Vec nrm = r.vec("normal", dim);
    const double off = r.number("offset");
    out = guard(doc, p, [&] { return SetRegion::halfspace(nrm, off); });
  } else if (type == "lower_halfspace") {
    out = lower_halfspace(dim);
  } else if (type == "polytope") {
    need_dim({1, 2, 3});
    if (r.has("halfspaces") == r.has("vertices"))
      doc.fail(p, "a polytope needs exactly one of 'halfspaces' and 'vertices'");
    if (r.has("halfspaces")) {
      const auto hs = halfspace_rows(r, "halfspaces", dim);
      out = guard(doc, r.ptr("halfspaces"), [&] { return SetRegion::polytope(Polytope::from_halfspaces(dim, hs)); });
    } else {
      const auto vs = vector_rows(r, "vertices", dim);
      out = guard(doc, r.ptr("vertices"), [&] { return SetRegion::polytope(Polytope::from_vertices(dim, vs)); });
    }
  } else if (type == "strip") {
    need_dim({1, 2});
    const double d1 = r.number("d1", 0.0), d2 = r.number("d2", 0.0);
    out = guard(doc, p, [&] { return cube_strip(dim, d1, d2); });
  } else if (type == "complement") {
    json cc;
    out = SetRegion::complement(sub(r.raw("of"), r.ptr("of"), cc));
    r.canon()["of"] = cc;
  } else if (type == "intersection" || type == "union" || type == "difference") {
    const json& list = r.raw("of");
    const std::string lp = r.ptr("of");
    if (!list.is_array() || list.size() < 2) doc.fail(lp, "'of' must list at least two regions");
    if (type == "difference" && list.size() != 2) doc.fail(lp, "a difference takes exactly two regions");
    json cl = json::array();
    std::vector<SetRegion> parts;
    for (std::size_t i = 0; i < list.size(); ++i) {
      json cc;
      parts.push_back(sub(list[i], lp + "/" + std::to_string(i), cc));
      cl.push_back(cc);
    }
    r.canon()["of"] = cl;
    out = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) {
      if (type == "intersection") {
        out = SetRegion::intersection(out, parts[i]);
      } else if (type == "union") {
        out = set_union(out, parts[i]);
      } else {
        out = set_difference(out, parts[i]);
      }
    }
  } else {
    doc.fail(r.ptr("type"), "unknown region type '" + type + "'");
  }
  r.finish();
  return out;
}

namespace {

void read_engine(ObjectReader& top, RunConfig& cfg) {
  json& canon = cfg.canonical["engine"];
  const json empty = json::object();
  const json& j = top.has("engine") ? top.raw("engine") : empty;
  ObjectReader r(top.doc(), j, top.ptr("engine"), canon);
  EngineSpec& e = cfg.engine;
  const std::string name = r.string("engine", cfg.dim == 1 ? "exact1d" : "slicing");
  const auto eng = engine_from_string(name);
  if (!eng) top.doc().fail(r.ptr("engine"), "unknown engine '" + name + "' (expected exact1d, slicing or montecarlo)");
  e.engine = *eng;
  if (e.engine == Engine::Exact1D && cfg.dim != 1) top.doc().fail(r.ptr("engine"), "exact1d requires dim 1");
  const auto n_lines = r.integer("n_lines", 100000);
  const auto n_pairs = r.integer("n_pairs", 1000000);
  if (n_lines < 1) top.doc().fail(r.ptr("n_lines"), "'n_lines' must be positive");
  if (n_pairs < 2) top.doc().fail(r.ptr("n_pairs"), "'n_pairs' must be at least 2");
  e.n_lines = static_cast<std::size_t>(n_lines);
  e.n_pairs = static_cast<std::size_t>(n_pairs);
  e.seed = r.unsigned_integer("seed", 1);
  const auto chunk = r.integer("chunk_size", 4096);
  if (chunk < 1) top.doc().fail(r.ptr("chunk_size"), "'chunk_size' must be positive");
  e.chunk_size = static_cast<std::size_t>(chunk);
  if (r.has("r_min_policy")) {
    const json& pol = r.raw("r_min_policy");
    if (pol.is_string() && pol.get<std::string>() == "auto") {
      canon["r_min_policy"] = "auto";
    } else if (pol.is_number() && pol.get<double>() > 0.0) {
      e.r_min = pol.get<double>();
      canon["r_min_policy"] = e.r_min;
    } else {
      top.doc().fail(r.ptr("r_min_policy"), "'r_min_policy' must be \"auto\" or a positive radius");
    }
  } else {
    canon["r_min_policy"] = "auto";
  }
  e.r_min_target = r.number("r_min_target", 1e-3);
  if (!(e.r_min_target > 0.0)) top.doc().fail(r.ptr("r_min_target"), "'r_min_target' must be positive");
  r.finish();
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  const ConfigDocument doc = ConfigDocument::parse(text);
  RunConfig cfg;
  cfg.canonical = json::object();
  ObjectReader top(doc, doc.root(), "", cfg.canonical);
  const auto dim = top.integer("dim");
  if (dim < 1 || dim > kMaxDim) doc.fail(top.ptr("dim"), "'dim' must lie between 1 and " + std::to_string(kMaxDim));
  cfg.dim = static_cast<int>(dim);
  const int n = cfg.dim;
  cfg.domain = Domain::whole(n);

  if (top.has("kernel"))
    cfg.kernel = kernel_from_json(doc, top.raw("kernel"), top.ptr("kernel"), n, cfg.canonical["kernel"]);
  if (top.has("set")) cfg.set = region_from_json(doc, top.raw("set"), top.ptr("set"), n, cfg.canonical["set"]);
  if (top.has("domain")) {
    const json& d = top.raw("domain");
    if (d.is_string()) {
      if (d.get<std::string>() != "whole") doc.fail(top.ptr("domain"), "'domain' must be \"whole\" or a region");
      cfg.canonical["domain"] = "whole";
    } else {
      const SetRegion reg = region_from_json(doc, d, top.ptr("domain"), n, cfg.canonical["domain"]);
      cfg.domain = guard(doc, top.ptr("domain"), [&] { return Domain::bounded(reg); });
    }
  } else {
    cfg.canonical["domain"] = "whole";
  }
  read_engine(top, cfg);
  if (top.has("s")) cfg.s = checked_s_list(top, "s", std::nullopt, false);
  if (top.has("s_grid")) {
    cfg.s_grid = checked_s_list(top, "s_grid", std::nullopt, true);
  }
  cfg.tolerance = top.optional_number("tolerance");
  if (cfg.tolerance && !(*cfg.tolerance >= 0.0)) doc.fail(top.ptr("tolerance"), "'tolerance' must be non-negative");
  cfg.target = top.optional_number("target");
  if (top.has("p1_only")) cfg.p1_only = top.boolean("p1_only", false);

  if (top.has("validation")) {
    ObjectReader r(doc, top.raw("validation"), top.ptr("validation"), cfg.canonical["validation"]);
    cfg.validation.s_values = checked_s_list(r, "s_values", cfg.validation.s_values, false);
    const auto dirs = r.integer("directions", cfg.validation.directions);
    if (dirs < 1) doc.fail(r.ptr("directions"), "'directions' must be positive");
    cfg.validation.directions = static_cast<int>(dirs);
    cfg.validation.tolerance = r.number("tolerance", cfg.validation.tolerance);
    r.finish();
  }

  {
    const json empty = json::object();
    const json& mj = top.has("moment") ? top.raw("moment") : empty;
    ObjectReader r(doc, mj, top.ptr("moment"), cfg.canonical["moment"]);
    const std::string method = r.string("method", "auto");
    if (method == "exact") {
      cfg.moment.spec.method = MomentMethod::Exact;
    } else if (method == "quadrature") {
      cfg.moment.spec.method = MomentMethod::Quadrature;
    } else if (method == "montecarlo") {
      cfg.moment.spec.method = MomentMethod::MonteCarlo;
    } else if (method != "auto") {
      doc.fail(r.ptr("method"), "unknown moment method '" + method + "'");
    }
    cfg.moment.spec.tolerance = r.number("tolerance", 1e-10);
    const auto points = r.integer("points", 200000);
    if (points < 1) doc.fail(r.ptr("points"), "'points' must be positive");
    cfg.moment.spec.mc_points = static_cast<std::size_t>(points);
    cfg.moment.spec.seed = cfg.engine.seed;
    if (r.has("directions")) {
      cfg.moment.directions = vector_rows(r, "directions", n);
    } else {
      for (int k = 0; k < n; ++k) cfg.moment.directions.push_back(unit_vec(n, k));
    }
    r.finish();
  }

  if (top.has("lemma")) {
    ObjectReader r(doc, top.raw("lemma"), top.ptr("lemma"), cfg.canonical["lemma"]);
    LemmaSettings l;
    l.kind = r.string("kind");
    if (l.kind == "boundary_term" || l.kind == "halfspace_cube") {
      // uses the top-level s_grid
    } else if (l.kind == "strip") {
      l.s = checked_s_list(r, "s", std::vector<double>{0.95}, false).front();
      l.d1 = r.number("d1", 0.0);
      l.d2 = r.number("d2", 0.0);
      l.constant = r.optional_number("constant");
    } else if (l.kind == "additivity") {
      l.s = checked_s_list(r, "s", std::vector<double>{0.5}, false).front();
      l.omega1 = region_from_json(doc, r.raw("omega1"), r.ptr("omega1"), n, r.canon()["omega1"]);
      if (r.has("omega2")) {
        l.omega2 = region_from_json(doc, r.raw("omega2"), r.ptr("omega2"), n, r.canon()["omega2"]);
      } else {
        l.omega2 = SetRegion::empty(n);
      }
    } else if (l.kind == "coarea") {
      if (n != 1) doc.fail(r.ptr("kind"), "the coarea check requires dim 1");
      l.s = checked_s_list(r, "s", std::vector<double>{0.5}, false).front();
      const json& pieces = r.raw("pieces");
      const std::string pp = r.ptr("pieces");
      if (!pieces.is_array()) doc.fail(pp, "'pieces' must be a list of [lo, hi, value]");
      json cl = json::array();
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        const Vec v = r.as_vec(pieces[i], pp + "/" + std::to_string(i), 3);
        l.pieces.emplace_back(v[0], v[1], v[2]);
        cl.push_back({v[0], v[1], v[2]});
      }
      r.canon()["pieces"] = cl;
    } else {
      doc.fail(r.ptr("kind"), "unknown lemma '" + l.kind +
                                  "' (expected boundary_term, halfspace_cube, strip, additivity or coarea)");
    }
    r.finish();
    cfg.lemma = l;
  }

  if (top.has("minimize")) {
    ObjectReader r(doc, top.raw("minimize"), top.ptr("minimize"), cfg.canonical["minimize"]);
    MinimizeSettings m;
    const auto cells = r.integer("cells", 32);
    if (cells < 2 || cells % 2 != 0) doc.fail(r.ptr("cells"), "'cells' must be a positive even number");
    m.cells = static_cast<int>(cells);
    if (r.has("exterior") && r.has("mask_file")) doc.fail(r.ptr("mask_file"), "give 'exterior' or 'mask_file', not both");
    if (r.has("mask_file")) {
      m.mask_file = r.string("mask_file");
    } else if (r.has("exterior")) {
      m.exterior = region_from_json(doc, r.raw("exterior"), r.ptr("exterior"), n, r.canon()["exterior"]);
    } else {
      m.exterior = lower_halfspace(n);
      r.canon()["exterior"] = {{"type", "lower_halfspace"}};
    }
    m.s_list = checked_s_list(r, "s_list", m.s_list, false);
    m.schedule.anneal = r.boolean("anneal", false);
    m.schedule.t0 = r.number("t0", m.schedule.t0);
    m.schedule.cooling = r.number("cooling", m.schedule.cooling);
    m.schedule.levels = static_cast<int>(r.integer("levels", m.schedule.levels));
    m.schedule.sweeps_per_level = static_cast<int>(r.integer("sweeps_per_level", m.schedule.sweeps_per_level));
    m.schedule.max_sweeps = static_cast<int>(r.integer("max_sweeps", m.schedule.max_sweeps));
    if (m.schedule.max_sweeps < 1) doc.fail(r.ptr("max_sweeps"), "'max_sweeps' must be positive");
    const std::string scheme = r.string("scheme", "exact");
    if (scheme == "exact") {
      m.scheme = WeightScheme::Exact;
    } else if (scheme == "collocation") {
      m.scheme = WeightScheme::Collocation;
    } else {
      doc.fail(r.ptr("scheme"), "unknown weight scheme '" + scheme + "'");
    }
    m.flat_target = r.optional_number("flat_target");
    if (!m.mask_file.empty() && !m.flat_target)
      doc.fail(r.ptr("mask_file"), "a mask file needs an explicit 'flat_target'");
    if (n != 1 && n != 2) doc.fail(top.ptr("dim"), "minimization supports dim 1 and 2");
    r.finish();
    cfg.minimize = m;
  }
  top.finish();
  return cfg;
}

std::string config_digest(const nlohmann::json& canonical) {
  const std::string text = canonical.dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void load_mask_text(const std::string& text, VoxelGrid& grid) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) rows.push_back(line);
  }
  const int n = grid.dim();
  const int nx = grid.resolution[0];
  const int ny = n == 2 ? grid.resolution[1] : 1;
  if (static_cast<int>(rows.size()) != ny) throw std::invalid_argument("mask file: expected " + std::to_string(ny) + " rows");
  grid.occupancy.assign(grid.size(), 0);
  for (int y = 0; y < ny; ++y) {
    const std::string& row = rows[ny - 1 - y];
    if (static_cast<int>(row.size()) != nx)
      throw std::invalid_argument("mask file: row " + std::to_string(ny - y) + " must have " + std::to_string(nx) + " characters");
    for (int x = 0; x < nx; ++x) {
      if (row[x] != '0' && row[x] != '1') throw std::invalid_argument("mask file: only '0' and '1' are allowed");
      const std::size_t idx = n == 2 ? grid.index({x, y}) : grid.index({x});
      grid.occupancy[idx] = row[x] == '1' ? 1 : 0;
    }
  }
}

json to_json(const EstimateResult& r) {
  json j;
  j["value"] = r.value;
  j["std_error"] = r.std_error;
  j["engine"] = to_string(r.engine);
  j["samples"] = r.samples;
  j["seed"] = r.seed;
  j["s"] = r.s;
  if (r.decomposition) {
    j["p1"] = r.decomposition->p1;
    j["p2"] = r.decomposition->p2;
    j["p1_error"] = r.decomposition->p1_error;
    j["p2_error"] = r.decomposition->p2_error;
  }
  if (r.engine == Engine::MonteCarlo) {
    j["truncation_bound"] = r.truncation_bound;
    j["r_min"] = r.r_min;
  }
  return j;
}

}  // namespace fracperim
