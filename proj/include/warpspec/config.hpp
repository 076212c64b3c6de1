#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "warpspec/compare.hpp"
#include "warpspec/profiles.hpp"

namespace warpspec {

struct config_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

namespace toml {

/// Minimal TOML-shaped document model: scalars, arrays, tables (insertion
/// ordered, duplicate keys rejected). Covers headers [x], [[x]], inline
/// tables, and multi-line arrays; enough for the scenario schema, strict by
/// construction.
struct Value;
using Array = std::vector<Value>;
using Table = std::vector<std::pair<std::string, Value>>;

struct Value {
  std::variant<std::int64_t, double, bool, std::string, Array, Table> data;

  bool is_table() const { return std::holds_alternative<Table>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }

  double as_number(const std::string& where) const {
    if (const auto* i = std::get_if<std::int64_t>(&data))
      return static_cast<double>(*i);
    if (const auto* d = std::get_if<double>(&data)) return *d;
    throw config_error(where + ": expected a number");
  }
  std::int64_t as_int(const std::string& where) const {
    if (const auto* i = std::get_if<std::int64_t>(&data)) return *i;
    throw config_error(where + ": expected an integer");
  }
  const std::string& as_string(const std::string& where) const {
    if (const auto* s = std::get_if<std::string>(&data)) return *s;
    throw config_error(where + ": expected a string");
  }
  const Array& as_array(const std::string& where) const {
    if (const auto* a = std::get_if<Array>(&data)) return *a;
    throw config_error(where + ": expected an array");
  }
  const Table& as_table(const std::string& where) const {
    if (const auto* t = std::get_if<Table>(&data)) return *t;
    throw config_error(where + ": expected a table");
  }
};

inline const Value* find(const Table& t, const std::string& key) {
  for (const auto& [k, v] : t)
    if (k == key) return &v;
  return nullptr;
}

class Parser {
 public:
  explicit Parser(std::string text) : text_(std::move(text)) {}

  Table parse() {
    Table root;
    Table* current = &root;
    skip_filler();
    while (!eof()) {
      if (peek() == '[') {
        current = parse_header(root);
      } else {
        auto [key, value] = parse_key_value();
        insert(*current, key, std::move(value));
      }
      skip_filler();
    }
    return root;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char get() { return text_[pos_++]; }

  void fail(const std::string& msg) const {
    std::size_t line = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i)
      if (text_[i] == '\n') ++line;
    throw config_error("config parse error (line " + std::to_string(line) +
                       "): " + msg);
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  // whitespace, newlines, comments
  void skip_filler() {
    for (;;) {
      skip_inline_ws();
      if (eof()) return;
      if (peek() == '#') {
        while (!eof() && peek() != '\n') ++pos_;
      } else if (peek() == '\n' || peek() == '\r') {
        ++pos_;
      } else {
        return;
      }
    }
  }

  void expect_line_end() {
    skip_inline_ws();
    if (eof()) return;
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
      return;
    }
    if (peek() == '\n' || peek() == '\r') return;
    fail("unexpected trailing characters");
  }

  static bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string parse_key() {
    skip_inline_ws();
    std::string key;
    while (!eof() && is_key_char(peek())) key.push_back(get());
    if (key.empty()) fail("expected a key");
    return key;
  }

  void insert(Table& table, const std::string& key, Value value) {
    if (find(table, key)) fail("duplicate key '" + key + "'");
    table.emplace_back(key, std::move(value));
  }

  Table* parse_header(Table& root) {
    ++pos_;  // '['
    const bool array_of_tables = !eof() && peek() == '[';
    if (array_of_tables) ++pos_;
    const std::string name = parse_key();
    skip_inline_ws();
    if (eof() || get() != ']') fail("expected ']' in table header");
    if (array_of_tables && (eof() || get() != ']'))
      fail("expected ']]' in table-array header");
    expect_line_end();

    if (array_of_tables) {
      Value* slot = nullptr;
      for (auto& [k, v] : root)
        if (k == name) slot = &v;
      if (!slot) {
        root.emplace_back(name, Value{Array{}});
        slot = &root.back().second;
      } else if (!slot->is_array()) {
        fail("'" + name + "' is not a table array");
      }
      auto& arr = std::get<Array>(slot->data);
      arr.push_back(Value{Table{}});
      return &std::get<Table>(arr.back().data);
    }
    if (find(root, name)) fail("duplicate table '" + name + "'");
    root.emplace_back(name, Value{Table{}});
    return &std::get<Table>(root.back().second.data);
  }

  std::pair<std::string, Value> parse_key_value() {
    const std::string key = parse_key();
    skip_inline_ws();
    if (eof() || get() != '=') fail("expected '=' after key '" + key + "'");
    skip_inline_ws();
    Value v = parse_value();
    expect_line_end();
    return {key, std::move(v)};
  }

  Value parse_value() {
    if (eof()) fail("expected a value");
    const char c = peek();
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    return parse_scalar();
  }

  Value parse_string() {
    ++pos_;
    std::string out;
    while (!eof() && peek() != '"') {
      char ch = get();
      if (ch == '\\') {
        if (eof()) fail("unterminated escape");
        const char esc = get();
        switch (esc) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail("unsupported escape sequence");
        }
      } else if (ch == '\n') {
        fail("unterminated string");
      } else {
        out.push_back(ch);
      }
    }
    if (eof()) fail("unterminated string");
    ++pos_;  // closing quote
    return Value{out};
  }

  // inside brackets newlines and comments are ordinary separators
  void skip_filler_in_brackets() { skip_filler(); }

  Value parse_array() {
    ++pos_;  // '['
    Array arr;
    skip_filler_in_brackets();
    while (!eof() && peek() != ']') {
      arr.push_back(parse_value());
      skip_filler_in_brackets();
      if (!eof() && peek() == ',') {
        ++pos_;
        skip_filler_in_brackets();
      }
    }
    if (eof()) fail("unterminated array");
    ++pos_;
    return Value{std::move(arr)};
  }

  // unlike baseline TOML, inline tables may span lines (long tabulated
  // profiles read better that way)
  Value parse_inline_table() {
    ++pos_;  // '{'
    Table t;
    skip_filler();
    while (!eof() && peek() != '}') {
      const std::string key = parse_key();
      skip_filler();
      if (eof() || get() != '=') fail("expected '=' in inline table");
      skip_filler();
      insert(t, key, parse_value());
      skip_filler();
      if (!eof() && peek() == ',') {
        ++pos_;
        skip_filler();
      }
    }
    if (eof()) fail("unterminated inline table");
    ++pos_;
    return Value{std::move(t)};
  }

  Value parse_scalar() {
    std::string tok;
    while (!eof() && peek() != ',' && peek() != ']' && peek() != '}' &&
           peek() != '\n' && peek() != '\r' && peek() != '#' &&
           peek() != ' ' && peek() != '\t')
      tok.push_back(get());
    if (tok == "true") return Value{true};
    if (tok == "false") return Value{false};
    const bool looks_int =
        tok.find_first_of(".eE") == std::string::npos &&
        tok.find("inf") == std::string::npos && tok.find("nan") == std::string::npos;
    if (looks_int) {
      std::int64_t iv{};
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), iv);
      if (res.ec == std::errc() && res.ptr == tok.data() + tok.size())
        return Value{iv};
    }
    double dv{};
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), dv);
    if (res.ec == std::errc() && res.ptr == tok.data() + tok.size()) {
      if (!std::isfinite(dv)) fail("non-finite number '" + tok + "'");
      return Value{dv};
    }
    fail("cannot parse value '" + tok + "'");
    return Value{false};  // unreachable
  }

  std::string text_;
  std::size_t pos_ = 0;
};

}  // namespace toml

struct OutputSpec {
  std::string dir = "out";
  bool csv = true;
  bool json = true;
};

struct ScenarioConfig {
  int version = 1;
  OutputSpec output;
  std::vector<ComparisonScenario> scenarios;

  const ComparisonScenario& scenario(const std::string& name) const {
    for (const auto& sc : scenarios)
      if (sc.name == name) return sc;
    throw config_error("scenario '" + name + "' not found in config");
  }
};

namespace detail {

inline void reject_unknown(const toml::Table& t,
                           std::initializer_list<const char*> allowed,
                           const std::string& where) {
  for (const auto& [key, value] : t) {
    bool ok = false;
    for (const char* a : allowed)
      if (key == a) ok = true;
    if (!ok)
      throw config_error("unknown key '" + key + "' in " + where);
  }
}

inline std::vector<double> number_array(const toml::Value& v,
                                        const std::string& where) {
  std::vector<double> out;
  for (const auto& item : v.as_array(where))
    out.push_back(item.as_number(where + " element"));
  return out;
}

inline double s_max_or_default(const toml::Table& t, const std::string& where) {
  if (const auto* v = toml::find(t, "s_max")) {
    const double s = v->as_number(where + ".s_max");
    if (!(s > 0)) throw config_error(where + ".s_max must be > 0");
    return s;
  }
  return CurvatureProfile::default_s_max();
}

inline CurvatureProfile parse_curvature(const toml::Value& value,
                                        const std::string& where) {
  const auto& t = value.as_table(where);
  const auto* kind = toml::find(t, "kind");
  if (!kind) throw config_error(where + ": missing 'kind'");
  const std::string k = kind->as_string(where + ".kind");
  if (k == "constant") {
    reject_unknown(t, {"kind", "k", "s_max"}, where);
    const auto* kv = toml::find(t, "k");
    if (!kv) throw config_error(where + ": constant profile needs 'k'");
    return CurvatureProfile::constant(kv->as_number(where + ".k"),
                                      s_max_or_default(t, where));
  }
  if (k == "polynomial") {
    reject_unknown(t, {"kind", "coeffs", "s_max"}, where);
    const auto* cv = toml::find(t, "coeffs");
    if (!cv) throw config_error(where + ": polynomial profile needs 'coeffs'");
    return CurvatureProfile::polynomial(number_array(*cv, where + ".coeffs"),
                                        s_max_or_default(t, where));
  }
  if (k == "tabulated") {
    reject_unknown(t, {"kind", "s", "values"}, where);
    const auto* sv = toml::find(t, "s");
    const auto* vv = toml::find(t, "values");
    if (!sv || !vv)
      throw config_error(where + ": tabulated profile needs 's' and 'values'");
    return CurvatureProfile::tabulated(number_array(*sv, where + ".s"),
                                       number_array(*vv, where + ".values"));
  }
  if (k == "named") {
    reject_unknown(t, {"kind", "id", "s_max"}, where);
    const auto* idv = toml::find(t, "id");
    if (!idv) throw config_error(where + ": named profile needs 'id'");
    return CurvatureProfile::named(idv->as_string(where + ".id"),
                                   s_max_or_default(t, where));
  }
  throw config_error(where + ": unknown curvature kind '" + k + "'");
}

inline Potential parse_potential(const toml::Value& value,
                                 const std::string& where) {
  const auto& t = value.as_table(where);
  const auto* kind = toml::find(t, "kind");
  if (!kind) throw config_error(where + ": missing 'kind'");
  const std::string k = kind->as_string(where + ".kind");
  if (k == "constant") {
    reject_unknown(t, {"kind", "c", "s_max"}, where);
    const auto* cv = toml::find(t, "c");
    if (!cv) throw config_error(where + ": constant potential needs 'c'");
    return Potential::constant(cv->as_number(where + ".c"),
                               s_max_or_default(t, where));
  }
  if (k == "linear" || k == "quadratic") {
    reject_unknown(t, {"kind", "k", "s_max"}, where);
    const auto* kv = toml::find(t, "k");
    if (!kv) throw config_error(where + ": " + k + " potential needs 'k'");
    const auto sign = static_cast<int>(kv->as_int(where + ".k"));
    return (k == "linear")
               ? Potential::linear(sign, s_max_or_default(t, where))
               : Potential::quadratic(sign, s_max_or_default(t, where));
  }
  if (k == "hyperbolic_log") {
    reject_unknown(t, {"kind", "s_max"}, where);
    return Potential::hyperbolic_log(s_max_or_default(t, where));
  }
  if (k == "tabulated") {
    reject_unknown(t, {"kind", "s", "values"}, where);
    const auto* sv = toml::find(t, "s");
    const auto* vv = toml::find(t, "values");
    if (!sv || !vv)
      throw config_error(where + ": tabulated potential needs 's' and 'values'");
    return Potential::tabulated(number_array(*sv, where + ".s"),
                                number_array(*vv, where + ".values"));
  }
  throw config_error(where + ": unknown potential kind '" + k + "'");
}

inline ComparisonScenario parse_scenario(const toml::Table& t,
                                         std::size_t index) {
  const std::string where =
      "scenario #" + std::to_string(index + 1);
  reject_unknown(t,
                 {"name", "n", "p", "r0", "kappa_g", "kappa_minus",
                  "kappa_plus", "phi", "t_grid", "K", "grid", "tolerances"},
                 where);
  auto require = [&](const char* key) -> const toml::Value& {
    const auto* v = toml::find(t, key);
    if (!v)
      throw config_error(where + ": missing required key '" + std::string(key) +
                         "'");
    return *v;
  };

  ComparisonScenario sc;
  sc.name = require("name").as_string(where + ".name");
  sc.n = static_cast<int>(require("n").as_int(where + ".n"));
  if (sc.n < 2) throw config_error(where + ": n must be >= 2");
  if (const auto* v = toml::find(t, "p")) {
    sc.p = v->as_number(where + ".p");
    if (!(sc.p > 1)) throw config_error(where + ": p must be > 1");
  }
  sc.r0 = require("r0").as_number(where + ".r0");
  if (!(sc.r0 > 0)) throw config_error(where + ": r0 must be > 0");
  sc.g_profile = parse_curvature(require("kappa_g"), where + ".kappa_g");
  sc.kappa_minus =
      parse_curvature(require("kappa_minus"), where + ".kappa_minus");
  sc.kappa_plus = parse_curvature(require("kappa_plus"), where + ".kappa_plus");
  sc.potential = parse_potential(require("phi"), where + ".phi");
  if (const auto* v = toml::find(t, "t_grid")) {
    sc.t_grid = number_array(*v, where + ".t_grid");
    if (sc.t_grid.empty()) throw config_error(where + ": t_grid is empty");
    for (double tv : sc.t_grid)
      if (!(tv > 0)) throw config_error(where + ": t_grid values must be > 0");
  }
  if (const auto* v = toml::find(t, "K")) {
    sc.kernel_modes = static_cast<int>(v->as_int(where + ".K"));
    if (sc.kernel_modes < 1) throw config_error(where + ": K must be >= 1");
  }
  if (const auto* v = toml::find(t, "grid")) {
    const auto& g = v->as_table(where + ".grid");
    reject_unknown(g, {"h", "nodes"}, where + ".grid");
    if (const auto* nodes = toml::find(g, "nodes")) {
      const auto val = nodes->as_int(where + ".grid.nodes");
      if (val < 64) throw config_error(where + ": grid.nodes must be >= 64");
      sc.nodes = static_cast<std::size_t>(val);
    }
    if (const auto* h = toml::find(g, "h")) {
      const double hv = h->as_number(where + ".grid.h");
      if (hv != 0.0) {
        if (!(hv > 0)) throw config_error(where + ": grid.h must be >= 0");
        sc.nodes = static_cast<std::size_t>(std::ceil(sc.r0 / hv - 1e-9));
        if (sc.nodes < 64) throw config_error(where + ": grid.h too coarse");
      }
    }
  }
  if (const auto* v = toml::find(t, "tolerances")) {
    const auto& tol = v->as_table(where + ".tolerances");
    reject_unknown(tol, {"eig_tol", "kernel_tol", "bound_tol"},
                   where + ".tolerances");
    if (const auto* x = toml::find(tol, "eig_tol"))
      sc.tolerances.eig_tol = x->as_number(where + ".eig_tol");
    if (const auto* x = toml::find(tol, "kernel_tol"))
      sc.tolerances.kernel_tol = x->as_number(where + ".kernel_tol");
    if (const auto* x = toml::find(tol, "bound_tol"))
      sc.tolerances.bound_tol = x->as_number(where + ".bound_tol");
  }

  // the three profiles must cover the warping solve span
  for (const auto* prof : {&sc.g_profile, &sc.kappa_minus, &sc.kappa_plus})
    if (prof->s_max() < sc.solve_span())
      throw config_error(where +
                         ": curvature profile domain does not reach 1.05*r0");
  if (sc.potential.s_max() < sc.r0)
    throw config_error(where + ": potential domain does not reach r0");
  return sc;
}

}  // namespace detail

inline ScenarioConfig parse_config(const std::string& text) {
  toml::Table root = toml::Parser(text).parse();
  detail::reject_unknown(root, {"version", "output", "scenario"}, "config root");

  ScenarioConfig cfg;
  const auto* ver = toml::find(root, "version");
  if (!ver) throw config_error("config: missing 'version'");
  if (ver->as_int("version") != 1)
    throw config_error("config: unsupported version (expected 1)");

  if (const auto* out = toml::find(root, "output")) {
    const auto& t = out->as_table("output");
    detail::reject_unknown(t, {"dir", "formats"}, "output");
    if (const auto* d = toml::find(t, "dir"))
      cfg.output.dir = d->as_string("output.dir");
    if (const auto* f = toml::find(t, "formats")) {
      cfg.output.csv = cfg.output.json = false;
      for (const auto& item : f->as_array("output.formats")) {
        const std::string fmt = item.as_string("output.formats element");
        if (fmt == "csv")
          cfg.output.csv = true;
        else if (fmt == "json")
          cfg.output.json = true;
        else
          throw config_error("output.formats: unknown format '" + fmt + "'");
      }
    }
  }

  if (const auto* sc = toml::find(root, "scenario")) {
    const auto& arr = sc->as_array("scenario");
    for (std::size_t i = 0; i < arr.size(); ++i)
      cfg.scenarios.push_back(
          detail::parse_scenario(arr[i].as_table("scenario"), i));
  }
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.scenarios.size(); ++j)
      if (cfg.scenarios[i].name == cfg.scenarios[j].name)
        throw config_error("duplicate scenario name '" +
                           cfg.scenarios[i].name + "'");
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace warpspec
