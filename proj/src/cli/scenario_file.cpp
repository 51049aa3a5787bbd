#include "sweep/cli/scenario_file.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace sweep::cli {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ValidationError, path + ": " + msg);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) invalid(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
  }
}

const json& require(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) invalid(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) invalid(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double read_number(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return kInfinity;
    if (s == "-inf") return -kInfinity;
  }
  invalid(path, "expected a number");
}

double read_finite(const json& j, const std::string& path) {
  const double v = read_number(j, path);
  if (!std::isfinite(v)) invalid(path, "expected a finite number");
  return v;
}

Vector read_vector(const json& j, const std::string& path, bool allow_inf = false) {
  if (!j.is_array() || j.empty()) invalid(path, "expected a nonempty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    v[static_cast<Eigen::Index>(i)] = allow_inf ? read_number(j[i], p) : read_finite(j[i], p);
  }
  return v;
}

Matrix read_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) invalid(path, "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = read_vector(j[static_cast<std::size_t>(r)], path + "[" + std::to_string(r) + "]");
    if (cols < 0) {
      cols = row.size();
      m.resize(rows, cols);
    } else if (row.size() != cols) {
      invalid(path, "rows have different lengths");
    }
    m.row(r) = row.transpose();
  }
  return m;
}

std::string read_string(const json& j, const std::string& path) {
  if (!j.is_string()) invalid(path, "expected a string");
  return j.get<std::string>();
}

json write_number(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

json write_vector(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(write_number(v[i]));
  return out;
}

json write_matrix(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(write_vector(m.row(r).transpose()));
  return out;
}

// Core-library errors raised while building an object become validation
// errors attributed to the field being read.
template <class F>
auto attributed(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid(path, e.what());
  }
}

ProxSet read_set(const json& j, const std::string& path) {
  const std::string kind = read_string(require(j, path, "kind"), join(path, "kind"));
  if (kind == "whole_space") {
    reject_unknown(j, path, {"kind", "dim"});
    const json& d = require(j, path, "dim");
    if (!d.is_number_integer() || d.get<long long>() < 1) invalid(join(path, "dim"), "expected a positive integer");
    return ProxSet::whole_space(d.get<Eigen::Index>());
  }
  if (kind == "half_space") {
    reject_unknown(j, path, {"kind", "normal", "offset"});
    Vector n = read_vector(require(j, path, "normal"), join(path, "normal"));
    const double b = read_finite(require(j, path, "offset"), join(path, "offset"));
    return attributed(path, [&] { return ProxSet::half_space(std::move(n), b); });
  }
  if (kind == "box") {
    reject_unknown(j, path, {"kind", "lower", "upper"});
    Vector lo = read_vector(require(j, path, "lower"), join(path, "lower"), true);
    Vector hi = read_vector(require(j, path, "upper"), join(path, "upper"), true);
    return attributed(path, [&] { return ProxSet::box(std::move(lo), std::move(hi)); });
  }
  if (kind == "ball" || kind == "ball_complement") {
    const bool complement = kind == "ball_complement";
    if (complement) {
      reject_unknown(j, path, {"kind", "center", "radius", "prox_r"});
    } else {
      reject_unknown(j, path, {"kind", "center", "radius"});
    }
    Vector c = read_vector(require(j, path, "center"), join(path, "center"));
    const double r = read_finite(require(j, path, "radius"), join(path, "radius"));
    ProxSet s = attributed(path, [&] {
      return complement ? ProxSet::ball_complement(std::move(c), r) : ProxSet::ball(std::move(c), r);
    });
    if (complement && j.contains("prox_r")) {
      const double pr = read_number(j["prox_r"], join(path, "prox_r"));
      s = attributed(join(path, "prox_r"), [&] { return s.with_prox_r(pr); });
    }
    return s;
  }
  if (kind == "polytope") {
    reject_unknown(j, path, {"kind", "faces"});
    const json& faces = require(j, path, "faces");
    const std::string fpath = join(path, "faces");
    if (!faces.is_array() || faces.empty()) invalid(fpath, "expected a nonempty array");
    std::vector<HalfSpace> hs;
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const std::string p = fpath + "[" + std::to_string(i) + "]";
      reject_unknown(faces[i], p, {"normal", "offset"});
      hs.push_back({read_vector(require(faces[i], p, "normal"), join(p, "normal")),
                    read_finite(require(faces[i], p, "offset"), join(p, "offset"))});
    }
    return attributed(path, [&] { return ProxSet::polytope(std::move(hs)); });
  }
  if (kind == "disjoint_union") {
    reject_unknown(j, path, {"kind", "members", "prox_r"});
    const json& members = require(j, path, "members");
    const std::string mpath = join(path, "members");
    if (!members.is_array()) invalid(mpath, "expected an array");
    std::vector<ProxSet> sets;
    for (std::size_t i = 0; i < members.size(); ++i) {
      sets.push_back(read_set(members[i], mpath + "[" + std::to_string(i) + "]"));
    }
    ProxSet s = attributed(path, [&] { return ProxSet::disjoint_union(std::move(sets)); });
    if (j.contains("prox_r")) {
      const double pr = read_number(j["prox_r"], join(path, "prox_r"));
      s = attributed(join(path, "prox_r"), [&] { return s.with_prox_r(pr); });
    }
    return s;
  }
  invalid(join(path, "kind"), "unknown set kind '" + kind + "'");
}

Potential read_potential(const json& j, const std::string& path) {
  const std::string kind = read_string(require(j, path, "kind"), join(path, "kind"));
  if (kind == "quadratic") {
    reject_unknown(j, path, {"kind", "q", "linear", "constant"});
    Matrix q = read_matrix(require(j, path, "q"), join(path, "q"));
    Vector lin = j.contains("linear") ? read_vector(j["linear"], join(path, "linear"))
                                      : Vector::Zero(q.rows());
    const double c = j.contains("constant") ? read_finite(j["constant"], join(path, "constant")) : 0.0;
    return attributed(path, [&] { return Potential::quadratic(std::move(q), std::move(lin), c); });
  }
  if (kind == "separable_polynomial") {
    reject_unknown(j, path, {"kind", "coefficients"});
    const json& cj = require(j, path, "coefficients");
    const std::string cpath = join(path, "coefficients");
    if (!cj.is_array() || cj.empty()) invalid(cpath, "expected a nonempty array of coefficient lists");
    std::vector<std::vector<double>> coeffs;
    for (std::size_t i = 0; i < cj.size(); ++i) {
      coeffs.push_back(to_std(read_vector(cj[i], cpath + "[" + std::to_string(i) + "]")));
    }
    return attributed(path, [&] { return Potential::separable_polynomial(std::move(coeffs)); });
  }
  invalid(join(path, "kind"), "unknown potential kind '" + kind + "'");
}

json write_potential(const Potential& p) {
  if (const auto* q = std::get_if<Quadratic>(&p.kind())) {
    return {{"kind", "quadratic"},
            {"q", write_matrix(q->q_matrix)},
            {"linear", write_vector(q->q_vector)},
            {"constant", q->constant}};
  }
  const auto& s = std::get<SeparablePolynomial>(p.kind());
  json coeffs = json::array();
  for (const auto& c : s.coefficients) coeffs.push_back(c);
  return {{"kind", "separable_polynomial"}, {"coefficients", coeffs}};
}

CheckSpec read_check(const json& j, const std::string& path) {
  CheckSpec spec;
  if (j.is_string()) {
    spec.name = j.get<std::string>();
  } else if (j.is_object()) {
    reject_unknown(j, path, {"name", "slack", "abs_tol", "constant", "window", "stop_tol"});
    spec.name = read_string(require(j, path, "name"), join(path, "name"));
    auto nonneg = [&](const char* key) -> std::optional<double> {
      if (!j.contains(key)) return std::nullopt;
      const double v = read_finite(j[key], join(path, key));
      if (v < 0.0) invalid(join(path, key), "must be nonnegative");
      return v;
    };
    spec.slack = nonneg("slack");
    spec.abs_tol = nonneg("abs_tol");
    spec.constant = nonneg("constant");
    spec.stop_tol = nonneg("stop_tol");
    if (j.contains("window")) {
      const json& w = j["window"];
      if (!w.is_number_integer() || w.get<long long>() < 1) {
        invalid(join(path, "window"), "expected a positive integer");
      }
      spec.window = w.get<std::size_t>();
    }
  } else {
    invalid(path, "expected a check name or object");
  }
  const auto& names = known_checks();
  if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
    invalid(join(path, "name"), "unknown check '" + spec.name + "'");
  }
  return spec;
}

std::string location(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "velocity_field_bound",   "two_solution_bound",     "velocity_decay_bound",
      "right_derivative",       "right_continuity_v",     "liminf_lower",
      "difference_quotient_limsup", "energy_identity",    "dissipation_integral",
      "convex_minimization",    "projection_identity",    "prox_inequality",
      "hypo_monotonicity",
  };
  return names;
}

std::vector<std::string> applicable_checks(const Scenario& scenario) {
  std::vector<std::string> out;
  const Potential* p = scenario.field().potential();
  for (const auto& name : known_checks()) {
    if (name == "energy_identity" || name == "dissipation_integral") {
      if (!p) continue;
    }
    if (name == "convex_minimization" && (!p || !p->convex())) continue;
    out.push_back(name);
  }
  return out;
}

ProxSet set_from_json(const json& j) { return read_set(j, "set"); }

Field field_from_json(const json& j) {
  const std::string path = "field";
  const std::string kind = read_string(require(j, path, "kind"), join(path, "kind"));
  if (kind == "constant") {
    reject_unknown(j, path, {"kind", "value"});
    return Field::constant(read_vector(require(j, path, "value"), join(path, "value")));
  }
  if (kind == "linear") {
    reject_unknown(j, path, {"kind", "a", "b", "lipschitz_k"});
    Matrix a = read_matrix(require(j, path, "a"), join(path, "a"));
    Vector b = j.contains("b") ? read_vector(j["b"], join(path, "b")) : Vector::Zero(a.rows());
    std::optional<double> k;
    if (j.contains("lipschitz_k")) k = read_finite(j["lipschitz_k"], join(path, "lipschitz_k"));
    return attributed(path, [&] { return Field::linear(std::move(a), std::move(b), k); });
  }
  if (kind == "neg_gradient") {
    reject_unknown(j, path, {"kind", "potential"});
    return Field::neg_gradient(read_potential(require(j, path, "potential"), join(path, "potential")));
  }
  invalid(join(path, "kind"), "unknown field kind '" + kind + "'");
}

json set_to_json(const ProxSet& set) {
  return std::visit(
      [&](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, WholeSpace>) {
          return {{"kind", "whole_space"}, {"dim", k.dim}};
        } else if constexpr (std::is_same_v<T, HalfSpace>) {
          return {{"kind", "half_space"}, {"normal", write_vector(k.normal)}, {"offset", k.offset}};
        } else if constexpr (std::is_same_v<T, Box>) {
          return {{"kind", "box"}, {"lower", write_vector(k.lower)}, {"upper", write_vector(k.upper)}};
        } else if constexpr (std::is_same_v<T, Ball>) {
          return {{"kind", "ball"}, {"center", write_vector(k.center)}, {"radius", k.radius}};
        } else if constexpr (std::is_same_v<T, BallComplement>) {
          return {{"kind", "ball_complement"},
                  {"center", write_vector(k.center)},
                  {"radius", k.radius},
                  {"prox_r", write_number(set.prox_r())}};
        } else if constexpr (std::is_same_v<T, Polytope>) {
          json faces = json::array();
          for (const auto& f : k.faces) {
            faces.push_back({{"normal", write_vector(f.normal)}, {"offset", f.offset}});
          }
          return {{"kind", "polytope"}, {"faces", faces}};
        } else {
          json members = json::array();
          for (const auto& m : k.members) members.push_back(set_to_json(m));
          return {{"kind", "disjoint_union"}, {"members", members}, {"prox_r", write_number(set.prox_r())}};
        }
      },
      set.kind());
}

json field_to_json(const Field& field) {
  return std::visit(
      [&](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, ConstantField>) {
          return {{"kind", "constant"}, {"value", write_vector(k.value)}};
        } else if constexpr (std::is_same_v<T, LinearField>) {
          return {{"kind", "linear"},
                  {"a", write_matrix(k.a)},
                  {"b", write_vector(k.b)},
                  {"lipschitz_k", field.lipschitz_k()}};
        } else {
          return {{"kind", "neg_gradient"}, {"potential", write_potential(k.potential)}};
        }
      },
      field.kind());
}

json scenario_to_json(const Scenario& s) {
  return {{"set", set_to_json(s.set())},
          {"field", field_to_json(s.field())},
          {"x0", write_vector(s.x0())},
          {"T", s.horizon()},
          {"h", s.step()}};
}

json to_json(const ScenarioFile& file) {
  json j = scenario_to_json(file.scenario);
  json checks = json::array();
  for (const auto& c : file.checks) {
    json cj = {{"name", c.name}};
    if (c.slack) cj["slack"] = *c.slack;
    if (c.abs_tol) cj["abs_tol"] = *c.abs_tol;
    if (c.constant) cj["constant"] = *c.constant;
    if (c.window) cj["window"] = *c.window;
    if (c.stop_tol) cj["stop_tol"] = *c.stop_tol;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["output"] = {{"trajectory", file.output.trajectory}, {"report", file.output.report}};
  j["seed"] = file.seed;
  return j;
}

ScenarioFile parse_scenario_text(std::string_view text) {
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at line .. :" prefix.
    if (const auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw Error(ErrorCode::ParseError, location(text, e.byte) + ": " + msg);
  }
  if (!j.is_object()) invalid("<root>", "expected an object");
  reject_unknown(j, "", {"set", "field", "x0", "T", "h", "checks", "output", "seed"});

  ProxSet set = set_from_json(require(j, "", "set"));
  Field field = field_from_json(require(j, "", "field"));
  Vector x0 = read_vector(require(j, "", "x0"), "x0");
  const double horizon = read_finite(require(j, "", "T"), "T");
  const double h = read_finite(require(j, "", "h"), "h");
  if (field.dim() != set.dim()) {
    invalid("field", "dimension " + std::to_string(field.dim()) + " does not match set dimension " +
                         std::to_string(set.dim()));
  }
  if (x0.size() != set.dim()) {
    invalid("x0", "dimension " + std::to_string(x0.size()) + " does not match set dimension " +
                      std::to_string(set.dim()));
  }

  ScenarioFile file{Scenario::create(std::move(set), std::move(field), std::move(x0), horizon, h), {}, {}, 0};

  if (j.contains("checks")) {
    const json& cj = j["checks"];
    if (!cj.is_array()) invalid("checks", "expected an array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < cj.size(); ++i) {
      CheckSpec spec = read_check(cj[i], "checks[" + std::to_string(i) + "]");
      if (!seen.insert(spec.name).second) invalid("checks[" + std::to_string(i) + "]", "duplicate check");
      file.checks.push_back(std::move(spec));
    }
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    if (!o.is_object()) invalid("output", "expected an object");
    reject_unknown(o, "output", {"trajectory", "report"});
    if (o.contains("trajectory")) file.output.trajectory = read_string(o["trajectory"], "output.trajectory");
    if (o.contains("report")) file.output.report = read_string(o["report"], "output.report");
  }
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      invalid("seed", "expected a nonnegative integer");
    }
    file.seed = s.get<std::uint64_t>();
  }
  return file;
}

ScenarioFile parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string scenario_digest(const Scenario& scenario) {
  const std::string canonical = scenario_to_json(scenario).dump();
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

}  // namespace sweep::cli
