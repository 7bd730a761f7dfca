#include "evokit/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "evokit/error.hpp"
#include "evokit/examples.hpp"
#include "evokit/profiles.hpp"
#include "evokit/spatial_ops.hpp"

namespace evokit {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
  fail(ErrorCode::Validation, "config " + path + ": " + msg);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) bad(path, "must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) bad(path, "unknown key '" + it.key() + "'");
}

double num(const json& j, const std::string& key, const std::string& path, double def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number()) bad(path + "." + key, "must be a number");
  double v = j[key].get<double>();
  if (!std::isfinite(v)) bad(path + "." + key, "must be finite");
  return v;
}

double num_req(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) bad(path, "missing key '" + key + "'");
  return num(j, key, path, 0.0);
}

int integer(const json& j, const std::string& key, const std::string& path, int def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_number_integer()) bad(path + "." + key, "must be an integer");
  return j[key].get<int>();
}

std::string str(const json& j, const std::string& key, const std::string& path, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j[key].is_string()) bad(path + "." + key, "must be a string");
  return j[key].get<std::string>();
}

std::string str_req(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) bad(path, "missing key '" + key + "'");
  return str(j, key, path, "");
}

// "name:a,b" -> (name, {a, b}); plain "name" -> (name, {}).
std::pair<std::string, std::vector<double>> split_spec(const std::string& s, const std::string& path) {
  auto colon = s.find(':');
  if (colon == std::string::npos) return {s, {}};
  std::vector<double> args;
  std::stringstream ss(s.substr(colon + 1));
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      args.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      bad(path, "cannot parse number '" + tok + "' in '" + s + "'");
    }
  }
  return {s.substr(0, colon), args};
}

// ---- section validation ----

void validate_field(const json& f, const std::string& path) {
  if (f.is_number()) return;
  if (!f.is_string()) bad(path, "field must be a number or 'indicator:a,b' / 'complement:a,b'");
  auto [name, args] = split_spec(f.get<std::string>(), path);
  if ((name != "indicator" && name != "complement") || args.size() != 2 || !(args[1] > args[0]))
    bad(path, "field must be a number or 'indicator:a,b' / 'complement:a,b' with a < b");
}

void validate_fields(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) return;
  const json& f = j[key];
  if (f.is_array()) {
    if (f.empty() || f.size() > 2) bad(path + "." + key, "needs one field or one per block");
    for (size_t i = 0; i < f.size(); ++i) validate_field(f[i], path + "." + key + "[" + std::to_string(i) + "]");
  } else {
    validate_field(f, path + "." + key);
  }
}

void validate_schedule(const json& j, const std::string& key, const std::string& path, bool allow_indicator) {
  std::string s = str(j, key, path, "one");
  auto [name, args] = split_spec(s, path + "." + key);
  if (name == "one" || name == "ramp") {
    if (!args.empty()) bad(path + "." + key, "'" + name + "' takes no arguments");
    return;
  }
  if (allow_indicator && name == "indicator" && args.size() == 2 && args[1] > args[0]) return;
  bad(path + "." + key, std::string("unknown schedule '") + s + "'" +
                            (allow_indicator ? "" : " (M0 needs a Lipschitz schedule: one or ramp)"));
}

void validate_law_node(const json& j, const std::string& path);

void validate_law_section(const json& j) {
  const std::string p = "law";
  std::string b = str_req(j, "builder", p);
  if (b == "heat") {
    check_keys(j, p, {"builder", "kappa"});
  } else if (b == "affine") {
    check_keys(j, p, {"builder", "m0", "m1", "m0_schedule", "m1_schedule"});
    validate_fields(j, "m0", p);
    validate_fields(j, "m1", p);
    validate_schedule(j, "m0_schedule", p, false);
    validate_schedule(j, "m1_schedule", p, true);
  } else if (b == "maxwell") {
    check_keys(j, p, {"builder", "eps", "mu", "sigma"});
  } else if (b == "fractional") {
    check_keys(j, p, {"builder", "alpha"});
  } else if (b == "integro") {
    check_keys(j, p, {"builder", "amplitude", "decay", "c_mod", "horizon"});
  } else if (b == "file") {
    check_keys(j, p, {"builder", "path"});
    str_req(j, "path", p);
  } else if (b == "inline") {
    check_keys(j, p, {"builder", "radius", "expr"});
    if (!j.contains("expr")) bad(p, "missing key 'expr'");
    validate_law_node(j["expr"], p + ".expr");
  } else {
    bad(p + ".builder", "unknown law builder '" + b + "'");
  }
}

void validate_spatial_section(const json& j) {
  const std::string p = "spatial";
  std::string b = str_req(j, "builder", p);
  if (b == "grad_1d") {
    check_keys(j, p, {"builder", "n_x", "x0", "length", "bc", "side"});
    std::string bc = str(j, "bc", p, "dirichlet");
    if (bc != "dirichlet" && bc != "neumann") bad(p + ".bc", "must be dirichlet or neumann");
  } else if (b == "curl_3d") {
    check_keys(j, p, {"builder", "n", "side"});
  } else if (b == "none") {
    check_keys(j, p, {"builder", "dim"});
  } else {
    bad(p + ".builder", "unknown spatial builder '" + b + "'");
  }
  std::string side = str(j, "side", p, "first");
  if (side != "first" && side != "second") bad(p + ".side", "must be first or second");
}

void validate_rhs_section(const json& j) {
  check_keys(j, "rhs", {"time", "space"});
  if (j.contains("time")) {
    const json& t = j["time"];
    check_keys(t, "rhs.time", {"profile", "a", "b", "center", "width", "amplitude"});
    std::string pr = str(t, "profile", "rhs.time", "bump");
    static const std::set<std::string> ok = {"bump", "heaviside", "indicator", "gaussian", "zero"};
    if (!ok.count(pr)) bad("rhs.time.profile", "unknown profile '" + pr + "'");
  }
  if (j.contains("space")) {
    const json& s = j["space"];
    check_keys(s, "rhs.space", {"shape", "block", "mode", "center", "width"});
    std::string sh = str(s, "shape", "rhs.space", "ones");
    static const std::set<std::string> ok = {"ones", "sine", "gaussian", "index_sine"};
    if (!ok.count(sh)) bad("rhs.space.shape", "unknown shape '" + sh + "'");
    std::string bl = str(s, "block", "rhs.space", "all");
    if (bl != "first" && bl != "second" && bl != "all") bad("rhs.space.block", "must be first, second or all");
  }
}

void validate_step_section(const json& j) {
  check_keys(j, "step", {"delays", "check_posdef", "relation"});
  if (j.contains("delays")) {
    if (!j["delays"].is_array()) bad("step.delays", "must be an array");
    for (size_t i = 0; i < j["delays"].size(); ++i) {
      const std::string p = "step.delays[" + std::to_string(i) + "]";
      check_keys(j["delays"][i], p, {"h", "b"});
      num_req(j["delays"][i], "h", p);
      num_req(j["delays"][i], "b", p);
    }
  }
  if (j.contains("check_posdef") && !j["check_posdef"].is_boolean()) bad("step.check_posdef", "must be a boolean");
  if (j.contains("relation")) relation_from_name(str(j, "relation", "step", ""));
}

void validate_example_section(const json& j) {
  check_keys(j, "example", {"name", "n_x", "L", "eps"});
  std::string n = str_req(j, "name", "example");
  std::vector<std::string> names = example_names();
  names.push_back("ode");
  names.push_back("mixed_type_ramp");
  if (std::find(names.begin(), names.end(), n) == names.end()) bad("example.name", "unknown example '" + n + "'");
}

void validate_experiment_section(const json& j, Mode m) {
  const std::string p = "experiment";
  std::string t = str_req(j, "type", p);
  if (m == Mode::homogenize) {
    check_keys(j, p, {"type", "base", "n", "n_x", "nu", "forcing"});
    if (t != "elliptic" && t != "ode" && t != "mixed") bad(p + ".type", "must be elliptic, ode or mixed");
    if (!j.contains("n") || !j["n"].is_array() || j["n"].empty()) bad(p + ".n", "must be a non-empty array");
    for (const auto& v : j["n"])
      if (!v.is_number_integer()) bad(p + ".n", "entries must be integers");
  } else {
    check_keys(j, p, {"type", "c", "h", "n_x", "dt", "t0", "t_end", "tail_start"});
    if (t != "para_hyper" && t != "delay") bad(p + ".type", "must be para_hyper or delay");
    num_req(j, "c", p);
  }
}

void validate_law_node(const json& j, const std::string& path) {
  std::string k = str_req(j, "kind", path);
  if (k == "const") {
    check_keys(j, path, {"kind", "value", "diag", "matrix"});
    int given = j.contains("value") + j.contains("diag") + j.contains("matrix");
    if (given != 1) bad(path, "const needs exactly one of value, diag, matrix");
  } else if (k == "zpow") {
    check_keys(j, path, {"kind", "alpha"});
    num_req(j, "alpha", path);
  } else if (k == "sum" || k == "product") {
    check_keys(j, path, {"kind", "children"});
    if (!j.contains("children") || !j["children"].is_array() || j["children"].empty())
      bad(path + ".children", "must be a non-empty array");
    for (size_t i = 0; i < j["children"].size(); ++i)
      validate_law_node(j["children"][i], path + ".children[" + std::to_string(i) + "]");
  } else if (k == "neumann_inverse") {
    check_keys(j, path, {"kind", "child", "terms"});
    if (!j.contains("child")) bad(path, "missing key 'child'");
    validate_law_node(j["child"], path + ".child");
  } else if (k == "exp_delay") {
    check_keys(j, path, {"kind", "h"});
    num_req(j, "h", path);
  } else if (k == "kernel") {
    check_keys(j, path, {"kind", "ds", "m", "amplitude", "decay"});
  } else {
    bad(path + ".kind", "unknown node kind '" + k + "'");
  }
}

// ---- law trees ----

cplx complex_value(const json& v, const std::string& path) {
  if (v.is_number()) return cplx(v.get<double>(), 0.0);
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return cplx(v[0].get<double>(), v[1].get<double>());
  bad(path, "must be a number or [re, im]");
}

Expr node_from_json(const json& j, const std::string& path, int dim, double r) {
  std::string k = j["kind"].get<std::string>();
  if (k == "const") {
    if (j.contains("value")) return constant(complex_value(j["value"], path + ".value"));
    if (j.contains("diag")) {
      const json& d = j["diag"];
      if (!d.is_array() || static_cast<int>(d.size()) != dim) bad(path + ".diag", "needs dim entries");
      Eigen::VectorXcd v(dim);
      for (int i = 0; i < dim; ++i) v[i] = complex_value(d[i], path + ".diag");
      return constant(diag_sparse(v));
    }
    const json& m = j["matrix"];
    if (!m.is_array() || static_cast<int>(m.size()) != dim) bad(path + ".matrix", "needs dim rows");
    Eigen::MatrixXcd mat(dim, dim);
    for (int i = 0; i < dim; ++i) {
      if (!m[i].is_array() || static_cast<int>(m[i].size()) != dim) bad(path + ".matrix", "needs dim columns");
      for (int c = 0; c < dim; ++c) mat(i, c) = complex_value(m[i][c], path + ".matrix");
    }
    return constant(mat);
  }
  if (k == "zpow") return zpow(j["alpha"].get<double>());
  if (k == "sum" || k == "product") {
    std::vector<Expr> ch;
    for (size_t i = 0; i < j["children"].size(); ++i)
      ch.push_back(node_from_json(j["children"][i], path + ".children[" + std::to_string(i) + "]", dim, r));
    return k == "sum" ? sum(std::move(ch)) : product(std::move(ch));
  }
  if (k == "neumann_inverse")
    return neumann_inverse(node_from_json(j["child"], path + ".child", dim, r), r, integer(j, "terms", path, -1));
  if (k == "exp_delay") return exp_delay(j["h"].get<double>());
  // kernel: amplitude e^{-decay t} sampled on [0, m ds)
  double ds = num(j, "ds", path, 1.0 / 64.0);
  int m = integer(j, "m", path, 2560);
  double amp = num(j, "amplitude", path, 1.0), decay = num(j, "decay", path, 1.0);
  if (!(ds > 0.0) || m < 2) bad(path, "kernel needs ds > 0 and m >= 2");
  return kernel_hat(Kernel::scalar(ds, m, [=](double t) { return amp * std::exp(-decay * t); }));
}

// ---- spatial layout ----

struct Layout {
  SpMat A;
  Eigen::VectorXd quad;
  int n_first = 0, n_second = 0;
  bool geometric = false;
  double x0 = 0.0, length = 1.0;
  std::vector<std::pair<double, double>> volume;  // control volume per DOF
  int dim() const { return n_first + n_second; }
};

Layout build_layout(const json& j) {
  const std::string p = "spatial";
  std::string b = j["builder"].get<std::string>();
  BcSide side = str(j, "side", p, "first") == "first" ? BcSide::first : BcSide::second;
  Layout L;
  if (b == "none") {
    int d = integer(j, "dim", p, 1);
    if (d < 1) bad(p + ".dim", "must be >= 1");
    L.A = SpMat(d, d);
    L.quad = Eigen::VectorXd::Ones(d);
    L.n_first = d;
    return L;
  }
  if (b == "curl_3d") {
    int n = integer(j, "n", p, 4);
    if (n < 1) bad(p + ".n", "must be >= 1");
    BlockSkew bs = block_skew(curl_pair_3d(n), side);
    L.A = bs.A;
    L.quad = bs.quad;
    L.n_first = bs.n_first;
    L.n_second = bs.n_second;
    return L;
  }
  int n_x = integer(j, "n_x", p, 64);
  if (n_x < 2) bad(p + ".n_x", "must be >= 2");
  L.x0 = num(j, "x0", p, 0.0);
  L.length = num(j, "length", p, 1.0);
  if (!(L.length > 0.0)) bad(p + ".length", "must be positive");
  Boundary bc = str(j, "bc", p, "dirichlet") == "dirichlet" ? Boundary::dirichlet : Boundary::neumann;
  OperatorPair pair = grad_pair_1d(n_x + 1, L.length, bc);
  BlockSkew bs = block_skew(pair, side);
  L.A = bs.A;
  L.quad = bs.quad;
  L.n_first = bs.n_first;
  L.n_second = bs.n_second;
  L.geometric = true;
  const double h = L.length / n_x, x1 = L.x0 + L.length;
  std::vector<int> nodes;
  if (side == BcSide::first) {
    nodes = pair.c_indices();
  } else {
    for (int i = 0; i <= n_x; ++i) nodes.push_back(i);
  }
  for (int i : nodes) {
    double x = L.x0 + i * h;
    L.volume.emplace_back(std::max(L.x0, x - 0.5 * h), std::min(x1, x + 0.5 * h));
  }
  for (int i = 0; i < n_x; ++i) L.volume.emplace_back(L.x0 + i * h, L.x0 + (i + 1) * h);
  return L;
}

double overlap(double a, double b, double lo, double hi) { return std::max(0.0, std::min(b, hi) - std::max(a, lo)); }

double field_at(const json& f, const Layout& L, int k, const std::string& path) {
  if (f.is_number()) return f.get<double>();
  if (!L.geometric) bad(path, "indicator fields need the grad_1d spatial builder");
  auto [name, args] = split_spec(f.get<std::string>(), path);
  auto [a, b] = L.volume[k];
  double frac = overlap(a, b, args[0], args[1]) / (b - a);
  return name == "indicator" ? frac : 1.0 - frac;
}

Eigen::VectorXd field_vector(const json& law, const std::string& key, const Layout& L, double def) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(L.dim(), def);
  if (!law.contains(key)) return v;
  const json& f = law[key];
  const std::string path = "law." + key;
  if (!f.is_array()) {
    for (int k = 0; k < L.dim(); ++k) v[k] = field_at(f, L, k, path);
    return v;
  }
  if (f.size() == 1) {
    for (int k = 0; k < L.dim(); ++k) v[k] = field_at(f[0], L, k, path);
    return v;
  }
  if (L.n_second == 0) bad(path, "two block fields given but the spatial operator has one block");
  for (int k = 0; k < L.dim(); ++k) v[k] = field_at(f[k < L.n_first ? 0 : 1], L, k, path);
  return v;
}

SpMat diag_real(const Eigen::VectorXd& d) {
  SpMat m(d.size(), d.size());
  std::vector<Eigen::Triplet<double>> t;
  for (int i = 0; i < d.size(); ++i)
    if (d[i] != 0.0) t.emplace_back(i, i, d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

std::function<double(double)> schedule(const std::string& s, bool* lipschitz_one) {
  auto [name, args] = split_spec(s, "schedule");
  if (lipschitz_one) *lipschitz_one = name == "ramp";
  if (name == "ramp") return ramp;
  if (name == "indicator") {
    double a = args[0], b = args[1];
    return [a, b](double t) { return indicator(t, a, b); };
  }
  return [](double) { return 1.0; };
}

MaterialLaw build_law(const ProblemConfig& cfg, const Layout& L, double dt) {
  const json& j = cfg.law;
  const std::string p = "law";
  const double r = 1.0 / cfg.nu;
  const int d = L.dim();
  std::string b = j["builder"].get<std::string>();
  if (b == "heat") {
    if (L.n_second == 0) bad(p, "heat needs a two-block spatial operator");
    return build_heat(num(j, "kappa", p, 1.0), L.n_first, L.n_second, r);
  }
  if (b == "affine") {
    Eigen::VectorXd m0 = field_vector(j, "m0", L, 1.0), m1 = field_vector(j, "m1", L, 0.0);
    return build_affine(diag_sparse(m0.cast<cplx>()), diag_sparse(m1.cast<cplx>()), r);
  }
  if (b == "maxwell") {
    if (L.n_second == 0) bad(p, "maxwell needs a two-block spatial operator");
    const int ne = L.n_first, nf = L.n_second;
    SpMatC eps = SpMatC(sparse_identity(ne) * cplx(num(j, "eps", p, 0.0)));
    eps.prune(cplx(0.0));
    return build_maxwell(eps, SpMatC(sparse_identity(nf) * cplx(num(j, "mu", p, 1.0))),
                         SpMatC(sparse_identity(ne) * cplx(num(j, "sigma", p, 1.0))), r);
  }
  if (b == "fractional") {
    if (L.n_second == 0) bad(p, "fractional needs a two-block spatial operator");
    Eigen::VectorXcd stress = Eigen::VectorXcd::Zero(d);
    stress.tail(L.n_second).setOnes();
    return build_fractional(sparse_identity(d), {{num(j, "alpha", p, 0.5), diag_sparse(stress)}}, SpMatC(d, d), r);
  }
  if (b == "integro") {
    if (L.n_second == 0) bad(p, "integro needs a two-block spatial operator");
    const double amp = num(j, "amplitude", p, 0.5), decay = num(j, "decay", p, 1.0);
    const double horizon = num(j, "horizon", p, 40.0);
    const int m = static_cast<int>(std::ceil(horizon / dt));
    Kernel k = Kernel::scalar(dt, m, [=](double t) { return amp * std::exp(-decay * t); });
    return build_integro(k, num(j, "c_mod", p, 1.0), r, L.n_first, L.n_second);
  }
  MaterialLaw law;
  if (b == "file") {
    std::filesystem::path fp(j["path"].get<std::string>());
    if (fp.is_relative()) fp = std::filesystem::path(cfg.base_dir) / fp;
    law = load_law_file(fp.string());
  } else {
    json doc = {{"dim", d}, {"radius", num(j, "radius", p, r)}, {"expr", j["expr"]}};
    law = law_from_json(doc);
  }
  if (law.dim != d) bad(p, "law dimension " + std::to_string(law.dim) + " does not match the state dimension " + std::to_string(d));
  return law;
}

Signal build_rhs(const json& j, const Layout& L, const TimeGrid& g) {
  const int d = L.dim();
  json t = j.contains("time") ? j["time"] : json::object();
  json s = j.contains("space") ? j["space"] : json::object();
  const std::string prof = str(t, "profile", "rhs.time", "bump");
  const double a = num(t, "a", "rhs.time", 0.0), b = num(t, "b", "rhs.time", 4.0);
  const double center = num(t, "center", "rhs.time", 1.0), width = num(t, "width", "rhs.time", 0.5);
  const double amp = num(t, "amplitude", "rhs.time", 1.0);
  if ((prof == "bump" || prof == "indicator") && !(b > a)) bad("rhs.time", "needs a < b");
  std::function<double(double)> tf;
  if (prof == "bump") tf = [=](double x) { return smooth_bump(x, a, b); };
  else if (prof == "heaviside") tf = heaviside;
  else if (prof == "indicator") tf = [=](double x) { return indicator(x, a, b); };
  else if (prof == "gaussian") tf = [=](double x) { return gaussian(x, center, width); };
  else tf = [](double) { return 0.0; };

  const std::string shape = str(s, "shape", "rhs.space", "ones");
  const std::string block = str(s, "block", "rhs.space", "all");
  const int mode = integer(s, "mode", "rhs.space", 1);
  const double sc = num(s, "center", "rhs.space", 0.5), sw = num(s, "width", "rhs.space", 0.1);
  int lo = 0, hi = d;
  if (block == "first") hi = L.n_first;
  if (block == "second") {
    if (L.n_second == 0) bad("rhs.space.block", "the spatial operator has no second block");
    lo = L.n_first;
  }
  if ((shape == "sine" || shape == "gaussian") && !L.geometric)
    bad("rhs.space.shape", "'" + shape + "' needs the grad_1d spatial builder");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  for (int k = lo; k < hi; ++k) {
    if (shape == "ones") {
      v[k] = 1.0;
    } else if (shape == "index_sine") {
      v[k] = std::sin(M_PI * (k - lo + 0.5) / (hi - lo));
    } else {
      double x = 0.5 * (L.volume[k].first + L.volume[k].second);
      v[k] = shape == "sine" ? std::sin(mode * M_PI * (x - L.x0) / L.length) : std::exp(-std::pow((x - sc) / sw, 2));
    }
  }
  return Signal::sample(g, d, [&](double x) {
    double f = amp == 1.0 ? tf(x) : amp * tf(x);
    return Eigen::VectorXcd((f * v).cast<cplx>());
  });
}

bool is_pow2(int n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

Mode mode_from_name(const std::string& s) {
  if (s == "spectral") return Mode::spectral;
  if (s == "step") return Mode::step;
  if (s == "inclusion") return Mode::inclusion;
  if (s == "homogenize") return Mode::homogenize;
  if (s == "stability") return Mode::stability;
  fail(ErrorCode::Validation, "config mode: unknown mode '" + s + "'");
}

std::string mode_name(Mode m) {
  switch (m) {
    case Mode::spectral: return "spectral";
    case Mode::step: return "step";
    case Mode::inclusion: return "inclusion";
    case Mode::homogenize: return "homogenize";
    case Mode::stability: return "stability";
  }
  return "?";
}

ProblemConfig parse_config(const json& j, const std::string& base_dir) {
  check_keys(j, "<root>", {"name", "mode", "grid", "law", "spatial", "rhs", "step", "example", "experiment"});
  ProblemConfig c;
  c.base_dir = base_dir;
  c.name = str(j, "name", "<root>", "problem");
  c.mode = mode_from_name(str(j, "mode", "<root>", "spectral"));
  const bool experiment = c.mode == Mode::homogenize || c.mode == Mode::stability;
  if (experiment) {
    for (const char* k : {"grid", "law", "spatial", "rhs", "step", "example"})
      if (j.contains(k)) bad(k, "not used by mode " + mode_name(c.mode));
    if (!j.contains("experiment")) bad("<root>", "mode " + mode_name(c.mode) + " needs an 'experiment' section");
    c.experiment = j["experiment"];
    validate_experiment_section(c.experiment, c.mode);
    return c;
  }
  if (j.contains("experiment")) bad("experiment", "only used by homogenize and stability modes");
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "grid", {"t0", "dt", "n", "nu", "t_end"});
    c.t0 = num(g, "t0", "grid", c.t0);
    c.n = integer(g, "n", "grid", c.n);
    c.nu = num(g, "nu", "grid", c.nu);
    if (g.contains("t_end") && g.contains("dt")) bad("grid", "give dt or t_end, not both");
    if (g.contains("t_end")) c.dt = (num(g, "t_end", "grid", 0.0) - c.t0) / c.n;
    else c.dt = num(g, "dt", "grid", c.dt);
  }
  if (!is_pow2(c.n)) bad("grid.n", "must be a power of two >= 2");
  if (!(c.dt > 0.0)) bad("grid.dt", "must be positive");
  if (!(c.nu > 0.0)) bad("grid.nu", "must be positive");

  if (j.contains("example")) {
    for (const char* k : {"law", "spatial", "rhs"})
      if (j.contains(k)) bad(k, "cannot be combined with 'example'");
    c.example = j["example"];
    validate_example_section(c.example);
    bool ramp_ex = c.example["name"] == "mixed_type_ramp";
    if (ramp_ex && c.mode != Mode::step) bad("example.name", "mixed_type_ramp runs in step mode");
    if (!ramp_ex && c.mode == Mode::inclusion) bad("example", "inclusion mode needs law/rhs sections");
  } else {
    for (const char* k : {"law", "rhs"})
      if (!j.contains(k)) bad("<root>", std::string("missing section '") + k + "'");
    c.law = j["law"];
    c.rhs = j["rhs"];
    c.spatial = j.contains("spatial") ? j["spatial"] : json{{"builder", "none"}, {"dim", 1}};
    validate_law_section(c.law);
    validate_spatial_section(c.spatial);
    validate_rhs_section(c.rhs);
    bool scheduled = c.law.contains("m0_schedule") || c.law.contains("m1_schedule");
    if (scheduled && c.mode == Mode::spectral) bad("law", "time schedules need step or inclusion mode");
  }
  if (j.contains("step")) {
    if (c.mode == Mode::spectral) bad("step", "not used by spectral mode");
    c.step = j["step"];
    validate_step_section(c.step);
  }
  if (c.mode == Mode::inclusion) {
    if (!c.step.contains("relation")) bad("step", "inclusion mode needs step.relation");
    if (c.spatial["builder"] != "none") bad("spatial", "inclusion mode has no linear spatial operator");
    if (c.step.contains("delays")) bad("step.delays", "not supported in inclusion mode");
  }
  return c;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Validation, "cannot open config '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Validation, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path().string());
}

MaterialLaw law_from_json(const json& j) {
  check_keys(j, "law-file", {"dim", "radius", "expr"});
  int dim = integer(j, "dim", "law-file", 1);
  double r = num(j, "radius", "law-file", 1.0);
  if (dim < 1) bad("law-file.dim", "must be >= 1");
  if (!(r > 0.0)) bad("law-file.radius", "must be positive");
  if (!j.contains("expr")) bad("law-file", "missing key 'expr'");
  validate_law_node(j["expr"], "law-file.expr");
  return MaterialLaw(node_from_json(j["expr"], "law-file.expr", dim, r), r, dim);
}

MaterialLaw load_law_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Validation, "cannot open law file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Validation, "law file '" + path + "' is not valid JSON: " + e.what());
  }
  return law_from_json(j);
}

ProblemConfig with_nu(ProblemConfig cfg, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) fail(ErrorCode::Validation, "--nu must be positive");
  cfg.nu = nu;
  return cfg;
}

ProblemConfig with_dt(ProblemConfig cfg, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) fail(ErrorCode::Validation, "--dt must be positive");
  const double T = cfg.n * cfg.dt;
  const long n = std::lround(T / dt);
  if (n > (1L << 24) || std::abs(n * dt - T) > 1e-9 * T || !is_pow2(static_cast<int>(n)))
    fail(ErrorCode::Validation, "--dt must divide the window into a power-of-two number of steps");
  cfg.n = static_cast<int>(n);
  cfg.dt = dt;
  return cfg;
}

AssembledProblem assemble(const ProblemConfig& cfg) {
  if (cfg.mode == Mode::homogenize || cfg.mode == Mode::stability)
    fail(ErrorCode::Validation, "experiment configs are run, not assembled");
  AssembledProblem out;
  out.mode = cfg.mode;
  out.grid = TimeGrid::make(cfg.t0, cfg.dt, cfg.n, cfg.nu);
  if (cfg.step.contains("relation")) out.relation = relation_from_name(cfg.step["relation"].get<std::string>());
  if (cfg.step.contains("check_posdef")) out.step.check_posdef = cfg.step["check_posdef"].get<bool>();

  if (!cfg.example.is_null()) {
    const std::string name = cfg.example["name"].get<std::string>();
    const int n_x = integer(cfg.example, "n_x", "example", -1);
    if (name == "mixed_type_ramp") {
      MixedTypeSetup m = mixed_type_ramp(n_x > 0 ? n_x : 64, num(cfg.example, "L", "example", 2.0),
                                         num(cfg.example, "eps", "example", 0.5), cfg.dt, cfg.t0,
                                         cfg.t0 + cfg.n * cfg.dt, cfg.nu);
      out.tv_law = m.law;
      out.A = m.A;
      out.rhs = m.rhs;
      out.quad = m.quad;
    } else {
      if (cfg.example.contains("L") || cfg.example.contains("eps"))
        bad("example", "L and eps apply to mixed_type_ramp only");
      EvoProblem p = make_example(name, out.grid, n_x);
      p.name = cfg.name;
      if (cfg.mode == Mode::spectral) {
        out.problem = std::move(p);
      } else {
        auto [m0, m1] = affine_parts(p.law);
        out.tv_law = TimeVaryingLaw::constant(SpMat(m0.real()), SpMat(m1.real()));
        out.A = SpMat(p.A.real());
        out.rhs = p.rhs;
        out.quad = p.quad;
      }
    }
    return out;
  }

  Layout L = build_layout(cfg.spatial);
  Signal rhs = build_rhs(cfg.rhs, L, out.grid);
  const json& lj = cfg.law;
  const bool scheduled = lj.contains("m0_schedule") || lj.contains("m1_schedule");
  if (cfg.mode == Mode::spectral) {
    out.problem = EvoProblem::make(out.grid, build_law(cfg, L, cfg.dt), to_complex(L.A), rhs, L.quad, cfg.name);
    return out;
  }
  if (scheduled) {
    SpMat m0 = diag_real(field_vector(lj, "m0", L, 1.0)), m1 = diag_real(field_vector(lj, "m1", L, 0.0));
    bool lip = false;
    auto s0 = schedule(str(lj, "m0_schedule", "law", "one"), &lip);
    auto s1 = schedule(str(lj, "m1_schedule", "law", "one"), nullptr);
    out.tv_law.M0 = [m0, s0](double t) { return SpMat(s0(t) * m0); };
    out.tv_law.M1 = [m1, s1](double t) { return SpMat(s1(t) * m1); };
    double m0_max = m0.nonZeros() ? m0.coeffs().cwiseAbs().maxCoeff() : 0.0;
    out.tv_law.lip_M0 = lip ? m0_max : 0.0;
    out.tv_law.dim = L.dim();
  } else {
    auto [m0, m1] = affine_parts(build_law(cfg, L, cfg.dt));
    if (!sparse_is_real(m0) || !sparse_is_real(m1)) bad("law", "step mode needs real coefficients");
    out.tv_law = TimeVaryingLaw::constant(SpMat(m0.real()), SpMat(m1.real()));
  }
  out.A = L.A;
  out.rhs = rhs;
  out.quad = L.quad;
  if (cfg.step.contains("delays"))
    for (const auto& dj : cfg.step["delays"]) {
      SpMat B = SpMat(sparse_identity(L.dim()).real()) * dj["b"].get<double>();
      out.step.delays.push_back({dj["h"].get<double>(), B});
    }
  return out;
}

}  // namespace evokit
