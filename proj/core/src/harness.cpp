#include "equiflow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "equiflow/dirac_models.hpp"
#include "equiflow/eta_zeta.hpp"
#include "equiflow/generators.hpp"
#include "equiflow/maslov.hpp"
#include "equiflow/specflow.hpp"
#include "equiflow/symplectic.hpp"
#include "equiflow/winding.hpp"
#include "report.hpp"

namespace equiflow::harness {

using detail::json;

// ---- threads -----------------------------------------------------------------------------

int thread_count() {
  if (const char* env = std::getenv("EQUIFLOW_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, 256));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// ---- reports -----------------------------------------------------------------------------

bool RunReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::string RunReport::to_json(bool include_time, int indent) const {
  json doc = json::parse(body);
  if (include_time) doc["wall_seconds"] = wall_seconds;
  return doc.dump(indent);
}

namespace detail {

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json check_json(const CheckResult& c) {
  json j = {{"name", c.name},         {"passed", c.passed}, {"measured", c.measured},
            {"tolerance", c.tolerance}, {"count", c.count},   {"failures", c.failures}};
  if (!c.detail.empty()) j["detail"] = c.detail;
  return j;
}

RunReport finish_report(const std::string& kind, const json& config, const std::vector<ElementValue>& results,
                        const std::vector<CheckResult>& checks, const json& diagnostics) {
  RunReport r;
  r.kind = kind;
  r.results = results;
  r.checks = checks;
  json doc;
  doc["config"] = config;
  json res = json::array();
  for (const auto& e : results) res.push_back({{"element", e.label}, {"value", complex_json(e.value)}});
  doc["results"] = res;
  json chk = json::array();
  for (const auto& c : checks) chk.push_back(check_json(c));
  doc["checks"] = chk;
  doc["passed"] = r.passed();
  doc["diagnostics"] = diagnostics;
  // Non-finite numbers are not representable in JSON; nlohmann writes them as null.
  r.body = doc.dump(2);
  return r;
}

}  // namespace detail

// ---- config parsing ----------------------------------------------------------------------

namespace {

[[noreturn]] void config_error(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigInvalid, (where.empty() ? std::string() : where + ": ") + what);
}

// A JSON object whose keys must all be consumed; leftover keys are rejected.
class Fields {
 public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) config_error(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at_path(const std::string& key) const { return path_ + "/" + key; }

  const json& get(const std::string& key) {
    if (!j_.contains(key)) config_error(at_path(key), "missing required field");
    used_.insert(key);
    return j_.at(key);
  }
  const json* find(const std::string& key) {
    if (!j_.contains(key)) return nullptr;
    used_.insert(key);
    return &j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number()) config_error(at_path(key), "expected a number");
    return v.get<double>();
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  int integer(const std::string& key) {
    const json& v = get(key);
    if (!v.is_number_integer()) config_error(at_path(key), "expected an integer");
    return v.get<int>();
  }
  int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = get(key);
    if (!v.is_boolean()) config_error(at_path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = get(key);
    if (!v.is_string()) config_error(at_path(key), "expected a string");
    return v.get<std::string>();
  }
  std::string string(const std::string& key, const std::string& fallback) {
    return has(key) ? string(key) : fallback;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) config_error(at_path(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

Complex parse_complex(const json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  config_error(where, "expected a number or a [re, im] pair");
}

// Matrices are row-major arrays of rows; entries are numbers or [re, im] pairs.
CMatrix parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) config_error(where, "expected a non-empty array of rows");
  const int rows = static_cast<int>(v.size());
  if (!v[0].is_array()) config_error(where + "/0", "expected a row array");
  const int cols = static_cast<int>(v[0].size());
  CMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const std::string rw = where + "/" + std::to_string(r);
    if (!v[r].is_array() || static_cast<int>(v[r].size()) != cols) config_error(rw, "rows must have equal length");
    for (int c = 0; c < cols; ++c) m(r, c) = parse_complex(v[r][c], rw + "/" + std::to_string(c));
  }
  return m;
}

CMatrix matrix_field(Fields& f, const std::string& key) { return parse_matrix(f.get(key), f.at_path(key)); }

std::vector<int> int_list(const json& v, const std::string& where) {
  if (!v.is_array()) config_error(where, "expected an array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_integer()) config_error(where + "/" + std::to_string(i), "expected an integer");
    out.push_back(v[i].get<int>());
  }
  return out;
}

TolerancePolicy parse_tolerances(const json* v) {
  TolerancePolicy tol;
  if (!v) return tol;
  Fields f(*v, "/tolerances");
  tol.eig_tol = f.number("eig_tol", tol.eig_tol);
  tol.cluster_tol = f.number("cluster_tol", tol.cluster_tol);
  tol.zero_tol = f.number("zero_tol", tol.zero_tol);
  tol.quad_rel_tol = f.number("quad_rel_tol", tol.quad_rel_tol);
  tol.commute_tol = f.number("commute_tol", tol.commute_tol);
  tol.max_quad_depth = f.integer("max_quad_depth", tol.max_quad_depth);
  tol.max_track_depth = f.integer("max_track_depth", tol.max_track_depth);
  tol.max_partition_depth = f.integer("max_partition_depth", tol.max_partition_depth);
  f.finish();
  try {
    tol.validate();
  } catch (const Error& e) {
    config_error("/tolerances", e.what());
  }
  return tol;
}

Complex root_of_unity(int order, int power) {
  if (order < 1) config_error("", "group order must be positive");
  return std::polar(1.0, kTwoPi * double(((power % order) + order) % order) / order);
}

// Group elements: powers of one generator matrix.
struct Group {
  CMatrix generator;  // empty: supplied by the scenario generator
  std::vector<int> powers{1};
  std::vector<int> rotation_powers;  // circle models only

  std::string label(std::size_t i) const {
    std::string s = "g^" + std::to_string(powers[i]);
    if (!rotation_powers.empty()) s += "*r^" + std::to_string(rotation_powers[i]);
    return s;
  }
  CMatrix element(const CMatrix& g, std::size_t i) const { return dirac::matrix_power(g, powers[i]); }
};

Group parse_group(const json* v, bool allow_rotation) {
  Group g;
  if (!v) return g;
  Fields f(*v, "/group");
  if (f.has("generator")) g.generator = matrix_field(f, "generator");
  if (f.has("powers")) g.powers = int_list(f.get("powers"), "/group/powers");
  if (g.powers.empty()) config_error("/group/powers", "at least one power is required");
  if (allow_rotation && f.has("rotation_powers")) {
    g.rotation_powers = int_list(f.get("rotation_powers"), "/group/rotation_powers");
    if (g.rotation_powers.size() != g.powers.size()) {
      config_error("/group/rotation_powers", "must have the same length as powers");
    }
  }
  f.finish();
  return g;
}

// Per-scenario context shared by all kinds.
struct Context {
  json config;
  std::optional<std::uint64_t> seed;
  TolerancePolicy tol;
  Group group;
  bool want_csv = false;
  std::vector<ElementValue> results;
  std::vector<CheckResult> checks;
  json diagnostics = json::object();
  std::string csv;

  std::uint64_t require_seed(const std::string& generator) const {
    if (!seed) config_error("/seed", "generator '" + generator + "' is randomized and needs an explicit seed");
    return *seed;
  }
  CMatrix generator_or(const CMatrix& fallback) const { return group.generator.size() ? group.generator : fallback; }
  void add(const std::string& label, Complex v) { results.push_back({label, v}); }
};

struct GeneratorSpec {
  std::string name;
  json params = json::object();
};

GeneratorSpec parse_generator(Fields& top) {
  GeneratorSpec g;
  const json& v = top.get("generator");
  Fields f(v, "/generator");
  g.name = f.string("name");
  if (const json* p = f.find("params")) {
    if (!p->is_object()) config_error("/generator/params", "expected an object");
    g.params = *p;
  }
  f.finish();
  return g;
}

[[noreturn]] void unknown_generator(const std::string& kind, const std::string& name) {
  config_error("/generator/name", "unknown generator '" + name + "' for kind '" + kind + "'");
}

void check_square(const CMatrix& m, const std::string& where) {
  if (m.rows() != m.cols()) config_error(where, "expected a square matrix");
}

void check_same(const CMatrix& g, int n, const std::string& where) {
  if (g.rows() != n || g.cols() != n) config_error(where, "dimension does not match the scenario");
}

// ---- path scenarios ----------------------------------------------------------------------

struct HermitianScenario {
  MatrixPath sampler;
  int dim = 0;
  CMatrix h;  // group generator
};

HermitianScenario hermitian_generator(Context& ctx, const GeneratorSpec& g, const std::string& kind) {
  Fields p(g.params, "/generator/params");
  HermitianScenario s;
  if (g.name == "diag_crossing") {
    const int order = p.integer("order", 3);
    p.finish();
    if (order < 1) config_error("/generator/params/order", "must be positive");
    s.dim = 2;
    s.sampler = [](double t) {
      CMatrix m = CMatrix::Zero(2, 2);
      m(0, 0) = 2.0 * t - 1.0;
      m(1, 1) = 1.0;
      return m;
    };
    s.h = CMatrix::Identity(2, 2);
    s.h(0, 0) = root_of_unity(order, 1);
  } else if (g.name == "linear") {
    const CMatrix a = matrix_field(p, "a");
    const CMatrix b = matrix_field(p, "b");
    p.finish();
    check_square(a, "/generator/params/a");
    if (a.rows() != b.rows() || a.cols() != b.cols()) config_error("/generator/params/b", "must match a");
    s.dim = static_cast<int>(a.rows());
    s.sampler = [a, b](double t) { return CMatrix((1.0 - t) * a + t * b); };
    s.h = CMatrix::Identity(s.dim, s.dim);
  } else if (g.name == "random_path") {
    const int dim = p.integer("dim", 4);
    const int order = p.integer("order", 3);
    const double scale = p.number("scale", 1.0);
    p.finish();
    if (dim < 1 || order < 1) config_error("/generator/params", "dim and order must be positive");
    gen::Stream rng(ctx.require_seed(g.name), 0);
    const auto action = gen::random_cyclic_action(dim, order, rng);
    s.dim = dim;
    s.sampler = gen::random_hermitian_path(action, rng, scale);
    s.h = action.generator();
  } else if (g.name == "bott_loop") {
    const int order = p.integer("order", 3);
    const auto plus = int_list(p.get("plus"), "/generator/params/plus");
    const auto minus = int_list(p.get("minus"), "/generator/params/minus");
    const int k = p.integer("k", 1);
    p.finish();
    std::vector<Complex> pc, mc;
    for (int c : plus) pc.push_back(root_of_unity(order, c));
    for (int c : minus) mc.push_back(root_of_unity(order, c));
    const auto loop = specflow::bott_loop(pc, mc, k);
    s.dim = loop.hermitian.dim;
    s.sampler = loop.hermitian.sampler;
    s.h = loop.h;
  } else {
    unknown_generator(kind, g.name);
  }
  s.h = ctx.generator_or(s.h);
  check_same(s.h, s.dim, "/group/generator");
  return s;
}

json crossings_json(const std::vector<specflow::Crossing>& cs) {
  json out = json::array();
  for (const auto& c : cs) out.push_back({{"t", c.time}, {"direction", c.direction}, {"dim", c.cluster_dim}});
  return out;
}

void run_sf(Context& ctx, const GeneratorSpec& g, Fields& opts) {
  const bool oracle = opts.boolean("oracle", true);
  const int samples = opts.integer("oracle_samples", 65);
  opts.finish();
  const auto s = hermitian_generator(ctx, g, "sf");
  detail::Check agree("grid sf = crossing oracle", 1e-8);
  json per = json::array();
  for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
    const auto path = specflow::make_path(s.sampler, s.dim, ctx.group.element(s.h, i));
    const auto flow = specflow::spectral_flow(path, std::nullopt, ctx.tol);
    ctx.add(ctx.group.label(i), flow.value);
    json d = {{"element", ctx.group.label(i)}, {"partition_size", flow.partition.size()},
              {"nodes", flow.partition.nodes}};
    if (oracle) {
      const auto o = specflow::crossing_oracle(path, samples, ctx.tol);
      agree.add(std::abs(o.value - flow.value));
      d["oracle"] = detail::complex_json(o.value);
      d["crossings"] = crossings_json(o.crossings);
    }
    per.push_back(d);
  }
  if (oracle) ctx.checks.push_back(agree.result());
  ctx.diagnostics["elements"] = per;
}

void run_getzler(Context& ctx, const GeneratorSpec& g, Fields& opts) {
  const double eps = opts.number("epsilon", 1.0);
  opts.finish();
  if (!(eps > 0.0)) config_error("/options/epsilon", "must be positive");
  const auto s = hermitian_generator(ctx, g, "getzler");
  detail::Check agree("Getzler formula = spectral flow", 1e-6);
  json per = json::array();
  for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
    const auto path = specflow::make_path(s.sampler, s.dim, ctx.group.element(s.h, i));
    const auto r = eta_zeta::getzler_spectral_flow(path, eps, ctx.tol);
    const Complex sf = specflow::spectral_flow(path, std::nullopt, ctx.tol).value;
    agree.add(std::abs(r.value - sf));
    ctx.add(ctx.group.label(i), r.value);
    per.push_back({{"element", ctx.group.label(i)},
                   {"endpoint_difference", detail::complex_json(r.endpoint_difference)},
                   {"integral", detail::complex_json(r.integral)},
                   {"quadrature_error", r.quadrature.error_estimate},
                   {"spectral_flow", detail::complex_json(sf)}});
  }
  ctx.checks.push_back(agree.result());
  ctx.diagnostics["elements"] = per;
}

struct UnitaryScenario {
  MatrixPath sampler;
  int dim = 0;
  CMatrix actor;
};

UnitaryScenario unitary_generator(Context& ctx, const GeneratorSpec& g, const std::string& kind) {
  Fields p(g.params, "/generator/params");
  UnitaryScenario s;
  if (g.name == "scalar_loop") {
    const int turns = p.integer("turns", 1);
    p.finish();
    s.dim = 1;
    s.sampler = [turns](double t) {
      CMatrix m(1, 1);
      m(0, 0) = std::polar(1.0, kTwoPi * turns * t);
      return m;
    };
    s.actor = CMatrix::Identity(1, 1);
  } else if (g.name == "random") {
    const int dim = p.integer("dim", 4);
    const int order = p.integer("order", 3);
    const double sweep = p.number("sweep", 3.0);
    p.finish();
    if (dim < 1 || order < 1) config_error("/generator/params", "dim and order must be positive");
    gen::Stream rng(ctx.require_seed(g.name), 0);
    const auto action = gen::random_cyclic_action(dim, order, rng);
    s.dim = dim;
    s.sampler = gen::random_unitary_path(action, rng, sweep);
    s.actor = action.generator();
  } else {
    unknown_generator(kind, g.name);
  }
  s.actor = ctx.generator_or(s.actor);
  check_same(s.actor, s.dim, "/group/generator");
  return s;
}

winding::WindingOptions winding_options(Fields& opts) {
  winding::WindingOptions w;
  w.epsilon = opts.number("offset_epsilon", w.epsilon);
  w.initial_samples = opts.integer("samples", w.initial_samples);
  if (!(w.epsilon > 0.0) || w.initial_samples < 2) config_error("/options", "invalid winding options");
  return w;
}

void run_winding(Context& ctx, const GeneratorSpec& g, Fields& opts) {
  const auto wopts = winding_options(opts);
  opts.finish();
  const auto s = unitary_generator(ctx, g, "winding");
  json per = json::array();
  for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
    const auto f = winding::make_unitary_path(s.sampler, s.dim, ctx.group.element(s.actor, i));
    const auto w = winding::winding_number(f, wopts, ctx.tol);
    ctx.add(ctx.group.label(i), w.value);
    json cs = json::array();
    for (const auto& c : w.crossings) cs.push_back({{"t", c.time}, {"direction", c.direction}, {"dim", c.cluster_dim}});
    per.push_back({{"element", ctx.group.label(i)}, {"offset", w.offset}, {"crossings", cs},
                   {"fredholm_det", detail::complex_json(winding::fredholm_det_path(f, ctx.tol))}});
  }
  ctx.diagnostics["elements"] = per;
}

void run_maslov(Context& ctx, const GeneratorSpec& g, Fields& opts) {
  const auto wopts = winding_options(opts);
  const std::string mode = opts.string("mode", "both");
  opts.finish();
  if (mode != "both" && mode != "winding" && mode != "grid") config_error("/options/mode", "expected winding, grid or both");
  Fields p(g.params, "/generator/params");
  MatrixPath tp, sp;
  int n = 0;
  CMatrix actor;
  if (g.name == "scalar_example") {
    const int order = p.integer("order", 5);
    p.finish();
    n = 1;
    tp = [](double t) {
      CMatrix m(1, 1);
      m(0, 0) = std::polar(1.0, kTwoPi * t);
      return m;
    };
    sp = [](double) {
      CMatrix m(1, 1);
      m(0, 0) = kI;
      return m;
    };
    actor = CMatrix::Identity(1, 1) * root_of_unity(order, 1);
  } else if (g.name == "random_pair") {
    n = p.integer("dim", 3);
    const int order = p.integer("order", 3);
    p.finish();
    if (n < 1 || order < 1) config_error("/generator/params", "dim and order must be positive");
    gen::Stream rng(ctx.require_seed(g.name), 0);
    const auto action = gen::random_cyclic_action(n, order, rng);
    tp = gen::random_unitary_path(action, rng);
    sp = gen::random_unitary_path(action, rng);
    actor = action.generator();
  } else {
    unknown_generator("maslov", g.name);
  }
  actor = ctx.generator_or(actor);
  check_same(actor, n, "/group/generator");
  detail::Check agree("Maslov grid mode = winding mode", 1e-8);
  json per = json::array();
  for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
    const CMatrix a = ctx.group.element(actor, i);
    const auto l1 = maslov::make_lagrangian_path(tp, n, a);
    const auto l2 = maslov::make_lagrangian_path(sp, n, a);
    json d = {{"element", ctx.group.label(i)}};
    Complex value;
    if (mode != "grid") {
      value = maslov::maslov_index(l1, l2, maslov::Mode::Winding, wopts, ctx.tol);
      d["winding"] = detail::complex_json(value);
    }
    if (mode != "winding") {
      const auto grid = maslov::unitary_grid_flow(maslov::relative_unitary(l1, l2), ctx.tol);
      d["grid"] = detail::complex_json(grid.value);
      d["grid_nodes"] = grid.nodes;
      if (mode == "grid") value = grid.value;
      else agree.add(std::abs(grid.value - value));
    }
    ctx.add(ctx.group.label(i), value);
    per.push_back(d);
  }
  if (mode == "both") ctx.checks.push_back(agree.result());
  ctx.diagnostics["elements"] = per;
}

void run_double_index(Context& ctx, const GeneratorSpec& g, Fields& opts) {
  const auto wopts = winding_options(opts);
  opts.finish();
  if (g.name != "explicit") unknown_generator("double_index", g.name);
  Fields p(g.params, "/generator/params");
  const CMatrix u = matrix_field(p, "u");
  const CMatrix v = matrix_field(p, "v");
  p.finish();
  check_square(u, "/generator/params/u");
  check_same(v, static_cast<int>(u.rows()), "/generator/params/v");
  const CMatrix actor = ctx.generator_or(CMatrix::Identity(u.rows(), u.rows()));
  check_same(actor, static_cast<int>(u.rows()), "/group/generator");
  for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
    ctx.add(ctx.group.label(i), winding::double_index(u, v, ctx.group.element(actor, i), wopts, ctx.tol));
  }
}

void run_triple_index(Context& ctx, const GeneratorSpec& g, Fields& opts) {
  const auto wopts = winding_options(opts);
  opts.finish();
  Fields p(g.params, "/generator/params");
  if (g.name == "explicit") {
    const CMatrix t = matrix_field(p, "t");
    const CMatrix s = matrix_field(p, "s");
    const CMatrix r = matrix_field(p, "r");
    p.finish();
    check_square(t, "/generator/params/t");
    const int n = static_cast<int>(t.rows());
    check_same(s, n, "/generator/params/s");
    check_same(r, n, "/generator/params/r");
    const CMatrix actor = ctx.generator_or(CMatrix::Identity(n, n));
    check_same(actor, n, "/group/generator");
    const auto pp = symplectic::make_projection_from_unitary(t, ctx.tol);
    const auto qq = symplectic::make_projection_from_unitary(s, ctx.tol);
    const auto nn = symplectic::make_projection_from_unitary(r, ctx.tol);
    for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
      const auto h = symplectic::diagonal_isometry(ctx.group.element(actor, i), ctx.tol);
      ctx.add(ctx.group.label(i), maslov::triple_index_static(pp, qq, nn, h, wopts, ctx.tol));
    }
  } else if (g.name == "random") {
    const int n = p.integer("dim", 3);
    const int order = p.integer("order", 3);
    p.finish();
    if (n < 1 || order < 1) config_error("/generator/params", "dim and order must be positive");
    gen::Stream rng(ctx.require_seed(g.name), 0);
    const auto action = gen::random_cyclic_action(n, order, rng);
    const MatrixPath tp = gen::random_unitary_path(action, rng);
    const MatrixPath sp = gen::random_unitary_path(action, rng);
    const MatrixPath rp = gen::random_unitary_path(action, rng);
    const CMatrix actor = ctx.generator_or(action.generator());
    check_same(actor, n, "/group/generator");
    detail::Check agree("triple index = Maslov combination", 1e-8);
    for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
      const CMatrix a = ctx.group.element(actor, i);
      const auto T = maslov::make_lagrangian_path(tp, n, a);
      const auto S = maslov::make_lagrangian_path(sp, n, a);
      const auto R = maslov::make_lagrangian_path(rp, n, a);
      const Complex v = maslov::triple_index_path(T, S, R, wopts, ctx.tol);
      const Complex m = maslov::maslov_index(T, S, maslov::Mode::Grid, wopts, ctx.tol) +
                        maslov::maslov_index(S, R, maslov::Mode::Grid, wopts, ctx.tol) -
                        maslov::maslov_index(T, R, maslov::Mode::Grid, wopts, ctx.tol);
      agree.add(std::abs(v - m));
      ctx.add(ctx.group.label(i), v);
    }
    ctx.checks.push_back(agree.result());
  } else {
    unknown_generator("triple_index", g.name);
  }
}

// ---- finite-dimensional eta / zeta -------------------------------------------------------

struct StaticOperator {
  CMatrix d;
  CMatrix h;
};

StaticOperator operator_generator(Context& ctx, const GeneratorSpec& g, const std::string& kind) {
  Fields p(g.params, "/generator/params");
  StaticOperator s;
  if (g.name == "explicit") {
    s.d = matrix_field(p, "d");
    p.finish();
    check_square(s.d, "/generator/params/d");
    s.h = CMatrix::Identity(s.d.rows(), s.d.rows());
  } else if (g.name == "random") {
    const int dim = p.integer("dim", 4);
    const int order = p.integer("order", 3);
    p.finish();
    if (dim < 1 || order < 1) config_error("/generator/params", "dim and order must be positive");
    gen::Stream rng(ctx.require_seed(g.name), 0);
    const auto action = gen::random_cyclic_action(dim, order, rng);
    s.d = gen::random_equivariant_hermitian(action, rng, 3.0);
    s.h = action.generator();
  } else {
    unknown_generator(kind, g.name);
  }
  s.h = ctx.generator_or(s.h);
  check_same(s.h, static_cast<int>(s.d.rows()), "/group/generator");
  return s;
}

void run_eta(Context& ctx, const GeneratorSpec& g, Fields& opts) {
  const json* sj = opts.find("s");
  const Complex s = sj ? parse_complex(*sj, "/options/s") : Complex(0.0, 0.0);
  const bool has_eps = opts.has("epsilon");
  const double eps = opts.number("epsilon", 1.0);
  opts.finish();
  if (has_eps && !(eps > 0.0)) config_error("/options/epsilon", "must be positive");
  const auto op_spec = operator_generator(ctx, g, "eta");
  json per = json::array();
  for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
    const auto op = eta_zeta::make_operator(op_spec.d, ctx.group.element(op_spec.h, i), ctx.tol);
    const Complex v = eta_zeta::eta(op, s, ctx.tol);
    ctx.add(ctx.group.label(i), v);
    json d = {{"element", ctx.group.label(i)},
              {"kernel_trace", detail::complex_json(op.kernel_trace(ctx.tol.zero_tol))}};
    if (s == Complex(0.0, 0.0)) d["reduced_eta"] = detail::complex_json(eta_zeta::reduced_eta(op, ctx.tol));
    if (has_eps) d["truncated_eta"] = detail::complex_json(eta_zeta::truncated_eta(op, eps, ctx.tol));
    per.push_back(d);
  }
  ctx.diagnostics["elements"] = per;
}

void run_zeta_det(Context& ctx, const GeneratorSpec& g, Fields& opts) {
  opts.finish();
  const auto op_spec = operator_generator(ctx, g, "zeta_det");
  detail::Check agree("formula route = eigenvalue-product route (relative)", 1e-10);
  json per = json::array();
  for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
    const auto op = eta_zeta::make_operator(op_spec.d, ctx.group.element(op_spec.h, i), ctx.tol);
    const Complex v = eta_zeta::zeta_determinant(op, ctx.tol);
    const Complex prod = eta_zeta::zeta_determinant_product(op, ctx.tol);
    agree.add(std::abs(v - prod) / std::abs(prod));
    ctx.add(ctx.group.label(i), v);
    per.push_back({{"element", ctx.group.label(i)}, {"product", detail::complex_json(prod)}});
  }
  ctx.checks.push_back(agree.result());
  ctx.diagnostics["elements"] = per;
}

// ---- Dirac models ------------------------------------------------------------------------

dirac::EtaOptions eta_options(Fields& opts) {
  dirac::EtaOptions e;
  e.cutoff = opts.number("cutoff", e.cutoff);
  const std::string mode = opts.string("regularization", "average");
  if (mode == "average") e.mode = dirac::Regularization::Average;
  else if (mode == "abel") e.mode = dirac::Regularization::Abel;
  else config_error("/options/regularization", "expected average or abel");
  e.allow_kernel = opts.boolean("allow_kernel", false);
  if (!(e.cutoff > 0.0)) config_error("/options/cutoff", "must be positive");
  return e;
}

std::vector<dirac::GroupElement> model_elements(const Context& ctx) {
  std::vector<dirac::GroupElement> out;
  for (std::size_t i = 0; i < ctx.group.powers.size(); ++i) {
    out.push_back({ctx.group.powers[i], ctx.group.rotation_powers.empty() ? 0 : ctx.group.rotation_powers[i]});
  }
  return out;
}

void add_eta_values(Context& ctx, const std::vector<dirac::EtaValue>& values) {
  json per = json::array();
  for (std::size_t i = 0; i < values.size(); ++i) {
    ctx.add(ctx.group.label(i), values[i].eta);
    per.push_back({{"element", ctx.group.label(i)},
                   {"reduced", detail::complex_json(values[i].reduced)},
                   {"kernel", detail::complex_json(values[i].kernel)},
                   {"error_estimate", values[i].error_estimate}});
  }
  ctx.diagnostics["elements"] = per;
}

std::string spectrum_csv(const std::vector<dirac::SpectralLine>& lines) {
  std::ostringstream out;
  dirac::write_spectrum_csv(out, lines);
  return out.str();
}

dirac::IntervalDiracModel parse_interval_model(Fields& top, const TolerancePolicy& tol, bool with_length = true) {
  Fields m(top.get("model"), "/model");
  const double length = with_length ? m.number("length", 1.0) : kPi;
  const CMatrix v = matrix_field(m, "v");
  const CMatrix u = m.has("u") ? matrix_field(m, "u") : CMatrix();
  m.finish();
  if (!(length > 0.0)) config_error("/model/length", "must be positive");
  check_square(v, "/model/v");
  if (u.size()) check_same(u, static_cast<int>(v.rows()), "/model/u");
  return dirac::make_interval_model(length, v, u, tol);
}

symplectic::LagrangianProjection parse_boundary(Fields& top, const std::string& key, int m, const TolerancePolicy& tol,
                                                const dirac::IntervalDiracModel* model = nullptr) {
  Fields b(top.get(key), "/" + key);
  std::optional<symplectic::LagrangianProjection> p;
  int given = 0;
  if (b.has("theta")) {
    ++given;
    if (m != 1) config_error("/" + key + "/theta", "the theta family needs a single channel");
    p = dirac::theta_projection(b.number("theta"));
  }
  if (b.has("t")) {
    ++given;
    const CMatrix t = matrix_field(b, "t");
    check_same(t, m, "/" + key + "/t");
    p = symplectic::make_projection_from_unitary(t, tol);
  }
  if (b.boolean("aps", false)) {
    ++given;
    p = dirac::interval_aps_projection(m, tol);
  }
  if (b.boolean("calderon", false)) {
    ++given;
    if (!model) config_error("/" + key + "/calderon", "not available here");
    p = dirac::interval_calderon(*model, tol).projection;
  }
  b.finish();
  if (given != 1) config_error("/" + key, "give exactly one of theta, t, aps, calderon");
  return *p;
}

void run_circle_eta(Context& ctx, Fields& top, Fields& opts) {
  const auto eo = eta_options(opts);
  opts.finish();
  Fields m(top.get("model"), "/model");
  const CMatrix v = matrix_field(m, "v");
  const CMatrix u = m.has("u") ? matrix_field(m, "u") : CMatrix();
  const int order = m.integer("rotation_order", 1);
  m.finish();
  check_square(v, "/model/v");
  const auto model = dirac::make_circle_model(v, u, order, ctx.tol);
  const auto elements = model_elements(ctx);
  add_eta_values(ctx, dirac::circle_eta(model, elements, eo, ctx.tol));
  if (ctx.want_csv) ctx.csv = spectrum_csv(dirac::circle_spectrum(model, elements, 20.0, ctx.tol));
}

void run_interval_eta(Context& ctx, Fields& top, Fields& opts) {
  const auto eo = eta_options(opts);
  opts.finish();
  const auto model = parse_interval_model(top, ctx.tol);
  const auto p = parse_boundary(top, "boundary", model.channels(), ctx.tol, &model);
  if (!ctx.group.rotation_powers.empty()) config_error("/group/rotation_powers", "interval models have no rotations");
  const auto ops = dirac::interval_weight_operators(model, model_elements(ctx));
  add_eta_values(ctx, dirac::interval_eta(model, p, ops, eo, ctx.tol));
  if (ctx.want_csv) {
    ctx.csv = spectrum_csv(dirac::interval_spectrum(model, p, ops, -20.0, 20.0, ctx.tol));
  }
}

void run_sw_check(Context& ctx, Fields& top, Fields& opts) {
  const auto eo = eta_options(opts);
  opts.finish();
  const auto model = parse_interval_model(top, ctx.tol);
  const auto p = parse_boundary(top, "boundary_p", model.channels(), ctx.tol, &model);
  const auto q = parse_boundary(top, "boundary_q", model.channels(), ctx.tol, &model);
  const auto r = dirac::sw_identity_check(model, p, q, eo, ctx.tol);
  ctx.add("lhs", r.lhs);
  ctx.add("rhs", r.rhs);
  ctx.add("equivariant_lhs", r.equivariant_lhs);
  ctx.add("equivariant_rhs", r.equivariant_rhs);
  detail::Check c1("exp(2 pi i (eta_P - eta_Q)) = det(T*S)", 1e-3);
  detail::Check c2("per isotypic component", 1e-3);
  c1.add(r.defect);
  c2.add(r.isotypic_defect);
  ctx.checks = {c1.result(), c2.result()};
  ctx.diagnostics["error_estimate"] = r.error_estimate;
}

void run_split(Context& ctx, Fields& top, Fields& opts) {
  const auto eo = eta_options(opts);
  opts.finish();
  const auto half = parse_interval_model(top, ctx.tol, false);
  dirac::SplitScenario sc;
  sc.v = half.v;
  sc.u = half.u;
  sc.p = parse_boundary(top, "boundary", half.channels(), ctx.tol, &half);
  const auto rep = dirac::splitting_experiment(sc, model_elements(ctx), eo, ctx.tol);
  detail::Check c("splitting residual", 5e-3);
  json per = json::array();
  for (std::size_t i = 0; i < rep.terms.size(); ++i) {
    const auto& t = rep.terms[i];
    ctx.add(ctx.group.label(i), t.residual);
    c.add(std::abs(t.residual));
    per.push_back({{"element", ctx.group.label(i)},
                   {"eta_circle", detail::complex_json(t.eta_circle)},
                   {"eta_plus", detail::complex_json(t.eta_plus)},
                   {"eta_minus", detail::complex_json(t.eta_minus)},
                   {"tau", detail::complex_json(t.tau)},
                   {"error_estimate", t.error_estimate}});
  }
  ctx.checks.push_back(c.result());
  ctx.diagnostics["elements"] = per;
}

std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

const std::vector<std::string>& kinds() {
  static const std::vector<std::string> k{"sf",         "winding",      "maslov", "double_index", "triple_index",
                                          "eta",        "zeta_det",     "getzler", "circle_eta",  "interval_eta",
                                          "sw_check",   "split",        "verify"};
  return k;
}

}  // namespace

std::vector<std::string> scenario_kinds() { return kinds(); }

const std::vector<SuiteInfo>& suites() { return detail::suite_infos(); }

RunReport verify(const std::string& suite, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  RunReport r = detail::run_suite(suite, seed);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

RunReport run_config_text(const std::string& text) {
  json config;
  try {
    config = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    std::string msg = e.what();
    // Strip the library prefix and keep the description.
    if (const auto pos = msg.find(": "); pos != std::string::npos) msg = msg.substr(pos + 2);
    throw Error(ErrorCode::ConfigInvalid,
                "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg);
  }
  const auto start = std::chrono::steady_clock::now();
  Fields top(config, "");
  const std::string kind = top.string("kind");
  if (std::find(kinds().begin(), kinds().end(), kind) == kinds().end()) {
    config_error("/kind", "unknown kind '" + kind + "'");
  }
  Context ctx;
  ctx.config = config;
  if (const json* s = top.find("seed")) {
    if (!s->is_number_unsigned()) config_error("/seed", "expected a non-negative integer");
    ctx.seed = s->get<std::uint64_t>();
  }
  ctx.tol = parse_tolerances(top.find("tolerances"));
  const bool models = kind == "circle_eta" || kind == "interval_eta" || kind == "sw_check" || kind == "split";
  if (kind != "verify") ctx.group = parse_group(top.find("group"), kind == "circle_eta");
  if (const json* o = top.find("output")) {
    Fields out(*o, "/output");
    ctx.want_csv = out.boolean("csv", false);
    out.finish();
  }
  const json empty = json::object();
  const json* oj = top.find("options");
  Fields opts(oj ? *oj : empty, "/options");

  RunReport report;
  try {
    if (kind == "verify") {
      const std::string suite = top.string("suite");
      opts.finish();
      top.finish();
      try {
        report = detail::run_suite(suite, ctx.seed.value_or(kDefaultSeed));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::UnknownSuite) config_error("/suite", e.what());
        throw;
      }
    } else {
      if (models) {
        if (kind == "circle_eta") run_circle_eta(ctx, top, opts);
        else if (kind == "interval_eta") run_interval_eta(ctx, top, opts);
        else if (kind == "sw_check") run_sw_check(ctx, top, opts);
        else run_split(ctx, top, opts);
      } else {
        const GeneratorSpec g = parse_generator(top);
        if (kind == "sf") run_sf(ctx, g, opts);
        else if (kind == "getzler") run_getzler(ctx, g, opts);
        else if (kind == "winding") run_winding(ctx, g, opts);
        else if (kind == "maslov") run_maslov(ctx, g, opts);
        else if (kind == "double_index") run_double_index(ctx, g, opts);
        else if (kind == "triple_index") run_triple_index(ctx, g, opts);
        else if (kind == "eta") run_eta(ctx, g, opts);
        else run_zeta_det(ctx, g, opts);
      }
      top.finish();
      report = detail::finish_report(kind, ctx.config, ctx.results, ctx.checks, ctx.diagnostics);
      report.csv = ctx.csv;
    }
  } catch (const Error& e) {
    // Matrices read from the config that fail their structural checks are config errors;
    // everything else raised by the numerical routines is a computation failure.
    switch (e.code()) {
      case ErrorCode::ConfigInvalid:
        throw;
      case ErrorCode::NotHermitian:
      case ErrorCode::NotUnitary:
      case ErrorCode::NotCommuting:
      case ErrorCode::NotEquivariant:
      case ErrorCode::NotLagrangian:
      case ErrorCode::DimensionMismatch:
        throw Error(ErrorCode::ConfigInvalid, e.what());
      default:
        break;
    }
    throw Error(ErrorCode::ComputationFailed, e.what());
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

RunReport run_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return run_config_text(ss.str());
}

}  // namespace equiflow::harness
