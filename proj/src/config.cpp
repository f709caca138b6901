#include "gimvi/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <yaml-cpp/yaml.h>

#include "gimvi/trace.hpp"

namespace gimvi {

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kInertial: return "inertial";
    case SolverKind::kProjection: return "projection";
    case SolverKind::kContinuous: return "continuous";
  }
  return "unknown";
}

SolverConfig RunSpec::solver_config() const {
  SolverConfig c;
  c.kappa = kappa;
  c.rho = rho;
  c.max_iters = max_iters;
  c.tol = tol;
  c.error_metric = metric;
  c.record_every = record_every;
  c.counting = counting;
  return c;
}

IntegrateOptions RunSpec::integrate_options() const {
  IntegrateOptions o;
  o.h = h;
  o.t_end = t_end;
  o.method = method;
  o.sample_every = sample_every;
  return o;
}

VectorXd RunSpec::second_point() const {
  if (w1) return *w1;
  return solver == SolverKind::kContinuous ? VectorXd::Zero(w0.size()) : w0;
}

namespace {

class Parser {
 public:
  explicit Parser(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    const int line = node.IsDefined() && node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
    throw ConfigError(origin_, line, msg);
  }

  void only_keys(const YAML::Node& map, const std::string& where,
                 std::initializer_list<const char*> allowed) const {
    if (!map.IsMap()) fail(map, "'" + where + "' must be a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!ok.count(key)) {
        std::string expected;
        for (const char* a : allowed) expected += std::string(expected.empty() ? "" : ", ") + a;
        fail(kv.first, "unknown key '" + where + "." + key + "' (expected one of: " + expected + ")");
      }
    }
  }

  YAML::Node required(const YAML::Node& map, const char* key, const std::string& where) const {
    YAML::Node n = map[key];
    if (!n) fail(map, "missing required key '" + where + "." + key + "'");
    return n;
  }

  double real(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "key '" + key + "': expected a real number");
    const std::string s = n.Scalar();
    if (s == "inf" || s == "+inf" || s == ".inf" || s == "+.inf") return infinity<double>();
    if (s == "-inf" || s == "-.inf") return -infinity<double>();
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || std::isnan(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(n, "key '" + key + "': expected a real number, got '" + s + "'");
    }
  }

  long integer(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "key '" + key + "': expected an integer");
    try {
      std::size_t used = 0;
      const long v = std::stol(n.Scalar(), &used);
      if (used != n.Scalar().size()) throw std::invalid_argument(n.Scalar());
      return v;
    } catch (const std::exception&) {
      fail(n, "key '" + key + "': expected an integer, got '" + n.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& n, const std::string& key) const {
    if (!n.IsScalar()) fail(n, "key '" + key + "': expected a string");
    return n.Scalar();
  }

  VectorXd vector(const YAML::Node& n, const std::string& key, Eigen::Index d) const {
    if (!n.IsSequence()) fail(n, "key '" + key + "': expected a list of " + std::to_string(d) + " reals");
    if (Eigen::Index(n.size()) != d)
      fail(n, "key '" + key + "': expected " + std::to_string(d) + " entries, got " +
                  std::to_string(n.size()));
    VectorXd v(d);
    for (std::size_t i = 0; i < n.size(); ++i) v(Eigen::Index(i)) = real(n[i], key);
    return v;
  }

  std::optional<Moduli<double>> moduli(const YAML::Node& op, const std::string& where) const {
    const YAML::Node m = op["moduli"];
    if (!m) return std::nullopt;
    only_keys(m, where + ".moduli", {"lipschitz", "strong_monotone"});
    return Moduli<double>{real(required(m, "lipschitz", where + ".moduli"), where + ".moduli.lipschitz"),
                          real(required(m, "strong_monotone", where + ".moduli"),
                               where + ".moduli.strong_monotone")};
  }

  template <typename Fn>
  auto guarded(const YAML::Node& n, Fn&& fn) const {
    try {
      return fn();
    } catch (const InvalidArgument& e) {
      fail(n, e.what());
    }
  }

  OperatorSpec<double> op(const YAML::Node& n, const std::string& where, Eigen::Index d) const {
    if (!n.IsMap()) fail(n, "'" + where + "' must be a mapping with a 'kind'");
    const std::string kind = text(required(n, "kind", where), where + ".kind");
    if (kind == "scalar_linear") {
      only_keys(n, where, {"kind", "slope", "moduli"});
      const double slope = real(required(n, "slope", where), where + ".slope");
      return guarded(n, [&] { return OperatorSpec<double>::scalar_linear(slope, moduli(n, where)); });
    }
    if (kind == "affine") {
      only_keys(n, where, {"kind", "matrix", "offset", "moduli"});
      const YAML::Node rows = required(n, "matrix", where);
      if (!rows.IsSequence() || Eigen::Index(rows.size()) != d)
        fail(rows, "key '" + where + ".matrix': expected " + std::to_string(d) + " rows");
      MatrixXd m(d, d);
      for (Eigen::Index r = 0; r < d; ++r) m.row(r) = vector(rows[r], where + ".matrix", d).transpose();
      const VectorXd offset =
          n["offset"] ? vector(n["offset"], where + ".offset", d) : VectorXd::Zero(d);
      return guarded(n, [&] { return OperatorSpec<double>::affine(m, offset, moduli(n, where)); });
    }
    if (kind == "identity" || kind == "zero") {
      only_keys(n, where, {"kind"});
      return kind == "identity" ? OperatorSpec<double>::identity() : OperatorSpec<double>::zero();
    }
    fail(n, "key '" + where + ".kind': expected one of scalar_linear, affine, identity, zero; got '" +
                kind + "'");
  }

  ConvexFunctionSpec<double> function(const YAML::Node& n, Eigen::Index d) const {
    if (!n.IsMap()) fail(n, "'problem.f' must be a mapping with a 'kind'");
    const std::string kind = text(required(n, "kind", "problem.f"), "problem.f.kind");
    if (kind == "zero") {
      only_keys(n, "problem.f", {"kind"});
      return ConvexFunctionSpec<double>::zero();
    }
    if (kind == "separable_quadratic") {
      only_keys(n, "problem.f", {"kind", "quad", "lin", "const"});
      const VectorXd quad = vector(required(n, "quad", "problem.f"), "problem.f.quad", d);
      const VectorXd lin =
          n["lin"] ? vector(n["lin"], "problem.f.lin", d) : VectorXd::Zero(d);
      const double c = n["const"] ? real(n["const"], "problem.f.const") : 0.0;
      return guarded(n, [&] { return ConvexFunctionSpec<double>::separable_quadratic(quad, lin, c); });
    }
    fail(n, "key 'problem.f.kind': expected zero or separable_quadratic; got '" + kind + "'");
  }

  Problem problem(const YAML::Node& n) const {
    only_keys(n, "problem",
              {"id", "dimension", "gamma", "T", "g", "f", "K", "coupled_monotone", "known_solution"});
    const long d = integer(required(n, "dimension", "problem"), "problem.dimension");
    if (d <= 0) fail(n["dimension"], "key 'problem.dimension': expected a positive integer");
    const double gamma = real(required(n, "gamma", "problem"), "problem.gamma");
    if (!(gamma > 0)) fail(n["gamma"], "key 'problem.gamma': problem requires gamma > 0");
    const std::string id = n["id"] ? text(n["id"], "problem.id") : "problem";

    auto T = op(required(n, "T", "problem"), "problem.T", d);
    auto g = op(required(n, "g", "problem"), "problem.g", d);
    auto f = function(required(n, "f", "problem"), d);

    const YAML::Node k = required(n, "K", "problem");
    only_keys(k, "problem.K", {"lower", "upper"});
    const VectorXd lower = k["lower"] ? vector(k["lower"], "problem.K.lower", d)
                                      : VectorXd::Constant(d, -infinity<double>());
    const VectorXd upper = k["upper"] ? vector(k["upper"], "problem.K.upper", d)
                                      : VectorXd::Constant(d, infinity<double>());
    auto K = guarded(k, [&] { return FeasibleSetSpec<double>::box(lower, upper); });

    std::optional<double> alpha;
    if (n["coupled_monotone"]) alpha = real(n["coupled_monotone"], "problem.coupled_monotone");
    std::optional<VectorXd> solution;
    if (n["known_solution"]) solution = vector(n["known_solution"], "problem.known_solution", d);
    return guarded(n, [&] {
      return Problem::make(id, std::move(T), std::move(g), std::move(f), std::move(K), gamma, alpha,
                           solution);
    });
  }

  RunSpec run(const YAML::Node& n, std::size_t i, Eigen::Index d) const {
    const std::string where = "runs[" + std::to_string(i) + "]";
    only_keys(n, where,
              {"label", "solver", "kappa", "rho", "max_iters", "tol", "metric", "record_every",
               "counting", "h", "t_end", "method", "sample_every", "w0", "w1"});
    RunSpec r;
    r.label = text(required(n, "label", where), where + ".label");
    if (r.label.empty()) fail(n["label"], "key '" + where + ".label': must not be empty");
    const std::string solver = text(required(n, "solver", where), where + ".solver");
    if (solver == "inertial") {
      r.solver = SolverKind::kInertial;
    } else if (solver == "projection") {
      r.solver = SolverKind::kProjection;
    } else if (solver == "continuous") {
      r.solver = SolverKind::kContinuous;
    } else {
      fail(n["solver"], "key '" + where + ".solver': expected inertial, projection or continuous");
    }
    if (n["kappa"]) r.kappa = real(n["kappa"], where + ".kappa");
    else if (r.solver != SolverKind::kProjection) fail(n, "missing required key '" + where + ".kappa'");
    r.rho = real(required(n, "rho", where), where + ".rho");
    if (n["max_iters"]) r.max_iters = integer(n["max_iters"], where + ".max_iters");
    if (n["tol"]) r.tol = real(n["tol"], where + ".tol");
    if (n["record_every"]) r.record_every = integer(n["record_every"], where + ".record_every");
    if (n["metric"]) {
      const std::string m = text(n["metric"], where + ".metric");
      if (m == "error_norm") r.metric = ErrorMetric::kErrorNorm;
      else if (m == "error_norm_squared") r.metric = ErrorMetric::kErrorNormSquared;
      else fail(n["metric"], "key '" + where + ".metric': expected error_norm or error_norm_squared");
    }
    if (n["counting"]) {
      const std::string c = text(n["counting"], where + ".counting");
      if (c == "updates") r.counting = IterationCounting::kUpdates;
      else if (c == "iterate_index") r.counting = IterationCounting::kIterateIndex;
      else fail(n["counting"], "key '" + where + ".counting': expected updates or iterate_index");
    }
    if (n["h"]) r.h = real(n["h"], where + ".h");
    if (n["t_end"]) r.t_end = real(n["t_end"], where + ".t_end");
    if (n["sample_every"]) r.sample_every = integer(n["sample_every"], where + ".sample_every");
    if (n["method"]) {
      const std::string m = text(n["method"], where + ".method");
      if (m == "rk4") r.method = Integrator::kRk4;
      else if (m == "euler") r.method = Integrator::kEuler;
      else fail(n["method"], "key '" + where + ".method': expected rk4 or euler");
    }
    r.w0 = vector(required(n, "w0", where), where + ".w0", d);
    if (n["w1"]) r.w1 = vector(n["w1"], where + ".w1", d);

    if (r.max_iters < 1) fail(n["max_iters"], "key '" + where + ".max_iters': expected >= 1");
    if (r.record_every < 1) fail(n["record_every"], "key '" + where + ".record_every': expected >= 1");
    if (r.sample_every < 1) fail(n["sample_every"], "key '" + where + ".sample_every': expected >= 1");
    if (!(r.tol >= 0)) fail(n["tol"], "key '" + where + ".tol': expected >= 0");
    if (!(r.h > 0)) fail(n["h"], "key '" + where + ".h': expected > 0");
    if (!(r.t_end > 0)) fail(n["t_end"], "key '" + where + ".t_end': expected > 0");
    if (!(r.kappa >= 0)) fail(n["kappa"], "key '" + where + ".kappa': expected >= 0");
    if (!(r.rho >= 0)) fail(n["rho"], "key '" + where + ".rho': expected >= 0");
    return r;
  }

  RunPlan plan(const YAML::Node& root) const {
    if (!root.IsMap()) throw ConfigError(origin_, 1, "run plan must be a mapping");
    only_keys(root, "plan", {"schema_version", "problem", "runs", "output", "seed"});
    RunPlan p;
    p.schema_version = int(integer(required(root, "schema_version", "plan"), "schema_version"));
    if (p.schema_version != kSchemaVersion)
      fail(root["schema_version"], "key 'schema_version': unsupported version " +
                                       std::to_string(p.schema_version) + " (expected " +
                                       std::to_string(kSchemaVersion) + ")");
    p.problem = problem(required(root, "problem", "plan"));
    const YAML::Node runs = required(root, "runs", "plan");
    if (!runs.IsSequence()) fail(runs, "key 'runs': expected a list of runs");
    if (runs.size() == 0) fail(runs, "key 'runs': at least one run is required");
    std::unordered_set<std::string> labels;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      RunSpec r = run(runs[i], i, p.problem.dimension);
      if (!labels.insert(r.label).second)
        fail(runs[i]["label"], "key 'runs[" + std::to_string(i) + "].label': duplicate label '" +
                                   r.label + "'");
      p.runs.push_back(std::move(r));
    }
    if (root["output"]) p.output = text(root["output"], "output");
    if (root["seed"]) {
      const long seed = integer(root["seed"], "seed");
      if (seed < 0) fail(root["seed"], "key 'seed': expected a non-negative integer");
      p.seed = std::uint64_t(seed);
    }
    return p;
  }

  const std::string& origin() const { return origin_; }

 private:
  std::string origin_;
};

void check_writable(const std::filesystem::path& dir, const std::string& origin) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(origin, 0, "key 'output': cannot create '" + dir.string() + "': " + ec.message());
  const auto probe = dir / ".gimvi_write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError(origin, 0, "key 'output': directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

RunPlan load(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(origin, e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  }
  return Parser(origin).plan(root);
}

// Emission.

void emit_real(YAML::Emitter& out, double v) { out << format_real(v); }

void emit_vector(YAML::Emitter& out, const VectorXd& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < v.size(); ++i) emit_real(out, v(i));
  out << YAML::EndSeq;
}

void emit_operator(YAML::Emitter& out, const OperatorSpec<double>& op) {
  using Op = OperatorSpec<double>;
  out << YAML::BeginMap;
  if (const auto* s = std::get_if<Op::ScalarLinear>(&op.kind())) {
    out << YAML::Key << "kind" << YAML::Value << "scalar_linear";
    out << YAML::Key << "slope" << YAML::Value;
    emit_real(out, s->slope);
  } else if (const auto* a = std::get_if<Op::Affine>(&op.kind())) {
    out << YAML::Key << "kind" << YAML::Value << "affine";
    out << YAML::Key << "matrix" << YAML::Value << YAML::BeginSeq;
    for (Eigen::Index r = 0; r < a->matrix.rows(); ++r) emit_vector(out, a->matrix.row(r).transpose());
    out << YAML::EndSeq;
    out << YAML::Key << "offset" << YAML::Value;
    emit_vector(out, a->offset);
  } else {
    throw InvalidArgument("emit_config: callback operators cannot be serialized");
  }
  if (const auto& m = op.declared_moduli()) {
    out << YAML::Key << "moduli" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "lipschitz" << YAML::Value;
    emit_real(out, m->lipschitz);
    out << YAML::Key << "strong_monotone" << YAML::Value;
    emit_real(out, m->strong_monotone);
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
}

}  // namespace

RunPlan parse_config_string_unchecked(const std::string& text, const std::string& origin) {
  return load(text, origin);
}

RunPlan parse_config_string(const std::string& text, const std::string& origin) {
  RunPlan p = load(text, origin);
  check_writable(p.output, origin);
  return p;
}

RunPlan parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 0, "cannot open run plan");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_string(buf.str(), path.string());
}

std::string emit_config(const RunPlan& plan) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << plan.schema_version;

  const Problem& p = plan.problem;
  out << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << p.id;
  out << YAML::Key << "dimension" << YAML::Value << long(p.dimension);
  out << YAML::Key << "gamma" << YAML::Value;
  emit_real(out, p.gamma);
  out << YAML::Key << "T" << YAML::Value;
  emit_operator(out, p.T);
  out << YAML::Key << "g" << YAML::Value;
  emit_operator(out, p.g);
  out << YAML::Key << "f" << YAML::Value << YAML::BeginMap;
  if (const auto* q = p.f.quadratic()) {
    out << YAML::Key << "kind" << YAML::Value << "separable_quadratic";
    out << YAML::Key << "quad" << YAML::Value;
    emit_vector(out, q->quad);
    out << YAML::Key << "lin" << YAML::Value;
    emit_vector(out, q->lin);
    out << YAML::Key << "const" << YAML::Value;
    emit_real(out, q->constant);
  } else {
    out << YAML::Key << "kind" << YAML::Value << "zero";
  }
  out << YAML::EndMap;
  out << YAML::Key << "K" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "lower" << YAML::Value;
  emit_vector(out, p.K.lower());
  out << YAML::Key << "upper" << YAML::Value;
  emit_vector(out, p.K.upper());
  out << YAML::EndMap;
  if (p.coupled_monotone) {
    out << YAML::Key << "coupled_monotone" << YAML::Value;
    emit_real(out, *p.coupled_monotone);
  }
  if (p.known_solution) {
    out << YAML::Key << "known_solution" << YAML::Value;
    emit_vector(out, *p.known_solution);
  }
  out << YAML::EndMap;

  out << YAML::Key << "runs" << YAML::Value << YAML::BeginSeq;
  for (const RunSpec& r : plan.runs) {
    out << YAML::BeginMap;
    out << YAML::Key << "label" << YAML::Value << r.label;
    out << YAML::Key << "solver" << YAML::Value << to_string(r.solver);
    out << YAML::Key << "kappa" << YAML::Value;
    emit_real(out, r.kappa);
    out << YAML::Key << "rho" << YAML::Value;
    emit_real(out, r.rho);
    if (r.solver == SolverKind::kContinuous) {
      out << YAML::Key << "h" << YAML::Value;
      emit_real(out, r.h);
      out << YAML::Key << "t_end" << YAML::Value;
      emit_real(out, r.t_end);
      out << YAML::Key << "method" << YAML::Value << to_string(r.method);
      out << YAML::Key << "sample_every" << YAML::Value << r.sample_every;
    } else {
      out << YAML::Key << "max_iters" << YAML::Value << r.max_iters;
      out << YAML::Key << "tol" << YAML::Value;
      emit_real(out, r.tol);
      out << YAML::Key << "metric" << YAML::Value << to_string(r.metric);
      out << YAML::Key << "record_every" << YAML::Value << r.record_every;
      out << YAML::Key << "counting" << YAML::Value << to_string(r.counting);
    }
    out << YAML::Key << "w0" << YAML::Value;
    emit_vector(out, r.w0);
    if (r.w1) {
      out << YAML::Key << "w1" << YAML::Value;
      emit_vector(out, *r.w1);
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::Key << "output" << YAML::Value << plan.output.string();
  out << YAML::Key << "seed" << YAML::Value << plan.seed;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string paper_plan_text() {
  std::ostringstream s;
  s << R"(# Reference 1-D comparison: K = [0, inf), T(w) = 3w/4, g(w) = w/2,
# f(w) = w^2 + 2w + 1, gamma = 1.4, w* = 0, started from w0 = w1 = 100.
schema_version: 1
problem:
  id: paper_example
  dimension: 1
  gamma: 1.4
  T: {kind: scalar_linear, slope: 0.75, moduli: {lipschitz: 0.75, strong_monotone: 0.75}}
  g: {kind: scalar_linear, slope: 0.5, moduli: {lipschitz: 0.5, strong_monotone: 0.5}}
  f: {kind: separable_quadratic, quad: [1], lin: [2], const: 1}
  K: {lower: [0], upper: [inf]}
  coupled_monotone: 0.375
  known_solution: [0]
runs:
)";
  const struct {
    double rho;
    long iters;
    const char* tag;
  } groups[] = {{0.09, 500, "rho0.09"}, {0.0019, 5000, "rho0.0019"}};
  for (const auto& g : groups) {
    for (const char* kappa : {"0.1", "0.59", "0.9"}) {
      s << "  - {label: inertial_k" << kappa << "_" << g.tag << ", solver: inertial, kappa: " << kappa
        << ", rho: " << g.rho << ", max_iters: " << g.iters
        << ", counting: iterate_index, w0: [100], w1: [100]}\n";
    }
    s << "  - {label: projection_" << g.tag << ", solver: projection, kappa: 1, rho: " << g.rho
      << ", max_iters: " << g.iters << ", counting: iterate_index, w0: [100]}\n";
  }
  s << "output: out/paper_example\nseed: 0\n";
  return s.str();
}

}  // namespace gimvi
