#include "nhqmc/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "nhqmc/errors.hpp"

namespace nhqmc {

namespace {

std::size_t line_of(const YAML::Node& node) {
  const auto mark = node.Mark();
  return mark.line < 0 ? 0 : static_cast<std::size_t>(mark.line) + 1;
}

template <class T>
T as(const YAML::Node& node, const std::string& what) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("cannot read " + what, line_of(node));
  }
}

template <class T>
T get(const YAML::Node& parent, const std::string& key, T fallback) {
  const YAML::Node node = parent[key];
  if (!node) return fallback;
  return as<T>(node, key);
}

YAML::Node require(const YAML::Node& parent, const std::string& key) {
  const YAML::Node node = parent[key];
  if (!node) throw ConfigError("missing key '" + key + "'", line_of(parent));
  return node;
}

void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!node.IsMap()) throw ConfigError(where + " must be a mapping", line_of(node));
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      throw ConfigError("unknown key '" + key + "' in " + where,
                        line_of(kv.first));
    }
  }
}

Complex complex_of(const YAML::Node& node, const std::string& what) {
  const auto text = as<std::string>(node, what);
  try {
    return parse_complex(text);
  } catch (const Error& e) {
    throw ConfigError(what + ": " + e.what(), line_of(node));
  }
}

PauliString string_of(const YAML::Node& node, std::size_t n) {
  const auto text = as<std::string>(node, "Pauli label");
  try {
    auto s = PauliString::parse(text);
    if (s.size() != n) {
      throw ConfigError("label '" + text + "' does not act on " +
                            std::to_string(n) + " qubits",
                        line_of(node));
    }
    return s;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), line_of(node));
  }
}

Schedule schedule_of(const YAML::Node& node) {
  check_keys(node, {"type", "offset", "amplitude", "frequency", "phase", "knots", "values"},
             "schedule");
  const auto type = as<std::string>(require(node, "type"), "schedule type");
  try {
    if (type == "constant") return Schedule::constant(get(node, "offset", 1.0));
    if (type == "harmonic") {
      return Schedule::harmonic(get(node, "offset", 0.0), get(node, "amplitude", 1.0),
                                get(node, "frequency", 1.0), get(node, "phase", 0.0));
    }
    if (type == "pwl") {
      return Schedule::piecewise_linear(
          as<std::vector<double>>(require(node, "knots"), "knots"),
          as<std::vector<double>>(require(node, "values"), "values"));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what(), line_of(node));
  }
  throw ConfigError("unknown schedule type '" + type + "'", line_of(node));
}

/// "coeff LABEL" or {coeff, string, schedule}.
ComplexTerm term_of(const YAML::Node& node, std::size_t n) {
  if (node.IsScalar()) {
    std::istringstream in(node.as<std::string>());
    std::string coeff;
    std::string label;
    std::string extra;
    if (!(in >> coeff >> label) || (in >> extra)) {
      throw ConfigError("term must read 'coefficient LABEL'", line_of(node));
    }
    Complex c;
    try {
      c = parse_complex(coeff);
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of(node));
    }
    try {
      return {string_of(YAML::Node(label), n), c, Schedule::constant(1.0)};
    } catch (const ConfigError& e) {
      // The rebuilt node has no source mark; report the term's own line.
      throw ConfigError(e.what(), line_of(node));
    }
  }
  check_keys(node, {"coeff", "string", "schedule"}, "term");
  ComplexTerm t;
  t.coeff = node["coeff"] ? complex_of(node["coeff"], "coeff") : Complex(1.0);
  YAML::Node label = require(node, "string");
  try {
    t.string = PauliString::parse(label.as<std::string>());
  } catch (const Error& e) {
    throw ConfigError(e.what(), line_of(label));
  }
  if (t.string.size() != n) throw ConfigError("label has the wrong length", line_of(label));
  t.schedule = node["schedule"] ? schedule_of(node["schedule"]) : Schedule::constant(1.0);
  return t;
}

PauliSum pauli_terms(const YAML::Node& list, std::size_t n, bool require_real) {
  if (!list.IsSequence()) throw ConfigError("expected a list of terms", line_of(list));
  PauliSum out(n);
  for (const auto& item : list) {
    const ComplexTerm t = term_of(item, n);
    if (!t.schedule.is_constant() || t.schedule.constant_value() != 1.0) {
      throw ConfigError("time-dependent terms are only supported for nonhermitian models",
                        line_of(item));
    }
    if (require_real && std::abs(t.coeff.imag()) > 1e-12) {
      throw ConfigError("coefficient must be real", line_of(item));
    }
    out.add(t.coeff, t.string);
  }
  return out;
}

std::size_t qubit_of(const YAML::Node& node, std::size_t n) {
  const auto q = get<std::size_t>(node, "qubit", 0);
  if (q >= n) throw ConfigError("qubit index out of range", line_of(node));
  return q;
}

Matrix jump_of(const YAML::Node& node, std::size_t n) {
  if (!node.IsMap() || node.size() != 1) {
    throw ConfigError("jump must be a single-key mapping", line_of(node));
  }
  const auto kind = node.begin()->first.as<std::string>();
  const YAML::Node body = node.begin()->second;
  if (kind == "amplitude_damping" || kind == "dephasing") {
    check_keys(body, {"gamma", "qubit"}, kind);
    const double gamma = as<double>(require(body, "gamma"), "gamma");
    if (gamma < 0.0) throw ConfigError("gamma must be nonnegative", line_of(body));
    const std::size_t q = qubit_of(body, n);
    return kind == "dephasing" ? dephasing(n, gamma, q) : amplitude_damping(n, gamma, q);
  }
  if (kind == "matrix") {
    check_keys(body, {"rows", "qubit"}, "matrix jump");
    const YAML::Node rows = require(body, "rows");
    const Eigen::Index dim = static_cast<Eigen::Index>(rows.size());
    Matrix m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const YAML::Node row = rows[static_cast<std::size_t>(i)];
      if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != dim) {
        throw ConfigError("matrix rows must form a square array", line_of(row));
      }
      for (Eigen::Index j = 0; j < dim; ++j) {
        m(i, j) = complex_of(row[static_cast<std::size_t>(j)], "matrix entry");
      }
    }
    if (dim == 2 && n > 1) {
      const std::size_t q = qubit_of(body, n);
      Matrix out = Matrix::Identity(1, 1);
      for (std::size_t k = 0; k < n; ++k) {
        const Matrix f = k == q ? m : Matrix(Matrix::Identity(2, 2));
        Matrix next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index a = 0; a < out.rows(); ++a)
          for (Eigen::Index b = 0; b < out.cols(); ++b)
            next.block(a * 2, b * 2, 2, 2) = out(a, b) * f;
        out = std::move(next);
      }
      return out;
    }
    if (dim != (Eigen::Index{1} << n)) {
      throw ConfigError("matrix jump must be 2x2 or act on the whole register",
                        line_of(rows));
    }
    return m;
  }
  throw ConfigError("unknown jump kind '" + kind + "'", line_of(node));
}

Vector state_of(const YAML::Node& node, std::size_t n) {
  if (node.IsScalar()) {
    const auto label = node.as<std::string>();
    if (label.size() != n) {
      throw ConfigError("state label must have one symbol per qubit", line_of(node));
    }
    try {
      return StateVector::from_label(label).amplitudes;
    } catch (const Error& e) {
      throw ConfigError(e.what(), line_of(node));
    }
  }
  check_keys(node, {"amplitudes"}, "state");
  const YAML::Node amps = require(node, "amplitudes");
  if (!amps.IsSequence() || amps.size() != (std::size_t{1} << n)) {
    throw ConfigError("state needs 2^qubits amplitudes", line_of(amps));
  }
  Vector v(static_cast<Eigen::Index>(amps.size()));
  for (std::size_t i = 0; i < amps.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = complex_of(amps[i], "amplitude");
  }
  if (v.norm() == 0.0) throw ConfigError("state is zero", line_of(amps));
  return v / v.norm();
}

PauliSum observable_of(const YAML::Node& node, std::size_t n) {
  check_keys(node, {"projector", "terms"}, "observable");
  if (node["projector"] && node["terms"]) {
    throw ConfigError("observable takes either projector or terms", line_of(node));
  }
  if (const YAML::Node p = node["projector"]) {
    const Vector v = state_of(p, n);
    return decompose(Matrix(v * v.adjoint()));
  }
  PauliSum o = pauli_terms(require(node, "terms"), n, false);
  if (!o.is_real(1e-12)) {
    throw ConfigError("observable must be Hermitian (real Pauli coefficients)",
                      line_of(node));
  }
  return o;
}

MethodChoice method_of(const YAML::Node& node, bool default_quadrature) {
  const auto token = as<std::string>(node, "method");
  try {
    return parse_method_choice(token, default_quadrature);
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), line_of(node));
  }
}

void parse_model(const YAML::Node& node, RunConfig& cfg) {
  check_keys(node, {"type", "qubits", "terms", "shift", "hamiltonian", "jumps", "cp"},
             "model");
  const auto type = as<std::string>(require(node, "type"), "model type");
  cfg.qubits = as<std::size_t>(require(node, "qubits"), "qubits");
  if (cfg.qubits == 0 || cfg.qubits > 32) {
    throw ConfigError("qubits must be between 1 and 32", line_of(node["qubits"]));
  }
  const std::size_t n = cfg.qubits;
  if (type == "nonhermitian") {
    cfg.type = ModelType::nonhermitian;
    if (node["hamiltonian"] || node["jumps"] || node["cp"]) {
      throw ConfigError("hamiltonian/jumps/cp belong to lindblad models", line_of(node));
    }
    const YAML::Node terms = require(node, "terms");
    if (!terms.IsSequence()) throw ConfigError("terms must be a list", line_of(terms));
    for (const auto& item : terms) cfg.terms.push_back(term_of(item, n));
    if (node["shift"]) cfg.shift = as<double>(node["shift"], "shift");
  } else if (type == "lindblad") {
    cfg.type = ModelType::lindblad;
    if (node["terms"] || node["shift"]) {
      throw ConfigError("terms/shift belong to nonhermitian models", line_of(node));
    }
    const YAML::Node h = require(node, "hamiltonian");
    if (h.IsMap()) {
      check_keys(h, {"ising"}, "hamiltonian");
      const YAML::Node ising = h["ising"];
      check_keys(ising, {"J", "h"}, "ising");
      cfg.hamiltonian = ising_chain(n, get(ising, "J", 1.0), get(ising, "h", 1.0));
    } else {
      cfg.hamiltonian = pauli_terms(h, n, true);
    }
    if (const YAML::Node jumps = node["jumps"]) {
      if (!jumps.IsSequence()) throw ConfigError("jumps must be a list", line_of(jumps));
      for (const auto& j : jumps) cfg.jumps.push_back(jump_of(j, n));
    }
    if (node["cp"]) cfg.cp = as<double>(node["cp"], "cp");
  } else {
    throw ConfigError("model type must be nonhermitian or lindblad", line_of(node["type"]));
  }
}

}  // namespace

MethodChoice parse_method_choice(const std::string& token, bool default_quadrature) {
  const auto colon = token.find(':');
  MethodChoice m;
  try {
    m.method = parse_method(token.substr(0, colon));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  m.quadrature = default_quadrature;
  if (colon != std::string::npos) {
    const auto mode = token.substr(colon + 1);
    if (mode == "quadrature") {
      m.quadrature = true;
    } else if (mode == "mc") {
      m.quadrature = false;
    } else {
      throw ConfigError("unknown estimation mode '" + mode + "'");
    }
  }
  const bool stochastic = m.method == Method::qdrift || m.method == Method::continuous;
  if (stochastic && m.quadrature) {
    if (colon != std::string::npos) {
      throw ConfigError(method_name(m.method) + " cannot be used with quadrature in k");
    }
    m.quadrature = false;
  }
  return m;
}

std::vector<double> TimeGrid::values() const {
  if (points == 1) return {start};
  std::vector<double> out(points);
  for (std::size_t j = 0; j < points; ++j) {
    out[j] = start + (end - start) * static_cast<double>(j) /
                         static_cast<double>(points - 1);
  }
  out.back() = end;
  return out;
}

std::string MethodChoice::label() const {
  return method_name(method) + (quadrature ? "-quadrature" : "");
}

Kernel KernelConfig::make() const {
  return family == KernelFamily::cauchy ? Kernel::cauchy(eps) : Kernel::beta(beta, eps);
}

NonHermitianModel RunConfig::nonhermitian_model() const {
  if (type != ModelType::nonhermitian) throw InputError("not a nonhermitian model");
  auto model = NonHermitianModel::from_terms(qubits, terms, times.end);
  if (shift) model = model.with_shift(Schedule::constant(*shift));
  return model;
}

LindbladModel RunConfig::lindblad_model() const {
  if (type != ModelType::lindblad) throw InputError("not a lindblad model");
  return LindbladModel(hamiltonian, jumps);
}

Matrix RunConfig::initial_density() const { return psi * psi.adjoint(); }

PropagatorSpec RunConfig::propagator(Method m) const {
  PropagatorSpec p;
  p.method = m;
  p.dt = dt;
  p.tau = tau;
  return p;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, static_cast<std::size_t>(e.mark.line + 1));
  }
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping", 1);
  check_keys(root, {"model", "state", "observable", "kernel", "propagator", "times",
                    "sampling", "readout", "run"},
             "configuration");
  RunConfig cfg;
  parse_model(require(root, "model"), cfg);
  const std::size_t n = cfg.qubits;
  cfg.psi = state_of(require(root, "state"), n);
  cfg.observable = observable_of(require(root, "observable"), n);

  if (const YAML::Node k = root["kernel"]) {
    check_keys(k, {"family", "beta", "eps"}, "kernel");
    const auto family = get<std::string>(k, "family", "cauchy");
    if (family == "cauchy") {
      cfg.kernel.family = KernelFamily::cauchy;
    } else if (family == "beta") {
      cfg.kernel.family = KernelFamily::beta;
    } else {
      throw ConfigError("kernel family must be cauchy or beta", line_of(k));
    }
    cfg.kernel.beta = get(k, "beta", cfg.kernel.beta);
    cfg.kernel.eps = get(k, "eps", cfg.kernel.eps);
    if (!(cfg.kernel.eps > 0.0 && cfg.kernel.eps < 1.0)) {
      throw ConfigError("eps must lie in (0, 1)", line_of(k));
    }
    if (cfg.kernel.family == KernelFamily::beta &&
        !(cfg.kernel.beta > 0.0 && cfg.kernel.beta < 1.0)) {
      throw ConfigError("beta must lie in (0, 1)", line_of(k));
    }
  }

  if (const YAML::Node s = root["sampling"]) {
    check_keys(s, {"mode", "n_numerator", "n_denominator", "samples", "delta", "eta",
                   "paired", "max_samples"},
               "sampling");
    const auto mode = get<std::string>(s, "mode", "mc");
    if (mode != "mc" && mode != "quadrature") {
      throw ConfigError("sampling mode must be mc or quadrature", line_of(s));
    }
    cfg.default_quadrature = mode == "quadrature";
    if (s["samples"]) {
      cfg.n_numerator = cfg.n_denominator = as<std::size_t>(s["samples"], "samples");
    }
    cfg.n_numerator = get(s, "n_numerator", cfg.n_numerator);
    cfg.n_denominator = get(s, "n_denominator", cfg.n_denominator);
    if (s["delta"] || s["eta"]) {
      cfg.delta = as<double>(require(s, "delta"), "delta");
      cfg.eta = as<double>(require(s, "eta"), "eta");
      if (!(*cfg.delta > 0.0 && *cfg.delta < 1.0) || !(*cfg.eta > 0.0)) {
        throw ConfigError("need 0 < delta < 1 and eta > 0", line_of(s));
      }
    }
    cfg.paired = get(s, "paired", false);
    cfg.max_samples = get(s, "max_samples", cfg.max_samples);
    if (cfg.n_numerator == 0 || cfg.n_denominator == 0) {
      throw ConfigError("sample counts must be positive", line_of(s));
    }
  }

  if (const YAML::Node p = root["propagator"]) {
    check_keys(p, {"methods", "dt", "tau"}, "propagator");
    cfg.dt = get(p, "dt", cfg.dt);
    cfg.tau = get(p, "tau", cfg.tau);
    if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive", line_of(p));
    if (!(cfg.tau > 0.0 && cfg.tau < std::numbers::pi)) {
      throw ConfigError("tau must lie in (0, pi)", line_of(p));
    }
    if (const YAML::Node m = p["methods"]) {
      if (!m.IsSequence()) throw ConfigError("methods must be a list", line_of(m));
      for (const auto& item : m) cfg.methods.push_back(method_of(item, cfg.default_quadrature));
    }
  }
  if (cfg.methods.empty()) {
    cfg.methods.push_back({Method::exact, cfg.default_quadrature});
  }

  if (const YAML::Node t = root["times"]) {
    check_keys(t, {"start", "end", "points"}, "times");
    cfg.times.start = get(t, "start", 0.0);
    cfg.times.end = get(t, "end", cfg.times.start);
    cfg.times.points = get<std::size_t>(t, "points", 1);
    if (!(cfg.times.start >= 0.0) || !(cfg.times.end >= cfg.times.start) ||
        cfg.times.points == 0) {
      throw ConfigError("times need end >= start >= 0 and points >= 1", line_of(t));
    }
  }

  if (const YAML::Node r = root["readout"]) {
    check_keys(r, {"mode", "shots"}, "readout");
    const auto mode = get<std::string>(r, "mode", "exact");
    if (mode == "exact") {
      cfg.readout.mode = ReadoutMode::exact;
    } else if (mode == "shots") {
      cfg.readout.mode = ReadoutMode::shots;
      cfg.readout.shots = as<std::uint64_t>(require(r, "shots"), "shots");
      if (cfg.readout.shots == 0) throw ConfigError("shots must be positive", line_of(r));
    } else {
      throw ConfigError("readout mode must be exact or shots", line_of(r));
    }
  }

  if (const YAML::Node r = root["run"]) {
    check_keys(r, {"seed", "workers", "output", "max_qubits"}, "run");
    cfg.seed = get<std::uint64_t>(r, "seed", cfg.seed);
    cfg.workers = get<unsigned>(r, "workers", cfg.workers);
    cfg.output = get<std::string>(r, "output", cfg.output);
    cfg.max_qubits = get<std::size_t>(r, "max_qubits", cfg.max_qubits);
    if (cfg.workers == 0) throw ConfigError("workers must be positive", line_of(r));
  }
  const std::size_t needed = cfg.type == ModelType::lindblad ? 2 * n : n;
  if (needed > cfg.max_qubits) {
    throw ConfigError("model needs " + std::to_string(needed) +
                      " qubits, above max_qubits = " + std::to_string(cfg.max_qubits));
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

const std::string& fig3_preset() {
  static const std::string text = R"(# Four-qubit periodic Ising chain with amplitude damping on the first qubit.
model:
  type: lindblad
  qubits: 4
  hamiltonian:
    ising: {J: 1.0, h: 2.0}
  jumps:
    - amplitude_damping: {gamma: 1.5, qubit: 0}
  cp: 0.3607
state: "1000"
observable:
  projector: "1000"
kernel: {family: cauchy, eps: 1.0e-2}
propagator:
  methods: [continuous, trotter1:quadrature, qdrift]
  dt: 0.05
  tau: 0.05
times: {start: 0.05, end: 2.0, points: 40}
sampling: {n_numerator: 100000, n_denominator: 100000}
readout: {mode: exact}
run: {seed: 20240611, workers: 1, output: fig3}
)";
  return text;
}

}  // namespace nhqmc
