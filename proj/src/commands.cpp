#include "nhqmc/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "nhqmc/errors.hpp"
#include "nhqmc/estimator.hpp"
#include "nhqmc/lindblad.hpp"
#include "nhqmc/validate.hpp"

namespace nhqmc {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// The model whose spectrum sets quadrature widths and planner exponents.
NonHermitianModel planning_model(const RunConfig& cfg) {
  if (cfg.type == ModelType::lindblad) {
    return vectorize(cfg.lindblad_model(), cfg.cp, cfg.max_qubits).model();
  }
  return cfg.nonhermitian_model();
}

double horizon(const RunConfig& cfg) {
  const auto t = cfg.times.values();
  return *std::max_element(t.begin(), t.end());
}

/// Sample counts: explicit, or planned from (delta, eta) and capped.
std::pair<std::size_t, std::size_t> sample_counts(const RunConfig& cfg,
                                                  const SpectralSummary& s,
                                                  const Kernel& kernel,
                                                  std::ostream& log) {
  if (!cfg.delta) return {cfg.n_numerator, cfg.n_denominator};
  const auto plan = plan_samples(*cfg.delta, *cfg.eta, l1_norm(cfg.observable),
                                 kernel.l1(), horizon(cfg), s.delta_ei);
  if (plan.exceeds_ceiling) {
    fmt::print(log, "warning: planned sample count {:.3g} exceeds the ceiling\n", plan.raw);
  }
  const auto cap = [&](std::size_t n) {
    if (n > cfg.max_samples) {
      fmt::print(log, "warning: capping {} samples at max_samples = {}\n", n,
                 cfg.max_samples);
    }
    return std::min(n, cfg.max_samples);
  };
  return {cap(plan.n_numerator), cap(plan.n_denominator)};
}

EstimatorOptions estimator_options(const RunConfig& cfg, std::size_t nn,
                                   std::size_t nd) {
  EstimatorOptions o;
  o.n_numerator = nn;
  o.n_denominator = nd;
  o.readout = cfg.readout;
  o.seed = cfg.seed;
  o.workers = cfg.workers;
  o.paired = cfg.paired;
  o.max_qubits = cfg.max_qubits;
  return o;
}

std::vector<ResultRow> nonhermitian_rows(const RunConfig& cfg, std::ostream& log) {
  const auto times = cfg.times.values();
  const double T = horizon(cfg);
  const auto model = cfg.nonhermitian_model();
  const Kernel kernel = cfg.kernel.make();
  const auto summary = spectral_summary(model, T, 0, cfg.max_qubits);
  const auto [nn, nd] = sample_counts(cfg, summary, kernel, log);

  std::vector<double> exact;
  if (cfg.qubits <= cfg.max_qubits) {
    exact = exact_expectations(model, cfg.observable, cfg.psi, times);
  }
  const ObservableSpec observable = ObservableSpec::from_sum(cfg.observable);

  std::vector<ResultRow> rows;
  for (const auto& choice : cfg.methods) {
    const auto start = std::chrono::steady_clock::now();
    const auto prop = cfg.propagator(choice.method);
    std::vector<EstimateResult> results;
    std::size_t n_samples = nn + nd;
    if (choice.quadrature) {
      const auto rule = kernel.quadrature_rule(T, summary.max_anti_norm);
      results = estimate_quadrature_sweep(model, cfg.observable, cfg.psi, times, rule,
                                          prop, cfg.workers, cfg.max_qubits);
      n_samples = rule.M;
    } else {
      results = estimate_sweep(model, observable, cfg.psi, times, kernel, prop,
                               estimator_options(cfg, nn, nd));
    }
    for (std::size_t j = 0; j < times.size(); ++j) {
      ResultRow row;
      row.t = times[j];
      row.method = choice.label();
      row.estimate = results[j].value();
      row.stderr_ = results[j].ratio_se;
      if (!exact.empty()) row.exact = exact[j];
      row.n_samples = n_samples;
      row.seed = cfg.seed;
      if (!results[j].denominator_resolved) {
        fmt::print(log, "warning: {} at t = {}: denominator indistinguishable from zero\n",
                   row.method, row.t);
        row.estimate = std::numeric_limits<double>::quiet_NaN();
        row.stderr_ = std::numeric_limits<double>::quiet_NaN();
      }
      rows.push_back(row);
    }
    fmt::print(log, "{}: {:.1f} s\n", choice.label(), seconds_since(start));
  }
  return rows;
}

std::vector<ResultRow> lindblad_rows(const RunConfig& cfg, std::ostream& log) {
  const auto times = cfg.times.values();
  const double T = horizon(cfg);
  const LindbladModel lm = cfg.lindblad_model();
  const auto gen = vectorize(lm, cfg.cp, cfg.max_qubits);
  const Kernel kernel = cfg.kernel.make();
  fmt::print(log, "c_p = {} (minimal {:.6f})\n", gen.cp, gen.cp_minimal);
  const Matrix o = to_matrix(cfg.observable, cfg.max_qubits);
  const Matrix rho0 = cfg.initial_density();
  const auto obs = open_observable(o, rho0);

  std::vector<double> exact;
  for (const auto& rho : exact_reference_sweep(lm, rho0, times)) {
    exact.push_back((o * rho).trace().real());
  }

  std::size_t nn = cfg.n_numerator;
  if (cfg.delta) {
    const auto summary = spectral_summary(gen.model(), T, 0, cfg.max_qubits);
    nn = sample_counts(cfg, summary, kernel, log).first;
  }

  std::vector<ResultRow> rows;
  for (const auto& choice : cfg.methods) {
    const auto start = std::chrono::steady_clock::now();
    const auto prop = cfg.propagator(choice.method);
    std::vector<ExpectationResult> results;
    std::size_t n_samples = nn;
    if (choice.quadrature) {
      const auto rule = lindblad_rule(gen, kernel, T);
      results = expectation_quadrature_sweep(gen, obs, times, rule, prop, cfg.workers);
      n_samples = rule.M;
    } else {
      results = expectation_sweep(gen, obs, times, kernel, prop,
                                  estimator_options(cfg, nn, nn));
    }
    for (std::size_t j = 0; j < times.size(); ++j) {
      ResultRow row;
      row.t = times[j];
      row.method = choice.label();
      row.estimate = results[j].value;
      row.stderr_ = results[j].stderr_;
      row.exact = exact[j];
      row.n_samples = n_samples;
      row.seed = cfg.seed;
      rows.push_back(row);
    }
    fmt::print(log, "{}: {:.1f} s\n", choice.label(), seconds_since(start));
  }
  return rows;
}

std::filesystem::path write_outputs(const std::vector<ResultRow>& rows,
                                    const std::string& dir, bool svg,
                                    std::ostream& out) {
  std::filesystem::create_directories(dir);
  const auto csv_path = std::filesystem::path(dir) / "results.csv";
  write_text(csv_path.string(), to_csv(rows));
  fmt::print(out, "wrote {}\n", csv_path.string());
  if (svg) {
    const auto svg_path = std::filesystem::path(dir) / "results.svg";
    write_text(svg_path.string(), render_svg(read_text(csv_path.string())));
    fmt::print(out, "wrote {}\n", svg_path.string());
  }
  return csv_path;
}

template <class Body>
int guarded(std::ostream& err, Body body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const InputError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const Error& e) {
    fmt::print(err, "numerical error: {}\n", e.what());
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitConfig;
  }
}

RunConfig load(const CommandOptions& options) {
  if (!options.config) throw ConfigError("--config is required");
  RunConfig cfg = load_config(*options.config);
  apply_overrides(cfg, options);
  return cfg;
}

}  // namespace

void apply_overrides(RunConfig& cfg, const CommandOptions& options) {
  if (options.seed) cfg.seed = *options.seed;
  if (options.workers) {
    if (*options.workers == 0) throw ConfigError("--workers must be positive");
    cfg.workers = *options.workers;
  }
  if (options.output) cfg.output = *options.output;
  if (options.shots) {
    if (*options.shots == 0) throw ConfigError("--shots must be positive");
    cfg.readout = {ReadoutMode::shots, *options.shots};
  }
  if (options.method) {
    cfg.methods = {parse_method_choice(*options.method, cfg.default_quadrature)};
  }
}

std::string plan_report(const RunConfig& cfg) {
  const double T = horizon(cfg);
  const Kernel kernel = cfg.kernel.make();
  const auto model = planning_model(cfg);
  const auto s = spectral_summary(model, T, 0, cfg.max_qubits);
  const auto rule = kernel.quadrature_rule(T, s.max_norm);
  const double delta = cfg.delta.value_or(0.05);
  const double eta = cfg.eta.value_or(0.1);
  const auto plan =
      plan_samples(delta, eta, l1_norm(cfg.observable), kernel.l1(), T, s.delta_ei);
  const auto [d_lo, d_hi] = bound_denominator(model, T, 0, cfg.max_qubits);

  std::string out;
  out += fmt::format("kernel          {}\n", kernel.name());
  out += fmt::format("  k_c           {:.7g}\n", kernel.k_c());
  out += fmt::format("  ||g||_1       {:.7g}\n", kernel.l1());
  out += fmt::format("  Q             {}\n", rule.Q);
  out += fmt::format("  h             {:.7g}\n", rule.h);
  out += fmt::format("  M             {}\n", rule.M);
  out += fmt::format("horizon T       {:.7g}\n", T);
  out += fmt::format("||H~||          {:.7g}\n", s.max_norm);
  out += fmt::format("Delta_Ei        {:.7g}\n", s.delta_ei);
  out += fmt::format("||O||_1         {:.7g}\n", l1_norm(cfg.observable));
  out += fmt::format("sampling plan   delta = {:g}, eta = {:g}\n", delta, eta);
  out += fmt::format("  K             {:.7g}\n", plan.K);
  out += fmt::format("  n_N           {}\n", plan.n_numerator);
  out += fmt::format("  n_D           {}\n", plan.n_denominator);
  if (plan.exceeds_ceiling) out += "  warning: plan exceeds the sample ceiling\n";
  out += fmt::format("denominator     [{:.7g}, {:.7g}]\n", d_lo, d_hi);
  return out;
}

std::vector<ResultRow> run_rows(const RunConfig& cfg, std::ostream& log) {
  return cfg.type == ModelType::lindblad ? lindblad_rows(cfg, log)
                                         : nonhermitian_rows(cfg, log);
}

int cmd_plan(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    out << plan_report(load(options));
    return int(kExitOk);
  });
}

int cmd_run(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load(options);
    write_outputs(run_rows(cfg, err), cfg.output, options.svg, out);
    return int(kExitOk);
  });
}

int cmd_validate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ValidationOptions v;
    if (options.seed) v.seed = *options.seed;
    if (options.workers) v.workers = *options.workers;
    v.on_result = [&](const CheckResult& r) {
      fmt::print(out, "{} {:<10} {}: {} (expected {})\n", r.passed ? "PASS" : "FAIL",
                 r.module, r.name, r.observed, r.expected);
      out.flush();
    };
    const auto start = std::chrono::steady_clock::now();
    const auto results = run_validation(v);
    const auto failed = std::count_if(results.begin(), results.end(),
                                      [](const CheckResult& r) { return !r.passed; });
    fmt::print(out, "{} checks, {} failed, {:.1f} s\n", results.size(), failed,
               seconds_since(start));
    return failed == 0 ? int(kExitOk) : int(kExitValidation);
  });
}

int cmd_reproduce_fig3(const CommandOptions& options, std::ostream& out,
                       std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = options.config ? load_config(*options.config)
                                   : parse_config(fig3_preset());
    apply_overrides(cfg, options);
    const auto rows = run_rows(cfg, err);
    write_outputs(rows, cfg.output, true, out);

    std::vector<std::string> methods;
    for (const auto& r : rows) {
      if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
        methods.push_back(r.method);
      }
    }
    fmt::print(out, "{:<20} {:>10} {:>10} {:>10} {:>12}\n", "method", "mean err",
               "median", "max", "max t>=1");
    for (const auto& m : methods) {
      std::vector<double> e;
      double late = 0.0;
      for (const auto& r : rows) {
        if (r.method != m || !r.abs_error()) continue;
        e.push_back(*r.abs_error());
        if (r.t >= 1.0) late = std::max(late, *r.abs_error());
      }
      if (e.empty()) continue;
      double mean = 0.0;
      for (double x : e) mean += x;
      mean /= double(e.size());
      std::vector<double> sorted = e;
      std::sort(sorted.begin(), sorted.end());
      const std::size_t h = sorted.size() / 2;
      const double median =
          sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
      fmt::print(out, "{:<20} {:>10.4f} {:>10.4f} {:>10.4f} {:>12.4f}\n", m, mean,
                 median, sorted.back(), late);
    }
    return int(kExitOk);
  });
}

}  // namespace nhqmc
