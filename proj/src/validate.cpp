#include "nhqmc/validate.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "nhqmc/estimator.hpp"
#include "nhqmc/lindblad.hpp"
#include "nhqmc/pauli.hpp"
#include "nhqmc/propagate.hpp"
#include "nhqmc/report.hpp"

namespace nhqmc {

namespace {

Matrix random_matrix(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = Complex(normal(rng), normal(rng));
  return m;
}

PauliString random_string(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, 3);
  PauliString s(n);
  for (std::size_t q = 0; q < n; ++q) s.set(q, static_cast<Pauli>(pick(rng)));
  return s;
}

Vector random_state(Eigen::Index dim, Rng& rng) {
  std::normal_distribution<double> normal;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = Complex(normal(rng), normal(rng));
  return v / v.norm();
}

double min_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

class Suite {
 public:
  explicit Suite(const ValidationOptions& options) : options_(options) {}

  void check(const std::string& module, const std::string& name, bool passed,
             const std::string& observed, const std::string& expected) {
    results_.push_back({module, name, passed, observed, expected});
    if (options_.on_result) options_.on_result(results_.back());
  }

  /// Runs body, turning an escaped exception into a failed check.
  template <class Body>
  void guarded(const std::string& module, const std::string& name, Body body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(module, name, false, std::string("exception: ") + e.what(), "no exception");
    }
  }

  Rng rng(std::uint64_t index) const {
    return make_stream(options_.seed, StreamId::validation, index);
  }

  std::vector<CheckResult> take() { return std::move(results_); }

 private:
  const ValidationOptions& options_;
  std::vector<CheckResult> results_;
};

void pauli_checks(Suite& s) {
  s.guarded("pauli", "product phase matches dense product", [&] {
    Rng rng = s.rng(1);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const auto p = random_string(3, rng);
      const auto q = random_string(3, rng);
      const auto r = multiply(p, q);
      const Matrix dense = to_matrix(p) * to_matrix(q);
      worst = std::max(worst, (dense - r.phase * to_matrix(r.string)).cwiseAbs().maxCoeff());
    }
    s.check("pauli", "product phase matches dense product", worst < 1e-12,
            fmt::format("{:.2e}", worst), "< 1e-12");
  });
  s.guarded("pauli", "commutation matches dense commutator", [&] {
    Rng rng = s.rng(2);
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
      const auto p = random_string(3, rng);
      const auto q = random_string(3, rng);
      const Matrix a = to_matrix(p);
      const Matrix b = to_matrix(q);
      const bool dense = (a * b - b * a).cwiseAbs().maxCoeff() < 1e-12;
      if (dense != p.commutes_with(q)) ++mismatches;
    }
    s.check("pauli", "commutation matches dense commutator", mismatches == 0,
            std::to_string(mismatches) + " mismatches", "0");
  });
  s.guarded("pauli", "decompose inverts to_matrix", [&] {
    Rng rng = s.rng(3);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const Matrix m = random_matrix(8, rng);
      worst = std::max(worst, (to_matrix(decompose(m)) - m).cwiseAbs().maxCoeff());
    }
    s.check("pauli", "decompose inverts to_matrix", worst < 1e-12,
            fmt::format("{:.2e}", worst), "< 1e-12");
  });
  s.guarded("pauli", "Hermitian split recombines", [&] {
    Rng rng = s.rng(4);
    double worst = 0.0;
    bool real = true;
    for (int i = 0; i < 20; ++i) {
      const Matrix m = random_matrix(4, rng);
      const auto split = hermitian_split(decompose(m));
      real = real && split.hermitian.is_real() && split.anti_hermitian.is_real();
      const Matrix back = to_matrix(split.hermitian) - kI * to_matrix(split.anti_hermitian);
      worst = std::max(worst, (back - m).cwiseAbs().maxCoeff());
    }
    s.check("pauli", "Hermitian split recombines", worst < 1e-12 && real,
            fmt::format("{:.2e}, parts real: {}", worst, real), "< 1e-12, true");
  });
}

void model_checks(Suite& s) {
  s.guarded("model", "minimal shift makes H_i - E_i0 PSD", [&] {
    Rng rng = s.rng(10);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
      const Matrix m = random_matrix(4, rng);
      const auto model = NonHermitianModel::from_complex_sum(decompose(m));
      const Matrix hi = to_matrix(model.hi(0.0)) -
                        model.shift()(0.0) * Matrix::Identity(4, 4);
      worst = std::min(worst, min_eigenvalue(hi));
    }
    s.check("model", "minimal shift makes H_i - E_i0 PSD", worst > -1e-10,
            fmt::format("lambda_min = {:.2e}", worst), ">= -1e-10");
  });
  s.guarded("model", "K(k) is Hermitian", [&] {
    Rng rng = s.rng(11);
    const auto model = random_dissipative_model(2, rng);
    bool ok = true;
    for (double k : {-3.0, -0.5, 0.0, 2.5}) ok = ok && model.k_generator(k, 0.0).is_real();
    s.check("model", "K(k) is Hermitian", ok, ok ? "real" : "complex", "real coefficients");
  });
}

void kernel_checks(Suite& s) {
  s.guarded("kernel", "Cauchy rule integrates the truncated kernel", [&] {
    const Kernel k = Kernel::cauchy(1e-3);
    const auto rule = k.quadrature_rule(1.0, 2.0);
    const double err = std::abs(rule.weight_sum() - k.truncated_mass());
    s.check("kernel", "Cauchy rule integrates the truncated kernel", err < 1e-10,
            fmt::format("{:.2e}", err), "< 1e-10");
  });
  s.guarded("kernel", "beta kernel symmetry and truncation mass", [&] {
    const Kernel k = Kernel::beta(0.75, 1e-3);
    double sym = 0.0;
    for (double x : {0.1, 1.0, 7.5, 40.0}) sym = std::max(sym, std::abs(k.g(-x) - std::conj(k.g(x))));
    const double mass = std::abs(k.truncated_mass() - (1.0 - 1e-3) * k.l1());
    s.check("kernel", "beta kernel symmetry and truncation mass", sym < 1e-14 && mass < 1e-9,
            fmt::format("sym {:.1e}, mass {:.1e}", sym, mass), "< 1e-14, < 1e-9");
  });
  s.guarded("kernel", "importance weights are unbiased", [&] {
    const Kernel k = Kernel::beta(0.75, 1e-2);
    const auto rule = k.quadrature_rule(1.0, 1.0);
    const Complex target = rule.weight_sum();
    const std::size_t n = 100000;
    Complex sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng = s.rng(1000 + i);
      const Complex w = k.sample(rng).weight();
      sum += w;
      sq += std::norm(w);
    }
    const Complex mean = sum / double(n);
    const double se = std::sqrt((sq / n - std::norm(mean)) / n);
    const double dev = std::abs(mean - target);
    s.check("kernel", "importance weights are unbiased", dev < 4.0 * se,
            fmt::format("|mean - integral| = {:.2e}", dev), fmt::format("< 4 SE = {:.2e}", 4 * se));
  });
}

void propagate_checks(Suite& s) {
  const Generator K(2, {{PauliString::parse("XI"), 1.0, Schedule::constant(1.0)},
                        {PauliString::parse("ZZ"), 1.0, Schedule::constant(1.0)}});
  const Vector psi = StateVector::basis(2, 0).amplitudes;
  Vector exact = psi;
  evolve_exact(K, 0.0, 1.0, exact);

  s.guarded("propagate", "Trotter error falls linearly with dt", [&] {
    Vector a = psi, b = psi;
    evolve_trotter1(K, 0.0, 1.0, 0.02, a);
    evolve_trotter1(K, 0.0, 1.0, 0.01, b);
    const double ea = (a - exact).norm();
    const double eb = (b - exact).norm();
    const double ratio = ea / eb;
    s.check("propagate", "Trotter error falls linearly with dt", ratio > 1.8 && ratio < 2.2,
            fmt::format("ratio {:.3f}", ratio), "in (1.8, 2.2)");
  });
  s.guarded("propagate", "qDrift preserves the norm", [&] {
    Rng rng = s.rng(20);
    Vector v = psi;
    evolve_qdrift(K, 0.0, 1.0, 0.05, rng, v);
    const double dev = std::abs(v.norm() - 1.0);
    s.check("propagate", "qDrift preserves the norm", dev < 1e-12,
            fmt::format("{:.2e}", dev), "< 1e-12");
  });
  s.guarded("propagate", "continuous method is unbiased", [&] {
    const double tau = 0.05;
    const std::size_t n = 20000;
    Vector sum = Vector::Zero(4);
    RealVector sq = RealVector::Zero(4);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng = s.rng(20000 + i);
      const auto seq = sample_continuous_sequence(K, 0.0, 1.0, tau, rng);
      Vector v = psi;
      apply_sequence(seq, v);
      v *= std::exp(-seq.log_attenuation);
      sum += v;
      sq += v.cwiseAbs2();
    }
    const Vector mean = sum / double(n);
    const double var = (sq / double(n) - mean.cwiseAbs2()).sum();
    const double se = std::sqrt(var / double(n));
    const double dev = (mean - exact).norm();
    s.check("propagate", "continuous method is unbiased", dev < 4.0 * se,
            fmt::format("{:.2e}", dev), fmt::format("< 4 SE = {:.2e}", 4 * se));
  });
  s.guarded("propagate", "single-slice gate identity", [&] {
    Rng rng = s.rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double c = (u(rng) - 0.5) * 6.0;
      const double tau = 0.01 + 1.0 * u(rng);
      const double dtau = 1e-4 + 0.05 * u(rng);
      worst = std::max(worst, gate_identity_residual(c, tau, dtau));
    }
    s.check("propagate", "single-slice gate identity", worst < 1e-12,
            fmt::format("{:.2e}", worst), "< 1e-12");
  });
  s.guarded("propagate", "canary: (1+p) gate identity is caught", [&] {
    const double r = gate_identity_residual(0.7, 0.3, 0.01, true);
    s.check("propagate", "canary: (1+p) gate identity is caught", r > 1e-3,
            fmt::format("residual {:.2e}", r), "> 1e-3");
  });
}

void estimator_checks(Suite& s) {
  Rng rng = s.rng(30);
  const auto model = random_dissipative_model(2, rng);
  const Vector psi = random_state(4, rng);

  s.guarded("estimator", "LCHS identity (Cauchy)", [&] {
    const double err = lchs_identity_error(model, psi, 1.0, Kernel::cauchy(1e-3));
    s.check("estimator", "LCHS identity (Cauchy)", err < 2e-3,
            fmt::format("{:.2e}", err), "< 2e-3");
  });
  s.guarded("estimator", "LCHS identity (beta)", [&] {
    const double err = lchs_identity_error(model, psi, 1.0, Kernel::beta(0.75, 1e-4));
    s.check("estimator", "LCHS identity (beta)", err < 2e-3,
            fmt::format("{:.2e}", err), "< 2e-3");
  });
  s.guarded("estimator", "canary: flipped k sign is caught", [&] {
    const double err =
        lchs_identity_error(model, psi, 1.0, Kernel::beta(0.75, 1e-4), KSign::minus);
    s.check("estimator", "canary: flipped k sign is caught", err > 2e-2,
            fmt::format("{:.2e}", err), "> 2e-2");
  });
  s.guarded("estimator", "imaginary-time limit", [&] {
    PauliSum h(1);
    h.add(Complex(0.0, -1.0), PauliString::parse("Z"));
    const auto m = NonHermitianModel::from_complex_sum(h);
    PauliSum x(1);
    x.add(1.0, PauliString::parse("X"));
    const auto rule = Kernel::cauchy(1e-3).quadrature_rule(0.5, 2.0);
    const auto r = estimate_quadrature(m, x, StateVector::from_label("+").amplitudes, 0.5, rule);
    const double err = std::abs(r.value() - 1.0 / std::cosh(1.0));
    s.check("estimator", "imaginary-time limit", err < 2e-3,
            fmt::format("{:.2e}", err), "< 2e-3");
  });
  s.guarded("estimator", "sample planner", [&] {
    const auto plan = plan_samples(0.05, 0.1, 1.0, 1.0, 0.0, 0.0);
    const bool ok = plan.n_numerator == 9136 && std::abs(plan.K - 2 * std::log(160.0)) < 1e-12;
    s.check("estimator", "sample planner", ok,
            fmt::format("n = {}, K = {:.6f}", plan.n_numerator, plan.K), fmt::format("n = 9136, K = {:.6f}", 2 * std::log(160.0)));
  });
}

void lindblad_checks(Suite& s) {
  s.guarded("lindblad", "vectorized generator preserves trace", [&] {
    Rng rng = s.rng(40);
    PauliSum h(2);
    h.add(0.7, PauliString::parse("XZ"));
    h.add(-0.3, PauliString::parse("YY"));
    const LindbladModel model(h, {0.5 * random_matrix(4, rng), amplitude_damping(2, 1.0, 1)});
    const auto gen = vectorize(model);
    const Vector id = vec(Matrix::Identity(4, 4));
    const double leak = (id.adjoint() * gen.lbar_dense).norm();
    s.check("lindblad", "vectorized generator preserves trace", leak < 1e-12,
            fmt::format("{:.2e}", leak), "< 1e-12");
  });
  s.guarded("lindblad", "normal jumps give L_i >= 0", [&] {
    Rng rng = s.rng(41);
    double worst = 1.0;
    for (int i = 0; i < 10; ++i) {
      // U diag(z) U^dag is normal for any complex z.
      Eigen::HouseholderQR<Matrix> qr(random_matrix(4, rng));
      const Matrix u = qr.householderQ();
      const Matrix d = random_matrix(4, rng).diagonal().asDiagonal();
      const auto report = check_normal_positivity({u * d * u.adjoint()});
      worst = std::min(worst, report.passed ? report.lambda_min : -1.0);
    }
    s.check("lindblad", "normal jumps give L_i >= 0", worst >= -1e-9,
            fmt::format("min lambda = {:.2e}", worst), ">= -1e-9");
  });
  s.guarded("lindblad", "amplitude damping needs c_p = 0.75 (sqrt 2 - 1)", [&] {
    const auto report = check_normal_positivity({amplitude_damping(1, 1.5, 0)});
    const double expected = -0.75 * (std::numbers::sqrt2 - 1.0);
    const double err = std::abs(report.lambda_min - expected);
    s.check("lindblad", "amplitude damping needs c_p = 0.75 (sqrt 2 - 1)",
            err < 1e-10 && !report.applicable,
            fmt::format("lambda_min = {:.6f}", report.lambda_min),
            fmt::format("{:.6f}, not normal", expected));
  });
  s.guarded("lindblad", "amplitude damping decay", [&] {
    const LindbladModel model(PauliSum(1), {amplitude_damping(1, 1.5, 0)});
    const auto gen = vectorize(model);
    Matrix one = Matrix::Zero(2, 2);
    one(1, 1) = 1.0;
    const auto obs = open_observable(one, one);
    const auto rule = lindblad_rule(gen, Kernel::cauchy(1e-3), 1.0);
    const auto r = expectation_quadrature_sweep(gen, obs, {1.0}, rule, {});
    const double exact = exact_reference(model, one, 1.0)(1, 1).real();
    const double err = std::max(std::abs(r[0].value - std::exp(-1.5)),
                                std::abs(exact - std::exp(-1.5)));
    s.check("lindblad", "amplitude damping decay", err < 2e-3,
            fmt::format("{:.2e}", err), "< 2e-3");
  });
}

void cli_checks(Suite& s) {
  s.guarded("cli", "CSV round trip", [&] {
    std::vector<ResultRow> rows(2);
    rows[0] = {0.05, "continuous", 0.1 + 0.2, 1e-3, 0.3, 100000, 42};
    rows[1] = {0.1, "exact-quadrature", std::nan(""), 0.0, std::nullopt, 0, 42};
    const std::string text = to_csv(rows);
    const bool ok = to_csv(parse_csv(text)) == text &&
                    text.rfind(std::string(kCsvHeader) + "\n", 0) == 0;
    s.check("cli", "CSV round trip", ok, ok ? "identical" : "differs", "identical");
  });
}

}  // namespace

NonHermitianModel random_dissipative_model(std::size_t n_qubits, Rng& rng) {
  const Eigen::Index dim = Eigen::Index{1} << n_qubits;
  const Matrix a = random_matrix(dim, rng);
  const Matrix b = random_matrix(dim, rng) / std::sqrt(double(dim));
  const Matrix hr = 0.25 * (a + a.adjoint());
  const Matrix hi = 0.5 * b.adjoint() * b;
  return NonHermitianModel::from_complex_sum(decompose(Matrix(hr - kI * hi)))
      .with_shift(Schedule::constant(0.0));
}

double lchs_identity_error(const NonHermitianModel& model, const Vector& psi,
                           double T, const Kernel& kernel, KSign sign) {
  const auto summary = spectral_summary(model, T);
  const auto rule = kernel.quadrature_rule(T, summary.max_anti_norm);
  const auto states =
      lchs_states(model.with_k_sign(sign), psi, {T}, rule, PropagatorSpec{});
  const auto exact = evolve_nonhermitian(model, psi, {T});
  return (model.shift_factor(T) * states[0] - exact[0]).norm();
}

std::vector<CheckResult> run_validation(const ValidationOptions& options) {
  Suite s(options);
  pauli_checks(s);
  model_checks(s);
  kernel_checks(s);
  propagate_checks(s);
  estimator_checks(s);
  lindblad_checks(s);
  cli_checks(s);
  return s.take();
}

}  // namespace nhqmc
