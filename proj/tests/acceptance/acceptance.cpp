// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every check uses a fixed seed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "nhqmc/commands.hpp"
#include "nhqmc/config.hpp"
#include "nhqmc/estimator.hpp"
#include "nhqmc/lindblad.hpp"
#include "nhqmc/validate.hpp"

using namespace nhqmc;

namespace {

struct Verdict {
  bool passed = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

PauliSum single(Complex c, const char* label) {
  PauliSum s(PauliString::parse(label).size());
  s.add(c, PauliString::parse(label));
  return s;
}

Matrix projector(const char* label) {
  const Vector b = StateVector::from_label(label).amplitudes;
  return b * b.adjoint();
}

LindbladModel ising_model() {
  return LindbladModel(ising_chain(4, 1.0, 2.0), {amplitude_damping(4, 1.5, 0)});
}

std::vector<double> ising_times() {
  std::vector<double> t(40);
  for (int j = 0; j < 40; ++j) t[j] = 0.05 * (j + 1);
  return t;
}

// Quadrature states for the damped Ising model, shared by criteria 8 and 10.
struct IsingQuadrature {
  double cp = 0.0;
  std::vector<Vector> states;  // unit ket vec(rho0), unshifted by e^{c_p t}
};

IsingQuadrature ising_quadrature(std::optional<double> cp) {
  const auto gen = vectorize(ising_model(), cp);
  const Kernel kernel = Kernel::beta(0.75, 1e-3);
  const auto rule = lindblad_rule(gen, kernel, 2.0);
  const auto obs = open_observable(projector("1000"), projector("1000"));
  return {gen.cp, lchs_states(gen.model(), obs.ket, ising_times(), rule, {})};
}

double open_value(const IsingQuadrature& q, const Matrix& o, std::size_t j) {
  const auto obs = open_observable(o, projector("1000"));
  return (obs.prefactor * std::exp(q.cp * ising_times()[j]) * obs.bra.dot(q.states[j])).real();
}

Verdict lchs_identity() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng = make_stream(1001, StreamId::validation, s);
    const auto model = random_dissipative_model(2, rng);
    std::normal_distribution<double> nd;
    Vector psi(4);
    for (auto& a : psi) a = Complex(nd(rng), nd(rng));
    psi.normalize();
    worst = std::max(worst, lchs_identity_error(model, psi, 1.0, Kernel::cauchy(1e-3)));
  }
  const double elapsed = seconds_since(start);
  return {worst <= 2e-3 && elapsed < 10.0,
          fmt::format("max error {:.2e} (<= 2e-3), {:.1f} s (< 10 s)", worst, elapsed)};
}

Verdict qite_limit() {
  const auto start = std::chrono::steady_clock::now();
  const auto m = NonHermitianModel::from_complex_sum(single(Complex(0, -1), "Z"));
  const Vector plus = StateVector::from_label("+").amplitudes;
  const PauliSum x = single(1.0, "X");
  const double exact = 1.0 / std::cosh(1.0);
  const Kernel kernel = Kernel::cauchy(1e-3);
  const auto rule = kernel.quadrature_rule(0.5, spectral_summary(m, 0.5).max_norm);
  const double q = estimate_quadrature(m, x, plus, 0.5, rule).value();

  EstimatorOptions opt;
  opt.n_numerator = opt.n_denominator = 100000;
  opt.seed = 2002;
  const auto mc = estimate(m, ObservableSpec::from_sum(x), plus, 0.5, kernel, {}, opt);
  const double elapsed = seconds_since(start);
  const double qerr = std::abs(q - exact);
  const double mcerr = std::abs(mc.value() - exact);
  return {qerr <= 2e-3 && mcerr <= 3.0 * mc.ratio_se && elapsed < 60.0,
          fmt::format("quadrature {:.6f} err {:.1e}; MC {:.5f} +- {:.5f} ({:.2f} se); exact {:.6f}; {:.1f} s",
                      q, qerr, mc.value(), mc.ratio_se, mcerr / mc.ratio_se, exact, elapsed)};
}

Verdict amplitude_damping_closed_form() {
  const auto start = std::chrono::steady_clock::now();
  const LindbladModel ad(PauliSum(1), {amplitude_damping(1, 1.5, 0)});
  const auto gen = vectorize(ad);
  const Matrix one = projector("1");
  const auto obs = open_observable(one, one);
  const double exact = std::exp(-1.5);
  const Kernel kernel = Kernel::cauchy(1e-3);
  const double q =
      expectation_quadrature_sweep(gen, obs, {1.0}, lindblad_rule(gen, kernel, 1.0), {})[0].value;

  EstimatorOptions opt;
  opt.n_numerator = 100000;
  opt.seed = 3003;
  const auto mc = expectation_sweep(gen, obs, {1.0}, kernel, {}, opt)[0];
  const double elapsed = seconds_since(start);
  const double qerr = std::abs(q - exact);
  const double mcerr = std::abs(mc.value - exact);
  return {qerr <= 2e-3 && mcerr <= 3.0 * mc.stderr_ && elapsed < 60.0,
          fmt::format("quadrature {:.6f} err {:.1e}; MC {:.5f} +- {:.5f} ({:.2f} se); exact {:.6f}; {:.1f} s",
                      q, qerr, mc.value, mc.stderr_, mcerr / mc.stderr_, exact, elapsed)};
}

Verdict ising_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  const RunConfig cfg = parse_config(fig3_preset());
  std::ostringstream log;
  const auto rows = run_rows(cfg, log);
  const double elapsed = seconds_since(start);

  const auto errors = [&](const std::string& method, double from) {
    std::vector<double> e;
    for (const auto& r : rows) {
      if (r.method == method && r.t >= from - 1e-12) {
        e.push_back(r.abs_error().value_or(std::numeric_limits<double>::infinity()));
      }
    }
    return e;
  };
  const auto cont = errors("continuous", 0.0);
  const auto trot = errors("trotter1-quadrature", 0.0);
  const auto qd_late = errors("qdrift", 1.0);
  const auto cont_late = errors("continuous", 1.0);
  if (cont.size() != 40 || trot.size() != 40) return {false, "missing rows"};

  double cont_mean = 0.0;
  for (double e : cont) cont_mean += e / cont.size();
  const double trot_max = *std::max_element(trot.begin(), trot.end());
  const double qd_max = *std::max_element(qd_late.begin(), qd_late.end());
  const double cont_late_max = *std::max_element(cont_late.begin(), cont_late.end());
  const bool a = cont_mean <= 0.05;
  const bool b = trot_max <= 0.05;
  const bool c = median(cont) <= median(trot) && qd_max >= 2.0 * cont_late_max;
  return {a && b && c && elapsed <= 1800.0,
          fmt::format("(a) continuous mean {:.4f} (<= 0.05) {}; (b) trotter max {:.4f} (<= 0.05) {}; "
                      "(c) median {:.4f} vs {:.4f}, qdrift late max {:.4f} vs 2 x {:.4f} {}; {:.0f} s",
                      cont_mean, a ? "ok" : "no", trot_max, b ? "ok" : "no", median(cont),
                      median(trot), qd_max, cont_late_max, c ? "ok" : "no", elapsed)};
}

Verdict continuous_unbiased() {
  std::vector<ScheduledTerm> terms{{PauliString::parse("XI"), 1.0, Schedule::constant(1.0)},
                                   {PauliString::parse("ZZ"), 1.0, Schedule::constant(1.0)}};
  const Generator k(2, terms);
  const double tau = 0.05;
  const Vector psi = StateVector::from_label("00").amplitudes;
  Vector exact = psi;
  evolve_exact(k, 0.0, 1.0, exact);

  const std::size_t n = 100000;
  Vector sum = Vector::Zero(4);
  RealVector sq = RealVector::Zero(4);
  double count_x = 0.0, count_zz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_stream(5005, StreamId::validation, i);
    const auto seq = sample_continuous_sequence(k, 0.0, 1.0, tau, rng);
    for (const auto& e : seq.events) (e.string.label() == "XI" ? count_x : count_zz) += 1.0;
    Vector v = psi;
    apply_sequence(seq, v);
    v *= std::exp(-seq.log_attenuation);
    sum += v;
    sq += v.cwiseAbs2();
  }
  const Vector mean = sum / double(n);
  const double se = std::sqrt((sq / double(n) - mean.cwiseAbs2()).sum() / double(n));
  const double dist = (mean - exact).norm();

  const double rate = 1.0 / std::sin(tau);
  const double count_se = std::sqrt(rate / n);
  const double dx = std::abs(count_x / n - rate);
  const double dzz = std::abs(count_zz / n - rate);
  const double lambda = std::exp(continuous_log_attenuation(Generator(1, {{PauliString::parse("X"), 2.0,
                                                                          Schedule::constant(1.0)}}),
                                                           0.0, 2.0, tau));
  const double plug_in = std::exp(-4.0 * std::tan(0.025));
  const bool ok = dist <= 3.0 * se && dx <= 3.0 * count_se && dzz <= 3.0 * count_se &&
                  std::abs(lambda - plug_in) <= 1e-9 && std::abs(plug_in - 0.90482) < 5e-6;
  return {ok, fmt::format("||mean - exact|| {:.2e} (3 se = {:.2e}); counts {:.3f}, {:.3f} vs {:.3f} "
                          "(3 sigma = {:.3f}); lambda {:.9f}",
                          dist, 3.0 * se, count_x / n, count_zz / n, rate, 3.0 * count_se, lambda)};
}

Verdict gate_identity() {
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double c = (u(rng) - 0.5) * 8.0;
    const double tau = 0.001 + (std::numbers::pi / 2 - 0.002) * u(rng);
    const double dtau = 1e-5 + 0.1 * u(rng);
    worst = std::max(worst, gate_identity_residual(c, tau, dtau));
  }
  const double canary = gate_identity_residual(0.9, 0.4, 0.02, true);
  return {worst <= 1e-12 && canary > 1e-6,
          fmt::format("max residual {:.1e} over 100 triples (<= 1e-12); (1 + p) variant {:.1e}", worst,
                      canary)};
}

Verdict planner() {
  const auto p = plan_samples(0.05, 0.1, 1.0, 1.0, 1.0, 0.0);
  const double k_ref = 2.0 * std::log(160.0);
  const double kc = Kernel::cauchy(0.01).k_c();
  const double kc_ref = 1.0 / std::tan(std::numbers::pi * 0.01 / 2.0);
  const double n_ref = std::ceil(k_ref * 9.0 / 0.01);
  // The quoted 10.1504 is 2 ln 160 = 10.150348 rounded up once too often, so
  // the literal is compared at 1e-4 and the plug-in value at 1e-6.
  const bool ok = std::abs(p.K / k_ref - 1.0) < 1e-6 && std::abs(p.K - 10.1504) < 1e-4 &&
                  p.n_numerator == 9136 && double(p.n_numerator) == n_ref &&
                  std::abs(kc / kc_ref - 1.0) < 1e-6 && std::abs(kc - 63.65674) < 5e-5;
  return {ok, fmt::format("K {:.6f}, n_N {}, k_c {:.5f}", p.K, p.n_numerator, kc)};
}

Verdict compensation_invariance(const IsingQuadrature& minimal, const IsingQuadrature& raised) {
  const std::size_t j = 19;  // t = 1
  const Matrix o = projector("1000");
  const double a = open_value(minimal, o, j);
  const double b = open_value(raised, o, j);
  const double exact = (o * exact_reference(ising_model(), projector("1000"), 1.0)).trace().real();
  return {std::abs(a - b) <= 5e-3,
          fmt::format("c_p {:.6f}: {:.6f}; c_p {:.4f}: {:.6f}; difference {:.1e} (<= 5e-3); exact {:.6f}",
                      minimal.cp, a, raised.cp, b, std::abs(a - b), exact)};
}

Verdict normality() {
  std::mt19937_64 rng(9009);
  std::normal_distribution<double> nd;
  double worst = std::numeric_limits<double>::infinity();
  bool all = true;
  for (int i = 0; i < 20; ++i) {
    const Eigen::Index dim = i % 2 ? 2 : 4;
    Matrix a(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) a(r, c) = Complex(nd(rng), nd(rng));
    const Eigen::HouseholderQR<Matrix> qr(a);
    const Matrix unitary = qr.householderQ();
    Vector d(dim);
    for (auto& x : d) x = Complex(nd(rng), nd(rng));
    const Matrix normal = unitary * d.asDiagonal() * unitary.adjoint();
    const auto report = check_normal_positivity({normal});
    all = all && report.applicable && report.lambda_min >= -1e-9;
    worst = std::min(worst, report.lambda_min);
  }
  const auto ad = check_normal_positivity({amplitude_damping(1, 1.5, 0)});
  const bool ad_ok = std::abs(ad.lambda_min + 0.31066) < 5e-6;
  return {all && ad_ok,
          fmt::format("min lambda over 20 normal jumps {:.2e} (>= -1e-9); amplitude damping {:.6f}", worst,
                      ad.lambda_min)};
}

Verdict trace_preservation(const IsingQuadrature& raised) {
  const auto times = ising_times();
  const Matrix id = Matrix::Identity(16, 16);
  double q_worst = 0.0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    q_worst = std::max(q_worst, std::abs(open_value(raised, id, j) - 1.0));
  }

  const auto gen = vectorize(ising_model(), raised.cp);
  const auto obs = open_observable(id, projector("1000"));
  PropagatorSpec cont;
  cont.method = Method::continuous;
  cont.tau = 0.05;
  EstimatorOptions opt;
  opt.n_numerator = 10000;
  opt.seed = 10010;
  const auto mc = expectation_sweep(gen, obs, times, Kernel::cauchy(1e-2), cont, opt);
  double z_worst = 0.0;
  for (const auto& r : mc) z_worst = std::max(z_worst, std::abs(r.value - 1.0) / r.stderr_);
  return {q_worst <= 2e-3 && z_worst <= 3.0,
          fmt::format("quadrature max |tr - 1| {:.1e} (<= 2e-3); MC max deviation {:.2f} se (<= 3) over {} times",
                      q_worst, z_worst, times.size())};
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](int id, const char* name, const std::function<Verdict()>& run) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    if (!v.passed) ++failed;
    fmt::print("{} [{}] {}: {} ({:.1f} s)\n", v.passed ? "PASS" : "FAIL", id, name, v.detail,
               seconds_since(start));
    std::cout.flush();
  };

  report(1, "LCHS operator identity", lchs_identity);
  report(2, "imaginary-time limit", qite_limit);
  report(3, "amplitude damping closed form", amplitude_damping_closed_form);
  report(4, "damped Ising chain reproduction", ising_reproduction);
  report(5, "continuous propagator unbiasedness", continuous_unbiased);
  report(6, "single-slice gate identity", gate_identity);
  report(7, "planner formulas", planner);

  IsingQuadrature minimal, raised;
  report(8, "compensation constant invariance", [&] {
    minimal = ising_quadrature(std::nullopt);
    raised = ising_quadrature(0.3607);
    return compensation_invariance(minimal, raised);
  });
  report(9, "normal jumps give positive L_i", normality);
  report(10, "trace preservation", [&] {
    if (raised.states.empty()) raised = ising_quadrature(0.3607);
    return trace_preservation(raised);
  });

  fmt::print("{} of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
