#include <catch_amalgamated.hpp>

#include <cmath>

#include "nhqmc/errors.hpp"
#include "nhqmc/estimator.hpp"
#include "nhqmc/lindblad.hpp"

using namespace nhqmc;
using Catch::Approx;

namespace {

PauliSum single(Complex c, const char* label) {
  PauliSum s(PauliString::parse(label).size());
  s.add(c, PauliString::parse(label));
  return s;
}

// H = -i Z: e^{-iHt}|+> has amplitudes e^{-t}, e^{t}, so <X> = sech(2t).
NonHermitianModel qite() { return NonHermitianModel::from_complex_sum(single(Complex(0, -1), "Z")); }

}  // namespace

TEST_CASE("overlaps", "[estimator]") {
  const auto rabi = NonHermitianModel::from_complex_sum(single(1.0, "X"));
  const Vector zero = StateVector::basis(1, 0).amplitudes;
  Rng rng = make_stream(1, StreamId::validation, 0);
  const auto o = overlap(rabi, 3.0, -1.0, PauliString::parse("Z"), 0.8, {}, zero, rng);
  CHECK(o.value.real() == Approx(std::cos(1.6)).margin(1e-12));
  CHECK(std::abs(o.value.imag()) < 1e-12);
  CHECK(o.log_weight == 0.0);

  // Different k on each side: <+| e^{i k' Z t} Z e^{-i k Z t} |+> for the shifted QITE model.
  const auto m = qite();
  const Vector plus = StateVector::from_label("+").amplitudes;
  const double t = 0.3, kp = 1.5, k = -0.5;
  const auto q = overlap(m, kp, k, PauliString::parse("X"), t, {}, plus, rng);
  // K(k) = k (Z + 1); on |0> the phase is e^{-2ik t}, on |1> it is 1.
  const Complex expected = 0.5 * (std::exp(Complex(0, 2.0 * kp * t)) + std::exp(Complex(0, -2.0 * k * t)));
  CHECK(std::abs(q.value - expected) < 1e-12);
}

TEST_CASE("shot readout", "[estimator][statistical]") {
  Rng rng = make_stream(2, StreamId::validation, 0);
  CHECK(readout(Complex(0.6, -0.2), {}, rng) == Complex(0.6, -0.2));
  const std::uint64_t shots = 1000000;
  const Complex r = readout(Complex(0.6, -0.2), {ReadoutMode::shots, shots}, rng);
  CHECK(std::abs(r.real() - 0.6) < 4.0 * std::sqrt((1 - 0.36) / shots));
  CHECK(std::abs(r.imag() + 0.2) < 4.0 * std::sqrt((1 - 0.04) / shots));
  CHECK_THROWS_AS(readout(Complex(1.5, 0.0), {ReadoutMode::shots, 10}, rng), NumericalError);
}

TEST_CASE("imaginary-time evolution", "[estimator]") {
  const auto m = qite();
  const Vector plus = StateVector::from_label("+").amplitudes;
  const PauliSum x = single(1.0, "X");
  const std::vector<double> times{0.25, 0.5, 1.0};

  const auto exact = exact_expectations(m, x, plus, times);
  for (std::size_t j = 0; j < times.size(); ++j) {
    CHECK(exact[j] == Approx(1.0 / std::cosh(2.0 * times[j])).epsilon(1e-8));
  }

  const Kernel c = Kernel::cauchy(1e-3);
  const auto rule = c.quadrature_rule(1.0, spectral_summary(m, 1.0).max_norm);
  const auto q = estimate_quadrature_sweep(m, x, plus, times, rule, {});
  for (std::size_t j = 0; j < times.size(); ++j) {
    INFO("t = " << times[j]);
    CHECK(std::abs(q[j].value() - exact[j]) < 2e-3);
    CHECK(std::abs(q[j].ratio.imag()) < 1e-10);
  }

  EstimatorOptions opt;
  opt.n_numerator = opt.n_denominator = 20000;
  opt.seed = 5;
  const auto mc = estimate_sweep(m, ObservableSpec::from_sum(x), plus, times, c, {}, opt);
  for (std::size_t j = 0; j < times.size(); ++j) {
    INFO("t = " << times[j] << " estimate " << mc[j].value() << " se " << mc[j].ratio_se);
    CHECK(mc[j].denominator_resolved);
    CHECK(std::abs(mc[j].value() - exact[j]) < 3.0 * mc[j].ratio_se + 2e-3);
  }
}

TEST_CASE("Hermitian limit is exact", "[estimator]") {
  const auto rabi = NonHermitianModel::from_complex_sum(single(1.0, "X"));
  const Vector zero = StateVector::basis(1, 0).amplitudes;
  const Kernel c = Kernel::cauchy(1e-2);
  const auto rule = c.quadrature_rule(1.0, 1.0);
  const auto r = estimate_quadrature(rabi, single(1.0, "Z"), zero, 1.0, rule);
  CHECK(r.value() == Approx(std::cos(2.0)).margin(1e-12));
  CHECK(std::abs(r.ratio.imag()) < 1e-12);
}

TEST_CASE("identity observable gives one", "[estimator]") {
  const auto m = qite();
  const Vector plus = StateVector::from_label("+").amplitudes;
  const auto obs = ObservableSpec::from_sum(PauliSum::identity(1));
  EstimatorOptions opt;
  opt.n_numerator = 4000;
  opt.paired = true;
  const auto paired = estimate_sweep(m, obs, plus, {0.5, 1.0}, Kernel::cauchy(1e-2), {}, opt);
  for (const auto& r : paired) CHECK(std::abs(r.ratio - 1.0) < 1e-12);

  opt.paired = false;
  opt.n_denominator = 4000;
  const auto split = estimate_sweep(m, obs, plus, {0.5, 1.0}, Kernel::cauchy(1e-2), {}, opt);
  for (const auto& r : split) CHECK(std::abs(r.value() - 1.0) < 3.0 * r.ratio_se);
}

TEST_CASE("results do not depend on the worker count", "[estimator]") {
  const auto m = qite();
  const Vector plus = StateVector::from_label("+").amplitudes;
  const auto obs = ObservableSpec::from_sum(single(1.0, "X"));
  PropagatorSpec cont;
  cont.method = Method::continuous;
  cont.tau = 0.1;
  EstimatorOptions opt;
  opt.n_numerator = opt.n_denominator = 700;
  opt.block_size = 64;
  opt.seed = 99;
  const auto a = estimate_sweep(m, obs, plus, {0.3, 0.6}, Kernel::beta(0.75, 1e-2), cont, opt);
  opt.workers = 3;
  const auto b = estimate_sweep(m, obs, plus, {0.3, 0.6}, Kernel::beta(0.75, 1e-2), cont, opt);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a[j].ratio == b[j].ratio);
    CHECK(a[j].ratio_se == b[j].ratio_se);
  }
  opt.seed = 100;
  const auto c = estimate_sweep(m, obs, plus, {0.3, 0.6}, Kernel::beta(0.75, 1e-2), cont, opt);
  CHECK(c[0].ratio != a[0].ratio);
}

TEST_CASE("sample planner", "[estimator]") {
  const auto p = plan_samples(0.05, 0.1, 1.0, 1.0, 1.0, 0.0);
  CHECK(p.K == Approx(10.150348).epsilon(1e-7));
  CHECK(p.n_numerator == 9136);
  CHECK(p.n_denominator == 9136);
  CHECK_FALSE(p.exceeds_ceiling);

  const auto half = plan_samples(0.05, 0.05, 1.0, 1.0, 1.0, 0.0);
  CHECK(half.raw == Approx(4.0 * p.raw));

  const auto grow = plan_samples(0.05, 0.1, 1.0, 1.0, 2.0, 0.5);
  CHECK(grow.raw == Approx(p.raw * std::exp(4.0)));
  CHECK(plan_samples(0.05, 1e-4, 5.0, 2.0, 3.0, 2.0).exceeds_ceiling);

  CHECK(plan_samples_ground(0.05, 0.1, 1.0, 1.0, 0.5).raw == Approx(4.0 * p.raw));
  CHECK_THROWS_AS(plan_samples(0.0, 0.1, 1.0, 1.0, 1.0, 0.0), InputError);
}

TEST_CASE("denominator bounds", "[estimator]") {
  const auto herm = NonHermitianModel::from_complex_sum(single(1.0, "X"));
  const auto hb = bound_denominator(herm, 1.0);
  CHECK(hb.first == Approx(1.0));
  CHECK(hb.second == Approx(1.0));

  const auto m = qite();
  const auto b = bound_denominator(m, 1.0);
  CHECK(b.first == Approx(std::exp(-4.0)));
  CHECK(b.second == Approx(1.0));

  // Shifted squared norm for |+> is (1 + e^{-4T}) / 2.
  const Vector plus = StateVector::from_label("+").amplitudes;
  const auto rule = Kernel::cauchy(1e-3).quadrature_rule(1.0, 2.0);
  const auto r = estimate_quadrature(m, single(1.0, "X"), plus, 1.0, rule);
  const double d = r.denominator.mean.real();
  CHECK(d == Approx(0.5 * (1.0 + std::exp(-4.0))).epsilon(3e-3));
  CHECK(d >= b.first);
  CHECK(d <= b.second);
}

TEST_CASE("the ratio does not depend on the shift", "[estimator][property]") {
  const auto m = qite();
  const Vector plus = StateVector::from_label("+").amplitudes;
  const PauliSum x = single(1.0, "X");
  const double exact = 1.0 / std::cosh(2.0);
  for (double e : {-1.0, -1.5, -3.0}) {
    const auto moved = m.with_shift(Schedule::constant(e));
    const auto rule = Kernel::cauchy(1e-3).quadrature_rule(1.0, spectral_summary(moved, 1.0).max_norm);
    const auto r = estimate_quadrature(moved, x, plus, 1.0, rule);
    INFO("shift " << e);
    CHECK(std::abs(r.value() - exact) < 2e-3);
  }
}

TEST_CASE("invalid estimator input", "[estimator]") {
  const auto m = qite();
  const Vector plus = StateVector::from_label("+").amplitudes;
  const auto obs = ObservableSpec::from_sum(single(1.0, "X"));
  EstimatorOptions opt;
  opt.n_numerator = 0;
  CHECK_THROWS_AS(estimate_sweep(m, obs, plus, {1.0}, Kernel::cauchy(1e-2), {}, opt), InputError);
  opt.n_numerator = 10;
  CHECK_THROWS_AS(estimate_sweep(m, obs, plus, {1.0, 0.5}, Kernel::cauchy(1e-2), {}, opt), InputError);
  CHECK_THROWS_AS(estimate_sweep(m, obs, StateVector::basis(2, 0).amplitudes, {1.0},
                                 Kernel::cauchy(1e-2), {}, opt),
                  InputError);
}
