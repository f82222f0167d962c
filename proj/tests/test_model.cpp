#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "nhqmc/lindblad.hpp"
#include "nhqmc/model.hpp"
#include "nhqmc/validate.hpp"
#include "oracle.hpp"

using namespace nhqmc;
using Catch::Approx;

namespace {

PauliSum single(Complex c, const char* label) {
  PauliSum s(PauliString::parse(label).size());
  s.add(c, PauliString::parse(label));
  return s;
}

double lambda_min(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

TEST_CASE("schedules", "[model]") {
  const auto pwl = Schedule::piecewise_linear({0.0, 1.0, 2.0}, {1.0, -1.0, 3.0});
  CHECK(pwl(0.5) == Approx(0.0));
  CHECK(pwl(5.0) == Approx(3.0));
  CHECK(pwl.integral(0.0, 2.0) == Approx(1.0));
  CHECK(pwl.abs_integral(0.0, 2.0) == Approx(0.25 + 0.25 + 0.125 + 1.125));
  CHECK(pwl.abs_bound(0.0, 2.0) == Approx(3.0));
  CHECK_THROWS(Schedule::piecewise_linear({0.0, 0.0}, {1.0, 2.0}));

  const auto h = Schedule::harmonic(1.0, 0.5, 2.0, 0.3);
  CHECK(h(0.7) == Approx(1.0 + 0.5 * std::sin(1.4 + 0.3)));
  const double exact = 1.0 * 2.0 - 0.25 * (std::cos(4.3) - std::cos(0.3));
  CHECK(h.integral(0.0, 2.0) == Approx(exact).epsilon(1e-12));
  CHECK(h.abs_integral(0.0, 2.0) == Approx(exact).epsilon(1e-10));  // no sign change
}

TEST_CASE("imaginary-time generator", "[model]") {
  const auto m = NonHermitianModel::from_complex_sum(single(Complex(0, -1), "Z"));
  CHECK(m.hr(0.0).empty());
  CHECK(std::abs(m.hi(0.0).coefficient(PauliString::parse("Z")) - 1.0) < 1e-15);
  CHECK(m.shift()(0.0) == Approx(-1.0));
  CHECK(m.shift_factor(0.5) == Approx(std::exp(0.5)));

  const auto herm = NonHermitianModel::from_complex_sum(single(1.0, "X"));
  CHECK(herm.hi(0.0).empty());
  CHECK(herm.shift()(0.0) == 0.0);
}

TEST_CASE("k generator uses the plus sign", "[model]") {
  const NonHermitianModel m(1, {{PauliString::parse("X"), 1.0, Schedule::constant(1.0)}},
                            {{PauliString::parse("Z"), 0.3, Schedule::constant(1.0)}},
                            Schedule::constant(-0.3));
  const PauliSum k = m.k_generator(2.0, 0.0);
  CHECK(std::abs(k.coefficient(PauliString::parse("X")) - 1.0) < 1e-15);
  CHECK(std::abs(k.coefficient(PauliString::parse("Z")) - 0.6) < 1e-15);
  CHECK(std::abs(k.coefficient(PauliString::parse("I")) - 0.6) < 1e-15);
  CHECK(m.k_generator(0.0, 0.0).size() == 1);

  const PauliSum flipped = m.with_k_sign(KSign::minus).k_generator(2.0, 0.0);
  CHECK(std::abs(flipped.coefficient(PauliString::parse("Z")) + 0.6) < 1e-15);

  // Generator form: same terms, time dependent.
  const Generator g = m.k_generator(2.0);
  CHECK((to_matrix(g.at(0.4)) - to_matrix(k)).norm() < 1e-15);
}

TEST_CASE("k generator is Hermitian and shift-consistent", "[model][property]") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 10; ++i) {
    Rng r = make_stream(21, StreamId::validation, i);
    const auto m = random_dissipative_model(2, r);
    const double k = u(rng);
    const Matrix kd = to_matrix(m.k_generator(k, 0.0));
    REQUIRE((kd - kd.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    const double e = u(rng) / 10.0;
    const PauliSum shifted = m.with_shift(Schedule::constant(e)).k_generator(k, 0.0);
    const PauliSum expected = m.k_generator(k, 0.0) + PauliSum::identity(2, -k * e);
    REQUIRE((to_matrix(shifted) - to_matrix(expected)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("spectral summary", "[model]") {
  const auto z = NonHermitianModel::from_complex_sum(single(Complex(0, -1), "Z"));
  const auto s = spectral_summary(z, 1.0);
  CHECK(s.delta_ei == Approx(2.0));
  CHECK(s.e_avg == Approx(2.0));
  CHECK(s.max_anti_norm == Approx(2.0));

  const auto herm = NonHermitianModel::from_complex_sum(single(1.0, "X"));
  CHECK(spectral_summary(herm, 1.0).delta_ei == 0.0);

  // Delta does not depend on the shift.
  const auto moved = z.with_shift(Schedule::constant(-3.0));
  CHECK(spectral_summary(moved, 1.0).delta_ei == Approx(2.0));

  const LindbladModel chain(ising_chain(4, 1.0, 2.0), {amplitude_damping(4, 1.5, 0)});
  const auto gen = vectorize(chain, 0.3607);
  const auto v = spectral_summary(gen.model(), 2.0, 2);
  CHECK(v.ei_min[0] == Approx(0.75 * (1.0 - std::numbers::sqrt2)).epsilon(1e-10));
  CHECK(v.ei_max[0] == Approx(0.75 * (1.0 + std::numbers::sqrt2)).epsilon(1e-10));
}

TEST_CASE("minimal shift", "[model]") {
  CHECK(minimal_shift(NonHermitianModel::from_complex_sum(single(Complex(0, -1), "Z")), 1.0)(0.3) ==
        Approx(-1.0));

  PauliSum h(1);
  h.add(Complex(0, -0.3), PauliString::parse("Z"));
  h.add(Complex(0, -0.5), PauliString::parse("I"));
  const auto m = NonHermitianModel::from_complex_sum(h);
  CHECK(m.shift().is_constant());
  CHECK(m.shift()(0.0) == Approx(0.2));

  // H_i(t) = (1 + sin t) Z has E_i0(t) = -(1 + sin t).
  std::vector<ComplexTerm> terms{
      {PauliString::parse("Z"), Complex(0, -1), Schedule::harmonic(1.0, 1.0, 1.0, 0.0)},
      {PauliString::parse("X"), 0.4, Schedule::constant(1.0)}};
  const auto td = NonHermitianModel::from_terms(1, terms, 2.0);
  CHECK_FALSE(td.time_independent());
  for (double t : {0.0, 0.5, 1.25, 2.0}) {
    CHECK(td.shift()(t) == Approx(-(1.0 + std::sin(t))).margin(1e-12));
    const Matrix hi = to_matrix(td.hi(t)) - td.shift()(t) * Matrix::Identity(2, 2);
    CHECK(lambda_min(hi) >= -1e-9);
  }
}

TEST_CASE("Lindblad generator split matches dense formulas", "[model]") {
  const LindbladModel chain(ising_chain(4, 1.0, 2.0), {amplitude_damping(4, 1.5, 0)});
  const auto gen = vectorize(chain, 0.3607);
  const Matrix l = Complex(0, 1) * gen.lbar_dense;
  const Matrix lr = 0.5 * (l + l.adjoint());
  const Matrix li = Complex(0, 0.5) * (l - l.adjoint());
  const auto m = gen.model();
  CHECK((to_matrix(m.hr(0.0)) - lr).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((to_matrix(m.hi(0.0)) - li).cwiseAbs().maxCoeff() < 1e-12);
}
