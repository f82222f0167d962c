#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nhqmc/errors.hpp"
#include "nhqmc/lindblad.hpp"
#include "oracle.hpp"

using namespace nhqmc;
using Catch::Approx;

namespace {

Matrix projector(std::size_t n, std::uint64_t index) {
  const Vector b = StateVector::basis(n, index).amplitudes;
  return b * b.adjoint();
}

std::vector<double> sorted_real_parts(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m);
  std::vector<double> re;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) re.push_back(es.eigenvalues()(i).real());
  std::sort(re.begin(), re.end());
  return re;
}

// Driven, damped qubit used by the estimator checks.
LindbladModel driven_qubit(double gamma) {
  PauliSum h(1);
  h.add(0.7, PauliString::parse("X"));
  return LindbladModel(h, {amplitude_damping(1, gamma, 0)});
}

}  // namespace

TEST_CASE("vectorization identity", "[lindblad][property]") {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 5; ++i) {
    const oracle::Mat a = oracle::random_matrix(4, rng);
    const oracle::Mat b = oracle::random_matrix(4, rng);
    const oracle::Mat rho = oracle::random_matrix(4, rng);
    const Vector lhs = vec(a * rho * b);
    const Vector rhs = oracle::kron(a, b.transpose()) * vec(rho);
    REQUIRE((lhs - rhs).norm() < 1e-12);
    REQUIRE((unvec(vec(rho), 4) - rho).norm() == 0.0);
  }
}

TEST_CASE("generator matches the master equation", "[lindblad]") {
  const LindbladModel empty(PauliSum(1), {});
  CHECK(vectorize(empty).lbar_dense.norm() == 0.0);

  std::mt19937_64 rng(43);
  PauliSum h(2);
  h.add(0.4, PauliString::parse("XY"));
  h.add(-1.1, PauliString::parse("ZI"));
  h.add(0.3, PauliString::parse("IX"));
  const LindbladModel m(h, {amplitude_damping(2, 0.8, 1), dephasing(2, 0.5, 0), oracle::random_matrix(4, rng)});
  const auto gen = vectorize(m);
  const oracle::Mat reference = oracle::superoperator(4, [&](const oracle::Mat& r) { return m.rhs(r); });
  CHECK((gen.lbar_dense - reference).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((to_matrix(gen.lbar) - reference).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((to_matrix(gen.l) - Complex(0, 1) * reference).cwiseAbs().maxCoeff() < 1e-12);

  // Trace preservation: vec(I)^T L_bar = 0.
  const Vector id = vec(Matrix::Identity(4, 4));
  CHECK((id.transpose() * gen.lbar_dense).norm() < 1e-12);
}

TEST_CASE("amplitude damping spectrum and shift", "[lindblad]") {
  const double gamma = 1.5;
  const LindbladModel ad(PauliSum(1), {amplitude_damping(1, gamma, 0)});
  const auto gen = vectorize(ad);
  const auto re = sorted_real_parts(gen.lbar_dense);
  CHECK(re[0] == Approx(-gamma));
  CHECK(re[1] == Approx(-gamma / 2));
  CHECK(re[2] == Approx(-gamma / 2));
  CHECK(re[3] == Approx(0.0).margin(1e-12));

  CHECK(gen.cp_minimal == Approx(0.75 * (std::numbers::sqrt2 - 1.0)).epsilon(1e-10));
  CHECK(gen.cp_minimal == Approx(0.310660).epsilon(1e-5));
  CHECK(gen.cp == Approx(gen.cp_minimal + 1e-6));
  CHECK(vectorize(ad, 0.3607).cp == 0.3607);
  CHECK_THROWS_AS(vectorize(ad, 0.2), InputError);

  const Matrix li = to_matrix(gen.li) + gen.cp * Matrix::Identity(4, 4);
  Eigen::SelfAdjointEigenSolver<Matrix> es(li);
  CHECK(es.eigenvalues()(0) >= -1e-12);

  const LindbladModel unitary(ising_chain(3, 1.0, 0.5), {});
  CHECK(vectorize(unitary).cp_minimal == 0.0);
  CHECK_THROWS_AS(vectorize(LindbladModel(ising_chain(6, 1.0, 1.0), {}), std::nullopt, 10), ResourceError);
}

TEST_CASE("normal jumps give a positive dissipator", "[lindblad][property]") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const oracle::Mat a = oracle::random_matrix(4, rng);
    Eigen::ComplexEigenSolver<Matrix> es(a + a.adjoint());
    const Matrix v = es.eigenvectors();
    Vector d(4);
    for (int j = 0; j < 4; ++j) d(j) = Complex(u(rng), u(rng));
    const Matrix normal = v * d.asDiagonal() * v.adjoint();
    const auto report = check_normal_positivity({normal});
    REQUIRE(report.applicable);
    REQUIRE(report.passed);
    REQUIRE(report.lambda_min >= -1e-9);
  }
  const auto z = check_normal_positivity({dephasing(1, 2.0, 0)});
  CHECK(z.passed);
  CHECK(z.lambda_min == Approx(0.0).margin(1e-12));

  const auto ad = check_normal_positivity({amplitude_damping(1, 1.5, 0)});
  CHECK_FALSE(ad.applicable);
  CHECK_FALSE(ad.passed);
  CHECK(ad.lambda_min == Approx(-0.75 * (std::numbers::sqrt2 - 1.0)).epsilon(1e-10));
  CHECK_FALSE(ad.notice.empty());
}

TEST_CASE("reference solver", "[lindblad]") {
  const double gamma = 0.9;
  const LindbladModel ad(PauliSum(1), {amplitude_damping(1, gamma, 0)});
  const Matrix excited = projector(1, 1);
  const auto sweep = exact_reference_sweep(ad, excited, {0.5, 1.0, 3.0});
  for (std::size_t j = 0; j < 3; ++j) {
    const double t = std::vector<double>{0.5, 1.0, 3.0}[j];
    CHECK(sweep[j](1, 1).real() == Approx(std::exp(-gamma * t)).epsilon(1e-9));
    CHECK(sweep[j].trace().real() == Approx(1.0).epsilon(1e-12));
  }

  const PauliSum h = ising_chain(2, 1.0, 0.6);
  const LindbladModel closed(h, {});
  const Matrix rho0 = projector(2, 1);
  const oracle::Mat u = oracle::expm(Complex(0, -1.3) * to_matrix(h));
  CHECK((exact_reference(closed, rho0, 1.3) - u * rho0 * u.adjoint()).cwiseAbs().maxCoeff() < 1e-9);

  // The ground state of a pure damping channel is stationary.
  const Matrix ground = projector(2, 0);
  const LindbladModel two(PauliSum(2), {amplitude_damping(2, 1.0, 0), amplitude_damping(2, 2.0, 1)});
  CHECK(two.rhs(ground).norm() == 0.0);
  CHECK((exact_reference(two, ground, 2.0) - ground).norm() < 1e-12);
}

TEST_CASE("relaxation time", "[lindblad]") {
  const auto at = [](double gamma) {
    return steady_time(vectorize(LindbladModel(PauliSum(1), {amplitude_damping(1, gamma, 0)})));
  };
  CHECK(at(1.5) == Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(at(3.0) == Approx(0.5 * at(1.5)).epsilon(1e-9));
  CHECK(std::isinf(steady_time(vectorize(LindbladModel(ising_chain(2, 1.0, 0.5), {})))));
}

TEST_CASE("open-system observable", "[lindblad]") {
  std::mt19937_64 rng(53);
  const oracle::Mat o = oracle::random_matrix(2, rng);
  const oracle::Mat a = oracle::random_matrix(2, rng);
  const Matrix rho = a * a.adjoint() / (a * a.adjoint()).trace();
  const auto obs = open_observable(o, rho);
  CHECK(obs.bra.norm() == Approx(1.0));
  CHECK(obs.ket.norm() == Approx(1.0));
  CHECK(std::abs(obs.prefactor * obs.bra.dot(obs.ket) - (o * rho).trace()) < 1e-12);
}

TEST_CASE("LCHS reproduces the damped dynamics", "[lindblad]") {
  const LindbladModel m = driven_qubit(1.2);
  const auto gen = vectorize(m);
  const Matrix rho0 = projector(1, 1);
  const Matrix o = projector(1, 1);
  const auto obs = open_observable(o, rho0);
  const std::vector<double> times{0.25, 0.75, 1.5};
  const auto exact = exact_reference_sweep(m, rho0, times);

  const Kernel c = Kernel::cauchy(1e-3);
  const auto q = expectation_quadrature_sweep(gen, obs, times, lindblad_rule(gen, c, 1.5), {});
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double truth = (o * exact[j]).trace().real();
    INFO("t = " << times[j] << " truth " << truth << " got " << q[j].value);
    CHECK(std::abs(q[j].value - truth) < 2e-3);
    CHECK(std::abs(q[j].imag_residual) < 2e-3);
  }

  EstimatorOptions opt;
  opt.n_numerator = 20000;
  opt.seed = 3;
  const auto mc = expectation_sweep(gen, obs, times, Kernel::cauchy(1e-2), {}, opt);
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double truth = (o * exact[j]).trace().real();
    INFO("t = " << times[j] << " truth " << truth << " got " << mc[j].value << " se " << mc[j].stderr_);
    CHECK(std::abs(mc[j].value - truth) < 3.0 * mc[j].stderr_ + 1e-2 * std::exp(gen.cp * times[j]));
  }
}

TEST_CASE("jump constructors and the Ising chain", "[lindblad]") {
  const Matrix g = amplitude_damping(2, 4.0, 0);
  CHECK(g(0, 2) == Complex(2.0));
  CHECK(g(1, 3) == Complex(2.0));
  CHECK(g.cwiseAbs().sum() == Approx(4.0));
  const Matrix z = dephasing(1, 2.0, 0);
  CHECK(z(0, 0).real() == Approx(1.0));
  CHECK(z(1, 1).real() == Approx(-1.0));

  const PauliSum chain = ising_chain(4, 1.0, 2.0);
  CHECK(chain.size() == 8);
  CHECK(chain.coefficient(PauliString::parse("ZIIZ")) == Complex(-1.0));
  CHECK(chain.coefficient(PauliString::parse("IXII")) == Complex(-2.0));
  CHECK(ising_chain(2, 1.0, 0.0).size() == 1);
}
