#include "nhqmc/lindblad.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "nhqmc/errors.hpp"

namespace nhqmc {

namespace {

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix dissipator(const std::vector<Matrix>& jumps, Eigen::Index dim) {
  const Matrix id = Matrix::Identity(dim, dim);
  Matrix out = Matrix::Zero(dim * dim, dim * dim);
  for (const auto& g : jumps) {
    const Matrix gg = g.adjoint() * g;
    out += kron(g, g.conjugate()) - 0.5 * kron(gg, id) -
           0.5 * kron(id, gg.transpose());
  }
  return out;
}

double lowest_eigenvalue(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::size_t qubits_of(Eigen::Index dim) {
  std::size_t n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if ((Eigen::Index{1} << n) != dim) {
    throw InputError("operator dimension is not a power of two");
  }
  return n;
}

Matrix single_qubit_embed(std::size_t n_qubits, std::size_t qubit,
                          const Matrix& op) {
  if (qubit >= n_qubits) throw InputError("jump qubit index out of range");
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t q = 0; q < n_qubits; ++q) {
    out = kron(out, q == qubit ? op : Matrix(Matrix::Identity(2, 2)));
  }
  return out;
}

}  // namespace

LindbladModel::LindbladModel(PauliSum hamiltonian, std::vector<Matrix> jumps)
    : n_qubits_(hamiltonian.n_qubits()),
      hamiltonian_(std::move(hamiltonian)),
      jumps_(std::move(jumps)) {
  if (!hamiltonian_.is_real(1e-12)) {
    throw InputError("Lindblad Hamiltonian must have real Pauli coefficients");
  }
  h_dense_ = to_matrix(hamiltonian_, kDefaultDenseCap);
  const Eigen::Index dim = Eigen::Index{1} << n_qubits_;
  for (const auto& g : jumps_) {
    if (g.rows() != dim || g.cols() != dim) {
      throw InputError("jump operator dimension does not match the register");
    }
  }
}

Matrix LindbladModel::rhs(const Matrix& rho) const {
  Matrix out = -kI * (h_dense_ * rho - rho * h_dense_);
  for (const auto& g : jumps_) {
    const Matrix gg = g.adjoint() * g;
    out += g * rho * g.adjoint() - 0.5 * (gg * rho + rho * gg);
  }
  return out;
}

Vector vec(const Matrix& m) {
  Vector out(m.rows() * m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i * m.cols() + j) = m(i, j);
  }
  return out;
}

Matrix unvec(const Vector& v, Eigen::Index dim) {
  if (v.size() != dim * dim) throw InputError("vector length is not dim^2");
  Matrix out(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) out(i, j) = v(i * dim + j);
  }
  return out;
}

NonHermitianModel VectorizedGenerator::model() const {
  std::vector<ScheduledTerm> hr_terms;
  std::vector<ScheduledTerm> hi_terms;
  for (const auto& t : lr.terms()) {
    hr_terms.push_back({t.string, t.coeff.real(), Schedule::constant(1.0)});
  }
  for (const auto& t : li.terms()) {
    hi_terms.push_back({t.string, t.coeff.real(), Schedule::constant(1.0)});
  }
  return NonHermitianModel(n_qubits, std::move(hr_terms), std::move(hi_terms),
                           Schedule::constant(-cp));
}

VectorizedGenerator vectorize(const LindbladModel& model,
                              std::optional<double> cp,
                              std::size_t max_qubits) {
  const std::size_t n = model.n_qubits();
  if (2 * n > max_qubits) {
    throw ResourceError("vectorized generator on " + std::to_string(2 * n) +
                        " qubits exceeds the dense cap");
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  const Matrix id = Matrix::Identity(dim, dim);
  const Matrix h = to_matrix(model.hamiltonian(), max_qubits);

  VectorizedGenerator gen;
  gen.n_qubits = 2 * n;
  gen.lbar_dense = -kI * (kron(h, id) - kron(id, h.transpose())) +
                   dissipator(model.jumps(), dim);
  gen.lbar = decompose(gen.lbar_dense);
  gen.l = kI * gen.lbar;
  auto split = hermitian_split(gen.l);
  gen.lr = std::move(split.hermitian);
  gen.li = std::move(split.anti_hermitian);
  gen.cp_minimal = minimal_cp(gen, model);
  if (cp) {
    if (*cp < gen.cp_minimal - 1e-12) {
      throw InputError("c_p = " + std::to_string(*cp) +
                       " is below the minimal admissible value " +
                       std::to_string(gen.cp_minimal));
    }
    gen.cp = *cp;
  } else {
    gen.cp = gen.cp_minimal + 1e-6;
  }
  return gen;
}

double minimal_cp(const VectorizedGenerator& gen, const LindbladModel& model) {
  const Matrix li = to_matrix(gen.li, gen.n_qubits);
  const double cp = std::max(0.0, -lowest_eigenvalue(li));
  double jump_l1 = 0.0;
  for (const auto& g : model.jumps()) {
    const double a = l1_norm(decompose(g));
    jump_l1 += a * a;
  }
  const double bound = 2.0 * (l1_norm(model.hamiltonian()) + jump_l1);
  if (cp > bound + 1e-9) {
    throw NumericalError("minimal c_p exceeds its l1 bound; generator is malformed");
  }
  return cp;
}

NormalityReport check_normal_positivity(const std::vector<Matrix>& jumps) {
  NormalityReport report;
  if (jumps.empty()) {
    report.passed = true;
    report.notice = "no jump operators";
    return report;
  }
  const Eigen::Index dim = jumps.front().rows();
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    const Matrix& g = jumps[i];
    if (g.rows() != dim || g.cols() != dim) {
      throw InputError("jump operators must share one square dimension");
    }
    const double defect = (g * g.adjoint() - g.adjoint() * g).norm();
    if (defect > 1e-10) {
      report.applicable = false;
      report.notice = "jump " + std::to_string(i) +
                      " is not normal; positivity is not guaranteed";
    }
  }
  qubits_of(dim);
  const Matrix d = dissipator(jumps, dim);
  // L = i L_bar, so L_i = i (L - L^dag) / 2 = -(L_bar + L_bar^dag) / 2.
  const Matrix li = -0.5 * (d + d.adjoint());
  report.lambda_min = lowest_eigenvalue(li);
  report.passed = report.applicable && report.lambda_min >= -1e-9;
  return report;
}

Matrix exact_reference(const LindbladModel& model, const Matrix& rho0,
                       double t) {
  return exact_reference_sweep(model, rho0, {t}).front();
}

std::vector<Matrix> exact_reference_sweep(const LindbladModel& model,
                                          const Matrix& rho0,
                                          const std::vector<double>& times) {
  const Eigen::Index dim = Eigen::Index{1} << model.n_qubits();
  if (rho0.rows() != dim || rho0.cols() != dim) {
    throw InputError("initial density matrix has the wrong dimension");
  }
  if (2 * model.n_qubits() > kDefaultDenseCap) {
    throw ResourceError("master-equation reference exceeds the dense cap");
  }
  double rate = l1_norm(model.hamiltonian());
  for (const auto& g : model.jumps()) rate += g.squaredNorm();
  const Derivative rhs = [&](double, const Vector& y, Vector& dy) {
    dy = vec(model.rhs(unvec(y, dim)));
  };
  std::vector<Matrix> out;
  Vector v = vec(rho0);
  double previous = 0.0;
  for (double t : times) {
    if (t < previous) throw InputError("times must be nondecreasing");
    const auto initial = static_cast<std::size_t>(
        std::max(16.0, std::ceil(4.0 * rate * (t - previous))));
    integrate_rk4(rhs, previous, t, v, 1e-10, initial);
    previous = t;
    out.push_back(unvec(v, dim));
  }
  return out;
}

double steady_time(const VectorizedGenerator& gen) {
  Eigen::ComplexEigenSolver<Matrix> es(gen.lbar_dense, false);
  if (es.info() != Eigen::Success) throw NumericalError("Liouvillian eigensolver failed");
  double slowest = 0.0;
  bool decaying = false;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double re = es.eigenvalues()(i).real();
    if (re > 1e-8) {
      throw NumericalError("Liouvillian has a growing mode; invalid generator");
    }
    if (re < -1e-10) {
      decaying = true;
      slowest = std::max(slowest, -1.0 / re);
    }
  }
  return decaying ? slowest : std::numeric_limits<double>::infinity();
}

OpenSystemObservable open_observable(const Matrix& o, const Matrix& rho0) {
  if (o.rows() != rho0.rows() || o.cols() != rho0.cols()) {
    throw InputError("observable and state dimensions differ");
  }
  const double on = o.norm();
  const double rn = rho0.norm();
  if (on == 0.0 || rn == 0.0) throw InputError("observable or state is zero");
  OpenSystemObservable out;
  out.bra = vec(o.adjoint()) / on;
  out.ket = vec(rho0) / rn;
  out.prefactor = on * rn;
  return out;
}

std::vector<ExpectationResult> expectation_sweep(
    const VectorizedGenerator& gen, const OpenSystemObservable& obs,
    const std::vector<double>& times, const Kernel& kernel,
    const PropagatorSpec& propagator, const EstimatorOptions& options) {
  const NonHermitianModel model = gen.model();
  const auto stats =
      amplitude_sweep(model, obs.bra, obs.ket, times, kernel, propagator, options);
  std::vector<ExpectationResult> out;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double scale = obs.prefactor * model.shift_factor(times[j]);
    ExpectationResult r;
    r.t = times[j];
    r.value = scale * stats[j].mean.real();
    r.stderr_ = scale * stats[j].se_re;
    r.imag_residual = scale * stats[j].mean.imag();
    r.imag_stderr = scale * stats[j].se_im;
    out.push_back(r);
  }
  return out;
}

std::vector<ExpectationResult> expectation_quadrature_sweep(
    const VectorizedGenerator& gen, const OpenSystemObservable& obs,
    const std::vector<double>& times, const QuadratureRule& rule,
    const PropagatorSpec& propagator, unsigned workers) {
  const NonHermitianModel model = gen.model();
  const auto states =
      lchs_states(model, obs.ket, times, rule, propagator, workers, gen.n_qubits);
  std::vector<ExpectationResult> out;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const Complex a = obs.prefactor * model.shift_factor(times[j]) *
                      obs.bra.dot(states[j]);
    ExpectationResult r;
    r.t = times[j];
    r.value = a.real();
    r.imag_residual = a.imag();
    out.push_back(r);
  }
  return out;
}

QuadratureRule lindblad_rule(const VectorizedGenerator& gen,
                             const Kernel& kernel, double T) {
  const SpectralSummary s = spectral_summary(gen.model(), T, 2, gen.n_qubits);
  return kernel.quadrature_rule(T, s.max_anti_norm);
}

Matrix amplitude_damping(std::size_t n_qubits, double gamma, std::size_t qubit) {
  if (gamma < 0.0) throw InputError("damping rate must be nonnegative");
  Matrix lower = Matrix::Zero(2, 2);
  lower(0, 1) = std::sqrt(gamma);
  return single_qubit_embed(n_qubits, qubit, lower);
}

Matrix dephasing(std::size_t n_qubits, double gamma, std::size_t qubit) {
  if (gamma < 0.0) throw InputError("dephasing rate must be nonnegative");
  Matrix z = Matrix::Zero(2, 2);
  z(0, 0) = std::sqrt(gamma / 2.0);
  z(1, 1) = -std::sqrt(gamma / 2.0);
  return single_qubit_embed(n_qubits, qubit, z);
}

PauliSum ising_chain(std::size_t n_qubits, double J, double h) {
  PauliSum out(n_qubits);
  const std::size_t bonds = n_qubits > 2 ? n_qubits : n_qubits - 1;
  for (std::size_t i = 0; i < bonds; ++i) {
    PauliString zz(n_qubits);
    zz.set(i, Pauli::Z);
    zz.set((i + 1) % n_qubits, Pauli::Z);
    out.add(-J, zz);
  }
  for (std::size_t i = 0; i < n_qubits; ++i) {
    PauliString x(n_qubits);
    x.set(i, Pauli::X);
    out.add(-h, x);
  }
  return out;
}

}  // namespace nhqmc
