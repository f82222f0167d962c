#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "nhqmc/estimator.hpp"
#include "nhqmc/kernel.hpp"
#include "nhqmc/model.hpp"
#include "nhqmc/pauli.hpp"
#include "nhqmc/propagate.hpp"

namespace nhqmc {

/// d rho / dt = -i [H, rho] + sum_mu (G rho G^dag - {G^dag G, rho} / 2)
class LindbladModel {
 public:
  LindbladModel(PauliSum hamiltonian, std::vector<Matrix> jumps);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  const PauliSum& hamiltonian() const noexcept { return hamiltonian_; }
  const std::vector<Matrix>& jumps() const noexcept { return jumps_; }

  /// Right-hand side of the master equation for a dense rho.
  Matrix rhs(const Matrix& rho) const;

 private:
  std::size_t n_qubits_;
  PauliSum hamiltonian_;
  Matrix h_dense_;
  std::vector<Matrix> jumps_;
};

/// Row-major vectorization: |rho>> has entry rho(i, j) at index i * d + j,
/// so A rho B maps to kron(A, B^T).
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index dim);

/**
 * Vectorized generator. L_bar acts on |rho>>, L = i L_bar plays the role of
 * a non-Hermitian Hamiltonian with L = L_r - i L_i, and c_p lifts L_i to
 * L_i + c_p >= 0.
 */
struct VectorizedGenerator {
  std::size_t n_qubits = 0;  // 2n
  Matrix lbar_dense;
  PauliSum lbar;
  PauliSum l;
  PauliSum lr;
  PauliSum li;
  double cp = 0.0;
  double cp_minimal = 0.0;

  /// Model with H_r = L_r, H_i = L_i and the constant shift -c_p.
  NonHermitianModel model() const;
};

/// Builds L_bar densely, decomposes it and fixes c_p. Without an override
/// c_p is the minimal admissible value plus 1e-6.
VectorizedGenerator vectorize(const LindbladModel& model,
                              std::optional<double> cp = std::nullopt,
                              std::size_t max_qubits = kDefaultDenseCap);

/// max(0, -lambda_min(L_i)), checked against 2 (||H||_1 + sum ||G||_1^2).
double minimal_cp(const VectorizedGenerator& gen, const LindbladModel& model);

struct NormalityReport {
  bool applicable = true;  // false when some jump is not normal
  bool passed = false;
  double lambda_min = 0.0;  // of L_i built from the jumps alone
  std::string notice;
};
NormalityReport check_normal_positivity(const std::vector<Matrix>& jumps);

/// rho(t) by self-converged RK4 on the master equation.
Matrix exact_reference(const LindbladModel& model, const Matrix& rho0,
                       double t);
std::vector<Matrix> exact_reference_sweep(const LindbladModel& model,
                                          const Matrix& rho0,
                                          const std::vector<double>& times);

/// max_j -1 / Re(Delta_j) over decaying Liouvillian modes; infinity when
/// no mode decays.
double steady_time(const VectorizedGenerator& gen);

/// tr(O rho) = prefactor * <bra|ket>> with unit bra = vec(O^dag) / ||O||_F
/// and ket = vec(rho0) / ||rho0||_F.
struct OpenSystemObservable {
  Vector bra;
  Vector ket;
  double prefactor = 0.0;
};
OpenSystemObservable open_observable(const Matrix& o, const Matrix& rho0);

struct ExpectationResult {
  double t = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
  double imag_residual = 0.0;
  double imag_stderr = 0.0;
};

/// Monte Carlo open-system expectation at each time: numerator only, scaled
/// by prefactor * e^{c_p t}.
std::vector<ExpectationResult> expectation_sweep(
    const VectorizedGenerator& gen, const OpenSystemObservable& obs,
    const std::vector<double>& times, const Kernel& kernel,
    const PropagatorSpec& propagator, const EstimatorOptions& options);

/// Quadrature version with a deterministic propagator.
std::vector<ExpectationResult> expectation_quadrature_sweep(
    const VectorizedGenerator& gen, const OpenSystemObservable& obs,
    const std::vector<double>& times, const QuadratureRule& rule,
    const PropagatorSpec& propagator, unsigned workers = 1);

/// Quadrature rule sized for the vectorized generator over [0, T].
QuadratureRule lindblad_rule(const VectorizedGenerator& gen,
                             const Kernel& kernel, double T);

/// sqrt(gamma) |0><1| on `qubit` of an n-qubit register.
Matrix amplitude_damping(std::size_t n_qubits, double gamma, std::size_t qubit);
/// sqrt(gamma / 2) Z on `qubit`; coherences decay at rate gamma.
Matrix dephasing(std::size_t n_qubits, double gamma, std::size_t qubit);

/// Periodic transverse-field Ising chain -J sum Z_i Z_{i+1} - h sum X_i.
PauliSum ising_chain(std::size_t n_qubits, double J, double h);

}  // namespace nhqmc
