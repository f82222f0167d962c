#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nhqmc/model.hpp"
#include "nhqmc/pauli.hpp"
#include "nhqmc/random.hpp"
#include "nhqmc/types.hpp"

namespace nhqmc {

/// Pure state on n qubits; amplitude index b has qubit 0 as its top bit.
struct StateVector {
  std::size_t n_qubits = 0;
  Vector amplitudes;

  StateVector() = default;
  explicit StateVector(std::size_t n);  // |0...0>
  StateVector(std::size_t n, Vector amps);

  static StateVector basis(std::size_t n, std::uint64_t index);
  /// Product state from characters 0, 1, + and -.
  static StateVector from_label(std::string_view label);

  double norm() const { return amplitudes.norm(); }
  /// <this|other>
  Complex inner(const StateVector& other) const {
    return amplitudes.dot(other.amplitudes);
  }
};

/// In place: v <- sigma v.
void apply_pauli(Vector& v, const PauliString& s);
/// <bra| sigma |ket> without forming sigma |ket>.
Complex pauli_expectation(const Vector& bra, const PauliString& s,
                          const Vector& ket);
/// In place: v <- exp(-i angle sigma) v.
void apply_pauli_rotation(Vector& v, const PauliString& s, double angle);
void apply_pauli_rotation(StateVector& state, const PauliString& s,
                          double angle);
/// sum * v for a complex Pauli sum, matrix free.
Vector apply_sum(const PauliSum& sum, const Vector& v);

/// Classic fourth-order Runge-Kutta for dv/dt = rhs(t, v), doubling the
/// step count until two successive results agree within `tol` (relative).
using Derivative = std::function<void(double t, const Vector& v, Vector& dv)>;
void integrate_rk4(const Derivative& rhs, double t0, double t1, Vector& v,
                   double tol = 1e-10, std::size_t initial_steps = 16);

/// exp(-i K tau) applied through one cached eigendecomposition.
class SpectralPropagator {
 public:
  SpectralPropagator() = default;
  explicit SpectralPropagator(const Matrix& hermitian);

  Vector evolve(const Vector& v, double tau) const;
  const RealVector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }

 private:
  RealVector eigenvalues_;
  Matrix eigenvectors_;
};

/// Reference evolution from t0 to t1 under K: eigendecomposition when K is
/// constant, self-converged RK4 otherwise.
void evolve_exact(const Generator& K, double t0, double t1, Vector& v,
                  std::size_t max_qubits = kDefaultDenseCap);

/// First-order product formula with midpoint coefficients, terms in
/// declaration order; the final step may be shorter than dt.
void evolve_trotter1(const Generator& K, double t0, double t1, double dt,
                     Vector& v);

/// qDrift: ceil((t1 - t0) / dt) random rotations, term j drawn with
/// probability |c_j| / Lambda at the slot midpoint. Identity terms are
/// applied exactly as a global phase.
void evolve_qdrift(const Generator& K, double t0, double t1, double dt,
                   Rng& rng, Vector& v);

struct GateEvent {
  double t = 0.0;
  PauliString string;
  double angle = 0.0;
};

/// One stochastic realization V of the continuous method on [t0, t1].
struct GateSequence {
  std::vector<GateEvent> events;
  /// log lambda_tot = -tan(tau / 2) * sum_n integral |c_n|
  double log_attenuation = 0.0;
  /// integral of the identity coefficient; V carries exp(-i global_phase)
  double global_phase = 0.0;
};

/// Poisson event placement (thinning for time-dependent coefficients) with
/// fixed angle tau * sgn(c_n). Identity terms go into the global phase.
GateSequence sample_continuous_sequence(const Generator& K, double t0,
                                        double t1, double tau, Rng& rng);
void apply_sequence(const GateSequence& seq, Vector& v);
void apply_sequence(const GateSequence& seq, StateVector& state);

/// -tan(tau / 2) * sum over non-identity terms of integral |c_n| on [t0, t1].
double continuous_log_attenuation(const Generator& K, double t0, double t1,
                                  double tau);

/// Event probability p and amplitude lambda for one slice of length dtau of
/// a term with coefficient c: (1 - p) I + p e^{-i sgn(c) tau sigma} equals
/// lambda e^{-i c dtau sigma}.
struct GateMixture {
  double p = 0.0;
  double lambda = 0.0;
};
GateMixture continuous_gate_mixture(double c, double tau, double dtau);

/// Largest entry of |lhs - rhs| for the 2x2 single-slice identity on a
/// Pauli X. `one_plus_p` substitutes (1 + p) for (1 - p) as a canary.
double gate_identity_residual(double c, double tau, double dtau,
                              bool one_plus_p = false);

enum class Method { exact, trotter1, qdrift, continuous };

std::string method_name(Method m);
Method parse_method(std::string_view name);

struct PropagatorSpec {
  Method method = Method::exact;
  double dt = 0.05;   // trotter1 and qdrift step
  double tau = 0.05;  // continuous rotation angle, radians

  bool stochastic() const {
    return method == Method::qdrift || method == Method::continuous;
  }
  void validate() const;
};

/**
 * Realization of U(t1, t0; k) for one generator. Stochastic methods draw a
 * fresh realization on every call; `advance` returns the log of the
 * importance weight the realization carries (1 / lambda_tot for the
 * continuous method, 0 otherwise).
 */
class Propagator {
 public:
  Propagator(Generator K, PropagatorSpec spec,
             std::size_t max_qubits = kDefaultDenseCap);

  double advance(Vector& v, double t0, double t1, Rng& rng) const;

  const Generator& generator() const { return K_; }
  const PropagatorSpec& spec() const { return spec_; }

 private:
  Generator K_;
  PropagatorSpec spec_;
  std::size_t max_qubits_;
  std::optional<SpectralPropagator> spectral_;
};

}  // namespace nhqmc
