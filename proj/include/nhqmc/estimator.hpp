#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "nhqmc/kernel.hpp"
#include "nhqmc/model.hpp"
#include "nhqmc/pauli.hpp"
#include "nhqmc/propagate.hpp"
#include "nhqmc/random.hpp"

namespace nhqmc {

/// O = sum_n o_n O_n with the term sampler p_n = |o_n| / ||O||_1.
struct ObservableSpec {
  PauliSum terms;
  double l1 = 0.0;
  std::vector<double> cumulative;  // running sum of p_n
  std::vector<Complex> phases;     // o_n / |o_n|

  static ObservableSpec from_sum(const PauliSum& o);
  std::size_t sample(Rng& rng) const;
};

enum class ReadoutMode { exact, shots };

struct Readout {
  ReadoutMode mode = ReadoutMode::exact;
  std::uint64_t shots = 0;
};

/// Ancilla X/Y emulation: X averages to Re(value), Y to -Im(value).
Complex readout(Complex value, const Readout& mode, Rng& rng);

/// Complex sample mean with the standard errors of its components.
struct ComplexStat {
  Complex mean;
  double se_re = 0.0;
  double se_im = 0.0;
  double cov_re_im = 0.0;  // covariance of the two mean components
  std::size_t n = 0;

  double se() const;
};

struct EstimateResult {
  double t = 0.0;
  ComplexStat numerator;
  ComplexStat denominator;
  Complex ratio;
  double ratio_se = 0.0;     // standard error of Re(ratio), delta method
  double ratio_se_im = 0.0;  // standard error of Im(ratio)
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  /// False when |D| < 3 SE(D); the ratio is then meaningless.
  bool denominator_resolved = true;

  double value() const { return ratio.real(); }
};

struct EstimatorOptions {
  std::size_t n_numerator = 10000;
  std::size_t n_denominator = 10000;
  Readout readout;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  /// Reuse each (k', k) pair for both loops instead of independent loops.
  bool paired = false;
  std::size_t block_size = 256;
  std::size_t max_qubits = kDefaultDenseCap;
};

/// <psi| U^dagger(T, k') sigma U(T, k) |psi> for one realization of each
/// propagator. The returned weight is the log importance factor of the two
/// realizations.
struct OverlapValue {
  Complex value;
  double log_weight = 0.0;
};
OverlapValue overlap(const NonHermitianModel& model, double k_prime, double k,
                     const PauliString& term, double T,
                     const PropagatorSpec& propagator, const Vector& psi,
                     Rng& rng, std::size_t max_qubits = kDefaultDenseCap);

/// Monte Carlo ratio estimator on a grid of increasing times. Every draw
/// carries its realizations through the whole grid.
std::vector<EstimateResult> estimate_sweep(
    const NonHermitianModel& model, const ObservableSpec& observable,
    const Vector& psi, const std::vector<double>& times, const Kernel& kernel,
    const PropagatorSpec& propagator, const EstimatorOptions& options);

/// Single-time estimate; throws DenominatorError when D is unresolved.
EstimateResult estimate(const NonHermitianModel& model,
                        const ObservableSpec& observable, const Vector& psi,
                        double T, const Kernel& kernel,
                        const PropagatorSpec& propagator,
                        const EstimatorOptions& options);

EstimateResult estimate_continuous(const NonHermitianModel& model,
                                   const ObservableSpec& observable,
                                   const Vector& psi, double T,
                                   const Kernel& kernel, double tau,
                                   const EstimatorOptions& options);

/// Shifted LCHS vectors sum_m c_m U(t, k_m) psi at each time. Only
/// deterministic propagators are accepted.
std::vector<Vector> lchs_states(const NonHermitianModel& model,
                                const Vector& psi,
                                const std::vector<double>& times,
                                const QuadratureRule& rule,
                                const PropagatorSpec& propagator,
                                unsigned workers = 1,
                                std::size_t max_qubits = kDefaultDenseCap);

std::vector<EstimateResult> estimate_quadrature_sweep(
    const NonHermitianModel& model, const PauliSum& observable,
    const Vector& psi, const std::vector<double>& times,
    const QuadratureRule& rule, const PropagatorSpec& propagator,
    unsigned workers = 1, std::size_t max_qubits = kDefaultDenseCap);

EstimateResult estimate_quadrature(const NonHermitianModel& model,
                                   const PauliSum& observable,
                                   const Vector& psi, double T,
                                   const QuadratureRule& rule,
                                   const PropagatorSpec& propagator = {},
                                   std::size_t max_qubits = kDefaultDenseCap);

/// Monte Carlo estimate of the shifted amplitude
/// integral g(k) <bra| U(t, k) |ket> dk at each time (no denominator).
std::vector<ComplexStat> amplitude_sweep(const NonHermitianModel& model,
                                         const Vector& bra, const Vector& ket,
                                         const std::vector<double>& times,
                                         const Kernel& kernel,
                                         const PropagatorSpec& propagator,
                                         const EstimatorOptions& options);

/// Reference exp(-iHt) psi (unshifted) at each time, by self-converged RK4.
std::vector<Vector> evolve_nonhermitian(const NonHermitianModel& model,
                                        const Vector& psi,
                                        const std::vector<double>& times);

/// <O> = <phi|O|phi> / <phi|phi> with phi = exp(-iHt) psi.
std::vector<double> exact_expectations(const NonHermitianModel& model,
                                       const PauliSum& observable,
                                       const Vector& psi,
                                       const std::vector<double>& times);

struct SamplingPlan {
  double delta = 0.0;
  double eta = 0.0;
  double K = 0.0;          // 2 ln(8 / delta)
  double raw = 0.0;        // unrounded sample count
  std::size_t n_numerator = 0;
  std::size_t n_denominator = 0;
  bool exceeds_ceiling = false;
  double d_lower = 0.0;
  double d_upper = 1.0;
};

/// n = K (2 ||O||_1 + 1)^2 ||g||_1^4 e^{4 T Delta} / eta^2.
SamplingPlan plan_samples(double delta, double eta, double o_l1, double g_l1,
                          double T, double delta_ei,
                          double ceiling = 1e9);
/// Time-independent variant dividing by p_g^2 instead of e^{4 T Delta}.
SamplingPlan plan_samples_ground(double delta, double eta, double o_l1,
                                 double g_l1, double p_g,
                                 double ceiling = 1e9);

/// e^{-2 int (E_max - E_i0)} <= D <= e^{-2 int (E_min - E_i0)}.
std::pair<double, double> bound_denominator(
    const NonHermitianModel& model, double T, std::size_t grid_points = 0,
    std::size_t max_qubits = kDefaultDenseCap);

}  // namespace nhqmc
