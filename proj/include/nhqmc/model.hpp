#pragma once

#include <cstddef>
#include <vector>

#include "nhqmc/pauli.hpp"
#include "nhqmc/schedule.hpp"
#include "nhqmc/types.hpp"

namespace nhqmc {

/// Real-coefficient term coeff * schedule(t) * string.
struct ScheduledTerm {
  PauliString string;
  double coeff = 1.0;
  Schedule schedule;

  double value(double t) const { return coeff * schedule(t); }
};

/// Complex-coefficient input term, split into Hermitian parts on ingestion.
struct ComplexTerm {
  PauliString string;
  Complex coeff;
  Schedule schedule;
};

/**
 * Hermitian, possibly time-dependent generator K(t) = sum_n c_n(t) sigma_n.
 * Terms keep declaration order and may repeat a string; product formulas
 * apply them in this order.
 */
class Generator {
 public:
  Generator() = default;
  Generator(std::size_t n_qubits, std::vector<ScheduledTerm> terms);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  const std::vector<ScheduledTerm>& terms() const noexcept { return terms_; }
  bool time_independent() const noexcept { return time_independent_; }

  /// Merged Pauli sum at time t.
  PauliSum at(double t) const;

 private:
  std::size_t n_qubits_ = 0;
  std::vector<ScheduledTerm> terms_;
  bool time_independent_ = true;
};

/// Sign of k in K(k) = H_r + sign * k * (H_i - E_i0). Only `plus` is correct;
/// `minus` exists so the validation suite can prove it notices the flip.
enum class KSign { plus, minus };

/**
 * H(t) = H_r(t) - i H_i(t) with both parts Hermitian, plus the shift E_i0(t)
 * that makes H_i(t) - E_i0(t) positive semidefinite.
 */
class NonHermitianModel {
 public:
  NonHermitianModel() = default;
  NonHermitianModel(std::size_t n_qubits, std::vector<ScheduledTerm> hr,
                    std::vector<ScheduledTerm> hi,
                    Schedule shift = Schedule::constant(0.0));

  /// Splits a time-independent complex sum; the shift is the minimal one.
  static NonHermitianModel from_complex_sum(const PauliSum& h);
  /// Splits scheduled complex terms; the minimal shift is tabulated over
  /// [0, T] with `grid_points` points (0 picks the default density).
  static NonHermitianModel from_terms(std::size_t n_qubits,
                                      const std::vector<ComplexTerm>& terms,
                                      double T, std::size_t grid_points = 0);

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  const std::vector<ScheduledTerm>& hr_terms() const noexcept { return hr_; }
  const std::vector<ScheduledTerm>& hi_terms() const noexcept { return hi_; }
  const Schedule& shift() const noexcept { return shift_; }
  bool time_independent() const;

  NonHermitianModel with_shift(Schedule shift) const;
  NonHermitianModel with_k_sign(KSign sign) const;

  PauliSum hr(double t) const;
  /// Unshifted anti-Hermitian part H_i(t).
  PauliSum hi(double t) const;
  /// H(t) = H_r(t) - i H_i(t), unshifted.
  PauliSum hamiltonian(double t) const;
  /// H_r(t) - i (H_i(t) - E_i0(t)).
  PauliSum shifted_hamiltonian(double t) const;

  /// K_t(k) = H_r(t) + k (H_i(t) - E_i0(t)) as a merged sum.
  PauliSum k_generator(double k, double t) const;
  /// Time-dependent K(k): H_r terms, then k * H_i terms, then the identity
  /// term carrying -k * E_i0(t).
  Generator k_generator(double k) const;

  /// exp(-integral_0^t E_i0): the factor relating exp(-iHt) to the shifted
  /// evolution.
  double shift_factor(double t) const;

 private:
  std::size_t n_qubits_ = 0;
  std::vector<ScheduledTerm> hr_;
  std::vector<ScheduledTerm> hi_;
  Schedule shift_ = Schedule::constant(0.0);
  KSign k_sign_ = KSign::plus;
};

struct SpectralSummary {
  std::vector<double> grid;
  std::vector<double> ei_min;  // lowest eigenvalue of the unshifted H_i(t)
  std::vector<double> ei_max;
  std::vector<double> shift;   // E_i0(t) on the grid
  double delta_ei = 0.0;       // max over the grid of ei_max - ei_min
  double e_avg = 0.0;          // time-averaged bandwidth
  double max_norm = 0.0;       // max spectral norm of the shifted H(t)
  double max_anti_norm = 0.0;  // max spectral norm of H_i(t) - E_i0(t)
};

/// 64 points per unit time, at least 2.
std::size_t default_grid_points(double T);

SpectralSummary spectral_summary(const NonHermitianModel& model, double T,
                                 std::size_t grid_points = 0,
                                 std::size_t max_qubits = kDefaultDenseCap);

/// E_i0(t) = lambda_min(H_i(t)); constant when the model is time-independent,
/// otherwise piecewise linear on the grid.
Schedule minimal_shift(const NonHermitianModel& model, double T,
                       std::size_t grid_points = 0,
                       std::size_t max_qubits = kDefaultDenseCap);

}  // namespace nhqmc
