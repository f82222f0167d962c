#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nhqmc/kernel.hpp"
#include "nhqmc/model.hpp"
#include "nhqmc/random.hpp"
#include "nhqmc/types.hpp"

namespace nhqmc {

struct CheckResult {
  std::string module;
  std::string name;
  bool passed = false;
  std::string observed;
  std::string expected;
};

struct ValidationOptions {
  std::uint64_t seed = 7;
  unsigned workers = 1;
  /// Called after each check, e.g. to stream progress.
  std::function<void(const CheckResult&)> on_result;
};

/// Runs the invariant checks of every module at desk scale, including the
/// mutation canaries (which pass when the injected fault is detected).
std::vector<CheckResult> run_validation(const ValidationOptions& options = {});

/// Random H = H_r - i B^dag B on n qubits with unit-scale entries, shift 0.
NonHermitianModel random_dissipative_model(std::size_t n_qubits, Rng& rng);

/// || sum_m c_m exp(-i K(k_m) T) psi * shift_factor - exp(-iHT) psi || for the
/// quadrature rule of `kernel`, with the chosen sign of k in K.
double lchs_identity_error(const NonHermitianModel& model, const Vector& psi,
                           double T, const Kernel& kernel,
                           KSign sign = KSign::plus);

}  // namespace nhqmc
