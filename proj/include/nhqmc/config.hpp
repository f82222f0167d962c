#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nhqmc/estimator.hpp"
#include "nhqmc/kernel.hpp"
#include "nhqmc/lindblad.hpp"
#include "nhqmc/model.hpp"
#include "nhqmc/pauli.hpp"
#include "nhqmc/propagate.hpp"

namespace nhqmc {

enum class ModelType { nonhermitian, lindblad };

/// Evenly spaced times from start to end inclusive.
struct TimeGrid {
  double start = 0.0;
  double end = 1.0;
  std::size_t points = 1;

  std::vector<double> values() const;
};

/// How one method turns its propagator into an estimate: Monte Carlo over
/// sampled k, or the deterministic Gauss-Legendre rule in k.
struct MethodChoice {
  Method method = Method::exact;
  bool quadrature = false;

  std::string label() const;
};

/// "name" or "name:mc" / "name:quadrature". Stochastic methods always use
/// Monte Carlo in k.
MethodChoice parse_method_choice(const std::string& token, bool default_quadrature);

struct KernelConfig {
  KernelFamily family = KernelFamily::cauchy;
  double beta = 0.75;
  double eps = 1e-2;

  Kernel make() const;
};

struct RunConfig {
  ModelType type = ModelType::nonhermitian;
  std::size_t qubits = 0;

  // non-Hermitian model
  std::vector<ComplexTerm> terms;
  std::optional<double> shift;  // constant E_i0 override

  // Lindblad model
  PauliSum hamiltonian;
  std::vector<Matrix> jumps;
  std::optional<double> cp;

  Vector psi;
  PauliSum observable;

  KernelConfig kernel;
  std::vector<MethodChoice> methods;
  double dt = 0.05;
  double tau = 0.05;
  TimeGrid times;

  std::size_t n_numerator = 10000;
  std::size_t n_denominator = 10000;
  std::optional<double> delta;
  std::optional<double> eta;
  bool paired = false;
  std::size_t max_samples = 10000000;
  bool default_quadrature = false;

  Readout readout;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string output = "out";
  std::size_t max_qubits = kDefaultDenseCap;

  NonHermitianModel nonhermitian_model() const;
  LindbladModel lindblad_model() const;
  /// |psi><psi| for the Lindblad runs.
  Matrix initial_density() const;
  PropagatorSpec propagator(Method m) const;
};

/// Parses the YAML run description. Errors carry the offending line.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Text of the shipped damped Ising chain preset.
const std::string& fig3_preset();

}  // namespace nhqmc
