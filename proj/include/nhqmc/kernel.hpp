#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nhqmc/random.hpp"
#include "nhqmc/types.hpp"

namespace nhqmc {

enum class KernelFamily { cauchy, beta };

/// One draw from the truncated density |g| / mass on [-k_c, k_c].
struct KSample {
  double k = 0.0;
  Complex phase{1.0, 0.0};  // g(k) / |g(k)|
  double pd = 0.0;          // density the sampler actually used at k
  double magnitude = 0.0;   // |g(k)|

  /// Importance weight g(k) / pd(k).
  Complex weight() const { return phase * (magnitude / pd); }
};

struct QuadratureNode {
  double k = 0.0;
  Complex c;  // Gauss-Legendre weight times g(k)
};

struct QuadratureRule {
  std::vector<QuadratureNode> nodes;
  double h = 0.0;           // panel width actually used
  double h_nominal = 0.0;   // 1 / (e T max_norm) before capping
  int Q = 0;                // nodes per panel
  std::size_t panels = 0;
  std::size_t M = 0;        // total node count
  double k_c = 0.0;

  /// Sum |c|.
  double weight_l1() const;
  /// Sum c, which approximates integral g = 1.
  Complex weight_sum() const;
};

/**
 * LCHS kernel g(k) = f(k) / (1 - ik) with the Cauchy choice
 * f = 1 / (pi (1 + ik)) or the beta family f = 1 / (C e^{(1+ik)^beta}),
 * C = 2 pi e^{-2^beta}, truncated to the interval holding 1 - eps of the
 * L1 mass.
 */
class Kernel {
 public:
  static Kernel cauchy(double eps);
  static Kernel beta(double beta, double eps);

  KernelFamily family() const noexcept { return family_; }
  double beta_value() const noexcept { return beta_; }
  double eps() const noexcept { return eps_; }
  double k_c() const noexcept { return k_c_; }
  /// Integral of |g| over the real line.
  double l1() const noexcept { return l1_; }
  /// Integral of |g| over [-k_c, k_c].
  double truncated_mass() const noexcept { return mass_; }
  /// Constant entering the quadrature order formula (pi for Cauchy).
  double order_constant() const;
  std::string name() const;

  Complex g(double k) const;
  /// Sampler density at k (zero outside the truncation interval).
  double pd(double k) const;
  KSample sample(Rng& rng) const;
  /// Sample with an explicit uniform variate in [0, 1).
  KSample sample_at(double u) const;

  /// Composite Gauss-Legendre rule over [-k_c, k_c] with panel width
  /// min(1, 1 / (e T max_norm)).
  QuadratureRule quadrature_rule(double T, double max_norm) const;

  /// Number of points in the inverse-CDF table (0 for Cauchy).
  std::size_t table_size() const noexcept { return table_k_.size(); }

 private:
  Kernel() = default;
  void build_table();

  KernelFamily family_ = KernelFamily::cauchy;
  double beta_ = 0.0;
  double eps_ = 0.0;
  double k_c_ = 0.0;
  double l1_ = 0.0;
  double mass_ = 0.0;

  // beta family: |g| on a uniform grid and its trapezoid cumulative
  std::vector<double> table_k_;
  std::vector<double> table_abs_;
  std::vector<double> table_cdf_;
};

/// g(k) for the given family; beta is ignored for Cauchy.
Complex g_value(KernelFamily family, double beta, double k);

/// Integral of |g| over [-a, a] (a may be infinite).
double kernel_mass(KernelFamily family, double beta, double a);

/// k_c with integral_{-k_c}^{k_c} |g| = (1 - eps) * l1.
double truncation_kc(KernelFamily family, double beta, double eps);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int Q, std::vector<double>& nodes,
                    std::vector<double>& weights);

}  // namespace nhqmc
