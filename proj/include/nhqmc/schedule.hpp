#pragma once

#include <string>
#include <variant>
#include <vector>

namespace nhqmc {

/// Real scalar function of time multiplying a Hamiltonian term.
class Schedule {
 public:
  struct Constant {
    double value = 1.0;
  };
  /// Linear interpolation between knots; held flat outside the knot range.
  struct PiecewiseLinear {
    std::vector<double> knots;
    std::vector<double> values;
  };
  /// offset + amplitude * sin(frequency * t + phase)
  struct Harmonic {
    double offset = 0.0;
    double amplitude = 1.0;
    double frequency = 1.0;
    double phase = 0.0;
  };

  Schedule() = default;

  static Schedule constant(double value);
  static Schedule piecewise_linear(std::vector<double> knots,
                                   std::vector<double> values);
  static Schedule harmonic(double offset, double amplitude, double frequency,
                           double phase);

  double operator()(double t) const;

  bool is_constant() const noexcept {
    return std::holds_alternative<Constant>(form_);
  }
  /// Value of a constant schedule; throws for the other kinds.
  double constant_value() const;

  double integral(double a, double b) const;
  /// Integral of |value| over [a, b].
  double abs_integral(double a, double b) const;
  /// Upper bound on |value| over [a, b] (tight for every kind).
  double abs_bound(double a, double b) const;

  std::string describe() const;

  const std::variant<Constant, PiecewiseLinear, Harmonic>& form() const {
    return form_;
  }

 private:
  std::variant<Constant, PiecewiseLinear, Harmonic> form_{Constant{}};
};

}  // namespace nhqmc
