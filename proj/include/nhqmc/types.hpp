#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace nhqmc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Largest register realized as a dense matrix unless a caller overrides it.
inline constexpr std::size_t kDefaultDenseCap = 10;

/// Terms whose merged coefficient falls below this magnitude are dropped.
inline constexpr double kMergeTolerance = 1e-14;

}  // namespace nhqmc
