#include "nhqmc/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include "nhqmc/errors.hpp"

namespace nhqmc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kInitialTable = 65536;
constexpr double kTableTolerance = 1e-6;

double beta_constant(double beta) {
  return 2.0 * kPi * std::exp(-std::pow(2.0, beta));
}

void check_beta(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) {
    throw InputError("beta must lie in (0, 1)");
  }
}

void check_eps(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("eps must lie in (0, 1)");
}

// Integral of |g| over [a, b] for the beta family.
double beta_segment(double beta, double a, double b) {
  const auto f = [beta](double k) {
    return std::abs(g_value(KernelFamily::beta, beta, k));
  };
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
          f, a, b, 20, 1e-14, &error);
  if (!std::isfinite(value)) {
    throw NumericalError("kernel L1 integral did not converge");
  }
  return value;
}

}  // namespace

Complex g_value(KernelFamily family, double beta, double k) {
  if (family == KernelFamily::cauchy) return {1.0 / (kPi * (1.0 + k * k)), 0.0};
  const Complex z{1.0, k};
  const Complex f = 1.0 / (beta_constant(beta) * std::exp(std::pow(z, beta)));
  return f / Complex{1.0, -k};
}

double kernel_mass(KernelFamily family, double beta, double a) {
  if (a <= 0.0) return 0.0;
  if (family == KernelFamily::cauchy) {
    return std::isinf(a) ? 1.0 : 2.0 / kPi * std::atan(a);
  }
  check_beta(beta);
  // |g| is even because g(-k) = conj(g(k)).
  if (std::isfinite(a)) {
    double total = 0.0;
    double lo = 0.0;
    while (lo < a) {
      const double hi = std::min(a, lo < 1.0 ? 1.0 : 2.0 * lo);
      total += beta_segment(beta, lo, hi);
      lo = hi;
    }
    return 2.0 * total;
  }
  // Extend dyadic panels until a panel adds less than 1e-12 of the total.
  double total = beta_segment(beta, 0.0, 1.0);
  for (double lo = 1.0;; lo *= 2.0) {
    const double piece = beta_segment(beta, lo, 2.0 * lo);
    total += piece;
    if (piece < 1e-12 * total) break;
    if (lo > 1e12) throw NumericalError("kernel L1 tail does not decay");
  }
  return 2.0 * total;
}

double truncation_kc(KernelFamily family, double beta, double eps) {
  check_eps(eps);
  if (family == KernelFamily::cauchy) return 1.0 / std::tan(kPi * eps / 2.0);
  const double target = (1.0 - eps) * kernel_mass(family, beta, INFINITY);
  double lo = 0.0;
  double hi = 1.0;
  while (kernel_mass(family, beta, hi) < target) {
    lo = hi;
    hi *= 2.0;
  }
  while ((hi - lo) > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    (kernel_mass(family, beta, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void gauss_legendre(int Q, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  if (Q < 1) throw InputError("Gauss-Legendre order must be positive");
  nodes.clear();
  weights.clear();
  const auto zeros = boost::math::legendre_p_zeros<double>(Q);
  for (double x : zeros) {
    const double dp = boost::math::legendre_p_prime<double>(Q, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes.push_back(x);
    weights.push_back(w);
    if (x != 0.0) {
      nodes.push_back(-x);
      weights.push_back(w);
    }
  }
  std::vector<std::size_t> order(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
  std::vector<double> n2, w2;
  for (auto i : order) {
    n2.push_back(nodes[i]);
    w2.push_back(weights[i]);
  }
  nodes = std::move(n2);
  weights = std::move(w2);
}

double QuadratureRule::weight_l1() const {
  double total = 0.0;
  for (const auto& n : nodes) total += std::abs(n.c);
  return total;
}

Complex QuadratureRule::weight_sum() const {
  Complex total{};
  for (const auto& n : nodes) total += n.c;
  return total;
}

Kernel Kernel::cauchy(double eps) {
  check_eps(eps);
  Kernel k;
  k.family_ = KernelFamily::cauchy;
  k.eps_ = eps;
  k.k_c_ = truncation_kc(KernelFamily::cauchy, 0.0, eps);
  k.l1_ = 1.0;
  k.mass_ = kernel_mass(KernelFamily::cauchy, 0.0, k.k_c_);
  return k;
}

Kernel Kernel::beta(double beta, double eps) {
  check_beta(beta);
  check_eps(eps);
  Kernel k;
  k.family_ = KernelFamily::beta;
  k.beta_ = beta;
  k.eps_ = eps;
  k.l1_ = kernel_mass(KernelFamily::beta, beta, INFINITY);
  k.k_c_ = truncation_kc(KernelFamily::beta, beta, eps);
  k.mass_ = kernel_mass(KernelFamily::beta, beta, k.k_c_);
  k.build_table();
  return k;
}

void Kernel::build_table() {
  const auto tabulate = [this](std::size_t points, std::vector<double>& ks,
                               std::vector<double>& abs_g,
                               std::vector<double>& cdf) {
    ks.resize(points);
    abs_g.resize(points);
    cdf.resize(points);
    const double step = 2.0 * k_c_ / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
      ks[i] = -k_c_ + step * static_cast<double>(i);
      abs_g[i] = std::abs(g(ks[i]));
    }
    cdf[0] = 0.0;
    for (std::size_t i = 1; i < points; ++i) {
      cdf[i] = cdf[i - 1] + 0.5 * step * (abs_g[i - 1] + abs_g[i]);
    }
  };

  std::size_t points = kInitialTable;
  tabulate(points, table_k_, table_abs_, table_cdf_);
  // Refine until the cumulative agrees with the next doubling everywhere.
  for (int round = 0; round < 8; ++round) {
    std::vector<double> k2, a2, c2;
    tabulate(2 * points - 1, k2, a2, c2);
    double worst = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      worst = std::max(worst, std::abs(table_cdf_[i] - c2[2 * i]));
    }
    const bool converged = worst <= kTableTolerance * c2.back();
    table_k_ = std::move(k2);
    table_abs_ = std::move(a2);
    table_cdf_ = std::move(c2);
    points = 2 * points - 1;
    if (converged) return;
  }
  throw NumericalError("kernel sampling table failed to converge");
}

double Kernel::order_constant() const {
  return family_ == KernelFamily::cauchy ? kPi : beta_constant(beta_);
}

std::string Kernel::name() const {
  std::ostringstream out;
  if (family_ == KernelFamily::cauchy) {
    out << "cauchy(eps=" << eps_ << ')';
  } else {
    out << "beta(beta=" << beta_ << ", eps=" << eps_ << ')';
  }
  return out.str();
}

Complex Kernel::g(double k) const { return g_value(family_, beta_, k); }

double Kernel::pd(double k) const {
  if (std::abs(k) > k_c_) return 0.0;
  if (family_ == KernelFamily::cauchy) return std::abs(g(k)) / mass_;
  const double step = table_k_[1] - table_k_[0];
  const auto i = std::min<std::size_t>(
      table_k_.size() - 2, static_cast<std::size_t>((k + k_c_) / step));
  const double x = (k - table_k_[i]) / step;
  return ((1.0 - x) * table_abs_[i] + x * table_abs_[i + 1]) /
         table_cdf_.back();
}

KSample Kernel::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return sample_at(u(rng));
}

KSample Kernel::sample_at(double u) const {
  KSample s;
  if (family_ == KernelFamily::cauchy) {
    const double a = std::atan(k_c_);
    s.k = std::clamp(std::tan((2.0 * u - 1.0) * a), -k_c_, k_c_);
    s.magnitude = std::abs(g(s.k));
    s.pd = s.magnitude / mass_;
    s.phase = 1.0;
    return s;
  }

  // Invert the piecewise-linear density between table points.
  const double target = u * table_cdf_.back();
  auto it = std::upper_bound(table_cdf_.begin(), table_cdf_.end(), target);
  std::size_t i = it == table_cdf_.begin()
                      ? 0
                      : static_cast<std::size_t>(it - table_cdf_.begin()) - 1;
  i = std::min(i, table_cdf_.size() - 2);
  const double step = table_k_[i + 1] - table_k_[i];
  const double a0 = table_abs_[i];
  const double slope = (table_abs_[i + 1] - a0) / step;
  const double r = target - table_cdf_[i];
  const double disc = std::max(0.0, a0 * a0 + 2.0 * slope * r);
  double x = (a0 + std::sqrt(disc)) > 0.0 ? 2.0 * r / (a0 + std::sqrt(disc)) : 0.0;
  x = std::clamp(x, 0.0, step);

  s.k = table_k_[i] + x;
  const Complex gk = g(s.k);
  s.magnitude = std::abs(gk);
  s.phase = gk / s.magnitude;
  s.pd = (a0 + slope * x) / table_cdf_.back();
  return s;
}

QuadratureRule Kernel::quadrature_rule(double T, double max_norm) const {
  if (T < 0.0 || max_norm < 0.0) {
    throw InputError("quadrature rule needs T >= 0 and max_norm >= 0");
  }
  QuadratureRule rule;
  rule.k_c = k_c_;
  rule.h_nominal = T * max_norm > 0.0
                       ? 1.0 / (std::numbers::e * T * max_norm)
                       : std::numeric_limits<double>::infinity();
  const double h = std::min(1.0, rule.h_nominal);
  rule.panels = static_cast<std::size_t>(std::ceil(2.0 * k_c_ / h));
  rule.h = 2.0 * k_c_ / static_cast<double>(rule.panels);
  const double arg = 8.0 * k_c_ / (3.0 * order_constant() * eps_);
  rule.Q = std::max(1, static_cast<int>(std::ceil(std::log(arg) / std::log(4.0))));
  rule.M = rule.panels * static_cast<std::size_t>(rule.Q);

  std::vector<double> x, w;
  gauss_legendre(rule.Q, x, w);
  rule.nodes.reserve(rule.M);
  for (std::size_t p = 0; p < rule.panels; ++p) {
    const double centre = -k_c_ + (static_cast<double>(p) + 0.5) * rule.h;
    for (int q = 0; q < rule.Q; ++q) {
      const double k = centre + 0.5 * rule.h * x[q];
      rule.nodes.push_back({k, 0.5 * rule.h * w[q] * g(k)});
    }
  }
  return rule;
}

}  // namespace nhqmc
