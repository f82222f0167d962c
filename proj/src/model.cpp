#include "nhqmc/model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "nhqmc/errors.hpp"

namespace nhqmc {

namespace {

void check_terms(std::size_t n_qubits, const std::vector<ScheduledTerm>& terms) {
  for (const auto& t : terms) {
    if (t.string.size() != n_qubits) {
      throw InputError("term " + t.string.label() + " does not act on " +
                       std::to_string(n_qubits) + " qubits");
    }
    if (!std::isfinite(t.coeff)) throw InputError("non-finite coefficient");
  }
}

PauliSum sum_at(std::size_t n_qubits, const std::vector<ScheduledTerm>& terms,
                double t) {
  PauliSum out(n_qubits);
  for (const auto& term : terms) out.add(term.value(t), term.string);
  return out;
}

bool all_constant(const std::vector<ScheduledTerm>& terms) {
  return std::all_of(terms.begin(), terms.end(), [](const ScheduledTerm& t) {
    return t.schedule.is_constant();
  });
}

std::vector<double> uniform_grid(double T, std::size_t points) {
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    grid[i] = points == 1 ? 0.0 : T * static_cast<double>(i) /
                                      static_cast<double>(points - 1);
  }
  return grid;
}

}  // namespace

Generator::Generator(std::size_t n_qubits, std::vector<ScheduledTerm> terms)
    : n_qubits_(n_qubits), terms_(std::move(terms)) {
  check_terms(n_qubits_, terms_);
  time_independent_ = all_constant(terms_);
}

PauliSum Generator::at(double t) const { return sum_at(n_qubits_, terms_, t); }

NonHermitianModel::NonHermitianModel(std::size_t n_qubits,
                                     std::vector<ScheduledTerm> hr,
                                     std::vector<ScheduledTerm> hi,
                                     Schedule shift)
    : n_qubits_(n_qubits),
      hr_(std::move(hr)),
      hi_(std::move(hi)),
      shift_(std::move(shift)) {
  check_terms(n_qubits_, hr_);
  check_terms(n_qubits_, hi_);
}

NonHermitianModel NonHermitianModel::from_complex_sum(const PauliSum& h) {
  std::vector<ComplexTerm> terms;
  for (const auto& t : h.terms()) {
    terms.push_back({t.string, t.coeff, Schedule::constant(1.0)});
  }
  return from_terms(h.n_qubits(), terms, 0.0, 2);
}

NonHermitianModel NonHermitianModel::from_terms(
    std::size_t n_qubits, const std::vector<ComplexTerm>& terms, double T,
    std::size_t grid_points) {
  std::vector<ScheduledTerm> hr;
  std::vector<ScheduledTerm> hi;
  for (const auto& t : terms) {
    if (t.coeff.real() != 0.0) hr.push_back({t.string, t.coeff.real(), t.schedule});
    if (t.coeff.imag() != 0.0) hi.push_back({t.string, -t.coeff.imag(), t.schedule});
  }
  NonHermitianModel model(n_qubits, std::move(hr), std::move(hi));
  return model.with_shift(minimal_shift(model, T, grid_points));
}

bool NonHermitianModel::time_independent() const {
  return all_constant(hr_) && all_constant(hi_) && shift_.is_constant();
}

NonHermitianModel NonHermitianModel::with_shift(Schedule shift) const {
  NonHermitianModel out = *this;
  out.shift_ = std::move(shift);
  return out;
}

NonHermitianModel NonHermitianModel::with_k_sign(KSign sign) const {
  NonHermitianModel out = *this;
  out.k_sign_ = sign;
  return out;
}

PauliSum NonHermitianModel::hr(double t) const {
  return sum_at(n_qubits_, hr_, t);
}

PauliSum NonHermitianModel::hi(double t) const {
  return sum_at(n_qubits_, hi_, t);
}

PauliSum NonHermitianModel::hamiltonian(double t) const {
  PauliSum out = hr(t);
  for (const auto& term : hi_) out.add(-kI * term.value(t), term.string);
  return out;
}

PauliSum NonHermitianModel::shifted_hamiltonian(double t) const {
  PauliSum out = hamiltonian(t);
  out.add(kI * shift_(t), PauliString(n_qubits_));
  return out;
}

PauliSum NonHermitianModel::k_generator(double k, double t) const {
  const double s = k_sign_ == KSign::plus ? k : -k;
  PauliSum out = hr(t);
  for (const auto& term : hi_) out.add(s * term.value(t), term.string);
  out.add(-s * shift_(t), PauliString(n_qubits_));
  return out;
}

Generator NonHermitianModel::k_generator(double k) const {
  const double s = k_sign_ == KSign::plus ? k : -k;
  std::vector<ScheduledTerm> terms = hr_;
  for (const auto& term : hi_) {
    terms.push_back({term.string, s * term.coeff, term.schedule});
  }
  terms.push_back({PauliString(n_qubits_), -s, shift_});
  return Generator(n_qubits_, std::move(terms));
}

double NonHermitianModel::shift_factor(double t) const {
  return std::exp(-shift_.integral(0.0, t));
}

std::size_t default_grid_points(double T) {
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(64.0 * T)) + 1);
}

SpectralSummary spectral_summary(const NonHermitianModel& model, double T,
                                 std::size_t grid_points,
                                 std::size_t max_qubits) {
  if (grid_points == 0) grid_points = default_grid_points(T);
  if (grid_points < 2) throw InputError("spectral scans need at least 2 points");

  SpectralSummary out;
  out.grid = uniform_grid(T, grid_points);
  const bool constant = model.time_independent();
  const Eigen::Index dim = Eigen::Index{1} << model.n_qubits();

  double cached_min = 0, cached_max = 0, cached_norm = 0;
  for (std::size_t g = 0; g < grid_points; ++g) {
    const double t = out.grid[g];
    if (!constant || g == 0) {
      const Matrix hi = to_matrix(model.hi(t), max_qubits);
      Eigen::SelfAdjointEigenSolver<Matrix> es(hi, Eigen::EigenvaluesOnly);
      cached_min = es.eigenvalues()(0);
      cached_max = es.eigenvalues()(dim - 1);
      const Matrix h = to_matrix(model.shifted_hamiltonian(t), max_qubits);
      Eigen::SelfAdjointEigenSolver<Matrix> sv(h.adjoint() * h,
                                               Eigen::EigenvaluesOnly);
      cached_norm = std::sqrt(std::max(0.0, sv.eigenvalues()(dim - 1)));
    }
    const double e0 = model.shift()(t);
    out.ei_min.push_back(cached_min);
    out.ei_max.push_back(cached_max);
    out.shift.push_back(e0);
    out.delta_ei = std::max(out.delta_ei, cached_max - cached_min);
    out.max_norm = std::max(out.max_norm, cached_norm);
    out.max_anti_norm = std::max(
        out.max_anti_norm, std::max(std::abs(cached_max - e0), std::abs(cached_min - e0)));
  }

  if (T > 0.0) {
    double area = 0.0;
    for (std::size_t g = 0; g + 1 < grid_points; ++g) {
      const double w0 = out.ei_max[g] - out.ei_min[g];
      const double w1 = out.ei_max[g + 1] - out.ei_min[g + 1];
      area += 0.5 * (w0 + w1) * (out.grid[g + 1] - out.grid[g]);
    }
    out.e_avg = area / T;
  } else {
    out.e_avg = out.ei_max[0] - out.ei_min[0];
  }
  return out;
}

Schedule minimal_shift(const NonHermitianModel& model, double T,
                       std::size_t grid_points, std::size_t max_qubits) {
  if (all_constant(model.hi_terms()) || T <= 0.0) {
    const Matrix hi = to_matrix(model.hi(0.0), max_qubits);
    Eigen::SelfAdjointEigenSolver<Matrix> es(hi, Eigen::EigenvaluesOnly);
    return Schedule::constant(es.eigenvalues()(0));
  }
  const SpectralSummary s = spectral_summary(model, T, grid_points, max_qubits);
  return Schedule::piecewise_linear(s.grid, s.ei_min);
}

}  // namespace nhqmc
