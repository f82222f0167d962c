#include "nhqmc/propagate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "nhqmc/errors.hpp"

namespace nhqmc {

namespace {

Complex i_power(int e) {
  switch (((e % 4) + 4) % 4) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return {0.0, 1.0};
    case 2:
      return {-1.0, 0.0};
    default:
      return {0.0, -1.0};
  }
}

inline bool odd_parity(std::uint64_t v) { return std::popcount(v) & 1; }

// Term of a generator flattened for the inner loops.
struct FlatTerm {
  std::uint64_t x = 0;
  std::uint64_t z = 0;
  int ny = 0;
  bool identity = false;
  const ScheduledTerm* source = nullptr;

  double value(double t) const { return source->value(t); }
};

std::vector<FlatTerm> flatten(const Generator& K) {
  std::vector<FlatTerm> out;
  out.reserve(K.terms().size());
  for (const auto& term : K.terms()) {
    out.push_back({term.string.x_mask(), term.string.z_mask(),
                   term.string.y_count(), term.string.is_identity(), &term});
  }
  return out;
}

void check_dimension(const Vector& v, std::size_t n_qubits) {
  if (static_cast<std::uint64_t>(v.size()) != (std::uint64_t{1} << n_qubits)) {
    throw InputError("state dimension does not match the operator");
  }
}

// v <- exp(-i angle sigma) v with sigma given by masks.
void rotate(Vector& v, std::uint64_t x, std::uint64_t z, int ny, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Complex* a = v.data();
  const auto dim = static_cast<std::uint64_t>(v.size());
  if (x == 0) {
    const Complex plus{c, -s};
    const Complex minus{c, s};
    for (std::uint64_t b = 0; b < dim; ++b) {
      a[b] *= odd_parity(b & z) ? minus : plus;
    }
    return;
  }
  // m = -i * i^{ny}; new[b] = c v[b] + s sign(b') m v[b'].
  const Complex m = i_power(ny + 3);
  const double mr = m.real();
  const double mi = m.imag();
  const std::uint64_t top = std::uint64_t{1} << (63 - std::countl_zero(x));
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (b & top) continue;
    const std::uint64_t bp = b ^ x;
    const double sb = odd_parity(b & z) ? -s : s;
    const double sbp = odd_parity(bp & z) ? -s : s;
    const double ur = a[b].real(), ui = a[b].imag();
    const double wr = a[bp].real(), wi = a[bp].imag();
    a[b] = {c * ur + sbp * (mr * wr - mi * wi), c * ui + sbp * (mr * wi + mi * wr)};
    a[bp] = {c * wr + sb * (mr * ur - mi * ui), c * wi + sb * (mr * ui + mi * ur)};
  }
}

// out += coeff * sigma v
void accumulate(Vector& out, const Vector& v, std::uint64_t x, std::uint64_t z,
                int ny, Complex coeff) {
  const Complex scale = coeff * i_power(ny);
  const auto dim = static_cast<std::uint64_t>(v.size());
  for (std::uint64_t b = 0; b < dim; ++b) {
    out[static_cast<Eigen::Index>(b ^ x)] +=
        (odd_parity(b & z) ? -scale : scale) * v[static_cast<Eigen::Index>(b)];
  }
}

std::size_t step_count(double span, double dt) {
  if (span <= 0.0) return 0;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(span / dt - 1e-9)));
}

}  // namespace

StateVector::StateVector(std::size_t n) : n_qubits(n) {
  if (n > 30) throw ResourceError("state vectors are limited to 30 qubits");
  amplitudes = Vector::Zero(Eigen::Index{1} << n);
  amplitudes(0) = 1.0;
}

StateVector::StateVector(std::size_t n, Vector amps)
    : n_qubits(n), amplitudes(std::move(amps)) {
  check_dimension(amplitudes, n);
}

StateVector StateVector::basis(std::size_t n, std::uint64_t index) {
  StateVector s(n);
  if (index >= (std::uint64_t{1} << n)) throw InputError("basis index too large");
  s.amplitudes(0) = 0.0;
  s.amplitudes(static_cast<Eigen::Index>(index)) = 1.0;
  return s;
}

StateVector StateVector::from_label(std::string_view label) {
  const std::size_t n = label.size();
  if (n == 0) throw InputError("empty state label");
  Vector amps = Vector::Ones(Eigen::Index{1} << n);
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t q = 0; q < n; ++q) {
    const std::uint64_t bit = std::uint64_t{1} << (n - 1 - q);
    for (Eigen::Index b = 0; b < amps.size(); ++b) {
      const bool one = static_cast<std::uint64_t>(b) & bit;
      switch (label[q]) {
        case '0':
          amps(b) *= one ? 0.0 : 1.0;
          break;
        case '1':
          amps(b) *= one ? 1.0 : 0.0;
          break;
        case '+':
          amps(b) *= r;
          break;
        case '-':
          amps(b) *= one ? -r : r;
          break;
        default:
          throw InputError("state labels use 0, 1, + and -");
      }
    }
  }
  return StateVector(n, std::move(amps));
}

void apply_pauli(Vector& v, const PauliString& s) {
  check_dimension(v, s.size());
  const std::uint64_t x = s.x_mask();
  const std::uint64_t z = s.z_mask();
  const Complex base = i_power(s.y_count());
  const auto dim = static_cast<std::uint64_t>(v.size());
  if (x == 0) {
    for (std::uint64_t b = 0; b < dim; ++b) {
      if (odd_parity(b & z)) v[static_cast<Eigen::Index>(b)] *= -1.0;
    }
    return;
  }
  const std::uint64_t top = std::uint64_t{1} << (63 - std::countl_zero(x));
  for (std::uint64_t b = 0; b < dim; ++b) {
    if (b & top) continue;
    const std::uint64_t bp = b ^ x;
    const auto ib = static_cast<Eigen::Index>(b);
    const auto ibp = static_cast<Eigen::Index>(bp);
    const Complex vb = v[ib];
    const Complex vbp = v[ibp];
    v[ibp] = (odd_parity(b & z) ? -base : base) * vb;
    v[ib] = (odd_parity(bp & z) ? -base : base) * vbp;
  }
}

Complex pauli_expectation(const Vector& bra, const PauliString& s,
                          const Vector& ket) {
  check_dimension(bra, s.size());
  check_dimension(ket, s.size());
  const std::uint64_t x = s.x_mask();
  const std::uint64_t z = s.z_mask();
  const auto dim = static_cast<std::uint64_t>(ket.size());
  Complex plus{}, minus{};
  for (std::uint64_t b = 0; b < dim; ++b) {
    const Complex term = std::conj(bra[static_cast<Eigen::Index>(b ^ x)]) *
                         ket[static_cast<Eigen::Index>(b)];
    (odd_parity(b & z) ? minus : plus) += term;
  }
  return i_power(s.y_count()) * (plus - minus);
}

void apply_pauli_rotation(Vector& v, const PauliString& s, double angle) {
  check_dimension(v, s.size());
  rotate(v, s.x_mask(), s.z_mask(), s.y_count(), angle);
}

void apply_pauli_rotation(StateVector& state, const PauliString& s,
                          double angle) {
  apply_pauli_rotation(state.amplitudes, s, angle);
}

Vector apply_sum(const PauliSum& sum, const Vector& v) {
  check_dimension(v, sum.n_qubits());
  Vector out = Vector::Zero(v.size());
  for (const auto& t : sum.terms()) {
    accumulate(out, v, t.string.x_mask(), t.string.z_mask(),
               t.string.y_count(), t.coeff);
  }
  return out;
}

void integrate_rk4(const Derivative& rhs, double t0, double t1, Vector& v,
                   double tol, std::size_t initial_steps) {
  if (t1 == t0) return;
  const auto run = [&](std::size_t steps) {
    Vector y = v;
    Vector k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size());
    const double h = (t1 - t0) / static_cast<double>(steps);
    for (std::size_t i = 0; i < steps; ++i) {
      const double t = t0 + h * static_cast<double>(i);
      rhs(t, y, k1);
      rhs(t + 0.5 * h, y + 0.5 * h * k1, k2);
      rhs(t + 0.5 * h, y + 0.5 * h * k2, k3);
      rhs(t + h, y + h * k3, k4);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
  };
  std::size_t steps = std::max<std::size_t>(1, initial_steps);
  Vector previous = run(steps);
  for (int round = 0; round < 22; ++round) {
    steps *= 2;
    Vector next = run(steps);
    const double scale = std::max(1.0, next.norm());
    if ((next - previous).norm() <= tol * scale) {
      v = std::move(next);
      return;
    }
    previous = std::move(next);
  }
  throw NumericalError("RK4 integration failed to self-converge");
}

SpectralPropagator::SpectralPropagator(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian);
  if (es.info() != Eigen::Success) {
    throw NumericalError("eigendecomposition failed");
  }
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
}

Vector SpectralPropagator::evolve(const Vector& v, double tau) const {
  Vector c = eigenvectors_.adjoint() * v;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    c[i] *= std::polar(1.0, -eigenvalues_[i] * tau);
  }
  return eigenvectors_ * c;
}

void evolve_exact(const Generator& K, double t0, double t1, Vector& v,
                  std::size_t max_qubits) {
  check_dimension(v, K.n_qubits());
  if (K.time_independent()) {
    v = SpectralPropagator(to_matrix(K.at(t0), max_qubits)).evolve(v, t1 - t0);
    return;
  }
  if (K.n_qubits() > max_qubits) {
    throw ResourceError("exact evolution exceeds the dense cap");
  }
  const auto terms = flatten(K);
  double bound = 0.0;
  for (const auto& t : terms) {
    bound += std::abs(t.source->coeff) *
             t.source->schedule.abs_bound(std::min(t0, t1), std::max(t0, t1));
  }
  const Derivative rhs = [&terms](double t, const Vector& y, Vector& dy) {
    dy.setZero(y.size());
    for (const auto& term : terms) {
      accumulate(dy, y, term.x, term.z, term.ny, Complex{0.0, -term.value(t)});
    }
  };
  const auto initial = static_cast<std::size_t>(
      std::max(16.0, std::ceil(4.0 * bound * std::abs(t1 - t0))));
  integrate_rk4(rhs, t0, t1, v, 1e-10, initial);
}

void evolve_trotter1(const Generator& K, double t0, double t1, double dt,
                     Vector& v) {
  check_dimension(v, K.n_qubits());
  if (!(dt > 0.0)) throw InputError("Trotter step must be positive");
  const auto terms = flatten(K);
  const std::size_t steps = step_count(t1 - t0, dt);
  for (std::size_t j = 0; j < steps; ++j) {
    const double a = t0 + dt * static_cast<double>(j);
    const double b = j + 1 == steps ? t1 : std::min(t1, a + dt);
    const double mid = 0.5 * (a + b);
    const double h = b - a;
    for (const auto& term : terms) {
      const double angle = term.value(mid) * h;
      if (term.identity) {
        v *= std::polar(1.0, -angle);
      } else {
        rotate(v, term.x, term.z, term.ny, angle);
      }
    }
  }
}

void evolve_qdrift(const Generator& K, double t0, double t1, double dt,
                   Rng& rng, Vector& v) {
  check_dimension(v, K.n_qubits());
  if (!(dt > 0.0)) throw InputError("qDrift step must be positive");
  const auto terms = flatten(K);
  const std::size_t gates = step_count(t1 - t0, dt);
  if (gates == 0) return;
  const double slot = (t1 - t0) / static_cast<double>(gates);
  std::vector<double> weights(terms.size());
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double phase = 0.0;
  for (std::size_t j = 0; j < gates; ++j) {
    const double a = t0 + slot * static_cast<double>(j);
    const double mid = a + 0.5 * slot;
    double lambda = 0.0;
    for (std::size_t n = 0; n < terms.size(); ++n) {
      if (terms[n].identity) {
        phase += terms[n].source->coeff *
                 terms[n].source->schedule.integral(a, a + slot);
        weights[n] = 0.0;
      } else {
        weights[n] = std::abs(terms[n].value(mid));
        lambda += weights[n];
      }
    }
    if (lambda == 0.0) continue;
    double r = uniform(rng) * lambda;
    std::size_t pick = terms.size();
    std::size_t last = 0;
    for (std::size_t n = 0; n < terms.size(); ++n) {
      if (weights[n] == 0.0) continue;
      last = n;
      if (r < weights[n]) {
        pick = n;
        break;
      }
      r -= weights[n];
    }
    if (pick == terms.size()) pick = last;
    const double sign = terms[pick].value(mid) < 0.0 ? -1.0 : 1.0;
    rotate(v, terms[pick].x, terms[pick].z, terms[pick].ny,
           sign * lambda * slot);
  }
  if (phase != 0.0) v *= std::polar(1.0, -phase);
}

GateSequence sample_continuous_sequence(const Generator& K, double t0,
                                        double t1, double tau, Rng& rng) {
  if (!(tau > 0.0 && tau < std::numbers::pi / 2)) {
    throw InputError("continuous-method tau must lie in (0, pi/2)");
  }
  GateSequence seq;
  if (t1 <= t0) return seq;
  const double span = t1 - t0;
  const double sin_tau = std::sin(tau);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (const auto& term : K.terms()) {
    const Schedule& s = term.schedule;
    if (term.string.is_identity()) {
      seq.global_phase += term.coeff * s.integral(t0, t1);
      continue;
    }
    const double envelope = std::abs(term.coeff) * s.abs_bound(t0, t1);
    if (envelope == 0.0) continue;
    std::poisson_distribution<long> count(envelope * span / sin_tau);
    const long candidates = count(rng);
    for (long i = 0; i < candidates; ++i) {
      const double t = t0 + span * uniform(rng);
      const double c = term.value(t);
      // Thinning: keep a candidate with probability |c(t)| / envelope.
      if (!s.is_constant() && uniform(rng) * envelope >= std::abs(c)) continue;
      if (c == 0.0) continue;
      seq.events.push_back({t, term.string, c < 0.0 ? -tau : tau});
    }
    seq.log_attenuation -=
        std::tan(tau / 2.0) * std::abs(term.coeff) * s.abs_integral(t0, t1);
  }
  std::stable_sort(seq.events.begin(), seq.events.end(),
                   [](const GateEvent& a, const GateEvent& b) { return a.t < b.t; });
  return seq;
}

void apply_sequence(const GateSequence& seq, Vector& v) {
  for (const auto& e : seq.events) {
    check_dimension(v, e.string.size());
    rotate(v, e.string.x_mask(), e.string.z_mask(), e.string.y_count(), e.angle);
  }
  if (seq.global_phase != 0.0) v *= std::polar(1.0, -seq.global_phase);
}

void apply_sequence(const GateSequence& seq, StateVector& state) {
  apply_sequence(seq, state.amplitudes);
}

double continuous_log_attenuation(const Generator& K, double t0, double t1,
                                  double tau) {
  double total = 0.0;
  for (const auto& term : K.terms()) {
    if (term.string.is_identity()) continue;
    total += std::abs(term.coeff) * term.schedule.abs_integral(t0, t1);
  }
  return -std::tan(tau / 2.0) * total;
}

GateMixture continuous_gate_mixture(double c, double tau, double dtau) {
  const double a = std::abs(c) * dtau;
  if (a == 0.0) return {0.0, 1.0};
  const double ta = std::tan(a);
  GateMixture m;
  m.p = ta / (std::sin(tau) + (1.0 - std::cos(tau)) * ta);
  m.lambda = m.p * std::sin(tau) / std::sin(a);
  return m;
}

double gate_identity_residual(double c, double tau, double dtau,
                              bool one_plus_p) {
  const auto rot = [](double theta) {
    Eigen::Matrix2cd r;
    r << std::cos(theta), Complex(0, -std::sin(theta)),
        Complex(0, -std::sin(theta)), std::cos(theta);
    return r;
  };
  const GateMixture m = continuous_gate_mixture(c, tau, dtau);
  const double sgn = c < 0.0 ? -1.0 : 1.0;
  const double stay = one_plus_p ? 1.0 + m.p : 1.0 - m.p;
  const Eigen::Matrix2cd lhs =
      stay * Eigen::Matrix2cd::Identity() + m.p * rot(sgn * tau);
  const Eigen::Matrix2cd rhs = m.lambda * rot(c * dtau);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

std::string method_name(Method m) {
  switch (m) {
    case Method::exact:
      return "exact";
    case Method::trotter1:
      return "trotter1";
    case Method::qdrift:
      return "qdrift";
    case Method::continuous:
      return "continuous";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  if (name == "exact") return Method::exact;
  if (name == "trotter1" || name == "trotter") return Method::trotter1;
  if (name == "qdrift") return Method::qdrift;
  if (name == "continuous") return Method::continuous;
  throw InputError("unknown propagator method '" + std::string(name) + "'");
}

void PropagatorSpec::validate() const {
  if ((method == Method::trotter1 || method == Method::qdrift) && !(dt > 0.0)) {
    throw InputError("propagator dt must be positive");
  }
  if (method == Method::continuous &&
      !(tau > 0.0 && tau < std::numbers::pi / 2)) {
    throw InputError("continuous-method tau must lie in (0, pi/2)");
  }
}

Propagator::Propagator(Generator K, PropagatorSpec spec, std::size_t max_qubits)
    : K_(std::move(K)), spec_(spec), max_qubits_(max_qubits) {
  spec_.validate();
  if (spec_.method == Method::exact && K_.time_independent()) {
    spectral_.emplace(to_matrix(K_.at(0.0), max_qubits_));
  }
}

double Propagator::advance(Vector& v, double t0, double t1, Rng& rng) const {
  switch (spec_.method) {
    case Method::exact:
      if (spectral_) {
        v = spectral_->evolve(v, t1 - t0);
      } else {
        evolve_exact(K_, t0, t1, v, max_qubits_);
      }
      return 0.0;
    case Method::trotter1:
      evolve_trotter1(K_, t0, t1, spec_.dt, v);
      return 0.0;
    case Method::qdrift:
      evolve_qdrift(K_, t0, t1, spec_.dt, rng, v);
      return 0.0;
    case Method::continuous: {
      const GateSequence seq =
          sample_continuous_sequence(K_, t0, t1, spec_.tau, rng);
      apply_sequence(seq, v);
      return -seq.log_attenuation;
    }
  }
  return 0.0;
}

}  // namespace nhqmc
