#include "nhqmc/estimator.hpp"

#include <array>
#include <chrono>
#include <cmath>

#include "nhqmc/errors.hpp"
#include "nhqmc/parallel.hpp"

namespace nhqmc {

namespace {

// Up to two complex channels per draw, stored as four real components.
constexpr int kComponents = 4;
using DrawValues = std::array<double, kComponents>;

struct Moments {
  double n = 0.0;
  std::array<double, kComponents> s{};
  std::array<double, kComponents * kComponents> ss{};

  static Moments of(const DrawValues& v) {
    Moments m;
    m.n = 1.0;
    for (int i = 0; i < kComponents; ++i) {
      m.s[i] = v[i];
      for (int j = 0; j < kComponents; ++j) m.ss[i * kComponents + j] = v[i] * v[j];
    }
    return m;
  }

  friend Moments operator+(const Moments& a, const Moments& b) {
    Moments out;
    out.n = a.n + b.n;
    for (int i = 0; i < kComponents; ++i) out.s[i] = a.s[i] + b.s[i];
    for (int i = 0; i < kComponents * kComponents; ++i) out.ss[i] = a.ss[i] + b.ss[i];
    return out;
  }

  double mean(int i) const { return s[i] / n; }
  // Covariance of the sample means of components i and j.
  double mean_cov(int i, int j) const {
    if (n < 2.0) return 0.0;
    const double c = (ss[i * kComponents + j] - s[i] * s[j] / n) / (n - 1.0);
    return c / n;
  }

  ComplexStat channel(int c) const {
    ComplexStat out;
    out.n = static_cast<std::size_t>(n);
    out.mean = {mean(2 * c), mean(2 * c + 1)};
    out.se_re = std::sqrt(std::max(0.0, mean_cov(2 * c, 2 * c)));
    out.se_im = std::sqrt(std::max(0.0, mean_cov(2 * c + 1, 2 * c + 1)));
    out.cov_re_im = mean_cov(2 * c, 2 * c + 1);
    return out;
  }
};

const auto add_moments = [](const Moments& a, const Moments& b) { return a + b; };

// Runs `draw(index, rows)` for every draw and returns per-time moments.
// Blocks are fixed, so the result is independent of the worker count.
template <class Draw>
std::vector<Moments> run_draws(std::size_t n_draws, std::size_t n_times,
                               unsigned workers, std::size_t block_size,
                               Draw&& draw) {
  block_size = std::max<std::size_t>(1, block_size);
  const std::size_t n_blocks = (n_draws + block_size - 1) / block_size;
  std::vector<std::vector<Moments>> per_block(n_blocks);
  parallel_blocks(n_blocks, workers, [&](std::size_t b) {
    const std::size_t first = b * block_size;
    const std::size_t last = std::min(n_draws, first + block_size);
    std::vector<std::vector<Moments>> per_time(
        n_times, std::vector<Moments>(last - first));
    std::vector<DrawValues> rows(n_times);
    for (std::size_t i = first; i < last; ++i) {
      for (auto& r : rows) r.fill(0.0);
      draw(static_cast<std::uint64_t>(i), rows);
      for (std::size_t t = 0; t < n_times; ++t) {
        per_time[t][i - first] = Moments::of(rows[t]);
      }
    }
    per_block[b].resize(n_times);
    for (std::size_t t = 0; t < n_times; ++t) {
      per_block[b][t] =
          pairwise_sum(per_time[t], 0, per_time[t].size(), Moments{}, add_moments);
    }
  });
  std::vector<Moments> out(n_times);
  for (std::size_t t = 0; t < n_times; ++t) {
    std::vector<Moments> column(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) column[b] = per_block[b][t];
    out[t] = pairwise_sum(column, 0, n_blocks, Moments{}, add_moments);
  }
  return out;
}

void check_times(const std::vector<double>& times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1])) {
      throw InputError("time grid must be nonnegative and nondecreasing");
    }
  }
}

void check_state(const Vector& psi, std::size_t n_qubits) {
  if (static_cast<std::uint64_t>(psi.size()) != (std::uint64_t{1} << n_qubits)) {
    throw InputError("initial state dimension does not match the model");
  }
}

// Delta-method standard errors of Re and Im of N / D given the covariance of
// (N_re, N_im, D_re, D_im).
std::pair<double, double> ratio_errors(Complex N, Complex D,
                                       const std::array<double, 16>& cov) {
  const Complex a = 1.0 / D;
  const Complex b = -(N / D) / D;
  const std::array<double, 4> g_re{a.real(), -a.imag(), b.real(), -b.imag()};
  const std::array<double, 4> g_im{a.imag(), a.real(), b.imag(), b.real()};
  double v_re = 0.0, v_im = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      v_re += g_re[i] * cov[i * 4 + j] * g_re[j];
      v_im += g_im[i] * cov[i * 4 + j] * g_im[j];
    }
  }
  return {std::sqrt(std::max(0.0, v_re)), std::sqrt(std::max(0.0, v_im))};
}

void finish_ratio(EstimateResult& r, const std::array<double, 16>& cov) {
  r.ratio = r.numerator.mean / r.denominator.mean;
  const auto [se_re, se_im] = ratio_errors(r.numerator.mean, r.denominator.mean, cov);
  r.ratio_se = se_re;
  r.ratio_se_im = se_im;
  r.denominator_resolved =
      std::abs(r.denominator.mean) >= 3.0 * r.denominator.se() &&
      std::abs(r.denominator.mean) > 0.0;
}

Rng null_rng() { return Rng(0); }

}  // namespace

ObservableSpec ObservableSpec::from_sum(const PauliSum& o) {
  if (o.empty()) throw InputError("observable has no terms");
  ObservableSpec spec;
  spec.terms = o;
  spec.l1 = l1_norm(o);
  double running = 0.0;
  for (const auto& t : o.terms()) {
    running += std::abs(t.coeff) / spec.l1;
    spec.cumulative.push_back(running);
    spec.phases.push_back(t.coeff / std::abs(t.coeff));
  }
  spec.cumulative.back() = 1.0;
  return spec;
}

std::size_t ObservableSpec::sample(Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()),
                               cumulative.size() - 1);
}

Complex readout(Complex value, const Readout& mode, Rng& rng) {
  if (mode.mode == ReadoutMode::exact) return value;
  if (std::abs(value.real()) > 1.0 + 1e-9 || std::abs(value.imag()) > 1.0 + 1e-9) {
    throw NumericalError("overlap outside the unit square cannot be read out");
  }
  if (mode.shots == 0) throw InputError("shot readout needs at least one shot");
  const double re = std::clamp(value.real(), -1.0, 1.0);
  const double im = std::clamp(value.imag(), -1.0, 1.0);
  const auto m = static_cast<double>(mode.shots);
  std::binomial_distribution<std::uint64_t> x_plus(mode.shots, 0.5 * (1.0 + re));
  std::binomial_distribution<std::uint64_t> y_plus(mode.shots, 0.5 * (1.0 - im));
  const double x_mean = 2.0 * static_cast<double>(x_plus(rng)) / m - 1.0;
  const double y_mean = 2.0 * static_cast<double>(y_plus(rng)) / m - 1.0;
  return {x_mean, -y_mean};
}

double ComplexStat::se() const { return std::hypot(se_re, se_im); }

OverlapValue overlap(const NonHermitianModel& model, double k_prime, double k,
                     const PauliString& term, double T,
                     const PropagatorSpec& propagator, const Vector& psi,
                     Rng& rng, std::size_t max_qubits) {
  check_state(psi, model.n_qubits());
  const Propagator left(model.k_generator(k_prime), propagator, max_qubits);
  const Propagator right(model.k_generator(k), propagator, max_qubits);
  Vector a = psi;
  Vector b = psi;
  OverlapValue out;
  out.log_weight = left.advance(a, 0.0, T, rng) + right.advance(b, 0.0, T, rng);
  out.value = pauli_expectation(a, term, b);
  return out;
}

std::vector<EstimateResult> estimate_sweep(
    const NonHermitianModel& model, const ObservableSpec& observable,
    const Vector& psi, const std::vector<double>& times, const Kernel& kernel,
    const PropagatorSpec& propagator, const EstimatorOptions& options) {
  check_times(times);
  check_state(psi, model.n_qubits());
  propagator.validate();
  if (options.n_numerator == 0 || (!options.paired && options.n_denominator == 0)) {
    throw InputError("sample counts must be at least 1");
  }
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n_times = times.size();

  // One draw: sample k', k (and a term for the numerator), carry both
  // realizations across the grid, record weighted overlaps.
  const auto make_draw = [&](StreamId stream, bool with_term, bool paired) {
    return [&, stream, with_term, paired](std::uint64_t index,
                                          std::vector<DrawValues>& rows) {
      Rng rng = make_stream(options.seed, stream, index);
      const KSample kp = kernel.sample(rng);
      const KSample kk = kernel.sample(rng);
      const std::size_t n = with_term ? observable.sample(rng) : 0;
      const Propagator left(model.k_generator(kp.k), propagator, options.max_qubits);
      const Propagator right(model.k_generator(kk.k), propagator, options.max_qubits);
      const Complex base = std::conj(kp.weight()) * kk.weight();
      const Complex w_num =
          with_term ? base * observable.l1 * observable.phases[n] : base;
      const PauliString* term = with_term ? &observable.terms.terms()[n].string : nullptr;
      Vector a = psi;
      Vector b = psi;
      double log_weight = 0.0;
      double previous = 0.0;
      for (std::size_t j = 0; j < n_times; ++j) {
        log_weight += left.advance(a, previous, times[j], rng);
        log_weight += right.advance(b, previous, times[j], rng);
        previous = times[j];
        const double scale = std::exp(log_weight);
        const Complex raw = term ? pauli_expectation(a, *term, b) : a.dot(b);
        const Complex v = readout(raw, options.readout, rng) * w_num * scale;
        rows[j][0] = v.real();
        rows[j][1] = v.imag();
        if (paired) {
          const Complex d = readout(a.dot(b), options.readout, rng) * base * scale;
          rows[j][2] = d.real();
          rows[j][3] = d.imag();
        }
      }
    };
  };

  std::vector<EstimateResult> results(n_times);
  if (options.paired) {
    const auto m = run_draws(options.n_numerator, n_times, options.workers,
                             options.block_size,
                             make_draw(StreamId::numerator, true, true));
    for (std::size_t j = 0; j < n_times; ++j) {
      auto& r = results[j];
      r.numerator = m[j].channel(0);
      r.denominator = m[j].channel(1);
      std::array<double, 16> cov{};
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) cov[a * 4 + b] = m[j].mean_cov(a, b);
      }
      finish_ratio(r, cov);
    }
  } else {
    const auto mn = run_draws(options.n_numerator, n_times, options.workers,
                              options.block_size,
                              make_draw(StreamId::numerator, true, false));
    const auto md = run_draws(options.n_denominator, n_times, options.workers,
                              options.block_size,
                              make_draw(StreamId::denominator, false, false));
    for (std::size_t j = 0; j < n_times; ++j) {
      auto& r = results[j];
      r.numerator = mn[j].channel(0);
      r.denominator = md[j].channel(0);
      std::array<double, 16> cov{};
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          cov[a * 4 + b] = mn[j].mean_cov(a, b);
          cov[(a + 2) * 4 + (b + 2)] = md[j].mean_cov(a, b);
        }
      }
      finish_ratio(r, cov);
    }
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (std::size_t j = 0; j < n_times; ++j) {
    results[j].t = times[j];
    results[j].seed = options.seed;
    results[j].wall_time = elapsed;
  }
  return results;
}

EstimateResult estimate(const NonHermitianModel& model,
                        const ObservableSpec& observable, const Vector& psi,
                        double T, const Kernel& kernel,
                        const PropagatorSpec& propagator,
                        const EstimatorOptions& options) {
  auto r = estimate_sweep(model, observable, psi, {T}, kernel, propagator, options);
  if (!r.front().denominator_resolved) {
    throw DenominatorError(
        "denominator indistinguishable from zero; increase the sample budget "
        "or shorten T");
  }
  return r.front();
}

EstimateResult estimate_continuous(const NonHermitianModel& model,
                                   const ObservableSpec& observable,
                                   const Vector& psi, double T,
                                   const Kernel& kernel, double tau,
                                   const EstimatorOptions& options) {
  PropagatorSpec spec;
  spec.method = Method::continuous;
  spec.tau = tau;
  return estimate(model, observable, psi, T, kernel, spec, options);
}

std::vector<Vector> lchs_states(const NonHermitianModel& model,
                                const Vector& psi,
                                const std::vector<double>& times,
                                const QuadratureRule& rule,
                                const PropagatorSpec& propagator,
                                unsigned workers, std::size_t max_qubits) {
  check_times(times);
  check_state(psi, model.n_qubits());
  if (propagator.stochastic()) {
    throw InputError("quadrature needs a deterministic propagator");
  }
  const std::size_t n_times = times.size();
  constexpr std::size_t kNodesPerBlock = 16;
  const std::size_t n_nodes = rule.nodes.size();
  const std::size_t n_blocks = (n_nodes + kNodesPerBlock - 1) / kNodesPerBlock;
  std::vector<std::vector<Vector>> partial(n_blocks);
  parallel_blocks(n_blocks, workers, [&](std::size_t b) {
    std::vector<Vector> acc(n_times, Vector::Zero(psi.size()));
    Rng rng = null_rng();
    const std::size_t last = std::min(n_nodes, (b + 1) * kNodesPerBlock);
    for (std::size_t m = b * kNodesPerBlock; m < last; ++m) {
      const Propagator p(model.k_generator(rule.nodes[m].k), propagator, max_qubits);
      Vector v = psi;
      double previous = 0.0;
      for (std::size_t j = 0; j < n_times; ++j) {
        p.advance(v, previous, times[j], rng);
        previous = times[j];
        acc[j] += rule.nodes[m].c * v;
      }
    }
    partial[b] = std::move(acc);
  });
  std::vector<Vector> out(n_times);
  for (std::size_t j = 0; j < n_times; ++j) {
    std::vector<Vector> column(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) column[b] = partial[b][j];
    out[j] = pairwise_sum(column, 0, n_blocks, Vector(Vector::Zero(psi.size())),
                          [](const Vector& x, const Vector& y) -> Vector { return x + y; });
  }
  return out;
}

std::vector<EstimateResult> estimate_quadrature_sweep(
    const NonHermitianModel& model, const PauliSum& observable,
    const Vector& psi, const std::vector<double>& times,
    const QuadratureRule& rule, const PropagatorSpec& propagator,
    unsigned workers, std::size_t max_qubits) {
  const auto start = std::chrono::steady_clock::now();
  const auto states =
      lchs_states(model, psi, times, rule, propagator, workers, max_qubits);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<EstimateResult> out(times.size());
  for (std::size_t j = 0; j < times.size(); ++j) {
    auto& r = out[j];
    r.t = times[j];
    r.numerator.mean = states[j].dot(apply_sum(observable, states[j]));
    r.denominator.mean = states[j].squaredNorm();
    r.numerator.n = r.denominator.n = rule.nodes.size();
    r.ratio = r.numerator.mean / r.denominator.mean;
    r.denominator_resolved = std::abs(r.denominator.mean) > 0.0;
    r.wall_time = elapsed;
  }
  return out;
}

EstimateResult estimate_quadrature(const NonHermitianModel& model,
                                   const PauliSum& observable,
                                   const Vector& psi, double T,
                                   const QuadratureRule& rule,
                                   const PropagatorSpec& propagator,
                                   std::size_t max_qubits) {
  return estimate_quadrature_sweep(model, observable, psi, {T}, rule, propagator,
                                   1, max_qubits)
      .front();
}

std::vector<ComplexStat> amplitude_sweep(const NonHermitianModel& model,
                                         const Vector& bra, const Vector& ket,
                                         const std::vector<double>& times,
                                         const Kernel& kernel,
                                         const PropagatorSpec& propagator,
                                         const EstimatorOptions& options) {
  check_times(times);
  check_state(bra, model.n_qubits());
  check_state(ket, model.n_qubits());
  propagator.validate();
  if (options.n_numerator == 0) throw InputError("sample count must be at least 1");
  const std::size_t n_times = times.size();
  const auto moments = run_draws(
      options.n_numerator, n_times, options.workers, options.block_size,
      [&](std::uint64_t index, std::vector<DrawValues>& rows) {
        Rng rng = make_stream(options.seed, StreamId::amplitude, index);
        const KSample kk = kernel.sample(rng);
        const Propagator p(model.k_generator(kk.k), propagator, options.max_qubits);
        Vector v = ket;
        double log_weight = 0.0;
        double previous = 0.0;
        for (std::size_t j = 0; j < n_times; ++j) {
          log_weight += p.advance(v, previous, times[j], rng);
          previous = times[j];
          const Complex a = readout(bra.dot(v), options.readout, rng) *
                            kk.weight() * std::exp(log_weight);
          rows[j][0] = a.real();
          rows[j][1] = a.imag();
        }
      });
  std::vector<ComplexStat> out;
  out.reserve(n_times);
  for (const auto& m : moments) out.push_back(m.channel(0));
  return out;
}

std::vector<Vector> evolve_nonhermitian(const NonHermitianModel& model,
                                        const Vector& psi,
                                        const std::vector<double>& times) {
  check_times(times);
  check_state(psi, model.n_qubits());
  const bool constant = model.time_independent();
  const PauliSum fixed = model.hamiltonian(0.0);
  const Derivative rhs = [&](double t, const Vector& y, Vector& dy) {
    dy = -kI * apply_sum(constant ? fixed : model.hamiltonian(t), y);
  };
  double bound = 0.0;
  for (const auto& t : fixed.terms()) bound += std::abs(t.coeff);
  std::vector<Vector> out;
  Vector v = psi;
  double previous = 0.0;
  for (double t : times) {
    const auto initial = static_cast<std::size_t>(
        std::max(16.0, std::ceil(4.0 * bound * (t - previous))));
    integrate_rk4(rhs, previous, t, v, 1e-11, initial);
    previous = t;
    out.push_back(v);
  }
  return out;
}

std::vector<double> exact_expectations(const NonHermitianModel& model,
                                       const PauliSum& observable,
                                       const Vector& psi,
                                       const std::vector<double>& times) {
  std::vector<double> out;
  for (const auto& phi : evolve_nonhermitian(model, psi, times)) {
    out.push_back((phi.dot(apply_sum(observable, phi)) / phi.squaredNorm()).real());
  }
  return out;
}

namespace {

SamplingPlan make_plan(double delta, double eta, double o_l1, double g_l1,
                       double growth, double ceiling) {
  if (!(delta > 0.0 && delta < 1.0) || !(eta > 0.0 && eta < 1.0)) {
    throw InputError("delta and eta must lie in (0, 1)");
  }
  if (!(o_l1 > 0.0)) throw InputError("observable l1 norm must be positive");
  SamplingPlan plan;
  plan.delta = delta;
  plan.eta = eta;
  plan.K = 2.0 * std::log(8.0 / delta);
  const double o = 2.0 * o_l1 + 1.0;
  plan.raw = plan.K * o * o * std::pow(g_l1, 4) * growth / (eta * eta);
  plan.exceeds_ceiling = !(plan.raw <= ceiling);
  const double capped = std::min(std::ceil(plan.raw), 9.0e18);
  plan.n_numerator = plan.n_denominator =
      std::max<std::size_t>(1, static_cast<std::size_t>(capped));
  return plan;
}

}  // namespace

SamplingPlan plan_samples(double delta, double eta, double o_l1, double g_l1,
                          double T, double delta_ei, double ceiling) {
  return make_plan(delta, eta, o_l1, g_l1, std::exp(4.0 * T * delta_ei), ceiling);
}

SamplingPlan plan_samples_ground(double delta, double eta, double o_l1,
                                 double g_l1, double p_g, double ceiling) {
  if (!(p_g > 0.0 && p_g <= 1.0)) throw InputError("p_g must lie in (0, 1]");
  return make_plan(delta, eta, o_l1, g_l1, 1.0 / (p_g * p_g), ceiling);
}

std::pair<double, double> bound_denominator(const NonHermitianModel& model,
                                            double T, std::size_t grid_points,
                                            std::size_t max_qubits) {
  const SpectralSummary s = spectral_summary(model, T, grid_points, max_qubits);
  double top = 0.0;
  double bottom = 0.0;
  for (std::size_t g = 0; g + 1 < s.grid.size(); ++g) {
    const double dt = s.grid[g + 1] - s.grid[g];
    top += 0.5 * dt * ((s.ei_max[g] - s.shift[g]) + (s.ei_max[g + 1] - s.shift[g + 1]));
    bottom += 0.5 * dt * ((s.ei_min[g] - s.shift[g]) + (s.ei_min[g + 1] - s.shift[g + 1]));
  }
  return {std::exp(-2.0 * top), std::exp(-2.0 * bottom)};
}

}  // namespace nhqmc
