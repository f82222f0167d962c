#include "nhqmc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nhqmc/errors.hpp"

namespace nhqmc {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double pwl_value(const Schedule::PiecewiseLinear& p, double t) {
  if (t <= p.knots.front()) return p.values.front();
  if (t >= p.knots.back()) return p.values.back();
  const auto it = std::upper_bound(p.knots.begin(), p.knots.end(), t);
  const auto i = static_cast<std::size_t>(it - p.knots.begin()) - 1;
  const double w = (t - p.knots[i]) / (p.knots[i + 1] - p.knots[i]);
  return (1.0 - w) * p.values[i] + w * p.values[i + 1];
}

// Integral of a linear segment (or its absolute value) between two points.
double segment_integral(double t0, double v0, double t1, double v1,
                        bool absolute) {
  const double dt = t1 - t0;
  if (!absolute) return 0.5 * (v0 + v1) * dt;
  if (v0 * v1 >= 0.0) return 0.5 * (std::abs(v0) + std::abs(v1)) * dt;
  const double tz = dt * std::abs(v0) / (std::abs(v0) + std::abs(v1));
  return 0.5 * (std::abs(v0) * tz + std::abs(v1) * (dt - tz));
}

double pwl_integral(const Schedule::PiecewiseLinear& p, double a, double b,
                    bool absolute) {
  std::vector<double> points{a};
  for (double k : p.knots) {
    if (k > a && k < b) points.push_back(k);
  }
  points.push_back(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    total += segment_integral(points[i], pwl_value(p, points[i]),
                              points[i + 1], pwl_value(p, points[i + 1]),
                              absolute);
  }
  return total;
}

}  // namespace

Schedule Schedule::constant(double value) {
  if (!std::isfinite(value)) throw InputError("non-finite schedule constant");
  Schedule s;
  s.form_ = Constant{value};
  return s;
}

Schedule Schedule::piecewise_linear(std::vector<double> knots,
                                    std::vector<double> values) {
  if (knots.empty() || knots.size() != values.size()) {
    throw InputError("piecewise-linear schedule needs matching knots/values");
  }
  for (std::size_t i = 0; i < knots.size(); ++i) {
    if (!std::isfinite(knots[i]) || !std::isfinite(values[i])) {
      throw InputError("non-finite piecewise-linear schedule entry");
    }
    if (i > 0 && knots[i] <= knots[i - 1]) {
      throw InputError("piecewise-linear knots must be strictly increasing");
    }
  }
  Schedule s;
  s.form_ = PiecewiseLinear{std::move(knots), std::move(values)};
  return s;
}

Schedule Schedule::harmonic(double offset, double amplitude, double frequency,
                            double phase) {
  if (!std::isfinite(offset) || !std::isfinite(amplitude) ||
      !std::isfinite(frequency) || !std::isfinite(phase)) {
    throw InputError("non-finite harmonic schedule parameter");
  }
  Schedule s;
  s.form_ = Harmonic{offset, amplitude, frequency, phase};
  return s;
}

double Schedule::operator()(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return c.value; },
          [t](const PiecewiseLinear& p) { return pwl_value(p, t); },
          [t](const Harmonic& h) {
            return h.offset + h.amplitude * std::sin(h.frequency * t + h.phase);
          },
      },
      form_);
}

double Schedule::constant_value() const {
  if (!is_constant()) throw InputError("schedule is not constant");
  return std::get<Constant>(form_).value;
}

double Schedule::integral(double a, double b) const {
  return std::visit(
      Overloaded{
          [&](const Constant& c) { return c.value * (b - a); },
          [&](const PiecewiseLinear& p) { return pwl_integral(p, a, b, false); },
          [&](const Harmonic& h) {
            double out = h.offset * (b - a);
            if (h.frequency == 0.0) {
              out += h.amplitude * std::sin(h.phase) * (b - a);
            } else {
              out += h.amplitude / h.frequency *
                     (std::cos(h.frequency * a + h.phase) -
                      std::cos(h.frequency * b + h.phase));
            }
            return out;
          },
      },
      form_);
}

double Schedule::abs_integral(double a, double b) const {
  return std::visit(
      Overloaded{
          [&](const Constant& c) { return std::abs(c.value) * (b - a); },
          [&](const PiecewiseLinear& p) { return pwl_integral(p, a, b, true); },
          [&](const Harmonic&) {
            if (b <= a) return 0.0;
            const auto f = [this](double t) { return std::abs((*this)(t)); };
            return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                f, a, b, 15, 1e-13);
          },
      },
      form_);
}

double Schedule::abs_bound(double a, double b) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) { return std::abs(c.value); },
          [&](const PiecewiseLinear& p) {
            double m = std::max(std::abs(pwl_value(p, a)),
                                std::abs(pwl_value(p, b)));
            for (std::size_t i = 0; i < p.knots.size(); ++i) {
              if (p.knots[i] > a && p.knots[i] < b) {
                m = std::max(m, std::abs(p.values[i]));
              }
            }
            return m;
          },
          [&](const Harmonic& h) {
            double m = std::max(std::abs((*this)(a)), std::abs((*this)(b)));
            if (h.frequency == 0.0 || h.amplitude == 0.0) return m;
            // Interior extrema sit at frequency * t + phase = pi/2 + j pi.
            double lo = h.frequency * a + h.phase;
            double hi = h.frequency * b + h.phase;
            if (lo > hi) std::swap(lo, hi);
            const double pi = std::numbers::pi;
            if (hi - lo >= 2.0 * pi) {
              return std::abs(h.offset) + std::abs(h.amplitude);
            }
            for (double j = std::ceil((lo - pi / 2) / pi);
                 pi / 2 + j * pi <= hi; j += 1.0) {
              m = std::max(m, std::abs(h.offset + h.amplitude *
                                                      std::sin(pi / 2 + j * pi)));
            }
            return m;
          },
      },
      form_);
}

std::string Schedule::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const Constant& c) { out << c.value; },
                 [&](const PiecewiseLinear& p) {
                   out << "pwl(";
                   for (std::size_t i = 0; i < p.knots.size(); ++i) {
                     out << (i ? ", " : "") << p.knots[i] << ':' << p.values[i];
                   }
                   out << ')';
                 },
                 [&](const Harmonic& h) {
                   out << "harmonic(offset=" << h.offset
                       << ", amplitude=" << h.amplitude
                       << ", frequency=" << h.frequency << ", phase=" << h.phase
                       << ')';
                 },
             },
             form_);
  return out.str();
}

}  // namespace nhqmc
