#include "nhqmc/pauli.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <sstream>

#include "nhqmc/errors.hpp"

namespace nhqmc {

namespace {

int popcount(std::uint64_t v) { return std::popcount(v); }

// i^e for e taken mod 4.
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

std::size_t dimension_for(std::size_t n_qubits, std::size_t max_qubits) {
  if (n_qubits > max_qubits) {
    throw ResourceError("dense realization of " + std::to_string(n_qubits) +
                        " qubits exceeds the cap of " +
                        std::to_string(max_qubits));
  }
  return std::size_t{1} << n_qubits;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_real(std::string_view text, std::string_view whole) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw InputError("malformed complex number '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

char pauli_char(Pauli p) {
  switch (p) {
    case Pauli::I:
      return 'I';
    case Pauli::X:
      return 'X';
    case Pauli::Y:
      return 'Y';
    case Pauli::Z:
      return 'Z';
  }
  return '?';
}

PauliString::PauliString(std::size_t n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits > kMaxQubits) {
    throw InputError("Pauli strings are limited to 64 qubits");
  }
}

PauliString PauliString::parse(std::string_view label) {
  PauliString s(label.size());
  for (std::size_t q = 0; q < label.size(); ++q) {
    switch (label[q]) {
      case 'I':
        break;
      case 'X':
        s.set(q, Pauli::X);
        break;
      case 'Y':
        s.set(q, Pauli::Y);
        break;
      case 'Z':
        s.set(q, Pauli::Z);
        break;
      default:
        throw InputError("invalid Pauli label '" + std::string(label) + "'");
    }
  }
  return s;
}

PauliString PauliString::from_masks(std::size_t n_qubits, std::uint64_t x,
                                    std::uint64_t z) {
  PauliString s(n_qubits);
  const std::uint64_t valid =
      n_qubits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_qubits) - 1;
  if ((x | z) & ~valid) {
    throw InputError("Pauli mask has bits outside the register");
  }
  s.x_ = x;
  s.z_ = z;
  return s;
}

Pauli PauliString::at(std::size_t qubit) const {
  if (qubit >= n_qubits_) throw InputError("qubit index out of range");
  const bool x = (x_ & bit(qubit)) != 0;
  const bool z = (z_ & bit(qubit)) != 0;
  return static_cast<Pauli>((x ? 1 : 0) | (z ? 2 : 0));
}

void PauliString::set(std::size_t qubit, Pauli p) {
  if (qubit >= n_qubits_) throw InputError("qubit index out of range");
  const auto code = static_cast<std::uint8_t>(p);
  x_ = (code & 1) ? (x_ | bit(qubit)) : (x_ & ~bit(qubit));
  z_ = (code & 2) ? (z_ | bit(qubit)) : (z_ & ~bit(qubit));
}

std::string PauliString::label() const {
  std::string out(n_qubits_, 'I');
  for (std::size_t q = 0; q < n_qubits_; ++q) out[q] = pauli_char(at(q));
  return out;
}

int PauliString::y_count() const noexcept { return popcount(x_ & z_); }

bool PauliString::commutes_with(const PauliString& other) const {
  if (other.n_qubits_ != n_qubits_) {
    throw InputError("Pauli string length mismatch");
  }
  return (popcount(x_ & other.z_) + popcount(z_ & other.x_)) % 2 == 0;
}

PauliString PauliString::tensor(const PauliString& other) const {
  if (n_qubits_ + other.n_qubits_ > kMaxQubits) {
    throw InputError("tensor product exceeds 64 qubits");
  }
  return from_masks(n_qubits_ + other.n_qubits_,
                    (x_ << other.n_qubits_) | other.x_,
                    (z_ << other.n_qubits_) | other.z_);
}

std::size_t PauliStringHash::operator()(const PauliString& s) const noexcept {
  std::uint64_t h = s.x_mask() * 0x9e3779b97f4a7c15ULL;
  h ^= s.z_mask() + 0x632be59bd9b4e019ULL + (h << 6) + (h >> 2);
  h ^= s.size() * 0xbf58476d1ce4e5b9ULL;
  return static_cast<std::size_t>(h);
}

PauliProduct multiply(const PauliString& p, const PauliString& q) {
  if (p.size() != q.size()) throw InputError("Pauli string length mismatch");
  // With P = i^{x.z} X^x Z^z, moving Z^{z1} past X^{x2} costs (-1)^{z1.x2}.
  const std::uint64_t x = p.x_mask() ^ q.x_mask();
  const std::uint64_t z = p.z_mask() ^ q.z_mask();
  const int e = popcount(p.x_mask() & p.z_mask()) +
                popcount(q.x_mask() & q.z_mask()) +
                2 * popcount(p.z_mask() & q.x_mask()) - popcount(x & z);
  return {i_power(e), PauliString::from_masks(p.size(), x, z)};
}

PauliSum::PauliSum(std::size_t n_qubits, const std::vector<PauliTerm>& terms)
    : n_qubits_(n_qubits) {
  for (const auto& t : terms) add(t);
}

PauliSum PauliSum::identity(std::size_t n_qubits, Complex coeff) {
  PauliSum s(n_qubits);
  s.add(coeff, PauliString(n_qubits));
  return s;
}

void PauliSum::add(Complex coeff, const PauliString& string) {
  if (string.size() != n_qubits_) {
    throw InputError("term on " + std::to_string(string.size()) +
                     " qubits added to a sum on " + std::to_string(n_qubits_));
  }
  if (!std::isfinite(coeff.real()) || !std::isfinite(coeff.imag())) {
    throw InputError("non-finite Pauli coefficient");
  }
  const auto it = index_.find(string);
  if (it == index_.end()) {
    if (std::abs(coeff) < kMergeTolerance) return;
    index_.emplace(string, terms_.size());
    terms_.push_back({coeff, string});
    return;
  }
  auto& term = terms_[it->second];
  term.coeff += coeff;
  if (std::abs(term.coeff) < kMergeTolerance) {
    terms_.erase(terms_.begin() + static_cast<std::ptrdiff_t>(it->second));
    reindex();
  }
}

void PauliSum::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    index_.emplace(terms_[i].string, i);
  }
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
  if (terms_.empty() && n_qubits_ == 0) n_qubits_ = other.n_qubits_;
  for (const auto& t : other.terms_) add(t);
  return *this;
}

PauliSum& PauliSum::operator*=(Complex scale) {
  std::vector<PauliTerm> scaled;
  scaled.reserve(terms_.size());
  for (const auto& t : terms_) scaled.push_back({t.coeff * scale, t.string});
  terms_.clear();
  index_.clear();
  for (const auto& t : scaled) add(t);
  return *this;
}

Complex PauliSum::coefficient(const PauliString& string) const {
  const auto it = index_.find(string);
  return it == index_.end() ? Complex{} : terms_[it->second].coeff;
}

bool PauliSum::is_real(double tol) const {
  return std::all_of(terms_.begin(), terms_.end(), [tol](const PauliTerm& t) {
    return std::abs(t.coeff.imag()) <= tol;
  });
}

PauliSum PauliSum::tensor(const PauliSum& other) const {
  PauliSum out(n_qubits_ + other.n_qubits_);
  for (const auto& a : terms_) {
    for (const auto& b : other.terms_) {
      out.add(a.coeff * b.coeff, a.string.tensor(b.string));
    }
  }
  return out;
}

PauliSum PauliSum::parse(std::string_view text) {
  PauliSum sum;
  bool sized = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto space = line.find_first_of(" \t");
    if (space == std::string_view::npos) {
      throw InputError("line " + std::to_string(line_no) +
                       ": expected '<coeff> <label>'");
    }
    const Complex coeff = parse_complex(trim(line.substr(0, space)));
    const PauliString string = PauliString::parse(trim(line.substr(space)));
    if (!sized) {
      sum = PauliSum(string.size());
      sized = true;
    }
    sum.add(coeff, string);
  }
  return sum;
}

std::string PauliSum::to_text() const {
  std::ostringstream out;
  for (const auto& t : terms_) {
    out << format_complex(t.coeff) << ' ' << t.string.label() << '\n';
  }
  return out.str();
}

Matrix to_matrix(const PauliString& string, std::size_t max_qubits) {
  const std::size_t dim = dimension_for(string.size(), max_qubits);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim),
                          static_cast<Eigen::Index>(dim));
  const Complex y_phase = i_power(string.y_count());
  for (std::uint64_t b = 0; b < dim; ++b) {
    const double sign = (popcount(b & string.z_mask()) & 1) ? -1.0 : 1.0;
    m(static_cast<Eigen::Index>(b ^ string.x_mask()),
      static_cast<Eigen::Index>(b)) = y_phase * sign;
  }
  return m;
}

Matrix to_matrix(const PauliSum& sum, std::size_t max_qubits) {
  const std::size_t dim = dimension_for(sum.n_qubits(), max_qubits);
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim),
                          static_cast<Eigen::Index>(dim));
  for (const auto& t : sum.terms()) {
    const Complex scale = t.coeff * i_power(t.string.y_count());
    for (std::uint64_t b = 0; b < dim; ++b) {
      const double sign = (popcount(b & t.string.z_mask()) & 1) ? -1.0 : 1.0;
      m(static_cast<Eigen::Index>(b ^ t.string.x_mask()),
        static_cast<Eigen::Index>(b)) += scale * sign;
    }
  }
  return m;
}

PauliSum decompose(const Matrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw InputError("decompose expects a non-empty square matrix");
  }
  const auto dim = static_cast<std::uint64_t>(m.rows());
  if (!std::has_single_bit(dim)) {
    throw InputError("decompose expects a 2^n dimensional matrix, got " +
                     std::to_string(dim));
  }
  const auto n = static_cast<std::size_t>(std::countr_zero(dim));
  if (n > PauliString::kMaxQubits) throw InputError("matrix too large");

  // For a fixed flip mask x the entries m(b ^ x, b) determine every z through
  // a Walsh-Hadamard transform: sum_b (-1)^{b.z} m(b ^ x, b).
  std::vector<PauliTerm> found;
  std::vector<Complex> v(dim);
  for (std::uint64_t x = 0; x < dim; ++x) {
    bool any = false;
    for (std::uint64_t b = 0; b < dim; ++b) {
      v[b] = m(static_cast<Eigen::Index>(b ^ x), static_cast<Eigen::Index>(b));
      any = any || v[b] != Complex{};
    }
    if (!any) continue;
    for (std::uint64_t len = 1; len < dim; len <<= 1) {
      for (std::uint64_t i = 0; i < dim; i += len << 1) {
        for (std::uint64_t j = i; j < i + len; ++j) {
          const Complex a = v[j];
          const Complex b = v[j + len];
          v[j] = a + b;
          v[j + len] = a - b;
        }
      }
    }
    for (std::uint64_t z = 0; z < dim; ++z) {
      const Complex c =
          std::conj(i_power(popcount(x & z))) * v[z] / static_cast<double>(dim);
      if (std::abs(c) >= tol) {
        found.push_back({c, PauliString::from_masks(n, x, z)});
      }
    }
  }
  std::sort(found.begin(), found.end(),
            [](const PauliTerm& a, const PauliTerm& b) {
              return a.string.label() < b.string.label();
            });
  return PauliSum(n, found);
}

double l1_norm(const PauliSum& sum) {
  double total = 0.0;
  for (const auto& t : sum.terms()) total += std::abs(t.coeff);
  return total;
}

HermitianSplit hermitian_split(const PauliSum& sum) {
  HermitianSplit out{PauliSum(sum.n_qubits()), PauliSum(sum.n_qubits())};
  for (const auto& t : sum.terms()) {
    out.hermitian.add(t.coeff.real(), t.string);
    out.anti_hermitian.add(-t.coeff.imag(), t.string);
  }
  return out;
}

Complex parse_complex(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  if (text.empty()) throw InputError("empty complex number");
  if (text.back() != 'i') return {parse_real(text, whole), 0.0};

  text.remove_suffix(1);
  // Split at the last sign that is not the leading sign or an exponent sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t p = text.size(); p-- > 1;) {
    if ((text[p] == '+' || text[p] == '-') && text[p - 1] != 'e' &&
        text[p - 1] != 'E') {
      split = p;
      break;
    }
  }
  const auto imag_of = [&](std::string_view s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_real(s, whole);
  };
  if (split == std::string_view::npos) return {0.0, imag_of(text)};
  return {parse_real(text.substr(0, split), whole),
          imag_of(text.substr(split))};
}

std::string format_complex(Complex value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value.real());
  std::string out(buf, res.ptr);
  const double im = value.imag();
  out += std::signbit(im) ? '-' : '+';
  res = std::to_chars(buf, buf + sizeof buf, std::abs(im));
  out.append(buf, res.ptr);
  out += 'i';
  return out;
}

}  // namespace nhqmc
