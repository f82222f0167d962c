#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nhqmc/types.hpp"

namespace nhqmc {

/// Single-qubit Pauli encoded as (x bit, z bit): X = x, Z = z, Y = x|z.
enum class Pauli : std::uint8_t { I = 0, X = 1, Z = 2, Y = 3 };

char pauli_char(Pauli p);

/**
 * Tensor product of single-qubit Paulis on a fixed register.
 *
 * Label position q names qubit q, and qubit 0 is the most significant bit of
 * a computational basis index, so "IZ" realizes I (x) Z. Internally the
 * string is stored as two packed masks already laid out in basis-index bit
 * order, which makes application to a state vector a pair of bit operations:
 *
 *   P |b> = i^{#Y} (-1)^{popcount(b & z)} |b ^ x>
 *
 * Registers of up to 64 qubits are representable; dense realizations are
 * capped separately.
 */
class PauliString {
 public:
  static constexpr std::size_t kMaxQubits = 64;

  PauliString() = default;
  /// Identity on `n_qubits` qubits.
  explicit PauliString(std::size_t n_qubits);

  /// Parses a label over {I, X, Y, Z}; throws InputError on other characters.
  static PauliString parse(std::string_view label);
  /// Builds a string from basis-order masks; bits above `n_qubits` must be 0.
  static PauliString from_masks(std::size_t n_qubits, std::uint64_t x,
                                std::uint64_t z);

  std::size_t size() const noexcept { return n_qubits_; }
  Pauli at(std::size_t qubit) const;
  void set(std::size_t qubit, Pauli p);

  std::string label() const;
  bool is_identity() const noexcept { return x_ == 0 && z_ == 0; }

  /// Bit-flip mask in basis-index order.
  std::uint64_t x_mask() const noexcept { return x_; }
  /// Phase mask in basis-index order.
  std::uint64_t z_mask() const noexcept { return z_; }
  int y_count() const noexcept;

  bool commutes_with(const PauliString& other) const;

  /// Tensor product this (x) other (this occupies the leading qubits).
  PauliString tensor(const PauliString& other) const;

  friend bool operator==(const PauliString&, const PauliString&) = default;
  friend auto operator<=>(const PauliString&, const PauliString&) = default;

 private:
  std::uint64_t bit(std::size_t qubit) const noexcept {
    return std::uint64_t{1} << (n_qubits_ - 1 - qubit);
  }

  std::size_t n_qubits_ = 0;
  std::uint64_t x_ = 0;
  std::uint64_t z_ = 0;
};

struct PauliStringHash {
  std::size_t operator()(const PauliString& s) const noexcept;
};

/// Result of multiplying two Pauli strings: phase in {+-1, +-i}.
struct PauliProduct {
  Complex phase;
  PauliString string;
};

/// p * q = phase * r. Throws InputError on length mismatch.
PauliProduct multiply(const PauliString& p, const PauliString& q);

struct PauliTerm {
  Complex coeff;
  PauliString string;
};

/**
 * Complex-weighted sum of Pauli strings with distinct strings.
 *
 * Insertion order is preserved; product formulas apply terms in exactly this
 * order. Adding a string that already exists merges coefficients, and a term
 * whose coefficient magnitude drops below kMergeTolerance is removed.
 */
class PauliSum {
 public:
  PauliSum() = default;
  explicit PauliSum(std::size_t n_qubits) : n_qubits_(n_qubits) {}
  PauliSum(std::size_t n_qubits, const std::vector<PauliTerm>& terms);

  static PauliSum identity(std::size_t n_qubits, Complex coeff = 1.0);

  /// Parses the line format `<complex coeff> <label>`; blank lines and `#`
  /// comments are skipped.
  static PauliSum parse(std::string_view text);
  std::string to_text() const;

  std::size_t n_qubits() const noexcept { return n_qubits_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool empty() const noexcept { return terms_.empty(); }
  const std::vector<PauliTerm>& terms() const noexcept { return terms_; }

  void add(Complex coeff, const PauliString& string);
  void add(const PauliTerm& term) { add(term.coeff, term.string); }
  PauliSum& operator+=(const PauliSum& other);
  PauliSum& operator*=(Complex scale);

  /// Coefficient of `string`, zero when absent.
  Complex coefficient(const PauliString& string) const;

  /// True when every coefficient is real within `tol`.
  bool is_real(double tol = 1e-12) const;

  /// Tensor product: this on the leading qubits, other on the trailing ones.
  PauliSum tensor(const PauliSum& other) const;

  friend PauliSum operator+(PauliSum a, const PauliSum& b) { return a += b; }
  friend PauliSum operator*(Complex s, PauliSum a) { return a *= s; }

 private:
  void reindex();

  std::size_t n_qubits_ = 0;
  std::vector<PauliTerm> terms_;
  std::unordered_map<PauliString, std::size_t, PauliStringHash> index_;
};

/// Dense realization, Sum coeff * (single-qubit matrices tensored in label
/// order). Throws ResourceError above `max_qubits`.
Matrix to_matrix(const PauliSum& sum, std::size_t max_qubits = kDefaultDenseCap);
Matrix to_matrix(const PauliString& string,
                 std::size_t max_qubits = kDefaultDenseCap);

/// Pauli coefficients trace(sigma^dagger m) / 2^n of a square 2^n matrix.
PauliSum decompose(const Matrix& m, double tol = kMergeTolerance);

/// Sum |coeff|.
double l1_norm(const PauliSum& sum);

/// H = H_r - i H_i with both parts Hermitian (real coefficients).
struct HermitianSplit {
  PauliSum hermitian;
  PauliSum anti_hermitian;
};

HermitianSplit hermitian_split(const PauliSum& sum);

/// Parses `a`, `bi`, `a+bi`, `a-bi` (and `i`, `-i`); exponents are allowed.
Complex parse_complex(std::string_view text);
std::string format_complex(Complex value);

}  // namespace nhqmc
