#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nhqmc {

/// One CSV line. Missing values (no exact reference, unresolved estimate)
/// are written as empty or "nan".
struct ResultRow {
  double t = 0.0;
  std::string method;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::optional<double> exact;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;

  std::optional<double> abs_error() const;
};

inline constexpr const char* kCsvHeader =
    "t,method,estimate,stderr,exact,abs_error,n_samples,seed";

std::string to_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);

/// Two-panel line chart (value vs t, log10 |error| vs t) drawn from CSV text
/// alone.
std::string render_svg(const std::string& csv_text);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace nhqmc
