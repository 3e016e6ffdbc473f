#ifndef OSDA_COMMON_HPP
#define OSDA_COMMON_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace osda {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Error hierarchy. The CLI maps these onto exit codes, everything else just
// lets them propagate.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};
class IoError : public Error {
 public:
  using Error::Error;
};
class FormatError : public Error {
 public:
  using Error::Error;
};
class DataError : public Error {
 public:
  using Error::Error;
};
class LabelError : public Error {
 public:
  using Error::Error;
};
class CoverageError : public Error {
 public:
  using Error::Error;
};
class ProtocolError : public Error {
 public:
  using Error::Error;
};
class SamplingError : public Error {
 public:
  using Error::Error;
};
class InfeasibleError : public Error {
 public:
  using Error::Error;
};
class NumericError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic RNG. All randomness in the library flows through named
// streams derived from a single 64-bit root seed, so independent consumers
// (splitting, subsampling, synthesis, ...) never interleave draws.
// Distributions are hand-rolled on top of mt19937_64 because the standard
// distribution objects are implementation-defined.
// ---------------------------------------------------------------------------

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Derive an independent stream from a root seed and a purpose name.
  static Rng stream(std::uint64_t root_seed, std::string_view name);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1).
  double next_unit();

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via the polar method.
  double normal();

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct indices from [0, n), in ascending order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Small formatting/parsing helpers shared by the CSV and JSON writers.
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal representation of a double ("inf"/"-inf"/"nan"
/// for the non-finite values).
std::string format_double(double v);

/// Parse a double, accepting the format_double spellings. Throws FormatError.
double parse_double(const std::string& token);

/// Split one CSV line on commas. No quoting: tokens must not contain commas.
std::vector<std::string> split_csv_line(const std::string& line);

/// Read a whole text file. Throws IoError if the file cannot be opened.
std::string read_file(const std::string& path);

/// Write a file atomically-ish (truncate + write). Throws IoError on failure.
void write_file(const std::string& path, const std::string& content);

}  // namespace osda

#endif  // OSDA_COMMON_HPP
