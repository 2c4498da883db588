#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ncpfr {

/// Storage type for dynamical quantities (preimage nodes, log-derivatives,
/// log-weights). x87 extended precision on the supported toolchains.
using Real = long double;

/// Arithmetic used by the measure-to-Jacobi reduction.
enum class Precision { Double, Extended };

Precision parse_precision(const std::string& name);
const char* to_string(Precision p);

/// Extended arithmetic for large or badly scaled problems, double otherwise.
Precision auto_precision(std::size_t d, double t, int n, Precision requested);

inline constexpr std::size_t kDefaultNodeCap = 4096;

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or violated preconditions.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its tolerance (root polishing,
/// eigensolver, underflow).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Size caps exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Closed interval [lo, hi] on the real line.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  bool intersects(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

}  // namespace ncpfr
