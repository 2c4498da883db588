#include "ncpfr/common.hpp"

#include <cstdlib>
#include <string>
#include <thread>

#include "ncpfr/parallel.hpp"

namespace ncpfr {

Precision parse_precision(const std::string& name) {
  if (name == "double") return Precision::Double;
  if (name == "extended") return Precision::Extended;
  throw DomainError("unknown precision '" + name + "' (expected double or extended)");
}

const char* to_string(Precision p) { return p == Precision::Double ? "double" : "extended"; }

Precision auto_precision(std::size_t d, double t, int n, Precision requested) {
  if (requested == Precision::Extended) return requested;
  if (d > 512 || (t == 2.0 && n >= 8)) return Precision::Extended;
  return Precision::Double;
}

std::size_t thread_count() {
  if (const char* env = std::getenv("NCPFR_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace ncpfr
