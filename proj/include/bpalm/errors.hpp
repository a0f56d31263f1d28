#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bpalm {

/// Failure classes surfaced by the library. The CLI maps them to exit codes.
enum class ErrorKind {
  Config,      // invalid parameters, shapes or step sizes
  Domain,      // a point left dom h or dom phi
  Numeric,     // non-finite arithmetic, solver non-convergence
  Capability,  // no update path / sampler available for the request
  Invariant,   // internal-consistency check failed (e.g. phi increased)
  Divergence,  // line search exceeded its trial cap
  Io,          // file could not be read or written
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace bpalm
