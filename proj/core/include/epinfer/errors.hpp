// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef EPINFER_ERRORS_HPP
#define EPINFER_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace epinfer {

// Failure categories surfaced to callers. Everything recoverable inside an
// algorithm (a rejected proposal, a degenerate particle set) is reported
// through return values instead; exceptions mean the requested computation
// cannot produce a valid result.
enum class Errc {
  invalid_argument,   // malformed parameter, state, or option values
  config,             // malformed scenario configuration
  io,                 // file cannot be read, written, or parsed
  numeric,            // overflow, non-finite intermediate, degenerate matrix
  tuning_failed,      // pilot step-size search exhausted its adjustment budget
  epsilon_too_small,  // rejection sampler acceptance rate below viability floor
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline const char *errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::config: return "config";
    case Errc::io: return "io";
    case Errc::numeric: return "numeric";
    case Errc::tuning_failed: return "tuning_failed";
    case Errc::epsilon_too_small: return "epsilon_too_small";
  }
  return "unknown";
}

}  // namespace epinfer

#endif  // EPINFER_ERRORS_HPP
