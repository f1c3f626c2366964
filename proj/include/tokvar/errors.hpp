#pragma once

#include <stdexcept>
#include <string>

namespace tokvar {

enum class ErrorKind {
    config,    // bad flags, missing environment, invalid parameter values
    input,     // malformed or inconsistent corpus/trace/scored files
    backend,   // transport failures, bad responses, capability gaps
    internal,  // broken invariants
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error(ErrorKind::config, m) {}
};

struct InputError : Error {
    explicit InputError(const std::string& m) : Error(ErrorKind::input, m) {}
};

struct BackendError : Error {
    explicit BackendError(const std::string& m) : Error(ErrorKind::backend, m) {}
};

/// The backend cannot return per-token log probabilities; variance scoring is
/// impossible without them.
struct CapabilityError : BackendError {
    explicit CapabilityError(const std::string& m) : BackendError(m) {}
};

struct InternalError : Error {
    explicit InternalError(const std::string& m) : Error(ErrorKind::internal, m) {}
};

/// Process exit code for an error category: 2 config, 3 input, 4 backend,
/// 5 internal. 0 is success.
int exit_code_for(ErrorKind kind);

const char* to_string(ErrorKind kind);

}  // namespace tokvar
