#pragma once

#include <stdexcept>
#include <string>

namespace rfp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments, shape mismatches and out-of-range indices.
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Input outside the mathematical domain of a function (phi at 0 or 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Ciphertext, file or database content that fails a consistency check.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// A party asked for something the protocols forbid.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised when a relayed fragment fails signature verification.
class MaliciousProxyError : public Error {
 public:
  MaliciousProxyError(std::size_t proxy, const std::string& what)
      : Error("proxy " + std::to_string(proxy) + ": " + what), proxy_(proxy) {}

  std::size_t proxy() const noexcept { return proxy_; }

 private:
  std::size_t proxy_;
};

}  // namespace rfp
