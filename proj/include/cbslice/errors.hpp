#ifndef CBSLICE_ERRORS_HPP
#define CBSLICE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cbslice {

// Bad or inconsistent run configuration (unknown key, out-of-range value).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing, unreadable, or malformed files and directories.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// An operation was called on data that violates its contract
// (empty error set, slice with no members, shape mismatch).
class PreconditionError : public std::runtime_error {
public:
  explicit PreconditionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cbslice

#endif
