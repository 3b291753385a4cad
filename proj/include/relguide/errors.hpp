#pragma once

#include <stdexcept>
#include <string>

namespace relguide {

/// User-facing failure classes; the CLI maps each to its own exit code.
enum class ErrorKind { kMissingFile, kSchema, kDivergence, kInfeasible };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error schema_error(const std::string& what) { return Error(ErrorKind::kSchema, what); }
inline Error missing_file(const std::string& path) {
  return Error(ErrorKind::kMissingFile, "cannot open " + path);
}

}  // namespace relguide
