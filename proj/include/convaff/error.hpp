#ifndef CONVAFF_ERROR_HPP
#define CONVAFF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace convaff {

enum class ErrorKind {
  DimensionMismatch,
  InvalidArgument,
  EmptySet,
  BracketFailure,
  UnboundedBelow,
  DegenerateLambda,
  ConditionViolated,
  LpFailure,
  ScanExhausted,
  Schema,
  Config,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmptySet: return "EmptySet";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::UnboundedBelow: return "UnboundedBelow";
    case ErrorKind::DegenerateLambda: return "DegenerateLambda";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
    case ErrorKind::LpFailure: return "LpFailure";
    case ErrorKind::ScanExhausted: return "ScanExhausted";
    case ErrorKind::Schema: return "SchemaError";
    case ErrorKind::Config: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // message without the kind prefix
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace convaff

#endif  // CONVAFF_ERROR_HPP
