#pragma once

#include <stdexcept>
#include <string>

namespace feekit {

/// Error categories aligned with the CLI exit codes:
/// config problems exit 2, data problems exit 3, estimation problems exit 4.
enum class ErrorClass { kConfig = 2, kData = 3, kEstimation = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what)
      : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const noexcept { return cls_; }

 private:
  ErrorClass cls_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorClass::kConfig, w) {}
};

// Data-shaped problems: malformed input files, schema mismatches, broken
// invariants in loaded panels, misaligned series.
struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(ErrorClass::kData, w) {}
};
struct IntegrityError : Error {
  explicit IntegrityError(const std::string& w) : Error(ErrorClass::kData, w) {}
};
struct SchemaError : Error {
  explicit SchemaError(const std::string& w) : Error(ErrorClass::kData, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorClass::kData, w) {}
};
struct AlignmentError : Error {
  explicit AlignmentError(const std::string& w) : Error(ErrorClass::kData, w) {}
};
struct DependencyError : Error {
  explicit DependencyError(const std::string& w) : Error(ErrorClass::kData, w) {}
};

// Estimation-time failures.
struct RankError : Error {
  explicit RankError(const std::string& w) : Error(ErrorClass::kEstimation, w) {}
};
struct DegeneracyError : Error {
  explicit DegeneracyError(const std::string& w) : Error(ErrorClass::kEstimation, w) {}
};
struct EstimationError : Error {
  explicit EstimationError(const std::string& w) : Error(ErrorClass::kEstimation, w) {}
};
struct ExtrapolationError : Error {
  explicit ExtrapolationError(const std::string& w) : Error(ErrorClass::kEstimation, w) {}
};
struct NoVariationError : Error {
  explicit NoVariationError(const std::string& w) : Error(ErrorClass::kEstimation, w) {}
};

}  // namespace feekit
