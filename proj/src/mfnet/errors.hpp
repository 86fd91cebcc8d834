#pragma once

#include <stdexcept>
#include <string>

namespace mfnet {

// Numeric values are shared with the C API status codes in mfnet.h.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kDomain = 2,
  kIntegrationFault = 3,
  kStiffness = 4,
  kBranchLost = 5,
  kNotApplicable = 6,
  kBistableRegime = 7,
  kIo = 8,
  kInternal = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::kInvalidArgument, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::kDomain, what) {}
};

// Non-finite state during time stepping; carries the first bad time.
class IntegrationFault : public Error {
 public:
  IntegrationFault(const std::string& what, double time)
      : Error(ErrorCode::kIntegrationFault, what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double time)
      : Error(ErrorCode::kStiffness, what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class BranchLost : public Error {
 public:
  BranchLost(const std::string& what, double last_good)
      : Error(ErrorCode::kBranchLost, what), last_good_(last_good) {}
  double last_good_parameter() const noexcept { return last_good_; }

 private:
  double last_good_;
};

class NotApplicable : public Error {
 public:
  explicit NotApplicable(const std::string& what) : Error(ErrorCode::kNotApplicable, what) {}
};

class BistableRegime : public Error {
 public:
  explicit BistableRegime(const std::string& what) : Error(ErrorCode::kBistableRegime, what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidArgument(message);
}

}  // namespace mfnet
