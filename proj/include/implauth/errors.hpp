#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace implauth {

/// Base of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define IMPLAUTH_DEFINE_ERROR(Name)          \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

IMPLAUTH_DEFINE_ERROR(UnsupportedFormat);
IMPLAUTH_DEFINE_ERROR(InvalidSpec);
IMPLAUTH_DEFINE_ERROR(NonFiniteInput);
IMPLAUTH_DEFINE_ERROR(EmptyDensity);
IMPLAUTH_DEFINE_ERROR(OutOfOrderEvent);
IMPLAUTH_DEFINE_ERROR(DayNotComplete);
IMPLAUTH_DEFINE_ERROR(VersionMismatch);
IMPLAUTH_DEFINE_ERROR(CorruptDocument);
IMPLAUTH_DEFINE_ERROR(NegativeGap);
IMPLAUTH_DEFINE_ERROR(NonConsecutiveDays);
IMPLAUTH_DEFINE_ERROR(EmptyDay);
IMPLAUTH_DEFINE_ERROR(NoHistory);
IMPLAUTH_DEFINE_ERROR(BaselineNotReady);
IMPLAUTH_DEFINE_ERROR(NotAuthenticated);
IMPLAUTH_DEFINE_ERROR(NotDeployed);
IMPLAUTH_DEFINE_ERROR(NotDeployedBeforeAttack);
IMPLAUTH_DEFINE_ERROR(InvalidScenario);
IMPLAUTH_DEFINE_ERROR(InvalidConfig);

#undef IMPLAUTH_DEFINE_ERROR

/// Raised when a stream's timestamps go backwards; the export is corrupt or unsorted.
class NonMonotonicTimestamp : public Error {
 public:
  NonMonotonicTimestamp(std::size_t line, std::int64_t previous, std::int64_t current)
      : Error("timestamp " + std::to_string(current) + " on line " + std::to_string(line) +
              " precedes " + std::to_string(previous)),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A day was closed twice by the lifecycle.
class DoubleClose : public Error {
 public:
  explicit DoubleClose(std::int64_t day)
      : Error("day " + std::to_string(day) + " already closed"), day_(day) {}
  std::int64_t day() const noexcept { return day_; }

 private:
  std::int64_t day_;
};

}  // namespace implauth
