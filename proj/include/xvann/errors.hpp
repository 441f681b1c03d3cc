#pragma once

#include <stdexcept>
#include <string>

namespace xvann {

// Base for every error raised by the library. The CLI maps ConfigError to
// exit code 2 and everything numeric to exit code 3.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
};

class DomainError : public Error {
   public:
    using Error::Error;
};

class DimensionError : public Error {
   public:
    using Error::Error;
};

class CorrelationError : public Error {
   public:
    using Error::Error;
};

class ScheduleError : public Error {
   public:
    using Error::Error;
};

class FixingError : public Error {
   public:
    using Error::Error;
};

class SpecError : public Error {
   public:
    using Error::Error;
};

class TrainingError : public Error {
   public:
    using Error::Error;
};

class RolloutError : public Error {
   public:
    using Error::Error;
};

class FitError : public Error {
   public:
    using Error::Error;
};

class ProjectionError : public Error {
   public:
    using Error::Error;
};

class RegressionError : public Error {
   public:
    using Error::Error;
};

class UnsupportedError : public Error {
   public:
    using Error::Error;
};

class FormatError : public Error {
   public:
    using Error::Error;
};

class OrchestrationError : public Error {
   public:
    using Error::Error;
};

}  // namespace xvann
