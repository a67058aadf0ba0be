#pragma once

#include <stdexcept>
#include <string>

namespace mtfcnn {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric argument outside its allowed range (filter corners, T60s, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

// A violated precondition between two arguments (sample-rate mismatch,
// zero-energy RIR, length mismatch, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

// The energy decay curve never reaches the level a fit needs.
class InsufficientDecayError : public Error {
 public:
  using Error::Error;
};

class SilentInputError : public ContractError {
 public:
  using ContractError::ContractError;
};

class ShortInputError : public ContractError {
 public:
  using ContractError::ContractError;
};

class WavError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Model file problems and model/band mismatches.
class ModelError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, int epoch)
      : Error(what), epoch_(epoch) {}
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

class StratificationError : public Error {
 public:
  using Error::Error;
};

class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtfcnn
