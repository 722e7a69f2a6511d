#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace voxmix {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or configuration; the CLI maps these to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data; the CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class NoTumorError : public DataError {
 public:
  using DataError::DataError;
};

class ChecksumError : public DataError {
 public:
  using DataError::DataError;
};

class FormatError : public DataError {
 public:
  using DataError::DataError;
};

class InvalidLabelCode : public DataError {
 public:
  InvalidLabelCode(std::size_t voxel, int code)
      : DataError("invalid label code " + std::to_string(code) + " at voxel " +
                  std::to_string(voxel)),
        voxel_(voxel),
        code_(code) {}

  std::size_t voxel() const noexcept { return voxel_; }
  int code() const noexcept { return code_; }

 private:
  std::size_t voxel_;
  int code_;
};

}  // namespace voxmix
