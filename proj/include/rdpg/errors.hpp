#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rdpg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Edge probability or latent position outside the admissible range.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A latent distribution that cannot produce valid RDPG latent positions.
class InvalidDistributionError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  using Error::Error;
};

/// Shape or dimension mismatch between arguments.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InsufficientSampleError : public Error {
 public:
  using Error::Error;
};

/// Rows whose norm is too small to be projected onto the unit sphere.
class DegenerateRowError : public Error {
 public:
  DegenerateRowError(std::string what, std::vector<std::size_t> rows)
      : Error(std::move(what)), rows_(std::move(rows)) {}
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::size_t> rows_;
};

/// Malformed input file; carries the 1-based line number (0 if unknown).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace rdpg
