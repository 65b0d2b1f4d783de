#pragma once

#include <stdexcept>
#include <string>

namespace dgflow {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (mesh or config file).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Non-manifold edges, unmatched periodic pairs and similar mesh defects.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Degenerate triangles or inconsistent periodic translations.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration or unknown preset.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite data, singular local blocks, failed factorization, blow-up.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File system errors; the message carries the offending path.
class IOError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgflow
