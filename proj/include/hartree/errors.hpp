#pragma once

#include <stdexcept>
#include <string>

namespace hartree {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite, out-of-range or otherwise malformed input parameters.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Two objects that must live on the same grid do not.
class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// The power kernel is not integrable over the origin cell (alpha >= N).
class SingularKernel : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf produced during a computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A dilation pushed mass out of the periodic box.
class BoxOverflow : public Error {
 public:
  using Error::Error;
};

/// Malformed files: configs, snapshots.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace hartree
