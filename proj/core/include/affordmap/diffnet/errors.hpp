#pragma once

#include <stdexcept>
#include <string>

namespace affordmap::diffnet {

/// Input or gradient dimensions do not match the layer they are fed to.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A tape was replayed against a network it was not recorded on, or the
/// network parameters changed after recording.
class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An optimizer step was asked to apply NaN or infinite gradient entries.
class NonFiniteGradient : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace affordmap::diffnet
