#pragma once

#include <stdexcept>
#include <string>

namespace uavad {

/// Invalid user input or configuration. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes of arrays or grids disagree.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A loss or gradient became NaN/inf during training.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No free cell exists for the requested anomaly injection.
class InjectionInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointVersionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace uavad
