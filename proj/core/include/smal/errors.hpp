#pragma once

#include <stdexcept>
#include <string>

namespace smal {

/// Field or force query at (or too close to) a dipole location.
class SingularPointError : public std::runtime_error {
  public:
    explicit SingularPointError(const std::string& what) : std::runtime_error(what) {}
};

/// Geometry that leaves a direction or frame undefined (vertical heading,
/// vanishing field projection, collinear field pair, ...).
class DegenerateGeometryError : public std::runtime_error {
  public:
    explicit DegenerateGeometryError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user-supplied value (config field, CLI flag, type invariant).
class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace smal
