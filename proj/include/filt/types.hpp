#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace filt {

using EntityId = std::uint32_t;
using RelationId = std::uint32_t;
using TimeId = std::uint32_t;
using ConceptId = std::uint32_t;

/// One timestamped fact (subject, relation, object, time) over dense ids.
struct Quadruple {
  EntityId subject = 0;
  RelationId relation = 0;
  EntityId object = 0;
  TimeId time = 0;

  auto operator<=>(const Quadruple&) const = default;
};

/// Base for all library errors. Subclasses let the CLI map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or inconsistent on-disk artifact.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes that do not fit an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf in losses or gradients, failed gradient checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Contract violations on arguments (bad ratios, K = 0, unknown variant names, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace filt
