#pragma once

#include <stdexcept>
#include <string>

namespace rescue {

// Invalid preset, engine or benchmark parameters. The message names the field.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Malformed scenario file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A well-formed value that breaks a domain invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke an operation precondition (dimension mismatch, infeasible plan, ...).
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BoundsError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

}  // namespace rescue
