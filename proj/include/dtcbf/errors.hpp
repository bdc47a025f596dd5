#pragma once

#include <stdexcept>
#include <string>

namespace dtcbf {

/// Malformed or inconsistent parameter/config input. The message names the field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the domain of a model equation (e.g. v <= 0 in the flight model).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A rollout did not settle within its step budget.
class HorizonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A guaranteed property failed at runtime (e.g. the evasive maneuver violated its constraint).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Caller violated an operation precondition.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Episodic protocol misuse, e.g. step() after the episode ended.
class ProtocolError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace dtcbf
