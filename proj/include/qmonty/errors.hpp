// errors.hpp: exception hierarchy shared by every qmonty module.
#pragma once

#include <stdexcept>
#include <string>

namespace qmonty {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Two vectors are parallel up to phase where independence was required.
class DegenerateInput : public Error { using Error::Error; };

// A host/variant combination the referee refuses to run.
class ConfigError : public Error { using Error::Error; };

class InvalidProjector : public Error { using Error::Error; };
class IncompleteTriple : public Error { using Error::Error; };

// The stage-3 measurement hit the prize under rules that forbid it.
class HostViolation : public Error { using Error::Error; };

// A move that breaks an orthogonality or door-selection rule.
class RuleViolation : public Error { using Error::Error; };

// Operation called in the wrong session stage.
class WrongStage : public Error { using Error::Error; };

class CheatSetupFailed : public Error { using Error::Error; };
class CheatAmbiguous : public Error { using Error::Error; };
class CheatDegenerate : public Error { using Error::Error; };

// A POVM effect of rank >= 2 leaves no guaranteed safe door.
class EffectRankTooHigh : public Error { using Error::Error; };

class IoError : public Error { using Error::Error; };

} // namespace qmonty
