#pragma once

#include <stdexcept>
#include <string>

namespace oulab {

/// Base of every error raised by the lab. The `kind` string is stable and is
/// what the CLI puts into its JSON failure reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define OULAB_DEFINE_ERROR(Name, tag)                                     \
  class Name : public Error {                                             \
   public:                                                                \
    explicit Name(const std::string& what) : Error(tag, what) {}          \
  };

OULAB_DEFINE_ERROR(InputError, "input")
OULAB_DEFINE_ERROR(ValidationError, "validation")
OULAB_DEFINE_ERROR(RangeError, "range")
OULAB_DEFINE_ERROR(ArgumentError, "argument")
OULAB_DEFINE_ERROR(PreconditionError, "precondition")
OULAB_DEFINE_ERROR(IntegrationError, "integration-blow-up")
OULAB_DEFINE_ERROR(KernelDegeneracyError, "kernel-degeneracy")
OULAB_DEFINE_ERROR(InstabilityError, "instability")
OULAB_DEFINE_ERROR(InternalConsistencyError, "internal-consistency")
OULAB_DEFINE_ERROR(ConstantsFitError, "constants-fit")
OULAB_DEFINE_ERROR(ParameterError, "parameter")
OULAB_DEFINE_ERROR(ResolutionError, "resolution")
OULAB_DEFINE_ERROR(TheoremViolationError, "theorem-violation")
OULAB_DEFINE_ERROR(DeclarationError, "declaration")
OULAB_DEFINE_ERROR(ParseError, "parse")

#undef OULAB_DEFINE_ERROR

}  // namespace oulab
