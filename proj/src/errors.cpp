#include "matgroupoid/errors.hpp"

namespace matgroupoid {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SourceTargetMismatch: return "SourceTargetMismatch";
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::LeftDomain: return "LeftDomain";
    case ErrorKind::StepTooLarge: return "StepTooLarge";
    case ErrorKind::NotUniform: return "NotUniform";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::NotFlat: return "NotFlat";
    case ErrorKind::NotMorphism: return "NotMorphism";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace matgroupoid
