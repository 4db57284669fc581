#ifndef MATGROUPOID_ERRORS_HPP
#define MATGROUPOID_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace matgroupoid {

enum class ErrorKind {
  SourceTargetMismatch,
  SingularMatrix,
  OutOfDomain,
  LeftDomain,
  StepTooLarge,
  NotUniform,
  GridTooSmall,
  NotFlat,
  NotMorphism,
  ConfigInvalid,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; the kind identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace matgroupoid

#endif
