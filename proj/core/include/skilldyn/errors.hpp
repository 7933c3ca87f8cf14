#pragma once

#include <stdexcept>
#include <string>

namespace skilldyn {

/// Base of every numeric/domain failure raised by the library. The CLI maps
/// these to exit status 1; `code()` is the machine-readable tag.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define SKILLDYN_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  }

SKILLDYN_DEFINE_ERROR(DomainError);
SKILLDYN_DEFINE_ERROR(DegenerateParams);
SKILLDYN_DEFINE_ERROR(StepTooLarge);
SKILLDYN_DEFINE_ERROR(NonFinite);
SKILLDYN_DEFINE_ERROR(ManifoldEscape);
SKILLDYN_DEFINE_ERROR(SingularPasting);
SKILLDYN_DEFINE_ERROR(EmptyData);
SKILLDYN_DEFINE_ERROR(Degenerate);
SKILLDYN_DEFINE_ERROR(Unresolved);
SKILLDYN_DEFINE_ERROR(ParseError);

#undef SKILLDYN_DEFINE_ERROR

}  // namespace skilldyn
