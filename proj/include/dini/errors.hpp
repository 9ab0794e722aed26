#pragma once

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>

namespace dini {

/// Shortest round-trip text for a double, used in error messages.
inline std::string number_text(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Base of every failure the library reports. `kind()` is a stable name used
/// in CLI diagnostics; `level()` is the recursion level of the implicit system
/// solver at which the failure was raised, when that applies (1 = outermost).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }
  std::optional<std::size_t> level() const noexcept { return level_; }

  // Keeps the innermost level when an error crosses several recursion levels.
  void tag_level(std::size_t level) {
    if (!level_) level_ = level;
  }

 private:
  std::string kind_;
  std::optional<std::size_t> level_;
};

#define DINI_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                          \
   public:                                                             \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

// expr
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t position)
      : Error("SyntaxError", message + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(const std::string& name, std::size_t position)
      : Error("UnknownIdentifier", "unknown identifier '" + name + "' at position " +
                                       std::to_string(position)),
        name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

DINI_DEFINE_ERROR(DomainError)
DINI_DEFINE_ERROR(DimensionMismatch)
// linalg
DINI_DEFINE_ERROR(NotSquare)
DINI_DEFINE_ERROR(SingularMatrix)
// solvers
DINI_DEFINE_ERROR(SeedNotOnZeroSet)
DINI_DEFINE_ERROR(DegenerateDerivative)
DINI_DEFINE_ERROR(BoxNotFound)
DINI_DEFINE_ERROR(OutsideBox)
DINI_DEFINE_ERROR(NoConvergence)
// verify
DINI_DEFINE_ERROR(NoSignChange)
DINI_DEFINE_ERROR(DegenerateJacobian)
DINI_DEFINE_ERROR(RadiusUnderflow)

#undef DINI_DEFINE_ERROR

}  // namespace dini
