// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mathlm {

// Coarse error category; the CLI maps these to distinct exit codes.
enum class ErrorCategory { User, Data, Internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

// Errors that point at a byte offset of some input text.
class OffsetError : public Error {
 public:
  OffsetError(ErrorCategory category, const std::string& what, std::size_t offset)
      : Error(category, what + " at offset " + std::to_string(offset)), detail_(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }
  // Message without the offset suffix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  std::size_t offset_;
};

class SyntaxError : public OffsetError {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : OffsetError(ErrorCategory::User, what, offset) {}
};

class UnbalancedDelimiter : public OffsetError {
 public:
  explicit UnbalancedDelimiter(std::size_t offset)
      : OffsetError(ErrorCategory::Data, "unbalanced math delimiter", offset) {}
};

#define MATHLM_DEFINE_ERROR(Name, Category)                                 \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(Category, #Name ": " + what) {} \
  }

MATHLM_DEFINE_ERROR(CapExceeded, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(InvalidTraversal, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(UnprintableNode, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(VocabError, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(SequenceTooLong, ErrorCategory::User);
MATHLM_DEFINE_ERROR(ShapeMismatch, ErrorCategory::Internal);
MATHLM_DEFINE_ERROR(MaskedTarget, ErrorCategory::Internal);
MATHLM_DEFINE_ERROR(NonFiniteLoss, ErrorCategory::Internal);
MATHLM_DEFINE_ERROR(IllegalToken, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(LengthExceeded, ErrorCategory::User);
MATHLM_DEFINE_ERROR(DivisionByZero, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(UnboundVariable, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(UnsupportedOperator, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(Misaligned, ErrorCategory::Data);
MATHLM_DEFINE_ERROR(FormatError, ErrorCategory::Data);

#undef MATHLM_DEFINE_ERROR

}  // namespace mathlm
