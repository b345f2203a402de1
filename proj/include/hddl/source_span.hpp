#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <string>

namespace hddl {

/// Location of a syntactic element in an input document.
///
/// Spans are carried by AST values for diagnostics only. They never take part
/// in structural equality or ordering, so two values parsed from different
/// files (or printed and re-parsed) compare equal when their content does.
struct SourceSpan {
  std::shared_ptr<const std::string> file;
  std::size_t line = 0;    // 1-based; 0 means unknown
  std::size_t column = 0;  // 1-based
  std::size_t length = 0;

  bool known() const { return line != 0; }
  std::string file_name() const { return file ? *file : std::string("<input>"); }

  friend constexpr bool operator==(const SourceSpan&, const SourceSpan&) noexcept { return true; }
  friend constexpr std::strong_ordering operator<=>(const SourceSpan&, const SourceSpan&) noexcept {
    return std::strong_ordering::equal;
  }
};

}  // namespace hddl
