#pragma once

#include <stdexcept>
#include <string>

#include "superloc/expr_format.hpp"
#include "superloc/super_function.hpp"

namespace superloc {

/// Malformed input. `key` names the offending scenario key when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Parses the expression grammar:
///
///   expr    := ['-'] term (('+' | '-') term)*
///   term    := factor (('*' factor) | ('/' constant))*
///   factor  := '-' factor | atom ['^' integer]
///   atom    := number | 'i' | 'pi' | name | '(' expr ')'
///            | exp(expr) | bump(expr) | step(r, r, expr)
///            | bumpd(k, j, expr) | stepd(k, j, r, r, expr) | float(number)
///
/// Decimal literals are exact rationals; float(...) and pi are floating.
/// Names resolve to even or odd coordinates through `names`.
SuperFunction parse_expression(const std::string& text, const CoordinateNames& names);

/// Same grammar, rejecting odd coordinates.
ScalarExpr parse_scalar(const std::string& text, const CoordinateNames& names);

/// Words that cannot be used as coordinate names.
bool is_reserved_name(const std::string& name);

}  // namespace superloc
