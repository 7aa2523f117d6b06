#pragma once

#include <string>
#include <vector>

#include "superloc/scalar_expr.hpp"
#include "superloc/super_function.hpp"

namespace superloc {

/// Display names for even and odd coordinates, indexed by axis.
struct CoordinateNames {
  std::vector<std::string> even;
  std::vector<std::string> odd;

  /// x1..xm and th1..thn.
  static CoordinateNames defaults(int m, int n);
  int even_index(const std::string& name) const;  // -1 when absent
  int odd_index(const std::string& name) const;
};

/// Serializes a scalar in the textual grammar accepted by `parse_expression`.
///
/// Floating coefficients are written as float(...) so a re-parse does not
/// silently turn them into exact decimals.
std::string format_scalar(const ScalarExpr& e, const CoordinateNames& names);

/// Serializes a superfunction; odd factors follow the scalar coefficient.
std::string format_super(const SuperFunction& f, const CoordinateNames& names);

/// Coefficient text as it appears in serialized expressions.
std::string format_number(const Number& c);

}  // namespace superloc
