#pragma once

#include "fracperim/linalg.hpp"

#include <memory>
#include <stdexcept>
#include <string>

namespace fracperim {

/// Thrown with the 1-based character column of the offending token.
class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& message, std::size_t column)
      : std::runtime_error(message), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

/// Compiled scalar expression over the coordinates x1..xn.
///
/// Grammar: numbers, `pi`, variables `x1`..`x8`, `+ - * / ^`, unary minus,
/// parentheses and the functions abs, sqrt, exp, log, sin, cos, tan, atan,
/// atan2(y, x), pow(a, b), min(a, b), max(a, b). `^` is right associative.
class Expression {
 public:
  static Expression parse(const std::string& source, int dim);

  double operator()(const Vec& x) const;
  const std::string& source() const { return source_; }
  int dim() const { return dim_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
  int dim_ = 0;
};

}  // namespace fracperim
