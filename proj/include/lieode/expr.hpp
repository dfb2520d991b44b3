#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lieode {

/// Forward-mode dual number: value plus derivative with respect to one
/// designated seed variable. Arithmetic carries the chain rule exactly.
struct Dual {
  double value = 0.0;
  double deriv = 0.0;
};

inline Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.deriv + b.deriv}; }
inline Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.deriv - b.deriv}; }
inline Dual operator-(Dual a) { return {-a.value, -a.deriv}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.value * b.value, a.deriv * b.value + a.value * b.deriv};
}
inline Dual operator/(Dual a, Dual b) {
  const double v = a.value / b.value;
  return {v, (a.deriv - v * b.deriv) / b.value};
}

/// Error raised by the expression layer; `offset` is the byte position in the
/// original source text of the token or node at fault.
class ExprError : public std::runtime_error {
 public:
  ExprError(std::string msg, std::size_t offset)
      : std::runtime_error(std::move(msg)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class ParseError : public ExprError {
 public:
  using ExprError::ExprError;
};

/// Domain error during evaluation (log of non-positive, division by zero, ...).
class EvalError : public ExprError {
 public:
  using ExprError::ExprError;
};

enum class ExprOp : std::uint8_t {
  kConstant,
  kTime,      // the independent variable t
  kState,     // state variable, index into y
  kParam,     // named parameter, index into bound parameter values
  kNeg,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kFunc,
};

enum class ExprFunc : std::uint8_t { kSin, kCos, kTan, kTanh, kExp, kLog, kSqrt, kAbs };

struct ExprNode {
  ExprOp op = ExprOp::kConstant;
  ExprFunc func = ExprFunc::kSin;
  std::int32_t index = 0;    // state/param slot
  std::uint32_t offset = 0;  // byte offset in source, for error reports
  double number = 0.0;
};

/// Immutable arithmetic expression over t, the declared state variables and
/// the declared parameters. Stored as a postorder program; evaluation walks it
/// with a value stack and never mutates the expression, so a parsed Expr can
/// be shared freely across threads.
class Expr {
 public:
  Expr() = default;

  double eval(double t, std::span<const double> y, std::span<const double> params) const;

  /// Convenience overload resolving parameters by name.
  double eval(double t, std::span<const double> y,
              const std::map<std::string, double>& params) const;

  /// Value and exact partial derivative with respect to state variable `seed`.
  Dual eval_dual(double t, std::span<const double> y, std::span<const double> params,
                 int seed) const;

  /// Canonical infix form; reparsing it yields a structurally equal Expr.
  std::string print() const;

  bool operator==(const Expr& other) const;

  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& param_names() const { return param_names_; }

 private:
  friend Expr parse_expression(std::string_view, std::span<const std::string>,
                               std::span<const std::string>);
  std::vector<ExprNode> nodes_;  // postorder
  std::vector<std::string> state_names_;
  std::vector<std::string> param_names_;
};

/// Parse `source` over the given state variable and parameter names. "t" is
/// always available and reserved, as are the function names. Unknown
/// identifiers, malformed numbers and syntax errors raise ParseError with the
/// byte offset of the offending token.
Expr parse_expression(std::string_view source, std::span<const std::string> state_vars,
                      std::span<const std::string> params);

}  // namespace lieode
