#include "lieode/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>

namespace lieode {

namespace {

struct FuncName {
  std::string_view name;
  ExprFunc func;
};

constexpr std::array<FuncName, 8> kFuncs = {{
    {"sin", ExprFunc::kSin},
    {"cos", ExprFunc::kCos},
    {"tan", ExprFunc::kTan},
    {"tanh", ExprFunc::kTanh},
    {"exp", ExprFunc::kExp},
    {"log", ExprFunc::kLog},
    {"sqrt", ExprFunc::kSqrt},
    {"abs", ExprFunc::kAbs},
}};

const FuncName* lookup_func(std::string_view name) {
  for (const auto& f : kFuncs) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::string_view func_name(ExprFunc f) {
  for (const auto& e : kFuncs) {
    if (e.func == f) return e.name;
  }
  return "?";
}

enum class TokKind { kNumber, kIdent, kOp, kLParen, kRParen, kEnd };

struct Token {
  TokKind kind;
  char op = 0;
  double number = 0.0;
  std::string_view text;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.kind = TokKind::kEnd;
      return;
    }
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      lex_number();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos_;
      while (end < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        ++end;
      tok_.kind = TokKind::kIdent;
      tok_.text = src_.substr(pos_, end - pos_);
      pos_ = end;
      return;
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '^':
        tok_.kind = TokKind::kOp;
        tok_.op = c;
        ++pos_;
        return;
      case '(':
        tok_.kind = TokKind::kLParen;
        ++pos_;
        return;
      case ')':
        tok_.kind = TokKind::kRParen;
        ++pos_;
        return;
      default:
        throw ParseError("lexical error: unexpected character '" + std::string(1, c) + "'", pos_);
    }
  }

  // Decimal literal with optional fraction and exponent; no hex, no inf/nan.
  void lex_number() {
    const std::size_t start = pos_;
    std::size_t end = pos_;
    bool digits = false;
    while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
      ++end;
      digits = true;
    }
    if (end < src_.size() && src_[end] == '.') {
      ++end;
      while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
        ++end;
        digits = true;
      }
    }
    if (!digits) throw ParseError("lexical error: malformed number", start);
    if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
      std::size_t e = end + 1;
      if (e < src_.size() && (src_[e] == '+' || src_[e] == '-')) ++e;
      if (e >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[e])))
        throw ParseError("lexical error: malformed exponent", start);
      while (e < src_.size() && std::isdigit(static_cast<unsigned char>(src_[e]))) ++e;
      end = e;
    }
    double value = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + end, value);
    if (res.ec != std::errc{} || res.ptr != src_.data() + end)
      throw ParseError("lexical error: malformed number", start);
    tok_.kind = TokKind::kNumber;
    tok_.number = value;
    pos_ = end;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Token tok_;
};

// Grammar (precedence: ^  >  unary -  >  * /  >  + -, with ^ right-associative):
//   expr   := term  (('+'|'-') term)*
//   term   := unary (('*'|'/') unary)*
//   unary  := '-' unary | power
//   power  := atom ['^' unary]
//   atom   := number | ident | ident '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> states,
         std::span<const std::string> params)
      : lex_(src), states_(states), params_(params) {}

  std::vector<ExprNode> parse() {
    parse_sum();
    const Token& t = lex_.peek();
    if (t.kind != TokKind::kEnd)
      throw ParseError("syntax error: unexpected trailing input", t.offset);
    return std::move(out_);
  }

 private:
  void emit(ExprNode n) { out_.push_back(n); }

  void parse_sum() {
    parse_term();
    while (lex_.peek().kind == TokKind::kOp &&
           (lex_.peek().op == '+' || lex_.peek().op == '-')) {
      Token op = lex_.take();
      parse_term();
      emit({op.op == '+' ? ExprOp::kAdd : ExprOp::kSub, {}, 0,
            static_cast<std::uint32_t>(op.offset), 0.0});
    }
  }

  void parse_term() {
    parse_unary();
    while (lex_.peek().kind == TokKind::kOp &&
           (lex_.peek().op == '*' || lex_.peek().op == '/')) {
      Token op = lex_.take();
      parse_unary();
      emit({op.op == '*' ? ExprOp::kMul : ExprOp::kDiv, {}, 0,
            static_cast<std::uint32_t>(op.offset), 0.0});
    }
  }

  void parse_unary() {
    if (lex_.peek().kind == TokKind::kOp && lex_.peek().op == '-') {
      Token op = lex_.take();
      parse_unary();
      emit({ExprOp::kNeg, {}, 0, static_cast<std::uint32_t>(op.offset), 0.0});
      return;
    }
    parse_power();
  }

  void parse_power() {
    parse_atom();
    if (lex_.peek().kind == TokKind::kOp && lex_.peek().op == '^') {
      Token op = lex_.take();
      parse_unary();  // exponent may carry unary minus; recursion gives right assoc
      emit({ExprOp::kPow, {}, 0, static_cast<std::uint32_t>(op.offset), 0.0});
    }
  }

  void parse_atom() {
    Token t = lex_.take();
    switch (t.kind) {
      case TokKind::kNumber:
        emit({ExprOp::kConstant, {}, 0, static_cast<std::uint32_t>(t.offset), t.number});
        return;
      case TokKind::kLParen: {
        parse_sum();
        expect_rparen(t.offset);
        return;
      }
      case TokKind::kIdent: {
        if (const FuncName* f = lookup_func(t.text)) {
          const Token open = lex_.take();
          if (open.kind != TokKind::kLParen)
            throw ParseError("syntax error: expected '(' after function name", open.offset);
          parse_sum();
          expect_rparen(open.offset);
          emit({ExprOp::kFunc, f->func, 0, static_cast<std::uint32_t>(t.offset), 0.0});
          return;
        }
        if (t.text == "t") {
          emit({ExprOp::kTime, {}, 0, static_cast<std::uint32_t>(t.offset), 0.0});
          return;
        }
        for (std::size_t i = 0; i < states_.size(); ++i) {
          if (states_[i] == t.text) {
            emit({ExprOp::kState, {}, static_cast<std::int32_t>(i),
                  static_cast<std::uint32_t>(t.offset), 0.0});
            return;
          }
        }
        for (std::size_t i = 0; i < params_.size(); ++i) {
          if (params_[i] == t.text) {
            emit({ExprOp::kParam, {}, static_cast<std::int32_t>(i),
                  static_cast<std::uint32_t>(t.offset), 0.0});
            return;
          }
        }
        throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset);
      }
      case TokKind::kOp:
        throw ParseError("syntax error: dangling operator", t.offset);
      case TokKind::kRParen:
        throw ParseError("syntax error: unbalanced ')'", t.offset);
      case TokKind::kEnd:
        throw ParseError("syntax error: unexpected end of input", t.offset);
    }
  }

  void expect_rparen(std::size_t open_offset) {
    const Token& t = lex_.peek();
    if (t.kind != TokKind::kRParen)
      throw ParseError("syntax error: unbalanced '('", open_offset);
    lex_.take();
  }

  Lexer lex_;
  std::span<const std::string> states_;
  std::span<const std::string> params_;
  std::vector<ExprNode> out_;
};

bool is_integer(double x) { return std::isfinite(x) && x == std::floor(x); }

double apply_func(ExprFunc f, double x, std::uint32_t off) {
  switch (f) {
    case ExprFunc::kSin: return std::sin(x);
    case ExprFunc::kCos: return std::cos(x);
    case ExprFunc::kTan: return std::tan(x);
    case ExprFunc::kTanh: return std::tanh(x);
    case ExprFunc::kExp: return std::exp(x);
    case ExprFunc::kLog:
      if (x <= 0.0) throw EvalError("log of non-positive value", off);
      return std::log(x);
    case ExprFunc::kSqrt:
      if (x < 0.0) throw EvalError("sqrt of negative value", off);
      return std::sqrt(x);
    case ExprFunc::kAbs: return std::fabs(x);
  }
  return 0.0;
}

Dual apply_func(ExprFunc f, Dual x, std::uint32_t off) {
  switch (f) {
    case ExprFunc::kSin: return {std::sin(x.value), std::cos(x.value) * x.deriv};
    case ExprFunc::kCos: return {std::cos(x.value), -std::sin(x.value) * x.deriv};
    case ExprFunc::kTan: {
      const double c = std::cos(x.value);
      return {std::tan(x.value), x.deriv / (c * c)};
    }
    case ExprFunc::kTanh: {
      const double s = std::tanh(x.value);
      return {s, (1.0 - s * s) * x.deriv};
    }
    case ExprFunc::kExp: {
      const double e = std::exp(x.value);
      return {e, e * x.deriv};
    }
    case ExprFunc::kLog:
      if (x.value <= 0.0) throw EvalError("log of non-positive value", off);
      return {std::log(x.value), x.deriv / x.value};
    case ExprFunc::kSqrt: {
      if (x.value < 0.0) throw EvalError("sqrt of negative value", off);
      const double r = std::sqrt(x.value);
      if (x.deriv == 0.0) return {r, 0.0};
      if (x.value == 0.0) throw EvalError("sqrt derivative singular at zero", off);
      return {r, x.deriv / (2.0 * r)};
    }
    case ExprFunc::kAbs: {
      const double sign = x.value > 0.0 ? 1.0 : (x.value < 0.0 ? -1.0 : 0.0);
      return {std::fabs(x.value), sign * x.deriv};
    }
  }
  return {};
}

double apply_pow(double a, double b, std::uint32_t off) {
  if (a == 0.0 && b < 0.0) throw EvalError("zero raised to negative power", off);
  if (a < 0.0 && !is_integer(b)) throw EvalError("negative base with non-integer exponent", off);
  return std::pow(a, b);
}

Dual apply_pow(Dual a, Dual b, std::uint32_t off) {
  const double v = apply_pow(a.value, b.value, off);
  if (b.deriv == 0.0) {
    // d(a^c) = c a^(c-1) a' ; valid for negative bases with integer exponents
    double d = 0.0;
    if (a.deriv != 0.0) {
      if (a.value == 0.0 && b.value < 1.0)
        throw EvalError("power derivative singular at zero base", off);
      d = b.value * apply_pow(a.value, b.value - 1.0, off) * a.deriv;
    }
    return {v, d};
  }
  if (a.value <= 0.0)
    throw EvalError("non-positive base with varying exponent", off);
  return {v, v * (b.deriv * std::log(a.value) + b.value * a.deriv / a.value)};
}

template <typename T>
struct Loader;

template <>
struct Loader<double> {
  static double constant(double c) { return c; }
  static double time(double t) { return t; }
  static double state(std::span<const double> y, int i, int) { return y[i]; }
  static double param(std::span<const double> p, int i) { return p[i]; }
};

template <>
struct Loader<Dual> {
  static Dual constant(double c) { return {c, 0.0}; }
  static Dual time(double t) { return {t, 0.0}; }
  static Dual state(std::span<const double> y, int i, int seed) {
    return {y[i], i == seed ? 1.0 : 0.0};
  }
  static Dual param(std::span<const double> p, int i) { return {p[i], 0.0}; }
};

template <typename T>
T run_program(const std::vector<ExprNode>& nodes, double t, std::span<const double> y,
              std::span<const double> params, int seed) {
  std::vector<T> stack;
  stack.reserve(16);
  for (const ExprNode& n : nodes) {
    switch (n.op) {
      case ExprOp::kConstant: stack.push_back(Loader<T>::constant(n.number)); break;
      case ExprOp::kTime: stack.push_back(Loader<T>::time(t)); break;
      case ExprOp::kState: stack.push_back(Loader<T>::state(y, n.index, seed)); break;
      case ExprOp::kParam: stack.push_back(Loader<T>::param(params, n.index)); break;
      case ExprOp::kNeg: stack.back() = -stack.back(); break;
      case ExprOp::kFunc: stack.back() = apply_func(n.func, stack.back(), n.offset); break;
      default: {
        T rhs = stack.back();
        stack.pop_back();
        T& lhs = stack.back();
        switch (n.op) {
          case ExprOp::kAdd: lhs = lhs + rhs; break;
          case ExprOp::kSub: lhs = lhs - rhs; break;
          case ExprOp::kMul: lhs = lhs * rhs; break;
          case ExprOp::kDiv: {
            bool zero;
            if constexpr (std::is_same_v<T, Dual>) zero = rhs.value == 0.0;
            else zero = rhs == 0.0;
            if (zero) throw EvalError("division by zero", n.offset);
            lhs = lhs / rhs;
            break;
          }
          case ExprOp::kPow: lhs = apply_pow(lhs, rhs, n.offset); break;
          default: break;
        }
      }
    }
  }
  return stack.back();
}

int precedence(ExprOp op) {
  switch (op) {
    case ExprOp::kAdd: case ExprOp::kSub: return 1;
    case ExprOp::kMul: case ExprOp::kDiv: return 2;
    case ExprOp::kNeg: return 3;
    case ExprOp::kPow: return 4;
    default: return 5;
  }
}

}  // namespace

Expr parse_expression(std::string_view source, std::span<const std::string> state_vars,
                      std::span<const std::string> params) {
  if (source.empty()) throw ParseError("empty expression", 0);
  for (const auto& name : state_vars) {
    if (name == "t" || lookup_func(name))
      throw ParseError("reserved name declared as state variable: '" + name + "'", 0);
  }
  for (const auto& name : params) {
    if (name == "t" || lookup_func(name))
      throw ParseError("reserved name declared as parameter: '" + name + "'", 0);
    if (std::find(state_vars.begin(), state_vars.end(), name) != state_vars.end())
      throw ParseError("name declared both state and parameter: '" + name + "'", 0);
  }
  Parser parser(source, state_vars, params);
  Expr e;
  e.nodes_ = parser.parse();
  e.state_names_.assign(state_vars.begin(), state_vars.end());
  e.param_names_.assign(params.begin(), params.end());
  return e;
}

double Expr::eval(double t, std::span<const double> y, std::span<const double> params) const {
  return run_program<double>(nodes_, t, y, params, -1);
}

double Expr::eval(double t, std::span<const double> y,
                  const std::map<std::string, double>& params) const {
  std::vector<double> values(param_names_.size());
  for (std::size_t i = 0; i < param_names_.size(); ++i) {
    auto it = params.find(param_names_[i]);
    if (it == params.end())
      throw EvalError("missing parameter '" + param_names_[i] + "'", 0);
    values[i] = it->second;
  }
  return eval(t, y, values);
}

Dual Expr::eval_dual(double t, std::span<const double> y, std::span<const double> params,
                     int seed) const {
  return run_program<Dual>(nodes_, t, y, params, seed);
}

std::string Expr::print() const {
  // Rebuild infix bottom-up; parenthesization preserves the tree shape so a
  // reparse is structurally identical.
  struct Frag {
    std::string text;
    int prec;
  };
  std::vector<Frag> stack;
  char buf[64];
  for (const ExprNode& n : nodes_) {
    switch (n.op) {
      case ExprOp::kConstant: {
        std::snprintf(buf, sizeof(buf), "%.17g", n.number);
        stack.push_back({buf, 5});
        break;
      }
      case ExprOp::kTime: stack.push_back({"t", 5}); break;
      case ExprOp::kState: stack.push_back({state_names_[n.index], 5}); break;
      case ExprOp::kParam: stack.push_back({param_names_[n.index], 5}); break;
      case ExprOp::kNeg: {
        Frag a = std::move(stack.back());
        stack.pop_back();
        std::string inner = a.prec < 3 ? "(" + a.text + ")" : a.text;
        stack.push_back({"-" + inner, 3});
        break;
      }
      case ExprOp::kFunc: {
        Frag a = std::move(stack.back());
        stack.pop_back();
        stack.push_back({std::string(func_name(n.func)) + "(" + a.text + ")", 5});
        break;
      }
      default: {
        Frag rhs = std::move(stack.back());
        stack.pop_back();
        Frag lhs = std::move(stack.back());
        stack.pop_back();
        const int prec = precedence(n.op);
        const bool right_assoc = n.op == ExprOp::kPow;
        const bool paren_l = right_assoc ? lhs.prec <= prec : lhs.prec < prec;
        const bool paren_r = right_assoc ? rhs.prec < prec : rhs.prec <= prec;
        const char* sym = n.op == ExprOp::kAdd   ? " + "
                          : n.op == ExprOp::kSub ? " - "
                          : n.op == ExprOp::kMul ? "*"
                          : n.op == ExprOp::kDiv ? "/"
                                                 : "^";
        std::string text = (paren_l ? "(" + lhs.text + ")" : lhs.text) + sym +
                           (paren_r ? "(" + rhs.text + ")" : rhs.text);
        stack.push_back({std::move(text), prec});
      }
    }
  }
  return stack.back().text;
}

bool Expr::operator==(const Expr& other) const {
  if (nodes_.size() != other.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const ExprNode& a = nodes_[i];
    const ExprNode& b = other.nodes_[i];
    if (a.op != b.op || a.index != b.index) return false;
    if (a.op == ExprOp::kFunc && a.func != b.func) return false;
    if (a.op == ExprOp::kConstant && a.number != b.number) return false;
  }
  return state_names_ == other.state_names_ && param_names_ == other.param_names_;
}

}  // namespace lieode
