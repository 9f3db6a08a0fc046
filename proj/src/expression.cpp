#include "fracperim/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <utility>
#include <cmath>
#include <numbers>
#include <vector>

namespace fracperim {

struct Expression::Node {
  enum class Op { Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Call1, Call2 };
  Op op = Op::Constant;
  double value = 0.0;
  int index = 0;
  double (*f1)(double) = nullptr;
  double (*f2)(double, double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(const Vec& x) const {
    switch (op) {
      case Op::Constant: return value;
      case Op::Variable: return x[index];
      case Op::Neg: return -a->eval(x);
      case Op::Add: return a->eval(x) + b->eval(x);
      case Op::Sub: return a->eval(x) - b->eval(x);
      case Op::Mul: return a->eval(x) * b->eval(x);
      case Op::Div: return a->eval(x) / b->eval(x);
      case Op::Pow: return std::pow(a->eval(x), b->eval(x));
      case Op::Call1: return f1(a->eval(x));
      case Op::Call2: return f2(a->eval(x), b->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Op = Expression::Node::Op;

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double f_abs(double v) { return std::abs(v); }
double f_sqrt(double v) { return std::sqrt(v); }
double f_exp(double v) { return std::exp(v); }
double f_log(double v) { return std::log(v); }
double f_sin(double v) { return std::sin(v); }
double f_cos(double v) { return std::cos(v); }
double f_tan(double v) { return std::tan(v); }
double f_atan(double v) { return std::atan(v); }
double f_atan2(double y, double x) { return std::atan2(y, x); }
double f_pow(double a, double b) { return std::pow(a, b); }
double f_min(double a, double b) { return std::min(a, b); }
double f_max(double a, double b) { return std::max(a, b); }

class Parser {
 public:
  Parser(const std::string& src, int dim) : src_(src), dim_(dim) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ExpressionError("expression: " + msg, pos_ + 1); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make_binary(Op::Add, lhs, term());
      else if (accept('-')) lhs = make_binary(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make_binary(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = make_binary(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Expression::Node>();
      n->op = Op::Neg;
      n->a = unary();
      return n;
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_binary(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of expression");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = src_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Expression::Node>();
    n->value = v;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string name = src_.substr(start, pos_ - start);
    auto n = std::make_shared<Expression::Node>();
    if (name == "pi") {
      n->value = std::numbers::pi;
      return n;
    }
    if (name.size() >= 2 && name[0] == 'x' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int idx = std::stoi(name.substr(1));
      if (idx < 1 || idx > dim_) {
        pos_ = start;
        fail("variable " + name + " outside x1..x" + std::to_string(dim_));
      }
      n->op = Op::Variable;
      n->index = idx - 1;
      return n;
    }
    static const std::pair<const char*, double (*)(double)> unary_fns[] = {
        {"abs", f_abs}, {"sqrt", f_sqrt}, {"exp", f_exp}, {"log", f_log},
        {"sin", f_sin}, {"cos", f_cos},   {"tan", f_tan}, {"atan", f_atan}};
    static const std::pair<const char*, double (*)(double, double)> binary_fns[] = {
        {"atan2", f_atan2}, {"pow", f_pow}, {"min", f_min}, {"max", f_max}};
    for (const auto& [fname, fn] : unary_fns) {
      if (name == fname) {
        expect('(');
        n->op = Op::Call1;
        n->f1 = fn;
        n->a = expr();
        expect(')');
        return n;
      }
    }
    for (const auto& [fname, fn] : binary_fns) {
      if (name == fname) {
        expect('(');
        n->op = Op::Call2;
        n->f2 = fn;
        n->a = expr();
        expect(',');
        n->b = expr();
        expect(')');
        return n;
      }
    }
    pos_ = start;
    fail("unknown identifier '" + name + "'");
  }

  const std::string& src_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression Expression::parse(const std::string& source, int dim) {
  if (dim < 1 || dim > kMaxDim) throw ExpressionError("expression: unsupported dimension", 0);
  Expression e;
  e.root_ = Parser(source, dim).parse();
  e.source_ = source;
  e.dim_ = dim;
  return e;
}

double Expression::operator()(const Vec& x) const { return root_->eval(x); }

}  // namespace fracperim
