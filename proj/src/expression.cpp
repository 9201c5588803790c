#include "tubecomp/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "tubecomp/errors.hpp"

namespace tubecomp {

class ExpressionParser {
 public:
  ExpressionParser(const std::string& src, int variables, ExpressionList& out)
      : src_(src), variables_(variables), out_(out) {}

  void parse_list() {
    out_.roots_.push_back(parse_expr());
    skip_space();
    while (peek() == ',') {
      ++pos_;
      out_.roots_.push_back(parse_expr());
      skip_space();
    }
    if (pos_ < src_.size()) fail(std::string("expected ',' or end of input, found '") + src_[pos_] + "'");
  }

 private:
  using Op = ExpressionList::Op;

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, static_cast<int>(pos_) + 1); }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_space();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  void expect(char c) {
    if (peek() != c) {
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "', found end of input");
      fail(std::string("expected '") + c + "', found '" + src_[pos_] + "'");
    }
    ++pos_;
  }

  int add(Op op, int left = -1, int right = -1, double value = 0.0, int variable = 0) {
    ExpressionList::Node n;
    n.op = op;
    n.left = left;
    n.right = right;
    n.value = value;
    n.variable = variable;
    out_.nodes_.push_back(n);
    return static_cast<int>(out_.nodes_.size()) - 1;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (char c = peek(); c == '+' || c == '-'; c = peek()) {
      ++pos_;
      int rhs = parse_term();
      lhs = add(c == '+' ? Op::Add : Op::Subtract, lhs, rhs);
    }
    return lhs;
  }

  int parse_term() {
    int lhs = parse_unary();
    for (char c = peek(); c == '*' || c == '/'; c = peek()) {
      ++pos_;
      int rhs = parse_unary();
      lhs = add(c == '*' ? Op::Multiply : Op::Divide, lhs, rhs);
    }
    return lhs;
  }

  int parse_unary() {
    char c = peek();
    if (c == '-') {
      ++pos_;
      return add(Op::Negate, parse_unary());
    }
    if (c == '+') {
      ++pos_;
      return parse_unary();
    }
    return parse_power();
  }

  int parse_power() {
    int base = parse_primary();
    if (peek() == '^') {
      ++pos_;
      int exponent = parse_unary();
      return add(Op::Power, base, exponent);
    }
    return base;
  }

  int parse_primary() {
    char c = peek();
    if (c == '\0') fail("expected an expression, found end of input");
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      double value = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return add(Op::Constant, -1, -1, value);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      const std::string word = src_.substr(start, pos_ - start);
      if (word == "pi") return add(Op::Constant, -1, -1, std::numbers::pi);
      if (word == "e") return add(Op::Constant, -1, -1, std::numbers::e);
      if (word.size() >= 2 && word[0] == 'x' && word.find_first_not_of("0123456789", 1) == std::string::npos) {
        const int index = std::atoi(word.c_str() + 1);
        if (index < 1 || index > variables_) {
          pos_ = start;
          fail("unknown variable '" + word + "' (expected x1..x" + std::to_string(variables_) + ")");
        }
        return add(Op::Variable, -1, -1, 0.0, index - 1);
      }
      Op op;
      if (word == "sin") op = Op::Sin;
      else if (word == "cos") op = Op::Cos;
      else if (word == "sinh") op = Op::Sinh;
      else if (word == "cosh") op = Op::Cosh;
      else if (word == "exp") op = Op::Exp;
      else if (word == "sqrt") op = Op::Sqrt;
      else if (word == "pow") op = Op::Power;
      else {
        pos_ = start;
        fail("unknown identifier '" + word + "'");
      }
      expect('(');
      int arg = parse_expr();
      if (op == Op::Power) {
        expect(',');
        int exponent = parse_expr();
        expect(')');
        return add(Op::Power, arg, exponent);
      }
      expect(')');
      return add(op, arg);
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  const std::string& src_;
  int variables_;
  ExpressionList& out_;
  std::size_t pos_ = 0;
};

ExpressionList ExpressionList::parse(const std::string& source, int variables, int expected_count) {
  ExpressionList list;
  list.source_ = source;
  list.variables_ = variables;
  ExpressionParser parser(source, variables, list);
  parser.parse_list();
  if (expected_count >= 0 && list.count() != expected_count) {
    throw ArityError("expression list has " + std::to_string(list.count()) + " components, expected " +
                     std::to_string(expected_count));
  }
  return list;
}

template <typename T>
T ExpressionList::eval_node(int index, const T* x) const {
  using std::cos;
  using std::cosh;
  using std::exp;
  using std::pow;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  const Node& n = nodes_[index];
  switch (n.op) {
    case Op::Constant:
      return T(n.value);
    case Op::Variable:
      return x[n.variable];
    case Op::Negate:
      return -eval_node(n.left, x);
    case Op::Add:
      return eval_node(n.left, x) + eval_node(n.right, x);
    case Op::Subtract:
      return eval_node(n.left, x) - eval_node(n.right, x);
    case Op::Multiply:
      return eval_node(n.left, x) * eval_node(n.right, x);
    case Op::Divide:
      return eval_node(n.left, x) / eval_node(n.right, x);
    case Op::Power: {
      // Constant exponents keep negative bases with integer powers valid.
      const Node& e = nodes_[n.right];
      if (e.op == Op::Constant) return pow(eval_node(n.left, x), e.value);
      return pow(eval_node(n.left, x), eval_node(n.right, x));
    }
    case Op::Sin:
      return sin(eval_node(n.left, x));
    case Op::Cos:
      return cos(eval_node(n.left, x));
    case Op::Sinh:
      return sinh(eval_node(n.left, x));
    case Op::Cosh:
      return cosh(eval_node(n.left, x));
    case Op::Exp:
      return exp(eval_node(n.left, x));
    case Op::Sqrt:
      return sqrt(eval_node(n.left, x));
  }
  return T(0.0);
}

void ExpressionList::evaluate(const double* x, double* out) const {
  for (std::size_t i = 0; i < roots_.size(); ++i) out[i] = eval_node(roots_[i], x);
}

void ExpressionList::evaluate(const Jet2* x, Jet2* out) const {
  for (std::size_t i = 0; i < roots_.size(); ++i) out[i] = eval_node(roots_[i], x);
}

}  // namespace tubecomp
