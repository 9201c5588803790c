#pragma once

#include <string>
#include <vector>

#include "tubecomp/jet.hpp"

namespace tubecomp {

// A comma-separated list of arithmetic expressions in variables x1..xn.
//
// Grammar (standard precedence, '^' binds tighter than unary minus and is right-associative):
//   list    := expr (',' expr)*
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'pi' | 'e' | 'x'<index> | func '(' args ')' | '(' expr ')'
// Functions: sin cos sinh cosh exp sqrt (one argument), pow (two arguments).
class ExpressionList {
 public:
  // Throws ParseError (1-based column) on malformed input and ArityError when
  // `expected_count` >= 0 differs from the number of expressions.
  static ExpressionList parse(const std::string& source, int variables, int expected_count = -1);

  int count() const { return static_cast<int>(roots_.size()); }
  int variables() const { return variables_; }
  const std::string& source() const { return source_; }

  void evaluate(const double* x, double* out) const;
  void evaluate(const Jet2* x, Jet2* out) const;

 private:
  enum class Op { Constant, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Sin, Cos, Sinh, Cosh, Exp, Sqrt };
  struct Node {
    Op op = Op::Constant;
    double value = 0.0;
    int variable = 0;
    int left = -1;
    int right = -1;
  };

  template <typename T>
  T eval_node(int index, const T* x) const;

  friend class ExpressionParser;

  std::string source_;
  int variables_ = 0;
  std::vector<Node> nodes_;
  std::vector<int> roots_;
};

}  // namespace tubecomp
