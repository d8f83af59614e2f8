#pragma once

#include <memory>
#include <string>
#include <vector>

namespace anisodiff {

/// Arithmetic expression in the variables t, x, y with operators
/// + - * / ^, parentheses, the constant pi and the functions
/// sin, cos, exp.  Parsed once, evaluated many times.
class Expression {
  public:
    static Expression parse(const std::string& text);

    double eval(double t, double x, double y) const;
    const std::string& text() const { return text_; }

  private:
    enum class Op : unsigned char {
        PushConst, PushT, PushX, PushY,
        Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Exp
    };
    struct Instr {
        Op op;
        double value = 0.0;
    };
    std::string text_;
    std::vector<Instr> program_;

    friend class ExprParser;
};

}  // namespace anisodiff
