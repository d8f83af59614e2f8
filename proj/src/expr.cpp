#include "anisodiff/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace anisodiff {

class ExprParser {
  public:
    explicit ExprParser(const std::string& text) : text_(text) {}

    std::vector<Expression::Instr> run() {
        std::vector<Expression::Instr> program;
        parse_sum(program);
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return program;
    }

  private:
    using Instr = Expression::Instr;
    using Op = Expression::Op;

    const std::string& text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("expression error at position " +
                                    std::to_string(pos_) + ": " + what +
                                    " in \"" + text_ + "\"");
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(
                                          text_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    void parse_sum(std::vector<Instr>& out) {
        parse_product(out);
        while (true) {
            if (consume('+')) {
                parse_product(out);
                out.push_back({Op::Add});
            } else if (consume('-')) {
                parse_product(out);
                out.push_back({Op::Sub});
            } else {
                return;
            }
        }
    }

    void parse_product(std::vector<Instr>& out) {
        parse_unary(out);
        while (true) {
            if (consume('*')) {
                parse_unary(out);
                out.push_back({Op::Mul});
            } else if (consume('/')) {
                parse_unary(out);
                out.push_back({Op::Div});
            } else {
                return;
            }
        }
    }

    void parse_unary(std::vector<Instr>& out) {
        if (consume('-')) {
            parse_unary(out);
            out.push_back({Op::Neg});
        } else if (consume('+')) {
            parse_unary(out);
        } else {
            parse_power(out);
        }
    }

    // '^' binds tighter than unary minus and is right-associative
    void parse_power(std::vector<Instr>& out) {
        parse_atom(out);
        if (consume('^')) {
            parse_unary(out);
            out.push_back({Op::Pow});
        }
    }

    void parse_atom(std::vector<Instr>& out) {
        skip_ws();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            parse_sum(out);
            if (!consume(')')) fail("missing ')'");
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(text_.c_str() + pos_, &end);
            if (end == text_.c_str() + pos_) fail("bad number");
            pos_ = static_cast<std::size_t>(end - text_.c_str());
            out.push_back({Op::PushConst, v});
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   std::isalnum(static_cast<unsigned char>(text_[pos_])))
                ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            if (name == "t") { out.push_back({Op::PushT}); return; }
            if (name == "x") { out.push_back({Op::PushX}); return; }
            if (name == "y") { out.push_back({Op::PushY}); return; }
            if (name == "pi") { out.push_back({Op::PushConst, M_PI}); return; }
            if (name == "sin" || name == "cos" || name == "exp") {
                if (!consume('(')) fail("expected '(' after " + name);
                parse_sum(out);
                if (!consume(')')) fail("missing ')'");
                if (name == "sin") out.push_back({Op::Sin});
                else if (name == "cos") out.push_back({Op::Cos});
                else out.push_back({Op::Exp});
                return;
            }
            pos_ = start;
            fail("unknown identifier \"" + name + "\"");
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

Expression Expression::parse(const std::string& text) {
    Expression e;
    e.text_ = text;
    e.program_ = ExprParser(text).run();
    return e;
}

double Expression::eval(double t, double x, double y) const {
    double stack[64];
    int top = -1;
    for (const Instr& ins : program_) {
        switch (ins.op) {
            case Op::PushConst: stack[++top] = ins.value; break;
            case Op::PushT: stack[++top] = t; break;
            case Op::PushX: stack[++top] = x; break;
            case Op::PushY: stack[++top] = y; break;
            case Op::Add: --top; stack[top] += stack[top + 1]; break;
            case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
            case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
            case Op::Div: --top; stack[top] /= stack[top + 1]; break;
            case Op::Pow:
                --top;
                stack[top] = std::pow(stack[top], stack[top + 1]);
                break;
            case Op::Neg: stack[top] = -stack[top]; break;
            case Op::Sin: stack[top] = std::sin(stack[top]); break;
            case Op::Cos: stack[top] = std::cos(stack[top]); break;
            case Op::Exp: stack[top] = std::exp(stack[top]); break;
        }
        if (top >= 63) throw std::runtime_error("expression too deep");
    }
    return stack[0];
}

}  // namespace anisodiff
