#pragma once

// Arithmetic expression language used to declare right-hand sides, Nagumo
// functions and barrier curves in problem files.  Expressions are parsed to
// a small AST and compiled to a stack program for fast repeated evaluation.

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace bandode {

enum class UnaryOp { Neg, Sin, Cos, Exp, Ln, Sqrt, Abs, Tanh };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct ExprNode {
    enum class Kind { Constant, Variable, Parameter, Unary, Binary } kind;
    double value = 0.0;      // Constant, Parameter
    int var = -1;            // Variable: index into the allowed-variable list
    std::string name;        // Variable / Parameter spelling
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    int lhs = -1;            // Unary operand / Binary lhs
    int rhs = -1;            // Binary rhs
};

// Flat AST; `nodes[root]` is the top of the expression.  Variable indices
// refer to positions in `variables`, which is the allowed-variable list the
// parser was given (in the caller's order).
struct ExprAst {
    std::vector<ExprNode> nodes;
    int root = -1;
    std::vector<std::string> variables;
    std::string source;

    bool uses_variable(const std::string& name) const;
};

struct ParseError : std::runtime_error {
    std::size_t offset;
    ParseError(const std::string& what, std::size_t off)
        : std::runtime_error(what + " at offset " + std::to_string(off)), offset(off) {}
};

// Parses `source`.  Free identifiers must be members of `allowed_vars` or
// keys of `params`; anything else is rejected with a position.
ExprAst parse_expr(const std::string& source,
                   const std::vector<std::string>& allowed_vars,
                   const std::map<std::string, double>& params);

// Canonical rendering with minimal parentheses; print-parse-print is stable.
std::string pretty(const ExprAst& ast);

// Compiled form.  Evaluation takes the variable values in the order the AST
// declared them (missing trailing variables default to 0).
class ExprProgram {
public:
    ExprProgram() = default;
    explicit ExprProgram(const ExprAst& ast);

    double eval(const double* vars, std::size_t n_vars) const;
    double eval(double t, double u, double v) const;  // 3-variable convenience
    double eval1(double x) const;                     // 1-variable convenience

    bool empty() const { return code_.empty(); }

private:
    struct Instr {
        int op;          // opcode
        double imm;      // constant payload
        int var;         // variable index payload
    };
    std::vector<Instr> code_;
    std::size_t max_stack_ = 0;
};

}  // namespace bandode
