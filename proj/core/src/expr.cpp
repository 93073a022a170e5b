#include "bandode/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace bandode {

namespace {

const std::map<std::string, UnaryOp>& function_table() {
    static const std::map<std::string, UnaryOp> table = {
        {"sin", UnaryOp::Sin}, {"cos", UnaryOp::Cos},   {"exp", UnaryOp::Exp},
        {"ln", UnaryOp::Ln},   {"sqrt", UnaryOp::Sqrt}, {"abs", UnaryOp::Abs},
        {"tanh", UnaryOp::Tanh}};
    return table;
}

class Parser {
public:
    Parser(const std::string& src, const std::vector<std::string>& vars,
           const std::map<std::string, double>& params)
        : src_(src), vars_(vars), params_(params) {}

    ExprAst run() {
        ExprAst ast;
        ast.source = src_;
        ast.variables = vars_;
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
        ast.root = parse_addsub(ast);
        skip_ws();
        if (pos_ < src_.size())
            throw ParseError("unexpected trailing input '" + std::string(1, src_[pos_]) + "'", pos_);
        return ast;
    }

private:
    const std::string& src_;
    const std::vector<std::string>& vars_;
    const std::map<std::string, double>& params_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < src_.size() ? src_[pos_] : '\0';
    }

    int add_node(ExprAst& ast, ExprNode n) {
        ast.nodes.push_back(std::move(n));
        return static_cast<int>(ast.nodes.size()) - 1;
    }

    int parse_addsub(ExprAst& ast) {
        int lhs = parse_muldiv(ast);
        for (;;) {
            char c = peek();
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            int rhs = parse_muldiv(ast);
            ExprNode n;
            n.kind = ExprNode::Kind::Binary;
            n.bop = (c == '+') ? BinaryOp::Add : BinaryOp::Sub;
            n.lhs = lhs;
            n.rhs = rhs;
            lhs = add_node(ast, n);
        }
    }

    int parse_muldiv(ExprAst& ast) {
        int lhs = parse_unary(ast);
        for (;;) {
            char c = peek();
            if (c != '*' && c != '/') return lhs;
            ++pos_;
            int rhs = parse_unary(ast);
            ExprNode n;
            n.kind = ExprNode::Kind::Binary;
            n.bop = (c == '*') ? BinaryOp::Mul : BinaryOp::Div;
            n.lhs = lhs;
            n.rhs = rhs;
            lhs = add_node(ast, n);
        }
    }

    int parse_unary(ExprAst& ast) {
        if (peek() == '-') {
            ++pos_;
            int operand = parse_unary(ast);
            ExprNode n;
            n.kind = ExprNode::Kind::Unary;
            n.uop = UnaryOp::Neg;
            n.lhs = operand;
            return add_node(ast, n);
        }
        if (peek() == '+') {  // unary plus is a no-op
            ++pos_;
            return parse_unary(ast);
        }
        return parse_power(ast);
    }

    // '^' is right-associative and binds tighter than unary minus.
    int parse_power(ExprAst& ast) {
        int base = parse_atom(ast);
        if (peek() == '^') {
            ++pos_;
            int exponent = parse_unary(ast);
            ExprNode n;
            n.kind = ExprNode::Kind::Binary;
            n.bop = BinaryOp::Pow;
            n.lhs = base;
            n.rhs = exponent;
            return add_node(ast, n);
        }
        return base;
    }

    int parse_atom(ExprAst& ast) {
        skip_ws();
        if (pos_ >= src_.size()) throw ParseError("expected expression", pos_);
        char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_addsub(ast);
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number(ast);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident(ast);
        throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
    }

    int parse_number(ExprAst& ast) {
        const char* begin = src_.c_str() + pos_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) throw ParseError("malformed number", pos_);
        pos_ += static_cast<std::size_t>(end - begin);
        ExprNode n;
        n.kind = ExprNode::Kind::Constant;
        n.value = v;
        return add_node(ast, n);
    }

    int parse_ident(ExprAst& ast) {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        std::string name = src_.substr(start, pos_ - start);

        if (peek() == '(') {
            auto it = function_table().find(name);
            if (it == function_table().end())
                throw ParseError("unknown function '" + name + "'", start);
            ++pos_;  // '('
            int arg = parse_addsub(ast);
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            ExprNode n;
            n.kind = ExprNode::Kind::Unary;
            n.uop = it->second;
            n.lhs = arg;
            return add_node(ast, n);
        }

        for (std::size_t i = 0; i < vars_.size(); ++i) {
            if (vars_[i] == name) {
                ExprNode n;
                n.kind = ExprNode::Kind::Variable;
                n.var = static_cast<int>(i);
                n.name = name;
                return add_node(ast, n);
            }
        }
        auto pit = params_.find(name);
        if (pit != params_.end()) {
            ExprNode n;
            n.kind = ExprNode::Kind::Parameter;
            n.name = name;
            n.value = pit->second;
            return add_node(ast, n);
        }
        throw ParseError("unknown identifier '" + name + "'", start);
    }
};

const char* function_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Ln: return "ln";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Abs: return "abs";
        case UnaryOp::Tanh: return "tanh";
        case UnaryOp::Neg: return "-";
    }
    return "?";
}

// Precedence used by the printer: + - (1), * / (2), unary - (3), ^ (4).
int precedence(const ExprAst& ast, int idx) {
    const ExprNode& n = ast.nodes[idx];
    switch (n.kind) {
        case ExprNode::Kind::Binary:
            switch (n.bop) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 4;
            }
            return 1;
        case ExprNode::Kind::Unary:
            return n.uop == UnaryOp::Neg ? 3 : 5;
        default:
            return 5;
    }
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_node(const ExprAst& ast, int idx, std::string& out) {
    const ExprNode& n = ast.nodes[idx];
    auto child = [&](int c, bool need_parens) {
        if (need_parens) out += '(';
        print_node(ast, c, out);
        if (need_parens) out += ')';
    };
    switch (n.kind) {
        case ExprNode::Kind::Constant: {
            if (n.value < 0 || std::signbit(n.value)) {
                out += '(';
                out += format_number(n.value);
                out += ')';
            } else {
                out += format_number(n.value);
            }
            break;
        }
        case ExprNode::Kind::Variable:
        case ExprNode::Kind::Parameter:
            out += n.name;
            break;
        case ExprNode::Kind::Unary:
            if (n.uop == UnaryOp::Neg) {
                out += '-';
                child(n.lhs, precedence(ast, n.lhs) < 3);
            } else {
                out += function_name(n.uop);
                out += '(';
                print_node(ast, n.lhs, out);
                out += ')';
            }
            break;
        case ExprNode::Kind::Binary: {
            int prec = precedence(ast, idx);
            const char* sym = "?";
            switch (n.bop) {
                case BinaryOp::Add: sym = " + "; break;
                case BinaryOp::Sub: sym = " - "; break;
                case BinaryOp::Mul: sym = "*"; break;
                case BinaryOp::Div: sym = "/"; break;
                case BinaryOp::Pow: sym = "^"; break;
            }
            if (n.bop == BinaryOp::Pow) {
                // right-associative
                child(n.lhs, precedence(ast, n.lhs) <= prec);
                out += sym;
                child(n.rhs, precedence(ast, n.rhs) < prec);
            } else {
                child(n.lhs, precedence(ast, n.lhs) < prec);
                out += sym;
                child(n.rhs, precedence(ast, n.rhs) <= prec);
            }
            break;
        }
    }
}

enum Opcode {
    OP_CONST,
    OP_VAR,
    OP_NEG,
    OP_SIN,
    OP_COS,
    OP_EXP,
    OP_LN,
    OP_SQRT,
    OP_ABS,
    OP_TANH,
    OP_ADD,
    OP_SUB,
    OP_MUL,
    OP_DIV,
    OP_POW
};

}  // namespace

bool ExprAst::uses_variable(const std::string& name) const {
    for (const auto& n : nodes)
        if (n.kind == ExprNode::Kind::Variable && n.name == name) return true;
    return false;
}

ExprAst parse_expr(const std::string& source, const std::vector<std::string>& allowed_vars,
                   const std::map<std::string, double>& params) {
    Parser p(source, allowed_vars, params);
    return p.run();
}

std::string pretty(const ExprAst& ast) {
    std::string out;
    if (ast.root >= 0) print_node(ast, ast.root, out);
    return out;
}

ExprProgram::ExprProgram(const ExprAst& ast) {
    if (ast.root < 0) return;

    auto emit = [&](auto&& self, int idx) -> std::size_t {
        const ExprNode& n = ast.nodes[idx];
        switch (n.kind) {
            case ExprNode::Kind::Constant:
            case ExprNode::Kind::Parameter:
                code_.push_back({OP_CONST, n.value, 0});
                return 1;
            case ExprNode::Kind::Variable:
                code_.push_back({OP_VAR, 0.0, n.var});
                return 1;
            case ExprNode::Kind::Unary: {
                std::size_t d = self(self, n.lhs);
                int op = OP_NEG;
                switch (n.uop) {
                    case UnaryOp::Neg: op = OP_NEG; break;
                    case UnaryOp::Sin: op = OP_SIN; break;
                    case UnaryOp::Cos: op = OP_COS; break;
                    case UnaryOp::Exp: op = OP_EXP; break;
                    case UnaryOp::Ln: op = OP_LN; break;
                    case UnaryOp::Sqrt: op = OP_SQRT; break;
                    case UnaryOp::Abs: op = OP_ABS; break;
                    case UnaryOp::Tanh: op = OP_TANH; break;
                }
                code_.push_back({op, 0.0, 0});
                return d;
            }
            case ExprNode::Kind::Binary: {
                std::size_t dl = self(self, n.lhs);
                std::size_t dr = self(self, n.rhs);
                int op = OP_ADD;
                switch (n.bop) {
                    case BinaryOp::Add: op = OP_ADD; break;
                    case BinaryOp::Sub: op = OP_SUB; break;
                    case BinaryOp::Mul: op = OP_MUL; break;
                    case BinaryOp::Div: op = OP_DIV; break;
                    case BinaryOp::Pow: op = OP_POW; break;
                }
                code_.push_back({op, 0.0, 0});
                return std::max(dl, dr + 1);
            }
        }
        return 1;
    };
    max_stack_ = emit(emit, ast.root);
    if (max_stack_ > 64)
        throw std::runtime_error("expression too deeply nested (evaluation stack > 64)");
}

double ExprProgram::eval(const double* vars, std::size_t n_vars) const {
    double stack[64];
    std::size_t sp = 0;
    for (const Instr& ins : code_) {
        switch (ins.op) {
            case OP_CONST: stack[sp++] = ins.imm; break;
            case OP_VAR:
                stack[sp++] = (static_cast<std::size_t>(ins.var) < n_vars) ? vars[ins.var] : 0.0;
                break;
            case OP_NEG: stack[sp - 1] = -stack[sp - 1]; break;
            case OP_SIN: stack[sp - 1] = std::sin(stack[sp - 1]); break;
            case OP_COS: stack[sp - 1] = std::cos(stack[sp - 1]); break;
            case OP_EXP: stack[sp - 1] = std::exp(stack[sp - 1]); break;
            case OP_LN: stack[sp - 1] = std::log(stack[sp - 1]); break;
            case OP_SQRT: stack[sp - 1] = std::sqrt(stack[sp - 1]); break;
            case OP_ABS: stack[sp - 1] = std::fabs(stack[sp - 1]); break;
            case OP_TANH: stack[sp - 1] = std::tanh(stack[sp - 1]); break;
            case OP_ADD: stack[sp - 2] += stack[sp - 1]; --sp; break;
            case OP_SUB: stack[sp - 2] -= stack[sp - 1]; --sp; break;
            case OP_MUL: stack[sp - 2] *= stack[sp - 1]; --sp; break;
            case OP_DIV: stack[sp - 2] /= stack[sp - 1]; --sp; break;
            case OP_POW:
                stack[sp - 2] = std::pow(stack[sp - 2], stack[sp - 1]);
                --sp;
                break;
        }
    }
    return sp ? stack[sp - 1] : 0.0;
}

double ExprProgram::eval(double t, double u, double v) const {
    double vars[3] = {t, u, v};
    return eval(vars, 3);
}

double ExprProgram::eval1(double x) const { return eval(&x, 1); }

}  // namespace bandode
