#include "multitime/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

#include "multitime/errors.hpp"
#include "multitime/numdiff.hpp"

namespace multitime::expr {

namespace {

constexpr std::array<std::pair<std::string_view, Function>, 7> kFunctions{{
    {"sin", Function::sin},
    {"cos", Function::cos},
    {"exp", Function::exp},
    {"log", Function::log},
    {"sqrt", Function::sqrt},
    {"abs", Function::abs},
    {"tanh", Function::tanh},
}};

double apply_function(Function fn, double x) {
    switch (fn) {
        case Function::sin: return std::sin(x);
        case Function::cos: return std::cos(x);
        case Function::exp: return std::exp(x);
        case Function::log:
            if (!(x > 0.0)) throw DomainError("log of non-positive argument " + std::to_string(x));
            return std::log(x);
        case Function::sqrt:
            if (x < 0.0) throw DomainError("sqrt of negative argument " + std::to_string(x));
            return std::sqrt(x);
        case Function::abs: return std::fabs(x);
        case Function::tanh: return std::tanh(x);
    }
    return 0.0;
}

double apply_binary(BinaryOp op, double a, double b) {
    switch (op) {
        case BinaryOp::add: return a + b;
        case BinaryOp::sub: return a - b;
        case BinaryOp::mul: return a * b;
        case BinaryOp::div:
            if (b == 0.0) throw DomainError("division by zero");
            return a / b;
        case BinaryOp::pow: {
            const double r = std::pow(a, b);
            if (std::isnan(r) && !std::isnan(a) && !std::isnan(b)) {
                throw DomainError("power with negative base and non-integer exponent");
            }
            if (a == 0.0 && b < 0.0) throw DomainError("zero raised to a negative power");
            return r;
        }
    }
    return 0.0;
}

double finite_or_throw(double v) {
    if (!std::isfinite(v)) throw NumericalError("expression evaluated to a non-finite value");
    return v;
}

// ---------------------------------------------------------------------------
// Lexer / recursive-descent parser.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | ident | ident '(' expr ')' | '(' expr ')'

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };

struct Token {
    Tok kind;
    std::size_t column;  // 1-based
    std::string_view text;
    double value = 0.0;
};

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) { advance(); }

    NodePtr parse() {
        NodePtr root = parse_sum();
        if (tok_.kind != Tok::end) fail_unexpected();
        return root;
    }

private:
    [[noreturn]] void fail_unexpected() const {
        if (tok_.kind == Tok::end) throw ParseError("unexpected end of input", tok_.column);
        throw ParseError("unexpected '" + std::string(tok_.text) + "'", tok_.column);
    }

    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        const std::size_t col = pos_ + 1;
        if (pos_ >= src_.size()) {
            tok_ = {Tok::end, col, {}};
            return;
        }
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number(col);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_ + 1;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_')) {
                ++end;
            }
            tok_ = {Tok::ident, col, src_.substr(pos_, end - pos_)};
            pos_ = end;
            return;
        }
        Tok kind;
        switch (c) {
            case '+': kind = Tok::plus; break;
            case '-': kind = Tok::minus; break;
            case '*': kind = Tok::star; break;
            case '/': kind = Tok::slash; break;
            case '^': kind = Tok::caret; break;
            case '(': kind = Tok::lparen; break;
            case ')': kind = Tok::rparen; break;
            default:
                throw ParseError("unexpected character '" + std::string(1, c) + "'", col);
        }
        tok_ = {kind, col, src_.substr(pos_, 1)};
        ++pos_;
    }

    void lex_number(std::size_t col) {
        std::size_t end = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end]))) {
                ++end;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            mantissa += digits();
        }
        if (mantissa == 0) throw ParseError("malformed number", col);
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            ++end;
            if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
            if (digits() == 0) throw ParseError("malformed exponent in number", col);
        }
        const std::string text(src_.substr(pos_, end - pos_));
        const double value = std::strtod(text.c_str(), nullptr);
        if (!std::isfinite(value)) throw ParseError("numeric literal out of range", col);
        tok_ = {Tok::number, col, src_.substr(pos_, end - pos_), value};
        pos_ = end;
    }

    static NodePtr make(auto&& alt) {
        return std::make_shared<const Node>(Node{std::forward<decltype(alt)>(alt)});
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        while (tok_.kind == Tok::plus || tok_.kind == Tok::minus) {
            const BinaryOp op = tok_.kind == Tok::plus ? BinaryOp::add : BinaryOp::sub;
            advance();
            lhs = make(Binary{op, lhs, parse_product()});
        }
        return lhs;
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        while (tok_.kind == Tok::star || tok_.kind == Tok::slash) {
            const BinaryOp op = tok_.kind == Tok::star ? BinaryOp::mul : BinaryOp::div;
            advance();
            lhs = make(Binary{op, lhs, parse_unary()});
        }
        return lhs;
    }

    NodePtr parse_unary() {
        if (tok_.kind == Tok::minus) {
            advance();
            return make(Negate{parse_unary()});
        }
        if (tok_.kind == Tok::plus) {
            advance();
            return parse_unary();
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (tok_.kind == Tok::caret) {
            advance();
            return make(Binary{BinaryOp::pow, base, parse_unary()});
        }
        return base;
    }

    NodePtr parse_primary() {
        switch (tok_.kind) {
            case Tok::number: {
                NodePtr n = make(Number{tok_.value});
                advance();
                return n;
            }
            case Tok::ident: {
                const Token name = tok_;
                advance();
                if (tok_.kind != Tok::lparen) return make(Variable{std::string(name.text)});
                const auto it = std::find_if(kFunctions.begin(), kFunctions.end(),
                                             [&](const auto& f) { return f.first == name.text; });
                if (it == kFunctions.end()) {
                    throw UnknownFunctionError(std::string(name.text), name.column);
                }
                advance();
                NodePtr arg = parse_sum();
                if (tok_.kind != Tok::rparen) fail_unexpected();
                advance();
                return make(Call{it->second, arg});
            }
            case Tok::lparen: {
                advance();
                NodePtr inner = parse_sum();
                if (tok_.kind != Tok::rparen) fail_unexpected();
                advance();
                return inner;
            }
            default:
                fail_unexpected();
        }
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token tok_{Tok::end, 1, {}};
};

void collect_variables(const Node& node, std::set<std::string>& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Variable>) {
                out.insert(n.name);
            } else if constexpr (std::is_same_v<T, Negate>) {
                collect_variables(*n.operand, out);
            } else if constexpr (std::is_same_v<T, Binary>) {
                collect_variables(*n.lhs, out);
                collect_variables(*n.rhs, out);
            } else if constexpr (std::is_same_v<T, Call>) {
                collect_variables(*n.arg, out);
            }
        },
        node.data);
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void render(const Node& node, std::string& out) {
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Number>) {
                out += format_number(n.value);
            } else if constexpr (std::is_same_v<T, Variable>) {
                out += n.name;
            } else if constexpr (std::is_same_v<T, Negate>) {
                out += "(-";
                render(*n.operand, out);
                out += ')';
            } else if constexpr (std::is_same_v<T, Binary>) {
                static constexpr std::string_view ops[] = {" + ", " - ", " * ", " / ", " ^ "};
                out += '(';
                render(*n.lhs, out);
                out += ops[static_cast<int>(n.op)];
                render(*n.rhs, out);
                out += ')';
            } else {
                out += function_name(n.fn);
                out += '(';
                render(*n.arg, out);
                out += ')';
            }
        },
        node.data);
}

bool equal_nodes(const Node& a, const Node& b) {
    if (a.data.index() != b.data.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.data);
            if constexpr (std::is_same_v<T, Number>) {
                return x.value == y.value;
            } else if constexpr (std::is_same_v<T, Variable>) {
                return x.name == y.name;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return equal_nodes(*x.operand, *y.operand);
            } else if constexpr (std::is_same_v<T, Binary>) {
                return x.op == y.op && equal_nodes(*x.lhs, *y.lhs) && equal_nodes(*x.rhs, *y.rhs);
            } else {
                return x.fn == y.fn && equal_nodes(*x.arg, *y.arg);
            }
        },
        a.data);
}

double eval_node(const Node& node, const VariableBindings& b) {
    return std::visit(
        [&](const auto& n) -> double {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Number>) {
                return n.value;
            } else if constexpr (std::is_same_v<T, Variable>) {
                const auto it = b.find(n.name);
                if (it == b.end()) throw UnboundVariableError(n.name);
                return it->second;
            } else if constexpr (std::is_same_v<T, Negate>) {
                return -eval_node(*n.operand, b);
            } else if constexpr (std::is_same_v<T, Binary>) {
                const double lhs = eval_node(*n.lhs, b);
                const double rhs = eval_node(*n.rhs, b);
                return apply_binary(n.op, lhs, rhs);
            } else {
                return apply_function(n.fn, eval_node(*n.arg, b));
            }
        },
        node.data);
}

}  // namespace

Expression::Expression(NodePtr root, std::string source)
    : root_(std::move(root)), source_(std::move(source)) {
    if (root_) collect_variables(*root_, free_);
}

std::string Expression::to_string() const {
    std::string out;
    if (root_) render(*root_, out);
    return out;
}

bool structurally_equal(const Expression& a, const Expression& b) {
    if (a.empty() || b.empty()) return a.empty() == b.empty();
    return equal_nodes(a.root(), b.root());
}

std::string_view function_name(Function fn) {
    for (const auto& [name, f] : kFunctions) {
        if (f == fn) return name;
    }
    return "?";
}

Expression parse_expression(std::string_view source) {
    const bool blank = std::all_of(source.begin(), source.end(),
                                   [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
    if (blank) throw ParseError("empty expression", 1);
    Parser parser(source);
    return Expression(parser.parse(), std::string(source));
}

double evaluate(const Expression& expr, const VariableBindings& bindings) {
    if (expr.empty()) throw Error("evaluate: empty expression");
    return finite_or_throw(eval_node(expr.root(), bindings));
}

double partial_derivative(const Expression& expr, std::string_view var,
                          const VariableBindings& bindings, double h, DiffScheme scheme) {
    const auto it = bindings.find(var);
    if (it == bindings.end()) throw UnboundVariableError(std::string(var));
    VariableBindings shifted = bindings;
    double& slot = shifted.find(var)->second;
    const double x0 = it->second;
    auto f = [&](double x) {
        slot = x;
        return evaluate(expr, shifted);
    };
    const double step = h > 0.0 ? h : default_step(x0);
    return scheme == DiffScheme::central ? central_difference(f, x0, step)
                                         : richardson_difference(f, x0, step);
}

// ---------------------------------------------------------------------------

CompiledExpression::CompiledExpression(const Expression& expr, std::span<const std::string> slots)
    : expr_(expr) {
    if (expr.empty()) throw Error("cannot compile an empty expression");
    emit(expr.root(), slots, 1);
    std::sort(used_.begin(), used_.end());
    used_.erase(std::unique(used_.begin(), used_.end()), used_.end());
}

void CompiledExpression::emit(const Node& node, std::span<const std::string> slots,
                              std::size_t depth) {
    max_depth_ = std::max(max_depth_, depth);
    std::visit(
        [&](const auto& n) {
            using T = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<T, Number>) {
                code_.push_back({OpCode::push_const, 0, n.value});
            } else if constexpr (std::is_same_v<T, Variable>) {
                const auto it = std::find(slots.begin(), slots.end(), n.name);
                if (it == slots.end()) throw UnboundVariableError(n.name);
                const auto idx = static_cast<std::size_t>(it - slots.begin());
                used_.push_back(idx);
                code_.push_back({OpCode::push_slot, idx, 0.0});
            } else if constexpr (std::is_same_v<T, Negate>) {
                emit(*n.operand, slots, depth);
                code_.push_back({OpCode::neg});
            } else if constexpr (std::is_same_v<T, Binary>) {
                emit(*n.lhs, slots, depth);
                emit(*n.rhs, slots, depth + 1);
                static constexpr OpCode ops[] = {OpCode::add, OpCode::sub, OpCode::mul,
                                                 OpCode::div, OpCode::pow};
                code_.push_back({ops[static_cast<int>(n.op)]});
            } else {
                emit(*n.arg, slots, depth);
                static constexpr OpCode fns[] = {OpCode::sin,  OpCode::cos, OpCode::exp,
                                                 OpCode::log,  OpCode::sqrt, OpCode::abs,
                                                 OpCode::tanh};
                code_.push_back({fns[static_cast<int>(n.fn)]});
            }
        },
        node.data);
}

bool CompiledExpression::depends_on(std::size_t slot) const {
    return std::binary_search(used_.begin(), used_.end(), slot);
}

double CompiledExpression::operator()(std::span<const double> values) const {
    constexpr std::size_t kInline = 32;
    std::array<double, kInline> small{};
    std::vector<double> large;
    double* stack = small.data();
    if (max_depth_ > kInline) {
        large.resize(max_depth_);
        stack = large.data();
    }
    std::size_t top = 0;
    for (const Instr& in : code_) {
        switch (in.code) {
            case OpCode::push_const: stack[top++] = in.value; break;
            case OpCode::push_slot: stack[top++] = values[in.slot]; break;
            case OpCode::neg: stack[top - 1] = -stack[top - 1]; break;
            case OpCode::add:
            case OpCode::sub:
            case OpCode::mul:
            case OpCode::div:
            case OpCode::pow: {
                const double rhs = stack[--top];
                const auto op = static_cast<BinaryOp>(static_cast<int>(in.code) -
                                                      static_cast<int>(OpCode::add));
                stack[top - 1] = apply_binary(op, stack[top - 1], rhs);
                break;
            }
            default: {
                const auto fn = static_cast<Function>(static_cast<int>(in.code) -
                                                      static_cast<int>(OpCode::sin));
                stack[top - 1] = apply_function(fn, stack[top - 1]);
                break;
            }
        }
    }
    return finite_or_throw(stack[0]);
}

}  // namespace multitime::expr
