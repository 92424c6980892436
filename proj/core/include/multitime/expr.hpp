#pragma once

// Expression language used by configuration files: literals, named variables,
// + - * / ^, unary minus, and the functions sin cos exp log sqrt abs tanh.
// Expressions are immutable once parsed and may be shared across threads.

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace multitime::expr {

enum class BinaryOp { add, sub, mul, div, pow };
enum class Function { sin, cos, exp, log, sqrt, abs, tanh };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
    double value;
};
struct Variable {
    std::string name;
};
struct Negate {
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};
struct Call {
    Function fn;
    NodePtr arg;
};

struct Node {
    std::variant<Number, Variable, Negate, Binary, Call> data;
};

class Expression {
public:
    Expression() = default;
    Expression(NodePtr root, std::string source);

    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const noexcept { return root_; }
    bool empty() const noexcept { return root_ == nullptr; }

    /// Names of all variables appearing in the tree.
    const std::set<std::string>& free_variables() const noexcept { return free_; }
    const std::string& source() const noexcept { return source_; }

    /// Fully parenthesized rendering; parsing it yields a structurally equal tree.
    std::string to_string() const;

private:
    NodePtr root_;
    std::set<std::string> free_;
    std::string source_;
};

bool structurally_equal(const Expression& a, const Expression& b);

std::string_view function_name(Function fn);

/// Throws ParseError (1-based column) or UnknownFunctionError.
Expression parse_expression(std::string_view source);

using VariableBindings = std::map<std::string, double, std::less<>>;

/// Tree-walking evaluation. Throws UnboundVariableError or DomainError.
double evaluate(const Expression& expr, const VariableBindings& bindings);

enum class DiffScheme { central, richardson };

/// d expr / d var at `bindings`. A step h <= 0 selects the default step
/// 1e-4 * max(1, |x|) (never below 1e-6).
double partial_derivative(const Expression& expr, std::string_view var,
                          const VariableBindings& bindings, double h = 0.0,
                          DiffScheme scheme = DiffScheme::central);

/// Expression lowered to a postfix program whose variables are resolved to
/// positions in a caller-supplied slot list. Evaluates bit-identically to
/// `evaluate` with the equivalent bindings.
class CompiledExpression {
public:
    CompiledExpression() = default;

    /// Throws UnboundVariableError if a free variable is not among `slots`.
    CompiledExpression(const Expression& expr, std::span<const std::string> slots);

    double operator()(std::span<const double> values) const;

    bool empty() const noexcept { return code_.empty(); }
    const Expression& expression() const noexcept { return expr_; }

    /// Slot indices this expression reads, sorted and unique.
    const std::vector<std::size_t>& used_slots() const noexcept { return used_; }
    bool depends_on(std::size_t slot) const;

private:
    enum class OpCode : std::uint8_t {
        push_const, push_slot, neg, add, sub, mul, div, pow,
        sin, cos, exp, log, sqrt, abs, tanh
    };
    struct Instr {
        OpCode code;
        std::size_t slot = 0;
        double value = 0.0;
    };

    void emit(const Node& node, std::span<const std::string> slots, std::size_t depth);

    Expression expr_;
    std::vector<Instr> code_;
    std::vector<std::size_t> used_;
    std::size_t max_depth_ = 0;
};

}  // namespace multitime::expr
