#include "multitime/layout.hpp"

#include <algorithm>

namespace multitime {

VariableLayout::VariableLayout(std::size_t particles, std::size_t dim, bool with_single_time)
    : n_(particles), d_(dim) {
    names_.reserve(n_ + 2 * n_ * d_ + 1);
    for (std::size_t j = 0; j < n_; ++j) names_.push_back(time_name(j));
    for (std::size_t j = 0; j < n_; ++j) {
        for (std::size_t k = 0; k < d_; ++k) names_.push_back(position_name(j, k));
        for (std::size_t k = 0; k < d_; ++k) names_.push_back(momentum_name(j, k));
    }
    if (with_single_time) {
        single_ = names_.size();
        names_.emplace_back("t");
    }
}

std::optional<std::size_t> VariableLayout::find(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

expr::CompiledExpression VariableLayout::compile(const expr::Expression& e) const {
    return expr::CompiledExpression(e, names_);
}

expr::CompiledExpression VariableLayout::compile(std::string_view source) const {
    return compile(expr::parse_expression(source));
}

std::string VariableLayout::time_name(std::size_t j) { return "t" + std::to_string(j + 1); }

std::string VariableLayout::position_name(std::size_t j, std::size_t k) {
    return "x" + std::to_string(j + 1) + "_" + std::to_string(k + 1);
}

std::string VariableLayout::momentum_name(std::size_t j, std::size_t k) {
    return "p" + std::to_string(j + 1) + "_" + std::to_string(k + 1);
}

}  // namespace multitime
