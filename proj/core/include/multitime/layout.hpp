#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multitime/expr.hpp"

namespace multitime {

/// Fixed naming of the multi-time phase-space variables:
///   t1..tn, then for each particle J: xJ_1..xJ_d, pJ_1..pJ_d,
///   and optionally a single time `t` at the end.
/// Particle and component indices in the C++ API are 0-based; names are 1-based.
class VariableLayout {
public:
    VariableLayout(std::size_t particles, std::size_t dim, bool with_single_time = false);

    static VariableLayout times_only(std::size_t particles) { return {particles, 0, false}; }

    std::size_t particles() const noexcept { return n_; }
    std::size_t dim() const noexcept { return d_; }
    std::size_t size() const noexcept { return names_.size(); }

    std::size_t time(std::size_t j) const { return j; }
    std::size_t position(std::size_t j, std::size_t k) const { return n_ + j * 2 * d_ + k; }
    std::size_t momentum(std::size_t j, std::size_t k) const { return n_ + j * 2 * d_ + d_ + k; }
    std::optional<std::size_t> single_time() const noexcept { return single_; }

    const std::vector<std::string>& names() const noexcept { return names_; }
    std::optional<std::size_t> find(std::string_view name) const;

    /// Compiles against this layout; undeclared variables raise UnboundVariableError.
    expr::CompiledExpression compile(const expr::Expression& e) const;
    expr::CompiledExpression compile(std::string_view source) const;

    static std::string time_name(std::size_t j);
    static std::string position_name(std::size_t j, std::size_t k);
    static std::string momentum_name(std::size_t j, std::size_t k);

private:
    std::size_t n_;
    std::size_t d_;
    std::optional<std::size_t> single_;
    std::vector<std::string> names_;
};

}  // namespace multitime
