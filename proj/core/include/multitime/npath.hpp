#pragma once

// n-paths: one sampled world line per particle, each a graph over its own time.
// Samples carry (x, p, dx/dt, dp/dt) so the world line is interpolated with
// cubic Hermite polynomials.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace multitime::classical {

class WorldLine {
public:
    explicit WorldLine(std::size_t dim = 1) : dim_(dim) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return t_.size(); }
    bool empty() const noexcept { return t_.empty(); }

    /// Appends a sample; times must be strictly increasing.
    void append(double t, std::span<const double> x, std::span<const double> p,
                std::span<const double> dx, std::span<const double> dp);

    double t_begin() const { return t_.front(); }
    double t_end() const { return t_.back(); }
    bool covers(double t) const;

    const std::vector<double>& times() const noexcept { return t_; }
    std::span<const double> sample_position(std::size_t i) const { return {x_.data() + i * dim_, dim_}; }
    std::span<const double> sample_momentum(std::size_t i) const { return {p_.data() + i * dim_, dim_}; }
    std::span<const double> sample_velocity(std::size_t i) const { return {dx_.data() + i * dim_, dim_}; }
    std::span<const double> sample_force(std::size_t i) const { return {dp_.data() + i * dim_, dim_}; }

    /// Interpolated x(t), p(t) and the derivatives of the interpolants.
    /// Throw OutOfRangeError outside [t_begin, t_end].
    std::vector<double> position(double t) const;
    std::vector<double> momentum(double t) const;
    std::vector<double> velocity(double t) const;
    std::vector<double> momentum_rate(double t) const;

private:
    struct Cell {
        std::size_t i;
        double s;
        double h;
    };
    Cell locate(double t) const;
    std::vector<double> hermite(const std::vector<double>& y, const std::vector<double>& dy,
                                double t, bool derivative) const;

    std::size_t dim_;
    std::vector<double> t_;
    std::vector<double> x_, p_, dx_, dp_;
};

struct NPath {
    std::vector<WorldLine> lines;
    std::vector<std::string> warnings;

    std::size_t particles() const noexcept { return lines.size(); }
    std::size_t dim() const { return lines.empty() ? 0 : lines.front().dim(); }
};

inline constexpr int kNPathCsvVersion = 1;

/// Column names: particle, t, x_1..x_d, p_1..p_d, dxdt_1..dxdt_d, dpdt_1..dpdt_d.
std::vector<std::string> npath_csv_columns(std::size_t dim);
void write_npath_csv(std::ostream& out, const NPath& path);

/// Maximum distance between x_j(t) and the chord through the first and last samples.
double chord_deviation(const NPath& path);

}  // namespace multitime::classical
