#include "multitime/npath.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "multitime/errors.hpp"

namespace multitime::classical {

namespace {

double range_slack(double t) { return 1e-12 * std::max(1.0, std::fabs(t)); }

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void WorldLine::append(double t, std::span<const double> x, std::span<const double> p,
                       std::span<const double> dx, std::span<const double> dp) {
    if (x.size() != dim_ || p.size() != dim_ || dx.size() != dim_ || dp.size() != dim_) {
        throw DimensionError("WorldLine::append: component size mismatch");
    }
    if (!t_.empty() && !(t > t_.back())) {
        throw DimensionError("WorldLine::append: sample times must be strictly increasing");
    }
    t_.push_back(t);
    x_.insert(x_.end(), x.begin(), x.end());
    p_.insert(p_.end(), p.begin(), p.end());
    dx_.insert(dx_.end(), dx.begin(), dx.end());
    dp_.insert(dp_.end(), dp.begin(), dp.end());
}

bool WorldLine::covers(double t) const {
    if (t_.empty()) return false;
    return t >= t_.front() - range_slack(t_.front()) && t <= t_.back() + range_slack(t_.back());
}

WorldLine::Cell WorldLine::locate(double t) const {
    if (!covers(t)) {
        throw OutOfRangeError("time " + format_double(t) + " outside world line range [" +
                              (t_.empty() ? std::string("empty") : format_double(t_.front()) + ", " +
                                                                       format_double(t_.back())) +
                              "]");
    }
    if (t_.size() == 1) return {0, 0.0, 1.0};
    const double tc = std::clamp(t, t_.front(), t_.back());
    auto it = std::upper_bound(t_.begin(), t_.end(), tc);
    std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    if (i >= t_.size() - 1) i = t_.size() - 2;
    const double h = t_[i + 1] - t_[i];
    return {i, (tc - t_[i]) / h, h};
}

std::vector<double> WorldLine::hermite(const std::vector<double>& y, const std::vector<double>& dy,
                                       double t, bool derivative) const {
    const Cell c = locate(t);
    std::vector<double> out(dim_);
    if (t_.size() == 1) {
        for (std::size_t k = 0; k < dim_; ++k) out[k] = derivative ? dy[k] : y[k];
        return out;
    }
    const double s = c.s;
    const double s2 = s * s;
    const double s3 = s2 * s;
    double a0, b0, a1, b1;
    if (!derivative) {
        a0 = 2 * s3 - 3 * s2 + 1;
        b0 = (s3 - 2 * s2 + s) * c.h;
        a1 = -2 * s3 + 3 * s2;
        b1 = (s3 - s2) * c.h;
    } else {
        a0 = (6 * s2 - 6 * s) / c.h;
        b0 = 3 * s2 - 4 * s + 1;
        a1 = (-6 * s2 + 6 * s) / c.h;
        b1 = 3 * s2 - 2 * s;
    }
    const std::size_t i0 = c.i * dim_;
    const std::size_t i1 = (c.i + 1) * dim_;
    for (std::size_t k = 0; k < dim_; ++k) {
        out[k] = a0 * y[i0 + k] + b0 * dy[i0 + k] + a1 * y[i1 + k] + b1 * dy[i1 + k];
    }
    return out;
}

std::vector<double> WorldLine::position(double t) const { return hermite(x_, dx_, t, false); }
std::vector<double> WorldLine::momentum(double t) const { return hermite(p_, dp_, t, false); }
std::vector<double> WorldLine::velocity(double t) const { return hermite(x_, dx_, t, true); }
std::vector<double> WorldLine::momentum_rate(double t) const { return hermite(p_, dp_, t, true); }

std::vector<std::string> npath_csv_columns(std::size_t dim) {
    std::vector<std::string> cols{"particle", "t"};
    for (const char* prefix : {"x_", "p_", "dxdt_", "dpdt_"}) {
        for (std::size_t k = 0; k < dim; ++k) cols.push_back(prefix + std::to_string(k + 1));
    }
    return cols;
}

void write_npath_csv(std::ostream& out, const NPath& path) {
    const auto cols = npath_csv_columns(path.dim());
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (std::size_t j = 0; j < path.lines.size(); ++j) {
        const WorldLine& line = path.lines[j];
        for (std::size_t i = 0; i < line.size(); ++i) {
            out << (j + 1) << ',' << format_double(line.times()[i]);
            for (auto part : {line.sample_position(i), line.sample_momentum(i),
                              line.sample_velocity(i), line.sample_force(i)}) {
                for (double v : part) out << ',' << format_double(v);
            }
            out << '\n';
        }
    }
}

double chord_deviation(const NPath& path) {
    double worst = 0.0;
    for (const auto& line : path.lines) {
        if (line.size() < 3) continue;
        const std::size_t last = line.size() - 1;
        const double t0 = line.times().front();
        const double t1 = line.times().back();
        const auto x0 = line.sample_position(0);
        const auto x1 = line.sample_position(last);
        for (std::size_t i = 1; i < last; ++i) {
            const double u = (line.times()[i] - t0) / (t1 - t0);
            const auto xi = line.sample_position(i);
            double d2 = 0.0;
            for (std::size_t k = 0; k < line.dim(); ++k) {
                const double chord = x0[k] + u * (x1[k] - x0[k]);
                d2 += (xi[k] - chord) * (xi[k] - chord);
            }
            worst = std::max(worst, std::sqrt(d2));
        }
    }
    return worst;
}

}  // namespace multitime::classical
