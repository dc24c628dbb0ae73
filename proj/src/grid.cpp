#include "multibang/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "multibang/errors.hpp"

namespace multibang {

Grid::Grid(int n) : n_(n), h_(1.0 / (n + 1)) {
    if (n < 3) {
        throw DomainError("grid needs at least 3 interior nodes per axis, got " + std::to_string(n));
    }
}

ScalarField::ScalarField(Grid grid, double fill) : grid_(grid), data_(grid.size(), fill) {}

ScalarField::ScalarField(Grid grid, std::vector<double> values)
    : grid_(grid), data_(std::move(values)) {
    if (data_.size() != grid_.size()) {
        throw DimensionError("field has " + std::to_string(data_.size()) + " values, grid expects " +
                             std::to_string(grid_.size()));
    }
}

ScalarField& ScalarField::operator+=(const ScalarField& other) {
    require_same_grid(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& other) {
    require_same_grid(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& x) {
    require_same_grid(*this, x);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += s * x.data_[k];
    return *this;
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid() == b.grid())) {
        throw DimensionError("grid mismatch: n=" + std::to_string(a.grid().n()) +
                             " vs n=" + std::to_string(b.grid().n()));
    }
}

double inner(const ScalarField& u, const ScalarField& v) {
    require_same_grid(u, v);
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += u[k] * v[k];
    return u.grid().quad_weight() * s;
}

double norm_l2(const ScalarField& u) { return std::sqrt(inner(u, u)); }

double norm_raw(const ScalarField& u) {
    double s = 0.0;
    for (double v : u.values()) s += v * v;
    return std::sqrt(s);
}

double norm_max(const ScalarField& u) {
    double m = 0.0;
    for (double v : u.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace multibang
