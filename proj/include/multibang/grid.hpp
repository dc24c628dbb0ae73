#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace multibang {

/// Uniform grid of interior nodes on the unit square with homogeneous Dirichlet boundary.
///
/// Node (i, j), 0 <= i, j < n, sits at ((i+1)h, (j+1)h) with h = 1/(n+1) and is stored
/// at flat index j*n + i. Every node carries the lumped quadrature weight h^2.
class Grid {
public:
    explicit Grid(int n);

    int n() const noexcept { return n_; }
    double h() const noexcept { return h_; }
    double quad_weight() const noexcept { return h_ * h_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(n_) * n_; }

    std::size_t index(int i, int j) const noexcept { return static_cast<std::size_t>(j) * n_ + i; }
    double x1(int i) const noexcept { return (i + 1) * h_; }
    double x2(int j) const noexcept { return (j + 1) * h_; }

    friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.n_ == b.n_; }

private:
    int n_;
    double h_;
};

/// Grid function (parameter u, dual p, state y or data y^delta).
class ScalarField {
public:
    explicit ScalarField(Grid grid, double fill = 0.0);
    ScalarField(Grid grid, std::vector<double> values);

    const Grid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator[](std::size_t k) noexcept { return data_[k]; }
    double operator[](std::size_t k) const noexcept { return data_[k]; }
    double& at(int i, int j) noexcept { return data_[grid_.index(i, j)]; }
    double at(int i, int j) const noexcept { return data_[grid_.index(i, j)]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    ScalarField& operator+=(const ScalarField& other);
    ScalarField& operator-=(const ScalarField& other);
    ScalarField& operator*=(double s) noexcept;
    /// this += s * x
    ScalarField& axpy(double s, const ScalarField& x);

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

    friend bool operator==(const ScalarField& a, const ScalarField& b) noexcept {
        return a.grid_ == b.grid_ && a.data_ == b.data_;
    }

private:
    Grid grid_;
    std::vector<double> data_;
};

/// Throws DimensionError unless both fields live on the same grid.
void require_same_grid(const ScalarField& a, const ScalarField& b);

/// Discrete L^2 pairing: quad_weight * sum u(x) v(x).
double inner(const ScalarField& u, const ScalarField& v);
double norm_l2(const ScalarField& u);
/// Unweighted Euclidean norm of the coefficient vector.
double norm_raw(const ScalarField& u);
double norm_max(const ScalarField& u);

}  // namespace multibang
