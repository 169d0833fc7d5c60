#pragma once

#include "mlr/core.hpp"

namespace mlr {

// Uniform tensor grid: node k along axis a sits at origin[a] + k * spacing[a].
// Samples are stored row-major (last axis fastest).
struct GridSpec {
    Vec origin;
    Vec spacing;
    std::vector<int> counts;

    int dim() const { return static_cast<int>(counts.size()); }
    std::size_t size() const;
    double cell_volume() const { return spacing.prod(); }
    double coord(int axis, int k) const { return origin[axis] + k * spacing[axis]; }
    Vec point(std::size_t flat) const;
    std::vector<int> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::vector<int>& idx) const;

    // Cell-centered grid with `counts[a]` nodes covering [lo[a], hi[a]].
    static GridSpec cell_centered(const Vec& lo, const Vec& hi, const std::vector<int>& counts);
    // Grid with `counts` nodes dual to this one: spacing 2 pi / (M h), origin -floor(M/2) * spacing.
    GridSpec dual() const;
};

// Applies mat (rows x dims[axis]) along `axis` of a row-major tensor.
std::vector<cplx> apply_along_axis(const std::vector<cplx>& data, const std::vector<int>& dims, int axis,
                                   const Eigen::MatrixXcd& mat);

// Gauss-Legendre rule on [a, b] composed of `panels` panels of `order` nodes.
struct Quadrature {
    std::vector<double> nodes, weights;
};
Quadrature gauss_legendre(double a, double b, int panels, int order);

// Neumaier-compensated accumulator; deterministic for a fixed summation order.
class CompensatedSum {
public:
    void add(double v) {
        double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0, comp_ = 0;
};

} // namespace mlr
