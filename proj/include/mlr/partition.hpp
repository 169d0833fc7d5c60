#pragma once

#include "mlr/grid.hpp"
#include "mlr/lattice.hpp"

#include <memory>

namespace mlr {

inline constexpr int kMaxWeightOrder = 4;  // N_max

// The mollifier psi(xi) = exp(-1/(1 - |2 xi|^2)) on |xi| < 1/2.
double mollifier(double radius);

// chi_0^m = c |psi_check|^2 with mass one. Radial table of psi_check on [0, s_max]
// with six-point Lagrange interpolation, polynomial far-field model beyond.
class BumpProfile {
public:
    int dim() const { return m_; }
    double peak() const { return radial(0.0); }
    double radial(double s) const;
    double operator()(const Vec& y) const { return radial(y.norm()); }
    // psi_check at radius s (unnormalized transform of the mollifier).
    double psi_check(double s) const;

    double normalization() const { return c_; }
    double table_spacing() const { return ds_; }
    double table_extent() const { return s_max_; }
    int far_field_order() const { return far_order_; }
    // sup_{t >= s} chi_0(t): suffix maximum of the table, model beyond.
    double envelope(double s) const;
    // Bound on sum over ||j - j0||_inf > J of chi_0(|y - j|)^power * <r_scale (t + 1/2)>^weight
    // for y in the cell of j0 (integer-lattice coordinates).
    double tail_bound(int J, int power = 1, double weight_exponent = 0, double weight_scale = 1) const;
    // Smallest J whose tail bound is below `tol`.
    int truncation_for(double tol, int power = 1, double weight_exponent = 0, double weight_scale = 1) const;

private:
    friend std::shared_ptr<const BumpProfile> make_bump(int m);
    double model_constant_ = 0;
    int m_ = 1;
    double ds_ = 0, s_max_ = 0, c_ = 0;
    int far_order_ = 12;
    std::vector<double> table_;     // psi_check at k * ds
    std::vector<double> envelope_;  // suffix max of chi_0 at nodes
};

// Cached per dimension; construction is deterministic.
std::shared_ptr<const BumpProfile> make_bump(int m);

// Direct evaluation of psi_check by an m-dimensional tensor trapezoid rule over the
// support (independent of the radial table); for m <= 2.
double psi_check_tensor(int m, const Vec& x, int nodes_per_axis);

double eval_window(const BumpProfile& bump, const Cell& q, const InducedLattice& lattice, const Vec& x);
double eval_window(const BumpProfile& bump, const Cell& q, const Frame& frame, const Vec& x);
double eval_window(const BumpProfile& bump, const Strip& s, const StripGeometry& geometry, const Vec& x);

struct PartitionSum {
    double value = 0;
    double tail_bound = 0;
    int truncation = 0;
};

// sum over ||j - j0||_inf <= J of chi_0(y - j) where y are the integer-lattice coordinates
// of the evaluation point and j0 its cell. J = 0 selects J from the tail model so the
// tail is below tol / 10; a tail above tol throws ContractViolation.
PartitionSum partition_sum_coords(const BumpProfile& bump, const Vec& y, int J = 0, double tol = 1e-6);
PartitionSum partition_sum(const BumpProfile& bump, const InducedLattice& lattice, double r, const Vec& x, int J = 0,
                           double tol = 1e-6);

struct GridFunction {
    CellOwner owner;
    GridSpec grid;
    std::vector<cplx> values;

    double weight() const { return grid.cell_volume(); }
    double l2_norm() const;
};

// F g(xi) = sum g(x) e^{-i x.xi} h^m on `target` (default: the dual grid).
// If band > 0 the grid must resolve it: band < pi / h on every axis.
GridFunction fourier_forward(const GridFunction& g, const GridSpec* target = nullptr, double band = 0);
// F^{-1} g(x) = (2 pi)^{-m} sum g(xi) e^{+i x.xi} h^m.
GridFunction fourier_inverse(const GridFunction& g, const GridSpec* target = nullptr, double band = 0);

// sum_q || <(x - c(q))/r>^N chi_q g ||^2 / ||g||^2 with windows of the induced lattice.
// J = 0 selects the truncation from the tail model.
double verify_SN(const BumpProfile& bump, const InducedLattice& lattice, const GridFunction& g, double r, int N,
                 int J = 0);

} // namespace mlr
