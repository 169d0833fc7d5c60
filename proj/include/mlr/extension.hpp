#pragma once

#include "mlr/frames.hpp"
#include "mlr/lattice.hpp"
#include "mlr/partition.hpp"

#include <functional>
#include <optional>
#include <string>

namespace mlr {

// Density f_i sampled at cell midpoints of a grid over the bounding box of U_i
// (H_i coordinates); samples outside U_i are zero.
struct FrequencyDensity {
    int surface_index = 0;
    GridFunction f;
    // Axes of the density grid that carry xi' (along H_1 cap H); empty if unsplit.
    std::vector<int> primed_axes;

    double l2_norm() const { return f.l2_norm(); }
    double l1_norm() const;
};

using DensityFn = std::function<cplx(const Vec&)>;

// Counts per axis are the smallest making the spacing <= h_max[a].
FrequencyDensity make_density(const Hypersurface& surface, const Vec& h_max, const DensityFn& fn);
FrequencyDensity make_density_on(const Hypersurface& surface, const GridSpec& grid, const DensityFn& fn);

// Cell-centered grid in lattice coordinates u over a box; x = basis * u.
struct SpatialGrid {
    Mat basis;
    GridSpec grid;

    static SpatialGrid over(const Mat& basis, const LatticeBox& region, double h_max);
    double volume_element() const { return std::abs(basis.determinant()) * grid.cell_volume(); }
    Vec standard_point(std::size_t flat) const { return basis * grid.point(flat); }
    // max over nodes of |x|_inf in standard coordinates.
    double max_standard_coordinate() const;
    bool same_as(const SpatialGrid& o) const;
};

struct Field {
    SpatialGrid grid;
    std::vector<cplx> values;

    Field operator*(const Field& o) const;
};

struct ExtendOptions {
    bool check_rules = true;
    bool force_direct = false;  // disable the separable path
};

// E f(x) = sum_xi f(xi) e^{i x . Sigma(xi)} h_xi^n at every node.
Field extend(const Hypersurface& surface, const FrequencyDensity& f, const SpatialGrid& grid,
             const ExtendOptions& options = {});

// Grid rules: h_u <= pi / (2 sup|Sigma|) and h_xi <= 1 / (4 R_max).
void check_grid_rules(const Hypersurface& surface, const FrequencyDensity& f, const SpatialGrid& grid);

// (sum over nodes in region of |F|^p * dV)^{1/p}; p = infinity gives the max.
// Nodes belong to the region if lo <= u < hi. Region defaults to the whole grid.
double lp_quasinorm(const Field& field, double p, const std::optional<LatticeBox>& region = std::nullopt);

struct CommutatorOptions {
    std::vector<double> x1_values{0.0};
    double x_extent = 8;  // compare on |x'|_inf <= x_extent
};

// Relative L-infinity discrepancy between
//   (x' - x0' + x1 grad phi(D'/i))^N E f   and   E F((x' - x0')^N F^{-1} f)
// (with E f = int e^{i(x'xi + x1 phi)} f and F g = int g e^{-ix xi} the multiplier
// enters with a plus sign)
// evaluated on the grid dual to the density grid, per slice x1, over all
// component multi-indices of length N.
double commutator_check(const Hypersurface& surface, const FrequencyDensity& f, const Vec& x0_prime, int N,
                        const CommutatorOptions& options = {});

struct Margin {
    double value = 0;
    bool empty_support = false;
};

// Plain: 2 delta - sup |xi| over the support (clamped at 0). Refined: the same with |xi'|.
Margin margin_of(const FrequencyDensity& f, double delta, bool refined);

// Mesh measure of U: count of density nodes inside U times the cell volume.
double mesh_measure(const Hypersurface& surface, const FrequencyDensity& f);

// Plain: ||E f||_inf / (|U|^{1/2} ||f||_2). With a slab: ||E f||_inf / (mu^{(n+1-k)/2} ||f||_2).
// The sup is taken over the supplied spatial grid.
double linf_bound_ratio(const FrequencyDensity& f, const Hypersurface& surface, const SpatialGrid& grid,
                        const SlabCondition* slab = nullptr);

// Binary little-endian dump; layout documented in docs/field_format.md.
void write_field(const std::string& path, const Field& field);
Field read_field(const std::string& path);

} // namespace mlr
