#pragma once

#include "mlr/frames.hpp"

namespace mlr {

struct CellOwner {
    enum class Kind { Ambient, Induced, HcapH1 };
    Kind kind = Kind::Ambient;
    int index = -1;  // direction i for Induced

    static CellOwner ambient() { return {Kind::Ambient, -1}; }
    static CellOwner induced(int i) { return {Kind::Induced, i}; }
    static CellOwner strip_base() { return {Kind::HcapH1, 0}; }
    bool operator==(const CellOwner& o) const { return kind == o.kind && index == o.index; }
    bool operator!=(const CellOwner& o) const { return !(*this == o); }
};

// q(j) = prod_m [r(j_m - 1/2), r(j_m + 1/2)] in the owner's lattice coordinates.
struct Cell {
    IVec j;
    double r = 1;
    CellOwner owner;

    int dim() const { return static_cast<int>(j.size()); }
    Vec center() const;  // r j
    bool contains(const Vec& lattice_coords) const;
};

struct LatticeBox {
    Vec lo, hi;  // lattice coordinates
    static LatticeBox of_cell(const Cell& q);
    static LatticeBox centered(int dim, double side);
    double volume() const;
};

// L scaled by r: j -> r sum_i j_i N_i.
struct ObliqueLattice {
    Frame frame;
    double r = 1;

    Vec point(const IVec& j) const;
    Vec lattice_coords(const Vec& x) const { return frame.inverse_basis() * x; }
};

// L(H_i) = pi_{N_i}(L), written in the orthonormal coordinates of H_i.
struct InducedLattice {
    int i = 0;
    Mat tangent;    // (n+1) x n, orthonormal basis of H_i
    Mat generator;  // n x n, columns pi_{N_i}(N_m), m != i, in H_i coordinates
    Mat to_integer; // T_i = generator^{-1}

    int dim() const { return static_cast<int>(generator.rows()); }
    // H_i coordinates of an ambient point (orthogonal projection).
    Vec hyperplane_coords(const Vec& x) const { return tangent.transpose() * x; }
    Vec lattice_coords_of_hyperplane_point(const Vec& y) const { return to_integer * y; }
};

InducedLattice induced_lattice(const Frame& frame, int i);

// Orthogonal projection onto H_i along N_i.
Vec project_along(const Frame& frame, int i, const Vec& point);

// Geometry for the refined setting: pi = pi_{N_1} o pi_{N_{k+1}} o .. o pi_{N_{n+1}}
// and the induced lattice pi(L) on H cap H_1 spanned by pi(N_2), .., pi(N_k).
struct StripGeometry {
    int k = 2;
    Frame frame;
    Mat removed;        // columns N_1, N_{k+1}, .., N_{n+1}
    Mat generator;      // (n+1) x (k-1), columns pi(N_m), m = 2..k
    Mat coefficient_map;  // (k-1) x (n+1): y in H -> coefficients in the generator basis

    // Composition of the projections in the listed order.
    Vec project(const Vec& x) const;
    // Integer-lattice coordinates of pi(x).
    Vec strip_coords(const Vec& x) const { return coefficient_map * project(x); }
};

// Validates that N_1, N_{k+1}, .., N_{n+1} are orthonormal and span the complement of
// the slab subspace intersected with H_1.
StripGeometry strip_geometry(const Frame& frame, const SlabCondition& slab);

Vec project_to_H(const Frame& frame, const SlabCondition& slab, const Vec& point);

// Cell containing a standard-coordinate point (ambient lattice).
Cell cell_of(const ObliqueLattice& lattice, const Vec& point);
// Cell of the induced lattice on H_i containing the projection of an ambient point.
Cell cell_of(const InducedLattice& lattice, double r, const Vec& point);
// Nearest-integer rounding with ties upward.
IVec round_half_up(const Vec& coords);

double cell_distance(const Cell& q, const Cell& q2);

// Cells of scale r meeting Q. If Q is a cell whose scale is an integer multiple of r,
// the result is its nested children (s^dim cells). Otherwise every cell with
// positive-measure intersection. Lexicographic order in j.
std::vector<Cell> enumerate_cells(int dim, CellOwner owner, const LatticeBox& region, double r);
std::vector<Cell> enumerate_cells(const Cell& coarse, double r);

struct Strip {
    IVec base;  // index in pi(L) at scale r
    double r = 1;
    Vec center_coords() const;
    bool operator==(const Strip& o) const { return base == o.base && r == o.r; }
};

Strip strip_of(const StripGeometry& geometry, const Cell& q);
Strip strip_containing(const StripGeometry& geometry, double r, const Vec& point);

} // namespace mlr
