#include "mlr/lattice.hpp"

#include <algorithm>
#include <cmath>

namespace mlr {

Vec Cell::center() const {
    Vec c(dim());
    for (int m = 0; m < dim(); ++m) c[m] = r * static_cast<double>(j[m]);
    return c;
}

bool Cell::contains(const Vec& u) const {
    if (u.size() != dim()) throw InvalidArgument("cell dimension mismatch");
    for (int m = 0; m < dim(); ++m) {
        double lo = r * (static_cast<double>(j[m]) - 0.5);
        // Half-open on the upper side to match the half-up tie rule.
        if (u[m] < lo - 1e-12 * std::max(1.0, std::abs(lo)) || u[m] >= lo + r) return false;
    }
    return true;
}

LatticeBox LatticeBox::of_cell(const Cell& q) {
    Vec c = q.center();
    return {c.array() - q.r / 2, c.array() + q.r / 2};
}

LatticeBox LatticeBox::centered(int dim, double side) {
    return {Vec::Constant(dim, -side / 2), Vec::Constant(dim, side / 2)};
}

double LatticeBox::volume() const { return (hi - lo).prod(); }

Vec ObliqueLattice::point(const IVec& j) const {
    if (static_cast<int>(j.size()) != frame.ambient_dim()) throw InvalidArgument("index dimension mismatch");
    Vec u(j.size());
    for (std::size_t m = 0; m < j.size(); ++m) u[static_cast<Eigen::Index>(m)] = static_cast<double>(j[m]);
    return r * (frame.basis() * u);
}

InducedLattice induced_lattice(const Frame& frame, int i) {
    if (i < 0 || i >= frame.ambient_dim()) throw InvalidArgument("direction index out of range");
    InducedLattice il;
    il.i = i;
    il.tangent = frame.hyperplane_basis(i);
    const int n = frame.n();
    il.generator.resize(n, n);
    int c = 0;
    for (int m = 0; m < frame.ambient_dim(); ++m)
        if (m != i) il.generator.col(c++) = il.tangent.transpose() * frame.normal(m);
    il.to_integer = il.generator.inverse();
    return il;
}

Vec project_along(const Frame& frame, int i, const Vec& point) {
    if (i < 0 || i >= frame.ambient_dim()) throw InvalidArgument("direction index out of range");
    if (point.size() != frame.ambient_dim()) throw InvalidArgument("point dimension mismatch");
    Vec nrm = frame.normal(i);
    return point - nrm.dot(point) * nrm;
}

StripGeometry strip_geometry(const Frame& frame, const SlabCondition& slab) {
    const int d = frame.ambient_dim();
    const int k = slab.k();
    if (slab.subspace.rows() != d) throw InvalidArgument("slab/frame dimension mismatch");
    if (k < 2 || k > d - 1) throw InvalidArgument("refined setting needs 2 <= k <= n");
    StripGeometry g;
    g.k = k;
    g.frame = frame;
    g.removed.resize(d, d - k + 1);
    g.removed.col(0) = frame.normal(0);
    for (int m = k; m < d; ++m) g.removed.col(m - k + 1) = frame.normal(m);
    Mat gram = g.removed.transpose() * g.removed;
    if ((gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("N_1, N_{k+1}, .., N_{n+1} must be orthonormal");
    // N_{k+1}..N_{n+1} must span the slab's normal complement.
    Mat tail = g.removed.rightCols(d - k);
    Mat residual = slab.normal_complement - tail * (tail.transpose() * slab.normal_complement);
    if (residual.cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("frame directions N_{k+1}.. do not span the slab normal complement");
    g.generator.resize(d, k - 1);
    for (int m = 1; m < k; ++m) g.generator.col(m - 1) = g.project(frame.normal(m));
    Mat gtg = g.generator.transpose() * g.generator;
    if (std::abs(gtg.determinant()) < 1e-14) throw InvalidArgument("projected lattice is degenerate");
    g.coefficient_map = gtg.inverse() * g.generator.transpose();
    return g;
}

Vec StripGeometry::project(const Vec& x) const {
    Vec y = x;
    for (Eigen::Index c = removed.cols() - 1; c >= 0; --c) y -= removed.col(c).dot(y) * removed.col(c);
    return y;
}

Vec project_to_H(const Frame& frame, const SlabCondition& slab, const Vec& point) {
    return strip_geometry(frame, slab).project(point);
}

IVec round_half_up(const Vec& coords) {
    IVec j(static_cast<std::size_t>(coords.size()));
    for (Eigen::Index m = 0; m < coords.size(); ++m) j[static_cast<std::size_t>(m)] = static_cast<long>(std::floor(coords[m] + 0.5));
    return j;
}

Cell cell_of(const ObliqueLattice& lattice, const Vec& point) {
    if (point.size() != lattice.frame.ambient_dim()) throw InvalidArgument("point dimension mismatch");
    return {round_half_up(lattice.lattice_coords(point) / lattice.r), lattice.r, CellOwner::ambient()};
}

Cell cell_of(const InducedLattice& lattice, double r, const Vec& point) {
    Vec u = lattice.to_integer * lattice.hyperplane_coords(point);
    return {round_half_up(u / r), r, CellOwner::induced(lattice.i)};
}

double cell_distance(const Cell& q, const Cell& q2) {
    if (q.owner != q2.owner) throw InvalidArgument("cells have different owners");
    if (q.r != q2.r || q.dim() != q2.dim()) throw InvalidArgument("cells have different scales or dimensions");
    long worst = 0;
    for (int m = 0; m < q.dim(); ++m) worst = std::max(worst, std::labs(q.j[m] - q2.j[m]));
    return q.r * static_cast<double>(std::max(0L, worst - 1));
}

namespace {

std::vector<Cell> enumerate_ranges(const IVec& lo, const IVec& hi, double r, CellOwner owner) {
    std::vector<Cell> out;
    const std::size_t d = lo.size();
    for (std::size_t m = 0; m < d; ++m)
        if (hi[m] < lo[m]) return out;
    IVec j = lo;
    for (;;) {
        out.push_back({j, r, owner});
        // Last coordinate fastest gives lexicographic order.
        std::size_t m = d;
        while (m > 0) {
            --m;
            if (++j[m] <= hi[m]) break;
            j[m] = lo[m];
            if (m == 0) return out;
        }
        if (d == 0) return out;
    }
}

} // namespace

std::vector<Cell> enumerate_cells(int dim, CellOwner owner, const LatticeBox& region, double r) {
    if (!(r > 0)) throw InvalidArgument("cell scale must be positive");
    if (region.lo.size() != dim || region.hi.size() != dim) throw InvalidArgument("region dimension mismatch");
    IVec lo(dim), hi(dim);
    for (int m = 0; m < dim; ++m) {
        // Positive-measure overlap of [r(j-1/2), r(j+1/2)] with [lo, hi].
        double a = region.lo[m] / r - 0.5, b = region.hi[m] / r + 0.5;
        long jl = static_cast<long>(std::floor(a)) + 1;
        long jh = static_cast<long>(std::ceil(b)) - 1;
        if (std::abs(a - std::round(a)) < 1e-12) jl = std::lround(a) + 1;
        if (std::abs(b - std::round(b)) < 1e-12) jh = std::lround(b) - 1;
        lo[m] = jl;
        hi[m] = jh;
    }
    return enumerate_ranges(lo, hi, r, owner);
}

std::vector<Cell> enumerate_cells(const Cell& coarse, double r) {
    if (!(r > 0)) throw InvalidArgument("cell scale must be positive");
    double ratio = coarse.r / r;
    long s = std::lround(ratio);
    if (s < 1 || std::abs(ratio - static_cast<double>(s)) > 1e-12 * ratio)
        return enumerate_cells(coarse.dim(), coarse.owner, LatticeBox::of_cell(coarse), r);
    // Nested children: s cells per axis. For even s the fine grid is shifted by half a
    // cell relative to the coarse center, so children are taken as [sJ - s/2, sJ + s/2 - 1].
    IVec lo(coarse.j.size()), hi(coarse.j.size());
    for (std::size_t m = 0; m < coarse.j.size(); ++m) {
        long c = s * coarse.j[m];
        if (s % 2 == 1) {
            lo[m] = c - (s - 1) / 2;
            hi[m] = c + (s - 1) / 2;
        } else {
            lo[m] = c - s / 2;
            hi[m] = c + s / 2 - 1;
        }
    }
    return enumerate_ranges(lo, hi, r, coarse.owner);
}

Vec Strip::center_coords() const {
    Vec c(static_cast<Eigen::Index>(base.size()));
    for (std::size_t m = 0; m < base.size(); ++m) c[static_cast<Eigen::Index>(m)] = r * static_cast<double>(base[m]);
    return c;
}

Strip strip_of(const StripGeometry& geometry, const Cell& q) {
    if (q.owner != CellOwner::induced(0)) throw InvalidArgument("strip_of needs a cell of the induced lattice on H_1");
    // Induced indices on H_1 are (j_2, .., j_{n+1}); pi keeps j_2..j_k.
    IVec base(q.j.begin(), q.j.begin() + (geometry.k - 1));
    return {base, q.r};
}

Strip strip_containing(const StripGeometry& geometry, double r, const Vec& point) {
    return {round_half_up(geometry.strip_coords(point) / r), r};
}

} // namespace mlr
