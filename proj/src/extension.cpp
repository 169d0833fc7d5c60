#include "mlr/extension.hpp"

#include "mlr/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace mlr {

double FrequencyDensity::l1_norm() const {
    CompensatedSum acc;
    for (const auto& v : f.values) acc.add(std::abs(v));
    return acc.value() * f.weight();
}

FrequencyDensity make_density_on(const Hypersurface& surface, const GridSpec& grid, const DensityFn& fn) {
    if (grid.dim() != surface.dim()) throw InvalidArgument("density grid dimension mismatch");
    FrequencyDensity d;
    d.surface_index = surface.index();
    d.f.owner = CellOwner::induced(surface.index());
    d.f.grid = grid;
    d.f.values.assign(grid.size(), cplx(0, 0));
    for (std::size_t p = 0; p < grid.size(); ++p) {
        Vec xi = grid.point(p);
        if (surface.domain().contains(xi)) d.f.values[p] = fn(xi);
    }
    return d;
}

FrequencyDensity make_density(const Hypersurface& surface, const Vec& h_max, const DensityFn& fn) {
    const int n = surface.dim();
    if (h_max.size() != n) throw InvalidArgument("density spacing dimension mismatch");
    Vec hw = surface.domain().bounding_half_widths();
    std::vector<int> counts(n);
    for (int a = 0; a < n; ++a) {
        if (!(h_max[a] > 0)) throw InvalidArgument("density spacing must be positive");
        counts[a] = std::max(1, static_cast<int>(std::ceil(2 * hw[a] / h_max[a] - 1e-9)));
    }
    return make_density_on(surface, GridSpec::cell_centered(-hw, hw, counts), fn);
}

SpatialGrid SpatialGrid::over(const Mat& basis, const LatticeBox& region, double h_max) {
    const int d = static_cast<int>(basis.rows());
    if (basis.cols() != d || region.lo.size() != d) throw InvalidArgument("spatial grid dimension mismatch");
    if (!(h_max > 0)) throw InvalidArgument("spatial spacing must be positive");
    std::vector<int> counts(d);
    for (int a = 0; a < d; ++a)
        counts[a] = std::max(1, static_cast<int>(std::ceil((region.hi[a] - region.lo[a]) / h_max - 1e-9)));
    return {basis, GridSpec::cell_centered(region.lo, region.hi, counts)};
}

double SpatialGrid::max_standard_coordinate() const {
    // |B u|_inf is convex in u, so the max over the node box is attained at a corner.
    const int d = grid.dim();
    double best = 0;
    for (int mask = 0; mask < (1 << d); ++mask) {
        Vec u(d);
        for (int a = 0; a < d; ++a) u[a] = (mask >> a & 1) ? grid.coord(a, grid.counts[a] - 1) : grid.coord(a, 0);
        best = std::max(best, (basis * u).cwiseAbs().maxCoeff());
    }
    return best;
}

bool SpatialGrid::same_as(const SpatialGrid& o) const {
    return basis == o.basis && grid.counts == o.grid.counts && grid.origin == o.grid.origin &&
           grid.spacing == o.grid.spacing;
}

Field Field::operator*(const Field& o) const {
    if (!grid.same_as(o.grid)) throw InvalidArgument("fields live on different grids");
    Field out{grid, values};
    for (std::size_t p = 0; p < values.size(); ++p) out.values[p] *= o.values[p];
    return out;
}

void check_grid_rules(const Hypersurface& surface, const FrequencyDensity& f, const SpatialGrid& grid) {
    const double bmax = surface.frequency_bound();
    const double hu_max = kPi / (2 * bmax);
    for (int a = 0; a < grid.grid.dim(); ++a)
        if (grid.grid.spacing[a] > hu_max * (1 + 1e-12))
            throw GridRuleViolation("spatial spacing violates the Nyquist rule h_x <= pi / (2 B)");
    const double rmax = grid.max_standard_coordinate();
    if (rmax > 0) {
        const double hxi_max = 1.0 / (4 * rmax);
        for (int a = 0; a < f.f.grid.dim(); ++a)
            if (f.f.grid.spacing[a] > hxi_max * (1 + 1e-12))
                throw GridRuleViolation("frequency mesh violates the oscillation rule h_xi <= 1 / (4 R_max)");
    }
}

namespace {

struct Node {
    Vec theta;  // B^T Sigma(xi)
    cplx weight;
};

void add_node(std::vector<cplx>& out, const GridSpec& g, const Node& node, std::vector<std::vector<cplx>>& phase,
              std::vector<cplx>& prefix) {
    const int d = g.dim();
    for (int a = 0; a < d; ++a) {
        phase[a].resize(static_cast<std::size_t>(g.counts[a]));
        for (int k = 0; k < g.counts[a]; ++k) phase[a][k] = std::polar(1.0, g.coord(a, k) * node.theta[a]);
    }
    // Outer product over all but the last axis, then rank-one row updates.
    prefix.assign(1, node.weight);
    for (int a = 0; a + 1 < d; ++a) {
        std::vector<cplx> next(prefix.size() * phase[a].size());
        std::size_t idx = 0;
        for (const auto& p : prefix)
            for (const auto& q : phase[a]) next[idx++] = p * q;
        prefix.swap(next);
    }
    const auto& last = phase[d - 1];
    const std::size_t row = last.size();
    for (std::size_t p = 0; p < prefix.size(); ++p) {
        cplx c = prefix[p];
        cplx* dst = out.data() + p * row;
        for (std::size_t k = 0; k < row; ++k) dst[k] += c * last[k];
    }
}

Field extend_direct(const Hypersurface& surface, const FrequencyDensity& f, const SpatialGrid& grid) {
    const Mat bt = grid.basis.transpose();
    const double hxi = f.f.weight();
    std::vector<Node> nodes;
    for (std::size_t p = 0; p < f.f.values.size(); ++p) {
        if (f.f.values[p] == cplx(0, 0)) continue;
        nodes.push_back({bt * surface.point(f.f.grid.point(p)), f.f.values[p] * hxi});
    }
    const std::size_t total = grid.grid.size();
    Field out{grid, std::vector<cplx>(total, cplx(0, 0))};
    if (nodes.empty()) return out;
    // Fixed chunking keeps the summation order independent of the thread count.
    const std::size_t chunks = std::min<std::size_t>(8, nodes.size());
    std::vector<std::vector<cplx>> partial(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        partial[c].assign(total, cplx(0, 0));
        std::vector<std::vector<cplx>> phase(static_cast<std::size_t>(grid.grid.dim()));
        std::vector<cplx> prefix;
        for (std::size_t k = c; k < nodes.size(); k += chunks) add_node(partial[c], grid.grid, nodes[k], phase, prefix);
    });
    for (std::size_t c = 0; c < chunks; ++c)
        for (std::size_t p = 0; p < total; ++p) out.values[p] += partial[c][p];
    return out;
}

struct SeparableMap {
    std::vector<int> axis;       // density axis d -> spatial axis
    std::vector<double> coeff;   // scale of xi_d in that axis' phase
    int normal_axis = -1;
    double normal_coeff = 0;
};

std::optional<SeparableMap> separable_map(const Hypersurface& surface, const SpatialGrid& grid) {
    const Mat bt = grid.basis.transpose();
    const Mat c = bt * surface.tangent_basis();
    const Vec w = bt * surface.normal();
    const double eps = 1e-12;
    SeparableMap map;
    std::vector<bool> used(static_cast<std::size_t>(c.rows()), false);
    auto single = [&](const Vec& v, int& axis, double& coeff) {
        axis = -1;
        for (Eigen::Index r = 0; r < v.size(); ++r) {
            if (std::abs(v[r]) <= eps) continue;
            if (axis >= 0) return false;
            axis = static_cast<int>(r);
            coeff = v[r];
        }
        if (axis < 0 || used[static_cast<std::size_t>(axis)]) return false;
        used[static_cast<std::size_t>(axis)] = true;
        return true;
    };
    for (Eigen::Index d = 0; d < c.cols(); ++d) {
        int axis;
        double coeff = 0;
        if (!single(c.col(d), axis, coeff)) return std::nullopt;
        map.axis.push_back(axis);
        map.coeff.push_back(coeff);
    }
    if (!single(w, map.normal_axis, map.normal_coeff)) return std::nullopt;
    return map;
}

Field extend_separable(const Hypersurface& surface, const FrequencyDensity& f, const SpatialGrid& grid,
                       const SeparableMap& map) {
    const GridSpec& fg = f.f.grid;
    const GridSpec& sg = grid.grid;
    const int n = fg.dim();
    const int D = sg.dim();
    const int a = map.normal_axis;
    const bool flat = surface.graph().is_flat();

    std::vector<Eigen::MatrixXcd> mats(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) {
        const int s = map.axis[d];
        mats[d].resize(sg.counts[s], fg.counts[d]);
        for (int k = 0; k < sg.counts[s]; ++k)
            for (int l = 0; l < fg.counts[d]; ++l)
                mats[d](k, l) = std::polar(1.0, sg.coord(s, k) * map.coeff[d] * fg.coord(d, l));
    }
    std::vector<double> phi(fg.size(), 0.0);
    if (!flat)
        for (std::size_t p = 0; p < fg.size(); ++p) phi[p] = surface.graph().value(fg.point(p));
    const Vec tb = grid.basis.transpose() * surface.base();
    std::vector<std::vector<cplx>> base_phase(static_cast<std::size_t>(D));
    for (int m = 0; m < D; ++m)
        for (int k = 0; k < sg.counts[m]; ++k) base_phase[m].push_back(std::polar(1.0, sg.coord(m, k) * tb[m]));

    // Spatial strides; the transformed tensor has axes ordered by density axis d.
    std::vector<std::size_t> stride(static_cast<std::size_t>(D), 1);
    for (int m = D - 2; m >= 0; --m) stride[m] = stride[m + 1] * static_cast<std::size_t>(sg.counts[m + 1]);
    std::vector<int> out_dims(static_cast<std::size_t>(n));
    for (int d = 0; d < n; ++d) out_dims[d] = sg.counts[map.axis[d]];

    Field out{grid, std::vector<cplx>(sg.size(), cplx(0, 0))};
    const double hxi = fg.cell_volume();
    auto slice_tensor = [&](double t) {
        std::vector<cplx> data(fg.size());
        for (std::size_t p = 0; p < fg.size(); ++p)
            data[p] = f.f.values[p] * hxi * (flat ? cplx(1, 0) : std::polar(1.0, t * map.normal_coeff * phi[p]));
        std::vector<int> dims = fg.counts;
        for (int d = 0; d < n; ++d) {
            data = apply_along_axis(data, dims, d, mats[d]);
            dims[d] = out_dims[d];
        }
        return data;
    };
    auto scatter = [&](const std::vector<cplx>& data, int ka) {
        std::vector<int> idx(static_cast<std::size_t>(n), 0);
        for (std::size_t q = 0; q < data.size(); ++q) {
            std::size_t flat_idx = static_cast<std::size_t>(ka) * stride[a];
            cplx ph = base_phase[a][ka];
            for (int d = 0; d < n; ++d) {
                flat_idx += static_cast<std::size_t>(idx[d]) * stride[map.axis[d]];
                ph *= base_phase[map.axis[d]][idx[d]];
            }
            out.values[flat_idx] = data[q] * ph;
            for (int d = n - 1; d >= 0; --d) {
                if (++idx[d] < out_dims[d]) break;
                idx[d] = 0;
            }
        }
    };
    if (flat) {
        auto data = slice_tensor(0.0);
        for (int ka = 0; ka < sg.counts[a]; ++ka) scatter(data, ka);
    } else {
        parallel_for(static_cast<std::size_t>(sg.counts[a]), [&](std::size_t ka) {
            scatter(slice_tensor(sg.coord(a, static_cast<int>(ka))), static_cast<int>(ka));
        });
    }
    return out;
}

} // namespace

Field extend(const Hypersurface& surface, const FrequencyDensity& f, const SpatialGrid& grid,
             const ExtendOptions& options) {
    if (grid.grid.dim() != surface.ambient_dim() || f.f.grid.dim() != surface.dim())
        throw InvalidArgument("extend: dimension mismatch");
    if (f.f.values.size() != f.f.grid.size()) throw InvalidArgument("extend: density sample count mismatch");
    if (options.check_rules) check_grid_rules(surface, f, grid);
    if (!options.force_direct)
        if (auto map = separable_map(surface, grid)) return extend_separable(surface, f, grid, *map);
    return extend_direct(surface, f, grid);
}

double lp_quasinorm(const Field& field, double p, const std::optional<LatticeBox>& region) {
    if (!(p > 0)) throw InvalidArgument("p must be positive");
    const GridSpec& g = field.grid.grid;
    const int d = g.dim();
    std::vector<int> lo(static_cast<std::size_t>(d), 0), hi(g.counts);
    if (region) {
        if (region->lo.size() != d || region->hi.size() != d) throw InvalidArgument("region dimension mismatch");
        for (int a = 0; a < d; ++a) {
            double glo = g.origin[a] - 0.5 * g.spacing[a];
            double ghi = glo + g.counts[a] * g.spacing[a];
            double tol = 1e-9 * std::max(1.0, ghi - glo);
            if (region->lo[a] < glo - tol || region->hi[a] > ghi + tol)
                throw InvalidArgument("region exceeds the field grid");
            // Nodes with lo <= u < hi.
            lo[a] = static_cast<int>(std::ceil((region->lo[a] - g.origin[a]) / g.spacing[a] - 1e-9));
            hi[a] = static_cast<int>(std::ceil((region->hi[a] - g.origin[a]) / g.spacing[a] - 1e-9));
            lo[a] = std::clamp(lo[a], 0, g.counts[a]);
            hi[a] = std::clamp(hi[a], 0, g.counts[a]);
        }
    }
    const bool inf = std::isinf(p);
    double best = 0;
    CompensatedSum acc;
    std::vector<int> idx = lo;
    for (int a = 0; a < d; ++a)
        if (lo[a] >= hi[a]) return 0.0;
    for (;;) {
        double v = std::abs(field.values[g.flatten(idx)]);
        if (inf)
            best = std::max(best, v);
        else
            acc.add(p == 2 ? v * v : std::pow(v, p));
        int a = d - 1;
        while (a >= 0 && ++idx[a] == hi[a]) {
            idx[a] = lo[a];
            --a;
        }
        if (a < 0) break;
    }
    if (inf) return best;
    return std::pow(acc.value() * field.grid.volume_element(), 1.0 / p);
}

namespace {

GridFunction scaled(const GridFunction& g, const std::vector<cplx>& factor) {
    GridFunction out = g;
    for (std::size_t p = 0; p < out.values.size(); ++p) out.values[p] *= factor[p];
    return out;
}

} // namespace

double commutator_check(const Hypersurface& surface, const FrequencyDensity& f, const Vec& x0_prime, int N,
                        const CommutatorOptions& options) {
    const int n = surface.dim();
    if (N < 1 || N > 2) throw InvalidArgument("commutator order must be 1 or 2");
    if (x0_prime.size() != n) throw InvalidArgument("x0' dimension mismatch");
    if (surface.base().norm() != 0.0) throw InvalidArgument("commutator check expects a zero base point");
    const GridSpec& gx = f.f.grid;
    const GridSpec gy = gx.dual();
    // The periodic x' window (half-width pi / h_xi) must hold the evaluation region
    // plus the transport x1 grad phi with a factor two to spare.
    double grad_sup = 0;
    for (const auto& xi : domain_samples(surface.domain(), 9)) grad_sup = std::max(grad_sup, surface.graph().gradient(xi).norm());
    double x1_max = 0;
    for (double x1 : options.x1_values) x1_max = std::max(x1_max, std::abs(x1));
    for (int a = 0; a < n; ++a)
        if (2 * (options.x_extent + x1_max * grad_sup) >= kPi / gx.spacing[a])
            throw GridRuleViolation("density grid does not resolve the commutator band");

    const std::size_t nf = gx.size();
    std::vector<double> phi(nf);
    std::vector<Vec> grad(nf);
    for (std::size_t p = 0; p < nf; ++p) {
        Vec xi = gx.point(p);
        phi[p] = surface.graph().value(xi);
        grad[p] = surface.graph().gradient(xi);
    }
    std::vector<Vec> xs(gy.size());
    for (std::size_t p = 0; p < gy.size(); ++p) xs[p] = gy.point(p);
    const double two_pi_m = std::pow(2 * kPi, n);

    // Multi-indices of length N over the n components.
    std::vector<std::vector<int>> combos{{}};
    for (int s = 0; s < N; ++s) {
        std::vector<std::vector<int>> next;
        for (const auto& c : combos)
            for (int a = 0; a < n; ++a) {
                auto e = c;
                e.push_back(a);
                next.push_back(e);
            }
        combos.swap(next);
    }

    GridFunction base = fourier_inverse(f.f, &gy);  // F^{-1} f on the x' grid
    double worst = 0, scale = 0;
    for (double x1 : options.x1_values) {
        std::vector<cplx> mod(nf);
        for (std::size_t p = 0; p < nf; ++p) mod[p] = std::polar(1.0, x1 * phi[p]);
        GridFunction u = fourier_inverse(scaled(f.f, mod), &gy);
        for (auto& v : u.values) v *= two_pi_m;
        for (const auto& combo : combos) {
            GridFunction lhs = u;
            for (int c : combo) {
                GridFunction spec = fourier_forward(lhs, &gx);
                for (std::size_t p = 0; p < nf; ++p) spec.values[p] *= grad[p][c];
                GridFunction back = fourier_inverse(spec, &gy);
                for (std::size_t p = 0; p < gy.size(); ++p)
                    lhs.values[p] = (xs[p][c] - x0_prime[c]) * lhs.values[p] + x1 * back.values[p];
            }
            GridFunction h = base;
            for (std::size_t p = 0; p < gy.size(); ++p)
                for (int c : combo) h.values[p] *= (xs[p][c] - x0_prime[c]);
            GridFunction spec = fourier_forward(h, &gx);
            GridFunction rhs = fourier_inverse(scaled(spec, mod), &gy);
            for (std::size_t p = 0; p < gy.size(); ++p) {
                if (xs[p].cwiseAbs().maxCoeff() > options.x_extent) continue;
                cplx r = rhs.values[p] * two_pi_m;
                worst = std::max(worst, std::abs(lhs.values[p] - r));
                scale = std::max(scale, std::abs(r));
            }
        }
    }
    if (scale == 0) return worst == 0 ? 0.0 : 1e300;
    return worst / scale;
}

Margin margin_of(const FrequencyDensity& f, double delta, bool refined) {
    if (!(delta > 0)) throw InvalidArgument("delta must be positive");
    if (refined && f.primed_axes.empty()) throw InvalidArgument("refined margin needs the xi' / xi'' split");
    double reach = -1;
    for (std::size_t p = 0; p < f.f.values.size(); ++p) {
        if (std::abs(f.f.values[p]) <= 1e-12) continue;
        Vec xi = f.f.grid.point(p);
        double r = 0;
        if (refined) {
            for (int a : f.primed_axes) r += xi[a] * xi[a];
            r = std::sqrt(r);
        } else {
            r = xi.norm();
        }
        reach = std::max(reach, r);
    }
    if (reach < 0) return {2 * delta, true};
    return {std::max(0.0, 2 * delta - reach), false};
}

double mesh_measure(const Hypersurface& surface, const FrequencyDensity& f) {
    std::size_t inside = 0;
    for (std::size_t p = 0; p < f.f.grid.size(); ++p)
        if (surface.domain().contains(f.f.grid.point(p))) ++inside;
    return static_cast<double>(inside) * f.f.weight();
}

double linf_bound_ratio(const FrequencyDensity& f, const Hypersurface& surface, const SpatialGrid& grid,
                        const SlabCondition* slab) {
    const double norm = f.l2_norm();
    if (!(norm > 0)) throw InvalidArgument("zero-norm density");
    ExtendOptions opts;
    opts.check_rules = false;  // only the sup matters; no Riemann sum is formed
    Field field = extend(surface, f, grid, opts);
    double sup = lp_quasinorm(field, std::numeric_limits<double>::infinity());
    if (slab) {
        const int n = surface.dim();
        return sup / (std::pow(slab->mu, (n + 1 - slab->k()) / 2.0) * norm);
    }
    return sup / (std::sqrt(mesh_measure(surface, f)) * norm);
}

namespace {

constexpr char kMagic[8] = {'M', 'L', 'R', 'F', 'I', 'E', 'L', 'D'};

template <class T>
void put(std::ofstream& os, T v) {
    static_assert(std::endian::native == std::endian::little, "field dump assumes a little-endian host");
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is, const std::string& path) {
    T v;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw std::runtime_error("truncated field file: " + path);
    return v;
}

} // namespace

void write_field(const std::string& path, const Field& field) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    const auto& g = field.grid.grid;
    const int d = g.dim();
    os.write(kMagic, 8);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
    for (int a = 0; a < d; ++a) put<std::uint32_t>(os, static_cast<std::uint32_t>(g.counts[a]));
    for (int a = 0; a < d; ++a) put<double>(os, g.origin[a]);
    for (int a = 0; a < d; ++a) put<double>(os, g.spacing[a]);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) put<double>(os, field.grid.basis(r, c));
    for (const auto& v : field.values) {
        put<double>(os, v.real());
        put<double>(os, v.imag());
    }
    if (!os) throw std::runtime_error("write failed: " + path);
}

Field read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("not a field file: " + path);
    if (get<std::uint32_t>(is, path) != 1) throw std::runtime_error("unsupported field version: " + path);
    const int d = static_cast<int>(get<std::uint32_t>(is, path));
    if (d < 1 || d > 8) throw std::runtime_error("bad field dimension: " + path);
    Field f;
    f.grid.grid.counts.resize(static_cast<std::size_t>(d));
    f.grid.grid.origin.resize(d);
    f.grid.grid.spacing.resize(d);
    f.grid.basis.resize(d, d);
    for (int a = 0; a < d; ++a) f.grid.grid.counts[a] = static_cast<int>(get<std::uint32_t>(is, path));
    for (int a = 0; a < d; ++a) f.grid.grid.origin[a] = get<double>(is, path);
    for (int a = 0; a < d; ++a) f.grid.grid.spacing[a] = get<double>(is, path);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) f.grid.basis(r, c) = get<double>(is, path);
    f.values.resize(f.grid.grid.size());
    for (auto& v : f.values) {
        double re = get<double>(is, path);
        double im = get<double>(is, path);
        v = cplx(re, im);
    }
    return f;
}

} // namespace mlr
