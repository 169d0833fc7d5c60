#include "mlr/loomis_whitney.hpp"

#include "mlr/grid.hpp"
#include "mlr/parallel.hpp"
#include "mlr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mlr {

LatticeDensity LatticeDensity::zeros(CellOwner owner, int dim, long m) {
    if (dim < 1 || m < 0) throw InvalidArgument("bad lattice density shape");
    LatticeDensity g;
    g.owner = owner;
    g.dim = dim;
    g.m = m;
    std::size_t n = 1;
    for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(2 * m + 1);
    g.values.assign(n, 0.0);
    return g;
}

std::size_t LatticeDensity::flat(const IVec& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < dim; ++a) f = f * static_cast<std::size_t>(2 * m + 1) + static_cast<std::size_t>(idx[a] + m);
    return f;
}

double LatticeDensity::l2_norm() const {
    CompensatedSum acc;
    for (double v : values) acc.add(v * v);
    return std::sqrt(acc.value());
}

LWProblem lw_plain(int n, long m) {
    if (n < 1) throw InvalidArgument("n must be >= 1");
    LWProblem p;
    p.ambient = n + 1;
    p.p = 2.0 / n;
    p.m = m;
    for (int i = 0; i <= n; ++i) {
        std::vector<int> keep;
        for (int a = 0; a <= n; ++a)
            if (a != i) keep.push_back(a);
        p.kept.push_back(keep);
    }
    return p;
}

LWProblem lw_refined(int n, int k, long m) {
    if (k < 2 || k > n + 1) throw InvalidArgument("refined LW needs 2 <= k <= n + 1");
    LWProblem p;
    p.ambient = n + 1;
    p.p = 2.0 / (k - 1);
    p.m = m;
    std::vector<int> keep1;
    for (int a = 1; a < k; ++a) keep1.push_back(a);
    p.kept.push_back(keep1);
    for (int i = 1; i < k; ++i) {
        std::vector<int> keep;
        for (int a = 0; a <= n; ++a)
            if (a != i) keep.push_back(a);
        p.kept.push_back(keep);
    }
    return p;
}

namespace {

void validate(const LWProblem& problem, const std::vector<LatticeDensity>& g) {
    if (g.size() != problem.kept.size()) throw InvalidArgument("wrong number of densities");
    for (std::size_t i = 0; i < g.size(); ++i)
        if (g[i].dim != problem.factor_dim(i) || g[i].m != problem.m)
            throw InvalidArgument("density shape does not match the window");
}

// Flat index of the projection of z for each factor, updated per lattice point.
struct Projector {
    const LWProblem& problem;
    std::vector<std::vector<std::size_t>> stride;  // stride of ambient coord a in factor i (0 if dropped)

    explicit Projector(const LWProblem& p) : problem(p) {
        const std::size_t w = static_cast<std::size_t>(2 * p.m + 1);
        for (const auto& keep : p.kept) {
            std::vector<std::size_t> s(static_cast<std::size_t>(p.ambient), 0);
            std::size_t st = 1;
            for (std::size_t t = keep.size(); t-- > 0;) {
                s[static_cast<std::size_t>(keep[t])] = st;
                st *= w;
            }
            stride.push_back(s);
        }
    }
    std::size_t index(std::size_t i, const std::vector<long>& z) const {
        std::size_t f = 0;
        for (int a = 0; a < problem.ambient; ++a) f += stride[i][a] * static_cast<std::size_t>(z[a] + problem.m);
        return f;
    }
};

template <class F>
void for_each_point(int dim, long m, F&& fn) {
    std::vector<long> z(static_cast<std::size_t>(dim), -m);
    for (;;) {
        fn(z);
        int a = dim - 1;
        while (a >= 0 && ++z[a] > m) z[a--] = -m;
        if (a < 0) return;
    }
}

double powp(double v, double p) { return p == 2 ? v * v : (p == 1 ? v : std::pow(v, p)); }

} // namespace

double lw_lhs(const LWProblem& problem, const std::vector<LatticeDensity>& g) {
    validate(problem, g);
    Projector proj(problem);
    CompensatedSum acc;
    for_each_point(problem.ambient, problem.m, [&](const std::vector<long>& z) {
        double prod = 1;
        for (std::size_t i = 0; i < g.size() && prod != 0; ++i) prod *= g[i].values[proj.index(i, z)];
        acc.add(powp(prod, problem.p));
    });
    return std::pow(acc.value(), 1.0 / problem.p);
}

double lw_ratio(const LWProblem& problem, const std::vector<LatticeDensity>& g) {
    double den = 1;
    for (const auto& d : g) {
        double nrm = d.l2_norm();
        if (!(nrm > 0)) throw InvalidArgument("zero-norm density");
        den *= nrm;
    }
    return lw_lhs(problem, g) / den;
}

double discrete_lw_ratio(const Frame& frame, const std::vector<LatticeDensity>& g, long m) {
    return lw_ratio(lw_plain(frame.n(), m), g);
}

double refined_lw_ratio(const Frame& frame, const SlabCondition& slab, const std::vector<LatticeDensity>& g, long m) {
    (void)strip_geometry(frame, slab);  // throws on slab/frame inconsistency
    return lw_ratio(lw_refined(frame.n(), slab.k(), m), g);
}

double lw_lhs_sliced(const LWProblem& problem, const std::vector<LatticeDensity>& g) {
    validate(problem, g);
    const int last = problem.ambient - 1;
    const long m = problem.m;
    const std::size_t w = static_cast<std::size_t>(2 * m + 1);
    // Restrict each factor to the slice z_last = s: factors that keep `last` lose that
    // coordinate, the others are unchanged. Each slice is an LW sum on ambient - 1 coords.
    CompensatedSum outer;
    for (long s = -m; s <= m; ++s) {
        std::vector<std::vector<double>> slice(g.size());
        std::vector<std::vector<int>> slice_keep(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto& keep = problem.kept[i];
            bool has_last = !keep.empty() && keep.back() == last;
            if (!has_last) {
                slice[i] = g[i].values;
                slice_keep[i] = keep;
                continue;
            }
            // Last kept coordinate is fastest in row-major order.
            const std::size_t rows = g[i].values.size() / w;
            slice[i].resize(rows);
            for (std::size_t r = 0; r < rows; ++r) slice[i][r] = g[i].values[r * w + static_cast<std::size_t>(s + m)];
            slice_keep[i].assign(keep.begin(), keep.end() - 1);
        }
        CompensatedSum inner;
        std::vector<long> z(static_cast<std::size_t>(last), -m);
        for (;;) {
            double prod = 1;
            for (std::size_t i = 0; i < g.size() && prod != 0; ++i) {
                std::size_t f = 0;
                for (int a : slice_keep[i]) f = f * w + static_cast<std::size_t>(z[static_cast<std::size_t>(a)] + m);
                prod *= slice[i][f];
            }
            inner.add(powp(prod, problem.p));
            int a = last - 1;
            while (a >= 0 && ++z[a] > m) z[a--] = -m;
            if (a < 0) break;
        }
        outer.add(inner.value());
    }
    return std::pow(outer.value(), 1.0 / problem.p);
}

double lw_cauchy_schwarz_bound(const std::vector<LatticeDensity>& g) {
    if (g.size() != 3 || g[0].dim != 2 || g[1].dim != 2 || g[2].dim != 2) throw InvalidArgument("bound is for n = 2");
    const std::size_t w = static_cast<std::size_t>(2 * g[0].m + 1);
    // g1(z2, z3), g2(z1, z3): column z3 norms.
    CompensatedSum acc;
    for (std::size_t z3 = 0; z3 < w; ++z3) {
        double a = 0, b = 0;
        for (std::size_t r = 0; r < w; ++r) {
            a += g[0].values[r * w + z3] * g[0].values[r * w + z3];
            b += g[1].values[r * w + z3] * g[1].values[r * w + z3];
        }
        acc.add(std::sqrt(a) * std::sqrt(b));
    }
    return g[2].l2_norm() * acc.value() / (g[0].l2_norm() * g[1].l2_norm() * g[2].l2_norm());
}

std::vector<LatticeDensity> random_lw_densities(const LWProblem& problem, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LatticeDensity> g;
    for (std::size_t i = 0; i < problem.kept.size(); ++i) {
        auto d = LatticeDensity::zeros(CellOwner::induced(static_cast<int>(i)), problem.factor_dim(i), problem.m);
        // Mix of dense and sparse supports.
        double keep = rng.uniform(0.2, 1.0);
        for (auto& v : d.values) v = rng.uniform() < keep ? rng.uniform() : 0.0;
        d.values[rng.integer(0, static_cast<long>(d.values.size()) - 1)] += 1.0;
        g.push_back(std::move(d));
    }
    return g;
}

double lw_ascend(const LWProblem& problem, std::vector<LatticeDensity>& g) {
    validate(problem, g);
    Projector proj(problem);
    const double p = problem.p;
    // Terms per lattice point and, for each (factor, entry), the points it touches.
    std::vector<std::vector<long>> points;
    for_each_point(problem.ambient, problem.m, [&](const std::vector<long>& z) { points.push_back(z); });
    std::vector<std::vector<std::vector<std::size_t>>> touch(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) touch[i].resize(g[i].values.size());
    for (std::size_t t = 0; t < points.size(); ++t)
        for (std::size_t i = 0; i < g.size(); ++i) touch[i][proj.index(i, points[t])].push_back(t);

    std::vector<double> norm2(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) norm2[i] = g[i].l2_norm() * g[i].l2_norm();
    auto others = [&](std::size_t i, std::size_t t) {
        double prod = 1;
        for (std::size_t j = 0; j < g.size(); ++j)
            if (j != i) prod *= g[j].values[proj.index(j, points[t])];
        return powp(prod, p);
    };
    double sum = 0;
    for (std::size_t t = 0; t < points.size(); ++t) {
        double prod = 1;
        for (std::size_t i = 0; i < g.size(); ++i) prod *= g[i].values[proj.index(i, points[t])];
        sum += powp(prod, p);
    }
    auto ratio_of = [&](double s, const std::vector<double>& n2) {
        double den = 1;
        for (double v : n2) {
            if (!(v > 0)) return 0.0;
            den *= std::sqrt(v);
        }
        return std::pow(std::max(s, 0.0), 1.0 / p) / den;
    };
    double best = ratio_of(sum, norm2);
    const double factors[3] = {0.0, 0.5, 2.0};
    for (int sweep = 0; sweep < 200; ++sweep) {
        bool improved = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            for (std::size_t e = 0; e < g[i].values.size(); ++e) {
                double a = g[i].values[e];
                if (a == 0) continue;
                double coef = 0;
                for (std::size_t t : touch[i][e]) coef += others(i, t);
                for (double fct : factors) {
                    double b = a * fct;
                    double s2 = sum + coef * (powp(b, p) - powp(a, p));
                    auto n2 = norm2;
                    n2[i] += b * b - a * a;
                    double r = ratio_of(s2, n2);
                    if (r > best * (1 + 1e-12)) {
                        best = r;
                        sum = s2;
                        norm2 = n2;
                        g[i].values[e] = b;
                        a = b;
                        improved = true;
                        if (b == 0) break;
                    }
                }
            }
        }
        if (!improved) break;
        // Resynchronize the running sum to limit drift.
        sum = 0;
        for (std::size_t t = 0; t < points.size(); ++t) {
            double prod = 1;
            for (std::size_t i = 0; i < g.size(); ++i) prod *= g[i].values[proj.index(i, points[t])];
            sum += powp(prod, p);
        }
    }
    return lw_ratio(problem, g);
}

OracleResult lw_constant_oracle(const LWProblem& problem, int trials, std::uint64_t seed) {
    if (trials < 1) throw InvalidArgument("need at least one trial");
    std::vector<double> best(static_cast<std::size_t>(trials), 0.0);
    parallel_for(best.size(), [&](std::size_t t) {
        auto g = random_lw_densities(problem, mix_seed(seed, t));
        double start = lw_ratio(problem, g);
        best[t] = std::max(start, lw_ascend(problem, g));
    });
    OracleResult r;
    for (std::size_t t = 0; t < best.size(); ++t)
        if (best[t] > r.best) {
            r.best = best[t];
            r.best_trial = t;
        }
    return r;
}

OracleResult lw_constant_oracle(const Frame& frame, long m, int trials, LWMode mode, std::uint64_t seed, int k) {
    if (m > 6) throw InvalidArgument("oracle window limited to m <= 6");
    LWProblem problem = mode == LWMode::Plain ? lw_plain(frame.n(), m) : lw_refined(frame.n(), k, m);
    return lw_constant_oracle(problem, trials, seed);
}

HolderResult sequence_holder_check(const std::vector<double>& a, const std::vector<double>& b, int n) {
    if (n < 1) throw InvalidArgument("n must be >= 1");
    if (a.size() != b.size()) throw InvalidArgument("sequence length mismatch");
    const double p = 2.0 / n;
    CompensatedSum lhs, na;
    double binf = 0;
    CompensatedSum nb;
    for (std::size_t t = 0; t < a.size(); ++t) {
        lhs.add(std::pow(std::abs(a[t] * b[t]), p));
        na.add(a[t] * a[t]);
        if (n == 1)
            binf = std::max(binf, std::abs(b[t]));
        else
            nb.add(std::pow(std::abs(b[t]), 2.0 / (n - 1)));
    }
    HolderResult r;
    r.lhs = std::pow(lhs.value(), 1.0 / p);
    double bn = n == 1 ? binf : std::pow(nb.value(), (n - 1) / 2.0);
    r.rhs = std::sqrt(na.value()) * bn;
    r.pass = r.lhs <= r.rhs * (1 + 1e-12) + std::numeric_limits<double>::min();
    return r;
}

double companion_window_sum(int n, long W) {
    if (n < 1 || W < 0) throw InvalidArgument("bad companion sum arguments");
    if (n == 1) return 1.0;  // l^infinity norm, attained at d = 0
    const double e = -static_cast<double>(n * n) / (n - 1);
    // Group by shells |j|_inf = t; d / R = max(0, t - 1).
    CompensatedSum acc;
    for (long t = 0; t <= W; ++t) {
        double count = t == 0 ? 1.0 : std::pow(2.0 * t + 1, n) - std::pow(2.0 * t - 1, n);
        double d = static_cast<double>(std::max(0L, t - 1));
        acc.add(count * std::pow(japanese(d), e));
    }
    return std::pow(acc.value(), (n - 1) / 2.0);
}

} // namespace mlr
