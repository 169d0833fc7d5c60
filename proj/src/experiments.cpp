#include "mlr/experiments.hpp"

#include "mlr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace mlr {

namespace {

double lp_exponent(const ScenarioConfig& c) { return 2.0 / (c.k - 1); }

DensityFn as_fn(const DensitySpec& spec) {
    return [spec](const Vec& xi) { return cplx(spec(xi), 0.0); };
}

// Spacing <= h_max that divides `side` evenly.
double aligned_spacing(double side, double h_max) { return side / std::ceil(side / h_max - 1e-9); }

std::string tuple_label(const std::vector<DensitySpec>& specs) {
    std::string s;
    for (std::size_t i = 0; i < specs.size(); ++i) s += (i ? "|" : "") + specs[i].label();
    return s;
}

struct TupleEval {
    double ratio = 0;
    double oracle = -1;
    std::string label;
};

TupleEval evaluate_tuple(const Scenario& sc, const SpatialGrid& grid, double R, int tuple) {
    const auto& cfg = sc.config;
    TupleEval out;
    std::vector<DensitySpec> specs;
    Field product;
    double norms = 1;
    for (int i = 0; i < cfg.k; ++i) {
        const Hypersurface& surf = sc.surfaces[static_cast<std::size_t>(i)];
        specs.push_back(family_member(sc, i, tuple));
        FrequencyDensity f = make_density(surf, density_spacing(sc, i, grid), as_fn(specs.back()));
        require_margin(f, cfg.delta, R, false);
        double nf = f.l2_norm();
        if (!(nf > 0)) throw ContractViolation("density with zero norm in the family");
        norms *= nf;
        Field e = extend(surf, f, grid);
        product = i == 0 ? std::move(e) : product * e;
    }
    out.label = tuple_label(specs);
    out.ratio = lp_quasinorm(product, lp_exponent(cfg)) / norms;
    if (cfg.n == 1 && cfg.k == 2 && cfg.plancherel_check) {
        double num = plancherel_product_norm(sc, specs[0], specs[1], R);
        double den = gauss_legendre_l2(sc.surfaces[0].domain(), specs[0]) *
                     gauss_legendre_l2(sc.surfaces[1].domain(), specs[1]);
        out.oracle = num / den;
    }
    return out;
}

SpatialGrid region_grid(const Scenario& sc, double R) {
    const int d = sc.config.n + 1;
    return SpatialGrid::over(sc.region_basis, LatticeBox::centered(d, R), aligned_spacing(R, sc.config.h_x));
}

// Evaluates every (scale, tuple) pair in parallel; results land in per-index slots.
std::vector<ScaleResult> run_scales(const std::vector<Scenario>& scenarios, const std::vector<double>& Rs,
                                    const std::vector<double>& abscissa) {
    const std::size_t S = scenarios.size();
    const std::size_t T = static_cast<std::size_t>(scenarios.front().config.tuples);
    std::vector<SpatialGrid> grids;
    for (std::size_t s = 0; s < S; ++s) grids.push_back(region_grid(scenarios[s], Rs[s]));
    std::vector<TupleEval> slots(S * T);
    parallel_for(S * T, [&](std::size_t idx) {
        std::size_t s = idx / T, t = idx % T;
        slots[idx] = evaluate_tuple(scenarios[s], grids[s], Rs[s], static_cast<int>(t));
    });
    std::vector<ScaleResult> out(S);
    for (std::size_t s = 0; s < S; ++s) {
        ScaleResult& r = out[s];
        r.scale = abscissa[s];
        for (std::size_t t = 0; t < T; ++t) {
            const TupleEval& e = slots[s * T + t];
            r.ratios.push_back(e.ratio);
            r.labels.push_back(e.label);
            if (e.oracle >= 0) r.oracle.push_back(e.oracle);
            if (e.ratio > r.max || t == 0) {
                r.max = e.ratio;
                r.argmax = t;
            }
        }
    }
    return out;
}

SweepReport assemble(const ScenarioConfig& cfg, const std::string& abscissa, const std::vector<ScaleResult>& results) {
    SweepReport rep;
    rep.abscissa = abscissa;
    rep.config_hash = cfg.hash();
    rep.seed = cfg.seed;
    rep.tool_version = kToolVersion;
    rep.config = cfg.raw;
    std::vector<double> xs, ys;
    for (const auto& r : results) {
        for (std::size_t t = 0; t < r.ratios.size(); ++t)
            rep.records.push_back({r.scale, static_cast<int>(t), r.labels[t], r.ratios[t]});
        rep.scales.push_back(r.scale);
        rep.maxima.push_back(r.max);
        if (!r.oracle.empty()) {
            double oracle_max = *std::max_element(r.oracle.begin(), r.oracle.end());
            double worst = 0;
            for (std::size_t t = 0; t < r.oracle.size(); ++t)
                worst = std::max(worst, std::abs(r.ratios[t] - r.oracle[t]) / r.oracle[t]);
            rep.oracle.push_back(oracle_max);
            rep.oracle_rel_diff.push_back(worst);
        }
        xs.push_back(r.scale);
        ys.push_back(r.max);
    }
    Fit fit = fit_loglog(xs, ys);
    rep.exponent = fit.slope;
    rep.intercept = fit.intercept;
    rep.residual = fit.residual;
    double min_max = ys.empty() ? 0 : *std::min_element(ys.begin(), ys.end());
    rep.contracts.push_back(make_contract("A_emp nonnegative", min_max, ">=", 0.0));
    return rep;
}

} // namespace

void require_margin(const FrequencyDensity& f, double delta, double R, bool refined) {
    Margin m = margin_of(f, delta, refined);
    double need = delta - 1.0 / std::sqrt(R);
    if (m.value < need)
        throw ContractViolation("density violates the margin requirement: margin " + format_double(m.value) + " < " +
                                format_double(need));
}

Vec density_spacing(const Scenario& scenario, int surface, const SpatialGrid& grid) {
    const auto& cfg = scenario.config;
    const Hypersurface& surf = scenario.surfaces.at(static_cast<std::size_t>(surface));
    const Vec hw = surf.domain().bounding_half_widths();
    double rule = 1.0 / (4 * grid.max_standard_coordinate());
    double h = cfg.h_xi > 0 ? cfg.h_xi : rule;
    Vec out(surf.dim());
    for (int a = 0; a < surf.dim(); ++a) out[a] = std::min(h, 2 * hw[a] / 24);
    if (surface == 0 && scenario.slab && cfg.slab)
        for (int a : cfg.slab->xi_double_prime_axes) out[a] = std::min(out[a], scenario.slab->mu / 8);
    return out;
}

ScaleResult estimate_A(const Scenario& scenario, double R) {
    return run_scales({scenario}, {R}, {R}).front();
}

double gauss_legendre_l2(const Domain& domain, const DensitySpec& f, int panels) {
    const Vec hw = domain.bounding_half_widths();
    const int d = domain.dim();
    std::vector<Quadrature> rules;
    for (int a = 0; a < d; ++a) rules.push_back(gauss_legendre(-hw[a], hw[a], panels, 8));
    std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
    CompensatedSum acc;
    Vec xi(d);
    for (;;) {
        double w = 1;
        for (int a = 0; a < d; ++a) {
            xi[a] = rules[a].nodes[idx[a]];
            w *= rules[a].weights[idx[a]];
        }
        double v = f(xi);
        acc.add(w * v * v);
        int a = d - 1;
        while (a >= 0 && ++idx[a] == rules[a].nodes.size()) idx[a--] = 0;
        if (a < 0) break;
    }
    return std::sqrt(acc.value());
}

double plancherel_product_norm(const Scenario& scenario, const DensitySpec& f1, const DensitySpec& f2, double R,
                               int panels) {
    const auto& cfg = scenario.config;
    if (cfg.n != 1 || cfg.k != 2) throw InvalidArgument("the Plancherel oracle covers n = 1, k = 2 only");
    const Hypersurface& s1 = scenario.surfaces[0];
    const Hypersurface& s2 = scenario.surfaces[1];
    auto rule_for = [&](const Hypersurface& s) {
        double hw = s.domain().bounding_half_widths()[0];
        return gauss_legendre(-hw, hw, panels, 8);
    };
    Quadrature q1 = rule_for(s1), q2 = rule_for(s2);
    // Points zeta = Sigma_1(xi) + Sigma_2(eta) and weights c = w w' f1 f2.
    std::vector<Eigen::Vector2d> zeta;
    std::vector<double> c;
    for (std::size_t a = 0; a < q1.nodes.size(); ++a) {
        Vec xi(1);
        xi[0] = q1.nodes[a];
        double v1 = q1.weights[a] * f1(xi);
        if (v1 == 0) continue;
        Vec p1 = s1.point(xi);
        for (std::size_t b = 0; b < q2.nodes.size(); ++b) {
            Vec eta(1);
            eta[0] = q2.nodes[b];
            double v2 = q2.weights[b] * f2(eta);
            if (v2 == 0) continue;
            Vec p = p1 + s2.point(eta);
            zeta.emplace_back(p[0], p[1]);
            c.push_back(v1 * v2);
        }
    }
    // Q = B [-R/2, R/2]^2: int_Q e^{i x.theta} dx = |det B| prod 2 sin(R t_m / 2) / t_m, t = B^T theta.
    const Eigen::Matrix2d Bt = scenario.region_basis.transpose();
    const double det = std::abs(scenario.region_basis.determinant());
    auto sinc = [R](double t) { return std::abs(t) < 1e-12 ? R : 2 * std::sin(R * t / 2) / t; };
    const std::size_t P = zeta.size();
    std::vector<double> rows(P, 0.0);
    parallel_for(P, [&](std::size_t p) {
        CompensatedSum acc;
        acc.add(0.5 * c[p] * R * R);
        for (std::size_t q = p + 1; q < P; ++q) {
            Eigen::Vector2d t = Bt * (zeta[p] - zeta[q]);
            acc.add(c[q] * sinc(t[0]) * sinc(t[1]));
        }
        rows[p] = 2 * c[p] * acc.value();
    });
    CompensatedSum total;
    for (double r : rows) total.add(r);
    return std::sqrt(std::max(0.0, det * total.value()));
}

Fit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw InvalidArgument("fit abscissa and ordinate differ in length");
    Fit fit;
    const std::size_t n = x.size();
    if (n < 2) return fit;
    double mx = 0, my = 0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw InvalidArgument("log-log fit needs positive values");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (!(sxx > 0)) throw InvalidArgument("log-log fit needs distinct abscissae");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / static_cast<double>(n));
    return fit;
}

SweepReport sweep_R(const ScenarioConfig& config) {
    if (config.R.size() < 3) throw ConfigError("sweep_R needs at least three R values");
    for (double R : config.R)
        if (R < 1.0 / (config.delta * config.delta) * (1 - 1e-12))
            throw ConfigError("R values must satisfy R >= delta^-2");
    Scenario sc = build_scenario(config);
    std::vector<Scenario> scs(config.R.size(), sc);
    return assemble(config, "R", run_scales(scs, config.R, config.R));
}

SweepReport sweep_mu(const ScenarioConfig& config) {
    if (config.k >= config.n + 1) throw ConfigError("the mu gain needs k < n + 1 (exponent (n+1-k)/2 vanishes)");
    if (!config.slab) throw ConfigError("sweep_mu needs a slab condition");
    if (config.mu_list.size() < 4) throw ConfigError("sweep_mu needs at least four mu values");
    if (config.R.size() != 1) throw ConfigError("sweep_mu uses exactly one R value");
    for (double mu : config.mu_list)
        if (!(mu > 0) || mu >= config.delta) throw ConfigError("mu values must lie in (0, delta)");
    std::vector<Scenario> scs;
    for (double mu : config.mu_list) scs.push_back(build_scenario(config, mu));
    std::vector<double> Rs(config.mu_list.size(), config.R.front());
    return assemble(config, "mu", run_scales(scs, Rs, config.mu_list));
}

OffdiagResult offdiagonal_decay(const ScenarioConfig& config, double R, const std::vector<long>& steps, int J) {
    Scenario sc = build_scenario(config);
    if (!sc.frame) throw ConfigError("off-diagonal decay needs a transversal frame");
    const Frame& frame = *sc.frame;
    const int n = config.n;
    const int d = n + 1;
    if (J < 1) throw InvalidArgument("window radius must be positive");
    for (long s : steps)
        if (s < 0 || s > J) throw ContractViolation("cell q' outside the enumerated window");

    OffdiagResult res;
    res.R = R;
    res.N = config.weight_order;
    res.p = lp_exponent(config);

    const Hypersurface& s1 = sc.surfaces[0];
    InducedLattice L1 = induced_lattice(frame, 0);
    const double gnorm = L1.generator.jacobiSvd().singularValues()(0);

    // Evaluation cell q at the origin.
    SpatialGrid qgrid = SpatialGrid::over(frame.basis(), LatticeBox::centered(d, R), aligned_spacing(R, config.h_x));

    // Padded xi grid for f_1; its dual x' grid covers the window of q' cells.
    const Vec hw = s1.domain().bounding_half_widths();
    const double pad = std::max(0.25, 1.5 * L1.to_integer.norm() / R);
    double h = std::min(kPi / ((J + 4) * R * gnorm), 1.0 / (4 * qgrid.max_standard_coordinate()));
    std::vector<int> counts(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) counts[a] = static_cast<int>(std::ceil(2 * (hw[a] + pad) / h));
    Vec lo = -(hw.array() + pad).matrix(), hi = (hw.array() + pad).matrix();
    GridSpec xi_grid = GridSpec::cell_centered(lo, hi, counts);

    DensitySpec bump;
    bump.kind = DensitySpec::Kind::Bump;
    bump.domain = s1.domain();
    bump.center = Vec::Zero(n);
    bump.width = hw.minCoeff();
    FrequencyDensity f1 = make_density_on(s1, xi_grid, as_fn(bump));
    require_margin(f1, config.delta, R, false);
    GridFunction g = fourier_inverse(f1.f);

    // Remaining factors: constants.
    Field rest;
    for (int i = 1; i < config.k; ++i) {
        const Hypersurface& s = sc.surfaces[static_cast<std::size_t>(i)];
        DensitySpec cst;
        cst.domain = s.domain();
        FrequencyDensity f = make_density(s, density_spacing(sc, i, qgrid), as_fn(cst));
        require_margin(f, config.delta, R, false);
        Field e = extend(s, f, qgrid);
        rest = i == 1 ? std::move(e) : rest * e;
    }
    auto norm_on_q = [&](const FrequencyDensity& fd) {
        Field e = extend(s1, fd, qgrid);
        e = e * rest;
        return lp_quasinorm(e, res.p);
    };
    res.total_p = std::pow(norm_on_q(f1), res.p);

    // All q' with |j'|_inf <= J around pi_{N_1} q (index 0).
    const auto bump_m = make_bump(n);
    std::vector<IVec> window;
    {
        IVec j(static_cast<std::size_t>(n), -J);
        for (;;) {
            window.push_back(j);
            int a = n - 1;
            while (a >= 0 && ++j[a] > J) j[a--] = -J;
            if (a < 0) break;
        }
    }
    std::vector<double> values(window.size());
    std::vector<std::vector<cplx>> pieces(window.size());
    parallel_for(window.size(), [&](std::size_t w) {
        Cell qp{window[w], R, CellOwner::induced(0)};
        GridFunction piece = g;
        for (std::size_t p = 0; p < piece.values.size(); ++p) {
            Vec x = L1.tangent * g.grid.point(p);
            piece.values[p] *= eval_window(*bump_m, qp, L1, x);
        }
        FrequencyDensity fd{0, fourier_forward(piece, &xi_grid), {}};
        values[w] = norm_on_q(fd);
        pieces[w] = std::move(fd.f.values);
    });

    CompensatedSum pieces_p;
    std::vector<cplx> recomposed(f1.f.values.size(), cplx(0, 0));
    std::map<IVec, double> by_index;
    std::size_t diag = 0;
    for (std::size_t w = 0; w < window.size(); ++w) {
        pieces_p.add(std::pow(values[w], res.p));
        for (std::size_t p = 0; p < recomposed.size(); ++p) recomposed[p] += pieces[w][p];
        by_index[window[w]] = values[w];
        if (std::all_of(window[w].begin(), window[w].end(), [](long v) { return v == 0; })) diag = w;
    }
    res.pieces_p = pieces_p.value();
    res.diagonal_share = std::pow(values[diag], res.p) / res.pieces_p;
    res.diagonal_largest = true;
    for (std::size_t w = 0; w < window.size(); ++w)
        if (w != diag && values[w] > values[diag]) res.diagonal_largest = false;
    // Pieces outside the window enter as one aggregated remainder f_1 - sum(window).
    FrequencyDensity tail{0, f1.f, {}};
    double err = 0, ref = 0;
    for (std::size_t p = 0; p < recomposed.size(); ++p) {
        tail.f.values[p] = f1.f.values[p] - recomposed[p];
        err += std::norm(tail.f.values[p]);
        ref += std::norm(f1.f.values[p]);
    }
    res.recomposition_error = std::sqrt(err / ref);
    res.tail_p = std::pow(norm_on_q(tail), res.p);
    res.pieces_p += res.tail_p;

    std::vector<std::pair<std::string, IVec>> rays{{"axis", IVec(static_cast<std::size_t>(n), 0)}};
    rays.front().second[0] = 1;
    if (n > 1) rays.push_back({"diagonal", IVec(static_cast<std::size_t>(n), 1)});
    for (const auto& [name, dir] : rays) {
        for (long s : steps) {
            IVec j(dir.size());
            for (std::size_t a = 0; a < dir.size(); ++a) j[a] = dir[a] * s;
            DecayRow row;
            row.ray = name;
            row.steps = s;
            row.distance = R * static_cast<double>(std::max(0L, s - 1));
            row.value = by_index.at(j);
            row.weight = std::pow(1 + std::pow(row.distance / R, 2), -0.5 * res.N);
            res.rows.push_back(row);
        }
    }
    return res;
}

namespace {

// Weighted window sums for one surface:
//   S(q') = || <(x - c(q'))/R>^N chi_{q'} g ||^2,  S0(q') = || chi_{q'} g ||^2
// over the cells (or strips) of a window.
struct WindowSums {
    std::vector<IVec> index;
    std::vector<double> weighted, trivial;
};

std::vector<IVec> index_box(const IVec& lo, const IVec& hi) {
    std::vector<IVec> out;
    IVec j = lo;
    const int m = static_cast<int>(lo.size());
    for (;;) {
        out.push_back(j);
        int a = m - 1;
        while (a >= 0 && ++j[a] > hi[a]) {
            j[a] = lo[a];
            --a;
        }
        if (a < 0) break;
    }
    return out;
}

// Density axes of surface 1 along H_1 cap H.
std::vector<int> primed_axes(const ScenarioConfig& config, int n) {
    std::vector<int> out;
    for (int a = 0; a < n; ++a) {
        const auto& dpp = config.slab->xi_double_prime_axes;
        if (std::find(dpp.begin(), dpp.end(), a) == dpp.end()) out.push_back(a);
    }
    return out;
}

double japanese_bracket_power(double sq, int N) { return std::pow(1 + sq, N); }

} // namespace

InductionResult induction_step_check(const ScenarioConfig& config, double R, const std::string& variant, int J) {
    if (variant != "plain" && variant != "strip") throw ConfigError("variant must be plain or strip");
    Scenario sc = build_scenario(config);
    if (!sc.frame) throw ConfigError("the induction check needs a transversal frame");
    const Frame& frame = *sc.frame;
    const int n = config.n, d = n + 1, k = config.k;
    const double inv_delta = 1.0 / config.delta;
    const long s = std::lround(inv_delta);
    if (std::abs(inv_delta - static_cast<double>(s)) > 1e-9 || s < 1)
        throw ConfigError("delta^-1 must be an integer so cells nest");
    if (R < inv_delta * inv_delta * (1 - 1e-12)) throw ConfigError("the induction needs R >= delta^-2");
    if (J < 1) throw InvalidArgument("window radius must be positive");
    const int N = config.weight_order;
    if (N < 0 || N > kMaxWeightOrder) throw ContractViolation("weight order outside the decay model");
    const double wexp = config.effective_weight_exponent();
    std::optional<StripGeometry> geometry;
    if (variant == "strip") {
        if (!sc.slab) throw ConfigError("the strip variant needs a slab condition");
        if (k >= n + 1) throw ConfigError("the strip variant needs k < n + 1");
        geometry = strip_geometry(frame, *sc.slab);
    }

    InductionResult res;
    res.R = R;
    res.variant = variant;
    res.J = J;

    Cell Q{IVec(static_cast<std::size_t>(d), 0), R * static_cast<double>(s), CellOwner::ambient()};
    std::vector<Cell> children = enumerate_cells(Q, R);
    res.cells = children.size();
    // Q is the union of its nested children (for even delta^-1 this is the coarse cell
    // offset by R/2 per axis).
    LatticeBox region = LatticeBox::of_cell(children.front());
    for (const Cell& q : children) {
        LatticeBox b = LatticeBox::of_cell(q);
        region.lo = region.lo.cwiseMin(b.lo);
        region.hi = region.hi.cwiseMax(b.hi);
    }
    SpatialGrid grid = SpatialGrid::over(frame.basis(), region, aligned_spacing(R, config.h_x));
    const double p = lp_exponent(config);
    const std::size_t T = static_cast<std::size_t>(config.tuples);

    // Per tuple: densities, LHS per child, window sums per surface.
    struct TupleData {
        std::vector<double> lhs;  // per child
        std::vector<double> norms;
        std::vector<WindowSums> sums;  // per surface
        bool support_ok = true;
    };
    std::vector<TupleData> data(T);

    std::vector<InducedLattice> lattices;
    for (int i = 0; i < k; ++i) lattices.push_back(induced_lattice(frame, i));
    // Induced index of pi_{N_i} q deletes slot i.
    auto projected = [&](const Cell& q, int i) {
        IVec j;
        for (int m = 0; m < d; ++m)
            if (m != i) j.push_back(q.j[static_cast<std::size_t>(m)]);
        return j;
    };
    const bool strip = geometry.has_value();
    auto uses_strips = [&](int i) { return strip && i == 0; };
    auto base_index = [&](const Cell& q, int i) {
        IVec j = projected(q, i);
        if (uses_strips(i)) j.resize(static_cast<std::size_t>(k - 1));
        return j;
    };

    parallel_for(T, [&](std::size_t t) {
        TupleData& td = data[t];
        Field product;
        for (int i = 0; i < k; ++i) {
            const Hypersurface& surf = sc.surfaces[static_cast<std::size_t>(i)];
            DensitySpec spec = family_member(sc, i, static_cast<int>(t));
            FrequencyDensity f = make_density(surf, density_spacing(sc, i, grid), as_fn(spec));
            if (uses_strips(i)) f.primed_axes = primed_axes(config, n);
            require_margin(f, config.delta, R, uses_strips(i));
            td.norms.push_back(f.l2_norm());
            Field e = extend(surf, f, grid);
            product = i == 0 ? std::move(e) : product * e;

            // Window of indices around every projected child.
            const int m = uses_strips(i) ? k - 1 : n;
            IVec lo(static_cast<std::size_t>(m), 0), hi(static_cast<std::size_t>(m), 0);
            bool first = true;
            for (const Cell& q : children) {
                IVec b = base_index(q, i);
                for (int a = 0; a < m; ++a) {
                    lo[a] = first ? b[a] : std::min(lo[a], b[a]);
                    hi[a] = first ? b[a] : std::max(hi[a], b[a]);
                }
                first = false;
            }
            for (int a = 0; a < m; ++a) {
                lo[a] -= J;
                hi[a] += J;
            }
            // Padded xi grid whose dual x' grid covers the window.
            const InducedLattice& L = lattices[static_cast<std::size_t>(i)];
            double reach = 0;
            for (int a = 0; a < m; ++a)
                reach = std::max(reach, static_cast<double>(std::max(std::labs(lo[a]), std::labs(hi[a])) + 2));
            const double gnorm = L.generator.norm();
            const Vec hw = surf.domain().bounding_half_widths();
            const double pad = std::max(0.25 * hw.maxCoeff(), 1.5 * L.to_integer.norm() / R);
            double h = kPi / (reach * R * gnorm);
            std::vector<int> counts(static_cast<std::size_t>(n));
            for (int a = 0; a < n; ++a) counts[a] = static_cast<int>(std::ceil(2 * (hw[a] + pad) / h));
            GridSpec xi_grid = GridSpec::cell_centered(-(hw.array() + pad).matrix(), (hw.array() + pad).matrix(), counts);
            FrequencyDensity fg = make_density_on(surf, xi_grid, as_fn(spec));
            GridFunction g = fourier_inverse(fg.f);
            WindowSums ws;
            ws.index = index_box(lo, hi);
            ws.weighted.assign(ws.index.size(), 0.0);
            ws.trivial.assign(ws.index.size(), 0.0);
            const auto bump_m = make_bump(m);
            // Integer-lattice coordinates y of every x' node; then (x - c)/R = G (y - j).
            const std::size_t P = g.values.size();
            const Mat G = uses_strips(i) ? geometry->generator : L.generator;
            std::vector<double> ys(P * static_cast<std::size_t>(m));
            std::vector<double> mass(P);
            for (std::size_t q = 0; q < P; ++q) {
                Vec y = uses_strips(i) ? Vec(geometry->strip_coords(L.tangent * g.grid.point(q)) / R)
                                       : Vec(L.to_integer * g.grid.point(q) / R);
                for (int a = 0; a < m; ++a) ys[q * m + a] = y[a];
                mass[q] = std::norm(g.values[q]);
            }
            // xi''-support of f_1 on its grid (strip variant).
            std::map<std::vector<int>, bool> support;
            double fmax = 0;
            if (uses_strips(i)) {
                for (std::size_t q = 0; q < fg.f.values.size(); ++q) {
                    fmax = std::max(fmax, std::abs(fg.f.values[q]));
                    auto idx = xi_grid.unflatten(q);
                    std::vector<int> key;
                    for (int a2 : config.slab->xi_double_prime_axes) key.push_back(idx[static_cast<std::size_t>(a2)]);
                    support[key] = support[key] || std::abs(fg.f.values[q]) > 0;
                }
            }
            double d[3];
            for (std::size_t w = 0; w < ws.index.size(); ++w) {
                CompensatedSum a, b;
                std::vector<cplx> piece;
                if (uses_strips(i)) piece.assign(P, cplx(0, 0));
                const IVec& j = ws.index[w];
                for (std::size_t q = 0; q < P; ++q) {
                    double r2 = 0;
                    for (int a2 = 0; a2 < m; ++a2) {
                        d[a2] = ys[q * m + a2] - static_cast<double>(j[a2]);
                        r2 += d[a2] * d[a2];
                    }
                    const double chi = bump_m->radial(std::sqrt(r2));
                    double dist2 = 0;
                    for (int r = 0; r < G.rows(); ++r) {
                        double row = 0;
                        for (int a2 = 0; a2 < m; ++a2) row += G(r, a2) * d[a2];
                        dist2 += row * row;
                    }
                    if (uses_strips(i)) piece[q] = chi * g.values[q];
                    const double v = chi * chi * mass[q];
                    a.add(japanese_bracket_power(dist2, N) * v);
                    b.add(v);
                }
                ws.weighted[w] = a.value() * g.weight();
                ws.trivial[w] = b.value() * g.weight();
                if (uses_strips(i)) {
                    // The xi''-support of the piece must stay inside that of f_1.
                    GridFunction pg{g.owner, g.grid, piece};
                    GridFunction back = fourier_forward(pg, &xi_grid);
                    for (std::size_t q = 0; q < back.values.size(); ++q) {
                        auto idx = xi_grid.unflatten(q);
                        std::vector<int> key;
                        for (int a2 : config.slab->xi_double_prime_axes) key.push_back(idx[static_cast<std::size_t>(a2)]);
                        if (!support[key] && std::abs(back.values[q]) > 1e-10 * fmax) td.support_ok = false;
                    }
                }
            }
            td.sums.push_back(std::move(ws));
        }
        for (const Cell& q : children) td.lhs.push_back(lp_quasinorm(product, p, LatticeBox::of_cell(q)));
    });

    // A_emp over children and tuples.
    for (const auto& td : data) {
        double prod = 1;
        for (double v : td.norms) prod *= v;
        for (double v : td.lhs) res.A_emp = std::max(res.A_emp, v / prod);
        res.support_preserved = res.support_preserved && td.support_ok;
    }
    for (const auto& td : data) {
        for (std::size_t c = 0; c < children.size(); ++c) {
            double rhs = res.A_emp, rhs_triv = res.A_emp;
            for (int i = 0; i < k; ++i) {
                const WindowSums& ws = td.sums[static_cast<std::size_t>(i)];
                IVec b = base_index(children[c], i);
                CompensatedSum num, den;
                for (std::size_t w = 0; w < ws.index.size(); ++w) {
                    long dist = 0;
                    for (std::size_t a = 0; a < b.size(); ++a) dist = std::max(dist, std::labs(ws.index[w][a] - b[a]));
                    if (dist > J) continue;
                    double dR = static_cast<double>(std::max(0L, dist - 1));
                    num.add(std::pow(1 + dR * dR, -0.5 * wexp) * ws.weighted[w]);
                    den.add(ws.trivial[w]);
                }
                double fnorm = td.norms[static_cast<std::size_t>(i)];
                // Normalized so that unit weights give back ||f_i||.
                rhs *= fnorm * std::sqrt(num.value() / den.value());
                rhs_triv *= fnorm;
            }
            res.max_ratio = std::max(res.max_ratio, td.lhs[c] / rhs);
            res.trivial_ratio = std::max(res.trivial_ratio, td.lhs[c] / rhs_triv);
        }
    }
    return res;
}

} // namespace mlr
