// mlr-lab: command-line driver for the experiments.
//
// Exit codes: 0 all contracts met, 1 contract violation, 2 configuration error.

#include "mlr/experiments.hpp"
#include "mlr/loomis_whitney.hpp"
#include "mlr/parallel.hpp"
#include "mlr/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

using nlohmann::json;
using namespace mlr;

namespace {

template <class T>
T section_value(const json& section, const char* key, T fallback) {
    if (!section.contains(key)) return fallback;
    try {
        return section.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

json section_of(const json& raw, const char* name) {
    if (!raw.contains(name)) return json::object();
    if (!raw[name].is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
    return raw[name];
}

std::uint64_t seed_of(const json& raw) { return section_value<std::uint64_t>(raw, "seed", 1); }

Report base_report(const std::string& kind, const json& raw) {
    Report r;
    r.kind = kind;
    r.metadata = {{"config_hash", fnv1a_hex(raw.dump())}, {"seed", seed_of(raw)}, {"tool_version", kToolVersion}};
    r.config = raw;
    return r;
}

Frame frame_from(const json& list, int d, double nu) {
    std::vector<Vec> normals;
    for (const auto& v : list) {
        auto c = v.get<std::vector<double>>();
        if (static_cast<int>(c.size()) != d) throw ConfigError("normal has the wrong dimension");
        normals.push_back(Eigen::Map<const Vec>(c.data(), d).normalized());
    }
    try {
        return Frame::create(normals, nu);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("invalid frame: ") + e.what());
    }
}

// Oblique frames with |det| well above 0.3.
json default_oblique(int d) {
    if (d == 2) return json::array({{1.0, 0.0}, {0.5, 0.8660254037844386}});
    return json::array({{1.0, 0.0, 0.0}, {0.6, 0.8, 0.0}, {0.3, 0.4, 0.8660254037844386}});
}

// ---------------------------------------------------------------- check-lw

Report run_check_lw(const json& raw) {
    Report rep = base_report("check_lw", raw);
    const json s = section_of(raw, "lw");
    const std::uint64_t seed = seed_of(raw);
    const long m1 = section_value<long>(s, "window", 4);
    const int trials = section_value<int>(s, "trials", 1000);
    const int tuples = section_value<int>(s, "tuples", 100);
    const long m2 = section_value<long>(s, "window_n2", 3);
    const double oracle_max = section_value<double>(s, "oracle_max", 1.05);
    const double agree = section_value<double>(s, "agreement_tol", 1e-10);
    const int holder_pairs = section_value<int>(s, "holder_pairs", 1000);
    const long W = section_value<long>(s, "companion_window", 64);
    const double companion_tol = section_value<double>(s, "companion_tol", 0.02);
    rep.columns = {"check", "n", "value", "reference"};

    // Plain LW constant for the orthonormal frame, n = 1.
    OracleResult oracle = lw_constant_oracle(Frame::orthonormal(2), m1, trials, LWMode::Plain, seed);
    rep.rows.push_back({"oracle_max_ratio", 1, oracle.best, 1.0});
    rep.contracts.push_back(make_contract("n=1 oracle max ratio", oracle.best, "in", 1.0 - 1e-12, oracle_max));

    // Product extremizers g_i = tensor products of one family of vectors.
    double worst_product = 0;
    for (int n : {1, 2}) {
        LWProblem prob = lw_plain(n, m1);
        Rng rng(mix_seed(seed, 101, static_cast<std::uint64_t>(n)));
        std::vector<std::vector<double>> u(static_cast<std::size_t>(n + 1));
        for (auto& v : u) {
            v.resize(static_cast<std::size_t>(2 * m1 + 1));
            for (auto& x : v) x = rng.uniform(0.1, 1.0);
        }
        std::vector<LatticeDensity> g;
        for (int i = 0; i <= n; ++i) {
            auto d = LatticeDensity::zeros(CellOwner::induced(i), n, m1);
            for (std::size_t f = 0; f < d.values.size(); ++f) {
                std::size_t rem = f;
                double v = 1;
                for (int a = n - 1; a >= 0; --a) {
                    std::size_t idx = rem % u[0].size();
                    rem /= u[0].size();
                    v *= u[static_cast<std::size_t>(prob.kept[i][a])][idx];
                }
                d.values[f] = v;
            }
            g.push_back(std::move(d));
        }
        double r = lw_ratio(prob, g);
        worst_product = std::max(worst_product, std::abs(r - 1));
        rep.rows.push_back({"product_extremizer", n, r, 1.0});
    }
    rep.contracts.push_back(make_contract("product extremizer ratio |r - 1|", worst_product, "<=", 1e-12));

    // n = 2 direct sum against the slicing oracle; refined k = n = 2 against its per-slice form.
    auto agreement = [&](const LWProblem& prob, std::uint64_t salt) {
        double worst = 0;
        for (int t = 0; t < tuples; ++t) {
            auto g = random_lw_densities(prob, mix_seed(seed, salt, static_cast<std::uint64_t>(t)));
            double a = lw_lhs(prob, g), b = lw_lhs_sliced(prob, g);
            worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
        }
        return worst;
    };
    double plain2 = agreement(lw_plain(2, m2), 202);
    double refined2 = agreement(lw_refined(2, 2, m2), 303);
    rep.rows.push_back({"plain_direct_vs_sliced", 2, plain2, 0.0});
    rep.rows.push_back({"refined_direct_vs_sliced", 2, refined2, 0.0});
    rep.contracts.push_back(make_contract("n=2 direct vs slicing oracle", plain2, "<=", agree));
    rep.contracts.push_back(make_contract("refined k=n=2 direct vs per-slice", refined2, "<=", agree));

    // Sequence Hoelder step and the companion window sum.
    for (int n : {1, 2, 3}) {
        Rng rng(mix_seed(seed, 404, static_cast<std::uint64_t>(n)));
        int failures = 0;
        double worst = 0;
        for (int t = 0; t < holder_pairs; ++t) {
            std::size_t len = static_cast<std::size_t>(rng.integer(1, 64));
            std::vector<double> a(len), b(len);
            for (auto& v : a) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform(-1, 1) * std::exp(rng.normal());
            for (auto& v : b) v = rng.uniform() < 0.3 ? 0.0 : rng.uniform(-1, 1) * std::exp(rng.normal());
            HolderResult h = sequence_holder_check(a, b, n);
            if (!h.pass) ++failures;
            if (h.rhs > 0) worst = std::max(worst, h.lhs / h.rhs);
        }
        rep.rows.push_back({"holder_worst_ratio", n, worst, 1.0});
        rep.contracts.push_back(make_contract("sequence Hoelder failures n=" + std::to_string(n),
                                              static_cast<double>(failures), "<=", 0.0));
        double c1 = companion_window_sum(n, W), c2 = companion_window_sum(n, 2 * W);
        double change = std::abs(c2 / c1 - 1);
        rep.rows.push_back({"companion_window_sum", n, c1, c2});
        rep.contracts.push_back(
            make_contract("companion sum doubling change n=" + std::to_string(n), change, "<=", companion_tol));
    }
    return rep;
}

// --------------------------------------------------------- check-partition

Report run_check_partition(const json& raw) {
    Report rep = base_report("check_partition", raw);
    const json s = section_of(raw, "partition");
    const std::uint64_t seed = seed_of(raw);
    const auto dims = section_value<std::vector<int>>(s, "dims", {1, 2});
    const auto scales = section_value<std::vector<double>>(s, "scales", {1, 4, 16});
    const int points = section_value<int>(s, "points", 1000);
    const double nu = section_value<double>(s, "nu", 0.3);
    const double tol = section_value<double>(s, "tolerance", 1e-6);
    const double spread = section_value<double>(s, "spread", 10.0);
    rep.columns = {"m", "r", "max_deviation", "max_tail_bound"};
    double worst_all = 0;
    for (int m : dims) {
        if (m < 1 || m > 2) throw ConfigError("partition dims must be 1 or 2");
        const int d = m + 1;
        const std::string key = "normals_" + std::to_string(d) + "d";
        Frame frame = frame_from(s.contains(key) ? s[key] : default_oblique(d), d, nu);
        auto bump = make_bump(m);
        for (double r : scales) {
            InducedLattice L = induced_lattice(frame, d - 1);
            std::vector<double> dev(static_cast<std::size_t>(points)), tail(static_cast<std::size_t>(points));
            parallel_for(static_cast<std::size_t>(points), [&](std::size_t p) {
                Rng rng(mix_seed(seed, static_cast<std::uint64_t>(m * 1000 + r), p));
                Vec x(d);
                for (int a = 0; a < d; ++a) x[a] = rng.uniform(-spread * r, spread * r);
                PartitionSum ps = partition_sum(*bump, L, r, x, 0, tol);
                dev[p] = std::abs(ps.value - 1);
                tail[p] = ps.tail_bound;
            });
            double wd = *std::max_element(dev.begin(), dev.end());
            double wt = *std::max_element(tail.begin(), tail.end());
            worst_all = std::max(worst_all, wd);
            rep.rows.push_back({m, r, wd, wt});
            rep.contracts.push_back(make_contract(
                "partition of unity m=" + std::to_string(m) + " r=" + format_double(r), wd, "<=", tol));
        }
    }
    rep.summary["max_deviation"] = worst_all;

    // Empirical weighted almost-orthogonality constants; reported, not asserted.
    const json sn = section_of(s, "sn");
    if (!sn.empty()) {
        const auto orders = section_value<std::vector<int>>(sn, "orders", {1, 2});
        const int inputs = section_value<int>(sn, "inputs", 50);
        const int J = section_value<int>(sn, "J", 60);
        Frame frame = frame_from(s.contains("normals_2d") ? s["normals_2d"] : default_oblique(2), 2, nu);
        InducedLattice L = induced_lattice(frame, 0);
        auto bump = make_bump(1);
        json constants = json::object();
        for (int N : orders) {
            std::vector<double> ratio(static_cast<std::size_t>(inputs));
            parallel_for(ratio.size(), [&](std::size_t t) {
                Rng rng(mix_seed(seed, 77 + static_cast<std::uint64_t>(N), t));
                double w = rng.uniform(-2, 2), c = rng.uniform(-4, 4), sd = rng.uniform(0.5, 3);
                GridFunction g{CellOwner::induced(0), GridSpec::cell_centered(Vec::Constant(1, -8.1), Vec::Constant(1, 8.1), {81}), {}};
                for (std::size_t q = 0; q < g.grid.size(); ++q) {
                    const double x = g.grid.point(q)[0];
                    g.values.push_back(std::polar(std::exp(-(x - c) * (x - c) / (2 * sd * sd)), w * x));
                }
                ratio[t] = verify_SN(*bump, L, g, 1.0, N, J);
            });
            constants["N=" + std::to_string(N)] = *std::max_element(ratio.begin(), ratio.end());
        }
        rep.summary["empirical_C_N"] = constants;
    }
    return rep;
}

// -------------------------------------------------------- check-commutator

Report run_check_commutator(const json& raw) {
    Report rep = base_report("check_commutator", raw);
    const json s = section_of(raw, "commutator");
    const auto dims = section_value<std::vector<int>>(s, "dims", {1, 2});
    const auto orders = section_value<std::vector<int>>(s, "orders", {1});
    const double curvature = section_value<double>(s, "curvature", 0.8);
    const double a = section_value<double>(s, "half_width", 1.0);
    const double width = section_value<double>(s, "bump_width", 0.8);
    const double h = section_value<double>(s, "h_xi", 1.0 / 32);
    const double x1_max = section_value<double>(s, "x1_max", 8.0);
    const int x1_count = section_value<int>(s, "x1_count", 9);
    const double extent = section_value<double>(s, "x_extent", 8.0);
    const double tol = section_value<double>(s, "tolerance", 1e-4);
    const double slice_tol = section_value<double>(s, "slice_tolerance", 1e-8);
    if (x1_count < 2) throw ConfigError("x1_count must be at least 2");
    rep.columns = {"n", "N", "x1_range", "discrepancy"};
    for (int n : dims) {
        if (n < 1 || n > 2) throw ConfigError("commutator dims must be 1 or 2");
        Frame frame = Frame::orthonormal(n + 1);
        Hypersurface surf = Hypersurface::from_frame(frame, 0, Domain::box(Vec::Constant(n, a)),
                                                     Graph::quadratic_form(curvature * Mat::Identity(n, n)));
        DensitySpec bump;
        bump.kind = DensitySpec::Kind::Bump;
        bump.domain = surf.domain();
        bump.center = Vec::Zero(n);
        bump.width = width;
        FrequencyDensity f = make_density(surf, Vec::Constant(n, h), [&](const Vec& xi) { return cplx(bump(xi), 0); });
        Vec x0 = Vec::Zero(n);
        if (s.contains("x0")) {
            auto v = s["x0"].get<std::vector<double>>();
            for (int k = 0; k < n && k < static_cast<int>(v.size()); ++k) x0[k] = v[static_cast<std::size_t>(k)];
        }
        for (int N : orders) {
            CommutatorOptions full;
            full.x_extent = extent;
            full.x1_values.clear();
            for (int c = 0; c < x1_count; ++c) full.x1_values.push_back(-x1_max + 2 * x1_max * c / (x1_count - 1));
            double disc = commutator_check(surf, f, x0, N, full);
            CommutatorOptions slice;
            slice.x_extent = extent;
            double disc0 = commutator_check(surf, f, x0, N, slice);
            rep.rows.push_back({n, N, x1_max, disc});
            rep.rows.push_back({n, N, 0.0, disc0});
            const std::string tag = " n=" + std::to_string(n) + " N=" + std::to_string(N);
            if (N == 1) rep.contracts.push_back(make_contract("commutator |x1|<=" + format_double(x1_max) + tag, disc, "<=", tol));
            rep.contracts.push_back(make_contract("commutator x1=0 slice" + tag, disc0, "<=", slice_tol));
        }
    }
    return rep;
}

// ------------------------------------------------------------------ sweeps

void expect_contracts(const json& raw, const SweepReport& sr, std::vector<Contract>& out) {
    const json e = section_of(raw, "expect");
    if (e.contains("exponent_max"))
        out.push_back(make_contract("fitted exponent", sr.exponent, "<=", e["exponent_max"].get<double>()));
    if (e.contains("exponent_min"))
        out.push_back(make_contract("fitted exponent", sr.exponent, ">=", e["exponent_min"].get<double>()));
    if (e.contains("slope_min") && e.contains("slope_max"))
        out.push_back(make_contract("fitted slope", sr.exponent, "in", e["slope_min"].get<double>(),
                                    e["slope_max"].get<double>()));
    if (e.contains("oracle_rel_tol") && !sr.oracle_rel_diff.empty()) {
        double worst = *std::max_element(sr.oracle_rel_diff.begin(), sr.oracle_rel_diff.end());
        out.push_back(make_contract("Plancherel oracle agreement", worst, "<=", e["oracle_rel_tol"].get<double>()));
    }
}

Report run_sweep_ar(const json& raw) {
    ScenarioConfig cfg = ScenarioConfig::from_json(raw);
    SweepReport sr = sweep_R(cfg);
    expect_contracts(raw, sr, sr.contracts);
    Report rep = sr.to_report();
    rep.kind = "sweep_ar";
    return rep;
}

// Endpoint bound ||E f||_inf <= |U|^{1/2} ||f|| and the mu^{(n+1-k)/2} law for slab indicators.
void linf_checks(const json& raw, const ScenarioConfig& cfg, Report& rep) {
    const json s = section_of(raw, "linf");
    if (s.empty()) return;
    const int densities = section_value<int>(s, "densities", 100);
    const double tol = section_value<double>(s, "tolerance", 1e-3);
    const double law_tol = section_value<double>(s, "law_tolerance", 0.1);
    const double R = cfg.R.front();
    Scenario sc = build_scenario(cfg);
    const int surface = cfg.k > 1 ? 1 : 0;
    const Hypersurface& surf = sc.surfaces[static_cast<std::size_t>(surface)];
    SpatialGrid grid = SpatialGrid::over(sc.region_basis, LatticeBox::centered(cfg.n + 1, R), cfg.h_x);
    Vec h = density_spacing(sc, surface, grid);
    std::vector<double> ratios(static_cast<std::size_t>(densities));
    parallel_for(ratios.size(), [&](std::size_t t) {
        Rng rng(mix_seed(cfg.seed, 505, t));
        // Even draws are positive (near the extremal case), odd draws complex noise.
        const bool positive = t % 2 == 0;
        FrequencyDensity f = make_density(surf, h, [&](const Vec&) {
            return positive ? cplx(rng.uniform(0.5, 1.0), 0.0) : cplx(rng.normal(), rng.normal());
        });
        ratios[t] = linf_bound_ratio(f, surf, grid);
    });
    double worst = *std::max_element(ratios.begin(), ratios.end());
    rep.summary["linf_plain_max_ratio"] = worst;
    rep.contracts.push_back(make_contract("L-infinity endpoint ratio", worst, "<=", 1 + tol));

    if (!cfg.slab) return;
    std::vector<double> law;
    for (double mu : cfg.mu_list) {
        Scenario scm = build_scenario(cfg, mu);
        const Hypersurface& s1 = scm.surfaces[0];
        DensitySpec slab = family_member(scm, 0, 0);
        slab.kind = DensitySpec::Kind::Slab;
        slab.slab_axes = cfg.slab->xi_double_prime_axes;
        slab.slab_half = mu / 2;
        FrequencyDensity f = make_density(s1, density_spacing(scm, 0, grid), [&](const Vec& xi) { return cplx(slab(xi), 0); });
        law.push_back(linf_bound_ratio(f, s1, grid, &*scm.slab));
    }
    json arr = json::array();
    double worst_step = 0;
    for (std::size_t i = 0; i < law.size(); ++i) {
        arr.push_back(law[i]);
        if (i > 0) worst_step = std::max(worst_step, std::abs(law[i] / law[i - 1] - 1));
    }
    rep.summary["linf_slab_normalized"] = arr;
    rep.contracts.push_back(make_contract("slab indicator mu^{(n+1-k)/2} law per halving", worst_step, "<=", law_tol));
}

Report run_sweep_mu(const json& raw) {
    ScenarioConfig cfg = ScenarioConfig::from_json(raw);
    SweepReport sr = sweep_mu(cfg);
    expect_contracts(raw, sr, sr.contracts);
    Report rep = sr.to_report();
    rep.kind = "sweep_mu";
    rep.summary["expected_slope"] = (cfg.n + 1 - cfg.k) / 2.0;
    linf_checks(raw, cfg, rep);
    return rep;
}

// ----------------------------------------------------------------- offdiag

Report run_offdiag(const json& raw) {
    ScenarioConfig cfg = ScenarioConfig::from_json(raw);
    Report rep = base_report("offdiag", raw);
    const json s = section_of(raw, "offdiag");
    const double R = section_value<double>(s, "R", 8.0);
    const auto steps = section_value<std::vector<long>>(s, "steps", {0, 2, 3, 5, 9, 17});
    const int J = section_value<int>(s, "J", 20);
    const double drop = section_value<double>(s, "drop_factor", 3.0);
    const double beyond = section_value<double>(s, "drop_beyond", 2.0);  // in units of R
    OffdiagResult res = offdiagonal_decay(cfg, R, steps, J);
    rep.columns = {"ray", "steps", "distance", "value", "weight"};
    for (const auto& row : res.rows) rep.rows.push_back({row.ray, row.steps, row.distance, row.value, row.weight});
    rep.summary = {{"R", res.R},
                   {"N", res.N},
                   {"p", res.p},
                   {"total_p", res.total_p},
                   {"pieces_p", res.pieces_p},
                   {"tail_p", res.tail_p},
                   {"diagonal_share", res.diagonal_share},
                   {"diagonal_largest", res.diagonal_largest},
                   {"recomposition_error", res.recomposition_error}};
    double worst_monotone = 0, worst_drop = std::numeric_limits<double>::infinity();
    for (std::size_t r = 1; r < res.rows.size(); ++r) {
        const DecayRow& a = res.rows[r - 1];
        const DecayRow& b = res.rows[r];
        if (a.ray != b.ray) continue;
        worst_monotone = std::max(worst_monotone, b.value / a.value);
        if (a.distance > beyond * R && std::abs(b.distance - 2 * a.distance) < 1e-9 * R)
            worst_drop = std::min(worst_drop, a.value / b.value);
    }
    rep.contracts.push_back(make_contract("decay monotone along rays (max successive ratio)", worst_monotone, "<=", 1.0));
    if (std::isfinite(worst_drop))
        rep.contracts.push_back(make_contract("drop per doubling beyond " + format_double(beyond) + "R", worst_drop, ">=", drop));
    // The p-th power triangle inequality only holds for p <= 1 (k >= 3).
    if (res.p <= 1)
        rep.contracts.push_back(
            make_contract("quasi-triangle total^p / sum pieces^p", res.total_p / res.pieces_p, "<=", 1.0 + 1e-9));
    rep.contracts.push_back(make_contract("diagonal piece largest", res.diagonal_largest ? 1.0 : 0.0, ">=", 1.0));
    return rep;
}

// --------------------------------------------------------- induction-check

Report run_induction(const json& raw) {
    ScenarioConfig cfg = ScenarioConfig::from_json(raw);
    Report rep = base_report("induction_check", raw);
    const json s = section_of(raw, "induction");
    const double R = section_value<double>(s, "R", 16.0);
    const std::string variant = section_value<std::string>(s, "variant", "plain");
    const int J = section_value<int>(s, "J", cfg.truncation > 0 ? cfg.truncation : 4);
    const double stability = section_value<double>(s, "stability_tol", 0.1);
    const double trivial_tol = section_value<double>(s, "trivial_tol", 1e-9);
    InductionResult a = induction_step_check(cfg, R, variant, J);
    InductionResult b = induction_step_check(cfg, R, variant, 2 * J);
    rep.columns = {"J", "A_emp", "max_ratio", "trivial_ratio", "cells", "support_preserved"};
    for (const auto* r : {&a, &b})
        rep.rows.push_back({r->J, r->A_emp, r->max_ratio, r->trivial_ratio, r->cells, r->support_preserved});
    rep.summary = {{"R", R}, {"variant", variant}, {"weight_exponent", cfg.effective_weight_exponent()}};
    rep.contracts.push_back(make_contract("max ratio finite", std::isfinite(a.max_ratio) && std::isfinite(b.max_ratio) ? 1.0 : 0.0, ">=", 1.0));
    rep.contracts.push_back(make_contract("trivial weights ratio", std::max(a.trivial_ratio, b.trivial_ratio), "<=", 1 + trivial_tol));
    rep.contracts.push_back(make_contract("stability under doubling J", std::abs(b.max_ratio / a.max_ratio - 1), "<=", stability));
    if (variant == "strip")
        rep.contracts.push_back(make_contract("xi'' support preserved",
                                              a.support_preserved && b.support_preserved ? 1.0 : 0.0, ">=", 1.0));
    return rep;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mlr-lab: numerical lab for multilinear restriction estimates"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1, 1);
    std::string config_path, out_dir = ".", format = "json";
    std::uint64_t seed = 0;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"check-lw", "discrete Loomis-Whitney and sequence Hoelder checks"},
        {"check-partition", "partition of unity on oblique induced lattices"},
        {"check-commutator", "commutator identity for the extension operator"},
        {"sweep-ar", "empirical A(R) over an R list with a log-log fit"},
        {"sweep-mu", "mu-gain sweep at fixed R"},
        {"offdiag", "off-diagonal wave-packet decay table"},
        {"induction-check", "one induction step (plain or strip variant)"}};
    std::vector<CLI::App*> subs;
    std::vector<CLI::Option*> seed_opts;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON scenario file")->required();
        seed_opts.push_back(sub->add_option("--seed", seed, "override the config seed"));
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--format", format, "json, csv or both")->check(CLI::IsMember({"json", "csv", "both"}));
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    std::string name;
    bool seed_given = false;
    for (std::size_t c = 0; c < subs.size(); ++c)
        if (subs[c]->parsed()) {
            name = commands[c].first;
            seed_given = seed_opts[c]->count() > 0;
        }

    try {
        json raw;
        {
            std::ifstream is(config_path);
            if (!is) throw ConfigError("cannot open config: " + config_path);
            try {
                raw = json::parse(is);
            } catch (const json::exception& e) {
                throw ConfigError("config " + config_path + " is not valid JSON: " + e.what());
            }
        }
        if (!raw.is_object()) throw ConfigError("config must be a JSON object");
        if (seed_given) raw["seed"] = seed;

        Report rep;
        if (name == "check-lw")
            rep = run_check_lw(raw);
        else if (name == "check-partition")
            rep = run_check_partition(raw);
        else if (name == "check-commutator")
            rep = run_check_commutator(raw);
        else if (name == "sweep-ar")
            rep = run_sweep_ar(raw);
        else if (name == "sweep-mu")
            rep = run_sweep_mu(raw);
        else if (name == "offdiag")
            rep = run_offdiag(raw);
        else
            rep = run_induction(raw);

        std::string stem = name;
        std::replace(stem.begin(), stem.end(), '-', '_');
        ReportFormat fmt = format == "csv" ? ReportFormat::Csv : format == "both" ? ReportFormat::Both : ReportFormat::Json;
        emit_report(rep, out_dir, stem, fmt);
        for (const auto& c : rep.contracts)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << format_double(c.value) << " " << c.relation
                      << " " << format_double(c.threshold) << "\n";
        return rep.all_passed() ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 1;
    } catch (const InvalidArgument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
