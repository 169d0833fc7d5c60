#include "mlr/extension.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <limits>

using namespace mlr;
using testing::rel_diff;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Hypersurface flat_surface(int n, double half) {
    return Hypersurface::from_frame(Frame::orthonormal(n + 1), n, Domain::box(Vec::Constant(n, half)), Graph::flat());
}

Hypersurface paraboloid(int n, double half, double curvature = 1.0) {
    return Hypersurface::from_frame(Frame::orthonormal(n + 1), n, Domain::box(Vec::Constant(n, half)),
                                    Graph::quadratic_form(curvature * Mat::Identity(n, n)));
}

FrequencyDensity random_density(const Hypersurface& s, double h, Rng& rng) {
    return make_density(s, Vec::Constant(s.dim(), h), [&](const Vec&) { return cplx(rng.normal(), rng.normal()); });
}

Field random_field(const SpatialGrid& g, Rng& rng) {
    Field f{g, std::vector<cplx>(g.grid.size())};
    for (auto& v : f.values) v = cplx(rng.normal(), rng.normal()) * std::pow(rng.uniform(), 3);
    return f;
}

double max_abs(const std::vector<cplx>& v) {
    double m = 0;
    for (const auto& x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace

TEST_CASE("extend: zero density gives the zero field") {
    auto s = paraboloid(2, 0.3);
    auto f = make_density(s, Vec::Constant(2, 0.02), [](const Vec&) { return cplx(0, 0); });
    auto grid = SpatialGrid::over(Mat::Identity(3, 3), LatticeBox::centered(3, 4), 0.5);
    for (const auto& v : extend(s, f, grid).values) CHECK(v == cplx(0, 0));
}

TEST_CASE("extend: pointwise bound by the L1 norm") {
    Rng rng(401);
    for (int n = 1; n <= 2; ++n) {
        auto s = paraboloid(n, 0.4, 0.7);
        auto grid = SpatialGrid::over(Mat::Identity(n + 1, n + 1), LatticeBox::centered(n + 1, 6), 0.5);
        for (int t = 0; t < 5; ++t) {
            auto f = random_density(s, 0.04, rng);
            Field e = extend(s, f, grid);
            CHECK(max_abs(e.values) <= f.l1_norm() * (1 + 1e-12));
        }
    }
}

TEST_CASE("extend: indicator on a flat line is a sinc") {
    const double a = 1.0, h = 1.0 / 256;
    auto s = flat_surface(1, a);
    auto f = make_density(s, Vec::Constant(1, h), [](const Vec&) { return cplx(1, 0); });
    // Spatial axis 0 carries x' (along the tangent), axis 1 carries x_1 (along N).
    auto grid = SpatialGrid::over(Mat::Identity(2, 2), LatticeBox{Vec::Constant(2, -8.05), Vec::Constant(2, 8.05)}, 0.1);
    Field e = extend(s, f, grid);
    double worst = 0;
    for (std::size_t p = 0; p < e.values.size(); ++p) {
        Vec x = grid.standard_point(p);
        double exact = std::abs(x[0]) < 1e-12 ? 2 * a : 2 * std::sin(a * x[0]) / x[0];
        worst = std::max(worst, std::abs(e.values[p] - exact));
    }
    CHECK(worst <= 1e-4 * 2 * a);
}

TEST_CASE("property: extend is linear") {
    Rng rng(402);
    for (int n = 1; n <= 2; ++n) {
        auto s = paraboloid(n, 0.3);
        auto grid = SpatialGrid::over(Mat::Identity(n + 1, n + 1), LatticeBox::centered(n + 1, 5), 0.5);
        for (int t = 0; t < 5; ++t) {
            auto f = random_density(s, 0.04, rng);
            auto g = random_density(s, 0.04, rng);
            cplx a(rng.normal(), rng.normal()), b(rng.normal(), rng.normal());
            FrequencyDensity comb = f;
            for (std::size_t p = 0; p < comb.f.values.size(); ++p) comb.f.values[p] = a * f.f.values[p] + b * g.f.values[p];
            Field ef = extend(s, f, grid), eg = extend(s, g, grid), ec = extend(s, comb, grid);
            double err = 0, scale = 0;
            for (std::size_t p = 0; p < ec.values.size(); ++p) {
                err = std::max(err, std::abs(ec.values[p] - a * ef.values[p] - b * eg.values[p]));
                scale = std::max(scale, std::abs(ec.values[p]));
            }
            CHECK(err <= 1e-10 * scale);
        }
    }
}

TEST_CASE("extend: separable and direct paths agree") {
    Rng rng(403);
    Frame f3 = Frame::create(testing::oblique_normals(3), 0.3);
    auto s = Hypersurface::from_frame(f3, 1, Domain::box(Vec::Constant(2, 0.3)),
                                      Graph::quadratic_form((Mat(2, 2) << 1, 0.2, 0.2, 0.5).finished()));
    auto f = random_density(s, 0.03, rng);
    auto grid = SpatialGrid::over(f3.basis(), LatticeBox::centered(3, 4), 0.5);
    ExtendOptions direct;
    direct.force_direct = true;
    Field a = extend(s, f, grid), b = extend(s, f, grid, direct);
    double err = 0;
    for (std::size_t p = 0; p < a.values.size(); ++p) err = std::max(err, std::abs(a.values[p] - b.values[p]));
    CHECK(err <= 1e-10 * max_abs(b.values));
}

TEST_CASE("extend: grid rules are enforced") {
    auto s = paraboloid(1, 0.5);
    auto coarse_xi = make_density(s, Vec::Constant(1, 0.1), [](const Vec&) { return cplx(1, 0); });
    auto grid = SpatialGrid::over(Mat::Identity(2, 2), LatticeBox::centered(2, 16), 0.5);
    CHECK_THROWS_AS(extend(s, coarse_xi, grid), GridRuleViolation);
    auto fine = make_density(s, Vec::Constant(1, 0.01), [](const Vec&) { return cplx(1, 0); });
    auto far = Hypersurface::from_frame(Frame::orthonormal(2), 1, Domain::box(Vec::Constant(1, 0.5)), Graph::flat(),
                                        (Vec(2) << 0, 5).finished());
    auto fine_far = make_density(far, Vec::Constant(1, 0.01), [](const Vec&) { return cplx(1, 0); });
    CHECK_THROWS_AS(extend(far, fine_far, grid), GridRuleViolation);
    CHECK_NOTHROW(extend(s, fine, grid));
}

TEST_CASE("lp_quasinorm examples") {
    auto grid = SpatialGrid::over(Mat::Identity(2, 2), LatticeBox{Vec::Zero(2), Vec::Ones(2)}, 0.1);
    Field one{grid, std::vector<cplx>(grid.grid.size(), cplx(1, 0))};
    for (double p : {0.5, 2.0 / 3, 1.0, 2.0, 3.0, kInf}) CHECK(lp_quasinorm(one, p) == doctest::Approx(1.0).epsilon(1e-12));
    Rng rng(404);
    Field f = random_field(grid, rng);
    for (double p : {2.0 / 3, 1.0, 2.0}) {
        cplx c(-2.5, 1.0);
        Field g = f;
        for (auto& v : g.values) v *= c;
        CHECK(lp_quasinorm(g, p) == doctest::Approx(std::abs(c) * lp_quasinorm(f, p)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(lp_quasinorm(f, 0.0), InvalidArgument);
    CHECK_THROWS_AS(lp_quasinorm(f, 1.0, LatticeBox{Vec::Zero(2), Vec::Constant(2, 2.0)}), InvalidArgument);
}

TEST_CASE("property: quasi-triangle inequality in the p-th power") {
    Rng rng(405);
    auto grid = SpatialGrid::over(Mat::Identity(3, 3), LatticeBox::centered(3, 2), 0.25);
    for (double p : {2.0 / 3, 1.0, 0.5}) {
        for (int t = 0; t < 100; ++t) {
            Field f = random_field(grid, rng), g = random_field(grid, rng);
            Field sum = f;
            for (std::size_t q = 0; q < sum.values.size(); ++q) sum.values[q] += g.values[q];
            double lhs = std::pow(lp_quasinorm(sum, p), p);
            double rhs = std::pow(lp_quasinorm(f, p), p) + std::pow(lp_quasinorm(g, p), p);
            CHECK(lhs <= rhs * (1 + 1e-12));
        }
    }
}

TEST_CASE("property: region monotonicity") {
    Rng rng(406);
    auto grid = SpatialGrid::over(Mat::Identity(2, 2), LatticeBox::centered(2, 8), 0.25);
    for (int t = 0; t < 50; ++t) {
        Field f = random_field(grid, rng);
        double a = rng.uniform(0.5, 2), b = a + rng.uniform(0, 2);
        for (double p : {2.0 / 3, 1.0, 2.0, kInf}) {
            double small = lp_quasinorm(f, p, LatticeBox::centered(2, 2 * a));
            double big = lp_quasinorm(f, p, LatticeBox::centered(2, 2 * b));
            CHECK(small <= big * (1 + 1e-12));
        }
    }
}

TEST_CASE("commutator: trivial slice, flat surface and curved surface") {
    for (int n = 1; n <= 2; ++n) {
        auto curved = Hypersurface::from_frame(Frame::orthonormal(n + 1), 0, Domain::box(Vec::Constant(n, 1.0)),
                                               Graph::quadratic_form(0.8 * Mat::Identity(n, n)));
        auto flat = Hypersurface::from_frame(Frame::orthonormal(n + 1), 0, Domain::box(Vec::Constant(n, 1.0)), Graph::flat());
        auto bump = [](const Vec& xi) {
            double t = xi.squaredNorm() / 0.64;
            return cplx(t < 1 ? std::exp(-1 / (1 - t)) : 0.0, 0);
        };
        auto fc = make_density(curved, Vec::Constant(n, 1.0 / 32), bump);
        auto ff = make_density(flat, Vec::Constant(n, 1.0 / 32), bump);
        Vec x0 = Vec::Zero(n);
        CommutatorOptions slice;
        CHECK(commutator_check(curved, fc, x0, 1, slice) <= 1e-8);
        CommutatorOptions full;
        full.x1_values = {-8, -4, 0, 4, 8};
        CHECK(commutator_check(flat, ff, x0, 1, full) <= 1e-6);
        CHECK(commutator_check(curved, fc, x0, 1, full) <= 1e-4);
        Vec shifted = Vec::Constant(n, 0.7);
        CHECK(commutator_check(curved, fc, shifted, 1, full) <= 1e-4);
    }
}

TEST_CASE("margin_of examples") {
    const double delta = 0.25;
    auto s = flat_surface(2, 0.5);
    auto f = make_density(s, Vec::Constant(2, 0.01),
                          [&](const Vec& xi) { return cplx(xi.norm() <= delta / 2 ? 1.0 : 0.0, 0); });
    double reach = 0;
    for (std::size_t p = 0; p < f.f.values.size(); ++p)
        if (std::abs(f.f.values[p]) > 0) reach = std::max(reach, f.f.grid.point(p).norm());
    Margin m = margin_of(f, delta, false);
    CHECK(m.value == doctest::Approx(2 * delta - reach).epsilon(1e-14));
    CHECK(m.value >= 1.5 * delta);
    CHECK(m.value <= 1.5 * delta + 0.01 * std::sqrt(2.0));

    auto wide = flat_surface(1, 2 * delta);
    auto g = make_density_on(wide, GridSpec::cell_centered(Vec::Constant(1, -2 * delta - 0.005), Vec::Constant(1, 2 * delta + 0.005), {101}),
                             [](const Vec&) { return cplx(1, 0); });
    CHECK(margin_of(g, delta, false).value == doctest::Approx(0.0).epsilon(1e-12));
    auto zero = make_density(s, Vec::Constant(2, 0.05), [](const Vec&) { return cplx(0, 0); });
    CHECK(margin_of(zero, delta, false).empty_support);
}

TEST_CASE("property: refined margin is at least the plain margin") {
    Rng rng(407);
    auto s = flat_surface(2, 0.4);
    for (int t = 0; t < 100; ++t) {
        Vec c(2);
        c << rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3);
        double rad = rng.uniform(0.02, 0.2);
        auto f = make_density(s, Vec::Constant(2, 0.02), [&](const Vec& xi) { return cplx((xi - c).norm() < rad ? 1.0 : 0.0, 0); });
        f.primed_axes = {0};
        Margin plain = margin_of(f, 0.25, false), refined = margin_of(f, 0.25, true);
        CHECK(refined.value >= plain.value - 1e-15);
    }
    auto f = make_density(s, Vec::Constant(2, 0.05), [](const Vec&) { return cplx(1, 0); });
    CHECK_THROWS_AS(margin_of(f, 0.25, true), InvalidArgument);
}

TEST_CASE("linf_bound_ratio: constants are extremal, random densities stay below one") {
    Rng rng(408);
    for (int n = 1; n <= 2; ++n) {
        auto s = paraboloid(n, 0.3, 0.5);
        auto grid = SpatialGrid::over(Mat::Identity(n + 1, n + 1), LatticeBox::centered(n + 1, 4), 0.5);
        auto c = make_density(s, Vec::Constant(n, 0.02), [](const Vec&) { return cplx(1, 0); });
        CHECK(linf_bound_ratio(c, s, grid) == doctest::Approx(1.0).epsilon(1e-3));
        for (int t = 0; t < 50; ++t) {
            auto f = random_density(s, 0.02, rng);
            CHECK(linf_bound_ratio(f, s, grid) <= 1 + 1e-3);
        }
    }
}

TEST_CASE("linf_bound_ratio: slab indicator scales like sqrt(mu)") {
    Mat h(3, 2);
    h << 1, 0, 0, 1, 0, 0;
    auto grid = SpatialGrid::over(Mat::Identity(3, 3), LatticeBox::centered(3, 4), 0.5);
    std::vector<double> raw;
    for (double mu : {0.2, 0.1, 0.05, 0.025}) {
        // Surface with normal e3 lying in H, thickened across e2 to the slab width.
        auto s = Hypersurface::from_frame(Frame::orthonormal(3), 2, Domain::box((Vec(2) << 0.35, mu / 2).finished()), Graph::flat());
        auto f = make_density(s, (Vec(2) << 0.01, mu / 16).finished(), [](const Vec&) { return cplx(1, 0); });
        auto slab = SlabCondition::create(h, mu);
        double ratio = linf_bound_ratio(f, s, grid, &slab);
        raw.push_back(ratio * std::pow(mu, 0.5));
    }
    for (std::size_t a = 1; a < raw.size(); ++a) CHECK(std::abs(raw[a] / raw[a - 1] - std::sqrt(0.5)) <= 0.1 * std::sqrt(0.5));
}

TEST_CASE("mesh_measure counts nodes inside the domain") {
    auto s = Hypersurface::from_frame(Frame::orthonormal(3), 2, Domain::ball(2, 0.3), Graph::flat());
    auto f = make_density(s, Vec::Constant(2, 0.01), [](const Vec&) { return cplx(1, 0); });
    CHECK(mesh_measure(s, f) == doctest::Approx(kPi * 0.09).epsilon(5e-3));
}

TEST_CASE("field dump round trip") {
    Rng rng(409);
    Frame f3 = Frame::create(testing::oblique_normals(3), 0.3);
    auto grid = SpatialGrid::over(f3.basis(), LatticeBox::centered(3, 2), 0.5);
    Field f = random_field(grid, rng);
    auto path = (std::filesystem::temp_directory_path() / "mlr_field_roundtrip.bin").string();
    write_field(path, f);
    Field g = read_field(path);
    std::remove(path.c_str());
    CHECK(g.grid.same_as(f.grid));
    CHECK(g.values == f.values);
    CHECK_THROWS(read_field(path));
}
