#include "mlr/partition.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace mlr;
using testing::oblique_normals;
using testing::rel_diff;

namespace {

double psi(double rho) {
    double t = 4 * rho * rho;
    return t >= 1 ? 0.0 : std::exp(-1 / (1 - t));
}

// Trapezoid rule over [-1/2, 1/2]^m; psi vanishes to all orders at the boundary.
struct DirectBump {
    int m;
    int nodes;
    double c = 0;

    DirectBump(int m_, int nodes_) : m(m_), nodes(nodes_) {
        double l2 = 0, h = 1.0 / (nodes - 1);
        for_nodes([&](double r, double) { l2 += psi(r) * psi(r); });
        l2 *= std::pow(h, m);
        c = 1 / (std::pow(2 * kPi, m) * l2);
    }
    template <class F>
    void for_nodes(F&& fn) const {
        const double h = 1.0 / (nodes - 1);
        if (m == 1) {
            for (int a = 0; a < nodes; ++a) fn(std::abs(-0.5 + a * h), -0.5 + a * h);
            return;
        }
        for (int a = 0; a < nodes; ++a)
            for (int b = 0; b < nodes; ++b) {
                double x = -0.5 + a * h, y = -0.5 + b * h;
                fn(std::hypot(x, y), x);  // second argument: first coordinate
            }
    }
    // chi_0 at distance s along the first axis.
    double chi(double s) const {
        double acc = 0;
        for_nodes([&](double r, double x) { acc += psi(r) * std::cos(s * x); });
        acc *= std::pow(1.0 / (nodes - 1), m);
        return c * acc * acc;
    }
};

struct Refined {
    Frame frame;
    SlabCondition slab;
};

Refined refined() {
    Vec n1 = Vec::Unit(3, 0), n2 = (Vec(3) << 0.6, 0.8, 0).finished(), n3 = Vec::Unit(3, 2);
    Mat h(3, 2);
    h << 1, 0, 0, 1, 0, 0;
    return {Frame::create({n1, n2, n3}, 0.5), SlabCondition::create(h, 0.1)};
}

GridFunction grid_function(const GridSpec& g, const std::function<cplx(const Vec&)>& fn) {
    GridFunction out{CellOwner::induced(0), g, {}};
    out.values.resize(g.size());
    for (std::size_t p = 0; p < g.size(); ++p) out.values[p] = fn(g.point(p));
    return out;
}

GridSpec centered_grid(int m, int count, double h) {
    GridSpec g;
    g.counts.assign(static_cast<std::size_t>(m), count);
    g.spacing = Vec::Constant(m, h);
    g.origin = Vec::Constant(m, -(count / 2) * h);
    return g;
}

} // namespace

TEST_CASE("bump: normalization matches an independent quadrature") {
    for (int m = 1; m <= 2; ++m) {
        DirectBump direct(m, m == 1 ? 2001 : 401);
        CHECK(rel_diff(make_bump(m)->normalization(), direct.c) < 1e-9);
    }
}

TEST_CASE("bump: radial table matches direct quadrature of |psi_check|^2") {
    for (int m = 1; m <= 2; ++m) {
        auto bump = make_bump(m);
        DirectBump direct(m, m == 1 ? 2001 : 401);
        for (double s : {0.0, 0.5, 1.03125, 2.7, 5.0, 7.96875, 12.3, 19.0}) {
            double diff = std::abs(bump->radial(s) - direct.chi(s));
            CHECK(diff <= 1e-6 * bump->peak());
        }
    }
}

TEST_CASE("bump: unit mass and Fourier support in the unit ball") {
    // chi_0 is band-limited to |xi| <= 1, so a unit-step lattice sum is an exact
    // quadrature for its transform at |xi| < 2 pi - 1 (no aliasing).
    auto b1 = make_bump(1);
    auto hat1 = [&](double xi) {
        CompensatedSum acc;
        for (int k = -399; k <= 399; ++k) acc.add(b1->radial(std::abs(k)) * std::cos(k * xi));
        return acc.value();
    };
    CHECK(hat1(0.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(hat1(1.1)) <= 1e-8);
    CHECK(std::abs(hat1(2.0)) <= 1e-8);

    auto b2 = make_bump(2);
    auto hat2 = [&](double xi) {
        CompensatedSum acc;
        for (int k = -150; k <= 150; ++k)
            for (int l = -150; l <= 150; ++l) acc.add(b2->radial(std::hypot(k, l)) * std::cos(k * xi));
        return acc.value();
    };
    CHECK(hat2(0.0) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(hat2(1.1)) <= 1e-4 * hat2(0.0));
}

TEST_CASE("bump: values are nonnegative and the envelope dominates") {
    for (int m = 1; m <= 3; ++m) {
        auto b = make_bump(m);
        for (double s = 0; s < 450; s += 0.37) {
            CHECK(b->radial(s) >= 0);
            CHECK(b->envelope(s) >= b->radial(s) * (1 - 1e-12));
        }
    }
}

TEST_CASE("eval_window: peak at the cell center") {
    Frame f = Frame::create(oblique_normals(3), 0.3);
    auto b3 = make_bump(3);
    Cell q{{2, -1, 3}, 2.5, CellOwner::ambient()};
    Vec x = f.basis() * q.center();
    CHECK(eval_window(*b3, q, f, x) == doctest::Approx(b3->peak()).epsilon(1e-14));

    InducedLattice il = induced_lattice(f, 1);
    auto b2 = make_bump(2);
    Cell qi{{-1, 4}, 1.5, CellOwner::induced(1)};
    Vec y = il.tangent * (il.generator * qi.center());
    CHECK(eval_window(*b2, qi, il, y) == doctest::Approx(b2->peak()).epsilon(1e-12));
    CHECK_THROWS_AS(eval_window(*b2, q, il, y), InvalidArgument);
}

TEST_CASE("eval_window: strip windows are constant across H cap H_1") {
    auto s = refined();
    auto g = strip_geometry(s.frame, s.slab);
    auto b1 = make_bump(1);
    Strip st{{1}, 2.0};
    Rng rng(301);
    for (int t = 0; t < 100; ++t) {
        Vec x = testing::random_vec(rng, 3, 5);
        Vec v = (Vec(3) << rng.uniform(-30, 30), 0, rng.uniform(-30, 30)).finished();
        CHECK(std::abs(eval_window(*b1, st, g, x) - eval_window(*b1, st, g, x + v)) <= 1e-12);
    }
}

TEST_CASE("eval_window: far window against direct quadrature") {
    // The decay reaches 1e-4 of the peak only near 30 cells in this profile, so the
    // check at ten cells compares the value with the independent quadrature, and the
    // 1e-4 envelope is asserted at forty cells.
    for (int m = 1; m <= 2; ++m) {
        auto b = make_bump(m);
        DirectBump direct(m, m == 1 ? 2001 : 401);
        Vec y = Vec::Zero(m);
        y[0] = 10;
        CHECK(std::abs(b->radial(10.0) - direct.chi(10.0)) <= 1e-6 * b->peak());
        CHECK(b->envelope(40.0) <= 1e-4 * b->peak());
    }
}

TEST_CASE("partition_sum: equals one at random points") {
    Rng rng(302);
    for (int m = 1; m <= 2; ++m) {
        Frame f = Frame::create(oblique_normals(m + 1), 0.3);
        InducedLattice il = induced_lattice(f, m);
        auto b = make_bump(m);
        for (double r : {1.0, 4.0, 16.0}) {
            for (int t = 0; t < 100; ++t) {
                Vec x = testing::random_vec(rng, m + 1, 10 * r);
                auto ps = partition_sum(*b, il, r, x);
                CHECK(std::abs(ps.value - 1) <= 1e-6);
                CHECK(ps.tail_bound <= 1e-7);
            }
        }
    }
}

TEST_CASE("partition_sum: lattice point and cell corner agree") {
    for (int m = 1; m <= 2; ++m) {
        auto b = make_bump(m);
        auto at_point = partition_sum_coords(*b, Vec::Zero(m));
        auto at_corner = partition_sum_coords(*b, Vec::Constant(m, 0.5));
        CHECK(std::abs(at_point.value - at_corner.value) <= 2e-6);
    }
}

TEST_CASE("partition_sum: doubling J stays within the tail model") {
    for (int m = 1; m <= 2; ++m) {
        auto b = make_bump(m);
        Vec y = Vec::Constant(m, 0.3);
        for (int J : {40, 80, 130}) {
            double tail = b->tail_bound(J);
            if (tail > 1e-3) continue;
            auto a = partition_sum_coords(*b, y, J, 1.0);
            auto c = partition_sum_coords(*b, y, 2 * J, 1.0);
            CHECK(std::abs(a.value - c.value) <= tail);
        }
    }
    CHECK_THROWS_AS(partition_sum_coords(*make_bump(2), Vec::Zero(2), 4, 1e-6), ContractViolation);
}

TEST_CASE("fourier: zero maps to zero") {
    GridFunction g = grid_function(centered_grid(2, 9, 0.3), [](const Vec&) { return cplx(0, 0); });
    for (const auto& v : fourier_forward(g).values) CHECK(v == cplx(0, 0));
    for (const auto& v : fourier_inverse(g).values) CHECK(v == cplx(0, 0));
}

TEST_CASE("fourier: Parseval on random band-limited inputs") {
    Rng rng(303);
    for (int m = 1; m <= 2; ++m) {
        for (int t = 0; t < 10; ++t) {
            GridSpec grid = centered_grid(m, m == 1 ? 64 : 24, 0.25);
            std::vector<Vec> freq;
            std::vector<cplx> amp;
            for (int k = 0; k < 4; ++k) {
                Vec w(m);
                for (int a = 0; a < m; ++a) w[a] = rng.uniform(-kPi / 0.5, kPi / 0.5);
                freq.push_back(w);
                amp.emplace_back(rng.normal(), rng.normal());
            }
            auto g = grid_function(grid, [&](const Vec& x) {
                cplx acc = 0;
                for (int k = 0; k < 4; ++k) acc += amp[k] * std::polar(1.0, freq[k].dot(x));
                return acc * std::exp(-x.squaredNorm() / 4);
            });
            GridFunction fg = fourier_forward(g);
            CHECK(rel_diff(fg.l2_norm(), std::pow(2 * kPi, m / 2.0) * g.l2_norm()) <= 1e-6);
            GridFunction back = fourier_inverse(fg, &g.grid);
            double err = 0;
            for (std::size_t p = 0; p < g.values.size(); ++p) err = std::max(err, std::abs(back.values[p] - g.values[p]));
            double scale = 0;
            for (const auto& v : g.values) scale = std::max(scale, std::abs(v));
            CHECK(err <= 1e-8 * scale);
        }
    }
}

TEST_CASE("fourier: Gaussian transform") {
    GridSpec grid = centered_grid(1, 201, 0.1);
    auto g = grid_function(grid, [](const Vec& x) { return cplx(std::exp(-x[0] * x[0] / 2), 0); });
    GridFunction fg = fourier_forward(g);
    for (std::size_t p = 0; p < fg.values.size(); ++p) {
        double xi = fg.grid.point(p)[0];
        if (std::abs(xi) > 4) continue;
        double exact = std::sqrt(2 * kPi) * std::exp(-xi * xi / 2);
        CHECK(std::abs(fg.values[p] - exact) <= 1e-6 * exact);
    }
    CHECK_THROWS_AS(fourier_forward(g, nullptr, 40.0), GridRuleViolation);
}

TEST_CASE("verify_SN: single-cell input is finite and bounded below") {
    Frame f = Frame::create(oblique_normals(2), 0.3);
    InducedLattice il = induced_lattice(f, 0);
    auto b = make_bump(1);
    const double gen = il.generator(0, 0);
    // Support inside the cell j = 0 at r = 1: |y| < 1/2 in integer coordinates.
    auto g = grid_function(centered_grid(1, 41, 0.02 * gen), [](const Vec&) { return cplx(1, 0); });
    double ratio = verify_SN(*b, il, g, 1.0, 0, 60);
    CHECK(std::isfinite(ratio));
    CHECK(ratio >= b->radial(0.5) * b->radial(0.5));
    CHECK(ratio <= 1.0);
    CHECK_THROWS_AS(verify_SN(*b, il, g, 1.0, 5, 60), ContractViolation);
}

TEST_CASE("verify_SN: translation by a scaled lattice vector") {
    Frame f = Frame::create(oblique_normals(2), 0.3);
    InducedLattice il = induced_lattice(f, 0);
    auto b = make_bump(1);
    const double gen = il.generator(0, 0);
    const double r = 2.0;
    Rng rng(304);
    for (int t = 0; t < 10; ++t) {
        double w = rng.uniform(-3, 3);
        auto fn = [&](const Vec& x) { return std::polar(std::exp(-x[0] * x[0] / 8), w * x[0]); };
        GridSpec grid = centered_grid(1, 121, 0.1);
        auto g = grid_function(grid, fn);
        GridSpec shifted = grid;
        const long k = rng.integer(-3, 3);
        shifted.origin[0] += static_cast<double>(k) * r * gen;
        auto g2 = grid_function(shifted, [&](const Vec& x) { return fn((x.array() - k * r * gen).matrix()); });
        for (int N = 0; N <= 2; ++N) {
            double a = verify_SN(*b, il, g, r, N, 80);
            double c = verify_SN(*b, il, g2, r, N, 80);
            CHECK(rel_diff(a, c) <= 1e-6);
        }
    }
}

TEST_CASE("verify_SN: empirical constant at N = 2 over random inputs") {
    Frame f = Frame::create(oblique_normals(2), 0.3);
    InducedLattice il = induced_lattice(f, 0);
    auto b = make_bump(1);
    Rng rng(305);
    double lo = 1e300, hi = 0;
    for (int t = 0; t < 100; ++t) {
        double w = rng.uniform(-2, 2), c = rng.uniform(-4, 4), s = rng.uniform(0.5, 3);
        auto g = grid_function(centered_grid(1, 81, 0.2), [&](const Vec& x) {
            return std::polar(std::exp(-(x[0] - c) * (x[0] - c) / (2 * s * s)), w * x[0]);
        });
        double ratio = verify_SN(*b, il, g, 1.0, 2, 60);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    MESSAGE("empirical C_2 = " << hi << ", spread " << hi / lo);
    CHECK(std::isfinite(hi));
    CHECK(lo > 0);
    CHECK(hi / lo < 10);
}
