#include "mlr/family.hpp"

#include "mlr/rng.hpp"

#include <cmath>

namespace mlr {

double smootherstep(double t) {
    if (t <= 0) return 0;
    if (t >= 1) return 1;
    return t * t * t * (t * (6 * t - 15) + 10);
}

std::string DensitySpec::label() const {
    switch (kind) {
    case Kind::Constant: return "constant";
    case Kind::Bump: return "bump";
    case Kind::Signs: return "signs";
    case Kind::Slab: return "slab";
    }
    return "?";
}

double DensitySpec::operator()(const Vec& xi) const {
    if (!domain.contains(xi)) return 0.0;
    switch (kind) {
    case Kind::Constant: return 1.0;
    case Kind::Bump: {
        double t = (xi - center).squaredNorm() / (width * width);
        return t < 1 ? std::exp(-1.0 / (1.0 - t)) : 0.0;
    }
    case Kind::Signs: {
        // Sum of smoothed cell indicators; adjacent ramps are complementary.
        const Vec hw = domain.bounding_half_widths();
        const int d = static_cast<int>(xi.size());
        double total = 0;
        std::vector<int> idx(static_cast<std::size_t>(d), 0);
        for (std::size_t c = 0; c < signs.size(); ++c) {
            std::size_t rem = c;
            double w = 1;
            for (int a = d - 1; a >= 0; --a) {
                idx[a] = static_cast<int>(rem % static_cast<std::size_t>(cells));
                rem /= static_cast<std::size_t>(cells);
            }
            for (int a = 0; a < d && w != 0; ++a) {
                double size = 2 * hw[a] / cells;
                double lo = -hw[a] + idx[a] * size, hi = lo + size;
                double r = ramp * size;
                double left = idx[a] == 0 ? 1.0 : smootherstep((xi[a] - lo) / r + 0.5);
                double right = idx[a] == cells - 1 ? 1.0 : smootherstep((hi - xi[a]) / r + 0.5);
                w *= left * right;
            }
            total += signs[c] * w;
        }
        return total;
    }
    case Kind::Slab: {
        for (int a : slab_axes)
            if (std::abs(xi[a]) > slab_half) return 0.0;
        return 1.0;
    }
    }
    return 0.0;
}

DensitySpec family_member(const Scenario& scenario, int surface, int tuple) {
    const auto& cfg = scenario.config;
    const Domain& dom = scenario.surfaces.at(static_cast<std::size_t>(surface)).domain();
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(tuple), static_cast<std::uint64_t>(surface)));
    DensitySpec s;
    s.domain = dom;
    std::string kind;
    if (tuple == 0)
        kind = "constant";
    else if (tuple == 1)
        kind = "bump";
    else
        kind = cfg.kinds[static_cast<std::size_t>(rng.integer(0, static_cast<long>(cfg.kinds.size()) - 1))];
    if (kind == "slab" && !(surface == 0 && cfg.slab)) kind = "constant";
    const Vec hw = dom.bounding_half_widths();
    const int d = dom.dim();
    if (kind == "constant") {
        s.kind = DensitySpec::Kind::Constant;
    } else if (kind == "bump") {
        s.kind = DensitySpec::Kind::Bump;
        s.width = dom.diameter() / 4;
        s.center = Vec::Zero(d);
        // Keep the bump inside U.
        for (int a = 0; a < d; ++a) {
            double room = std::max(0.0, hw[a] - s.width);
            if (dom.kind == Domain::Kind::Ball) room = std::max(0.0, (dom.radius - s.width) / std::sqrt(static_cast<double>(d)));
            s.center[a] = rng.uniform(-room, room);
        }
    } else if (kind == "signs") {
        s.kind = DensitySpec::Kind::Signs;
        s.cells = 4;
        s.ramp = 0.25;
        std::size_t count = 1;
        for (int a = 0; a < d; ++a) count *= static_cast<std::size_t>(s.cells);
        for (std::size_t c = 0; c < count; ++c) s.signs.push_back(rng.uniform() < 0.5 ? -1 : 1);
    } else {
        s.kind = DensitySpec::Kind::Slab;
        s.slab_axes = cfg.slab->xi_double_prime_axes;
        s.slab_half = scenario.slab->mu / 2;
    }
    return s;
}

} // namespace mlr
