#pragma once

#include "mlr/config.hpp"

namespace mlr {

// Analytic density on U_i; sampled on meshes by make_density and evaluated at
// quadrature nodes by the Plancherel oracle.
struct DensitySpec {
    enum class Kind { Constant, Bump, Signs, Slab };
    Kind kind = Kind::Constant;
    Domain domain;
    Vec center;        // Bump
    double width = 1;  // Bump radius
    int cells = 4;     // Signs: cells per axis
    std::vector<int> signs;
    double ramp = 0;   // Signs: mollification width
    std::vector<int> slab_axes;  // Slab
    double slab_half = 0;

    std::string label() const;
    double operator()(const Vec& xi) const;
};

// Smootherstep transition 6t^5 - 15t^4 + 10t^3 clamped to [0, 1].
double smootherstep(double t);

// Member of surface i in tuple t. Tuple 0 is all constants, tuple 1 all bumps,
// later tuples draw kinds and parameters from a stream seeded by (seed, t, i) so the
// same family is used at every scale.
DensitySpec family_member(const Scenario& scenario, int surface, int tuple);

} // namespace mlr
