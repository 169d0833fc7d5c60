#pragma once

#include "mlr/core.hpp"
#include "mlr/rng.hpp"

#include <cmath>

namespace testing {

inline double rel_diff(double a, double b) {
    double s = std::max(std::abs(a), std::abs(b));
    return s == 0 ? 0.0 : std::abs(a - b) / s;
}

inline mlr::Vec random_vec(mlr::Rng& rng, int d, double scale = 1.0) {
    mlr::Vec v(d);
    for (int a = 0; a < d; ++a) v[a] = scale * rng.normal();
    return v;
}

inline mlr::Vec random_unit(mlr::Rng& rng, int d) {
    mlr::Vec v = random_vec(rng, d);
    while (v.norm() < 1e-6) v = random_vec(rng, d);
    return v.normalized();
}

// Random frame with |det| bounded below, so it is usable as a transversal frame.
inline std::vector<mlr::Vec> random_normals(mlr::Rng& rng, int d, double min_det = 0.2) {
    for (;;) {
        std::vector<mlr::Vec> out;
        mlr::Mat m(d, d);
        for (int i = 0; i < d; ++i) {
            out.push_back(random_unit(rng, d));
            m.col(i) = out.back();
        }
        if (std::abs(m.determinant()) >= min_det) return out;
    }
}

// Oblique frame in R^2 / R^3 used in several modules.
inline std::vector<mlr::Vec> oblique_normals(int d) {
    if (d == 2) return {mlr::Vec::Unit(2, 0), (mlr::Vec(2) << 0.6, 0.8).finished()};
    return {mlr::Vec::Unit(3, 0), (mlr::Vec(3) << 0.6, 0.8, 0.0).finished(),
            (mlr::Vec(3) << 0.3, 0.4, 0.866).finished().normalized()};
}

} // namespace testing
