#include "mlr/grid.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>

namespace mlr {

std::size_t GridSpec::size() const {
    std::size_t s = 1;
    for (int c : counts) s *= static_cast<std::size_t>(c);
    return s;
}

std::vector<int> GridSpec::unflatten(std::size_t flat) const {
    std::vector<int> idx(counts.size());
    for (int a = dim() - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % static_cast<std::size_t>(counts[a]));
        flat /= static_cast<std::size_t>(counts[a]);
    }
    return idx;
}

std::size_t GridSpec::flatten(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < dim(); ++a) flat = flat * static_cast<std::size_t>(counts[a]) + static_cast<std::size_t>(idx[a]);
    return flat;
}

Vec GridSpec::point(std::size_t flat) const {
    auto idx = unflatten(flat);
    Vec p(dim());
    for (int a = 0; a < dim(); ++a) p[a] = coord(a, idx[a]);
    return p;
}

GridSpec GridSpec::cell_centered(const Vec& lo, const Vec& hi, const std::vector<int>& counts) {
    GridSpec g;
    const int d = static_cast<int>(counts.size());
    if (lo.size() != d || hi.size() != d) throw InvalidArgument("grid bounds dimension mismatch");
    g.origin.resize(d);
    g.spacing.resize(d);
    g.counts = counts;
    for (int a = 0; a < d; ++a) {
        if (counts[a] < 1 || !(hi[a] > lo[a])) throw InvalidArgument("bad grid extent");
        g.spacing[a] = (hi[a] - lo[a]) / counts[a];
        g.origin[a] = lo[a] + 0.5 * g.spacing[a];
    }
    return g;
}

GridSpec GridSpec::dual() const {
    GridSpec g;
    g.counts = counts;
    g.origin.resize(dim());
    g.spacing.resize(dim());
    for (int a = 0; a < dim(); ++a) {
        g.spacing[a] = 2 * kPi / (counts[a] * spacing[a]);
        g.origin[a] = -std::floor(counts[a] / 2.0) * g.spacing[a];
    }
    return g;
}

std::vector<cplx> apply_along_axis(const std::vector<cplx>& data, const std::vector<int>& dims, int axis,
                                   const Eigen::MatrixXcd& mat) {
    const int d = static_cast<int>(dims.size());
    if (axis < 0 || axis >= d || mat.cols() != dims[axis]) throw InvalidArgument("axis transform shape mismatch");
    std::size_t outer = 1, inner = 1;
    for (int a = 0; a < axis; ++a) outer *= static_cast<std::size_t>(dims[a]);
    for (int a = axis + 1; a < d; ++a) inner *= static_cast<std::size_t>(dims[a]);
    const std::size_t n_in = static_cast<std::size_t>(dims[axis]);
    const std::size_t n_out = static_cast<std::size_t>(mat.rows());
    std::vector<cplx> out(outer * n_out * inner);
    Eigen::MatrixXcd block(n_in, inner);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t k = 0; k < n_in; ++k)
            for (std::size_t t = 0; t < inner; ++t) block(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t)) = data[(o * n_in + k) * inner + t];
        Eigen::MatrixXcd res = mat * block;
        for (std::size_t k = 0; k < n_out; ++k)
            for (std::size_t t = 0; t < inner; ++t) out[(o * n_out + k) * inner + t] = res(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
    }
    return out;
}

Quadrature gauss_legendre(double a, double b, int panels, int order) {
    if (panels < 1) throw InvalidArgument("need at least one panel");
    std::vector<double> x, w;
    switch (order) {
    case 8: {
        using Q = boost::math::quadrature::gauss<double, 8>;
        for (auto v : Q::abscissa()) x.push_back(v);
        for (auto v : Q::weights()) w.push_back(v);
        break;
    }
    case 16: {
        using Q = boost::math::quadrature::gauss<double, 16>;
        for (auto v : Q::abscissa()) x.push_back(v);
        for (auto v : Q::weights()) w.push_back(v);
        break;
    }
    case 20: {
        using Q = boost::math::quadrature::gauss<double, 20>;
        for (auto v : Q::abscissa()) x.push_back(v);
        for (auto v : Q::weights()) w.push_back(v);
        break;
    }
    default: throw InvalidArgument("supported Gauss-Legendre orders: 8, 16, 20");
    }
    // Boost stores the non-negative half; expand to the full symmetric rule.
    std::vector<double> xs, ws;
    for (std::size_t k = x.size(); k-- > 0;) {
        if (x[k] == 0.0) continue;
        xs.push_back(-x[k]);
        ws.push_back(w[k]);
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
        xs.push_back(x[k]);
        ws.push_back(w[k]);
    }
    Quadrature q;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double mid = a + (p + 0.5) * h;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            q.nodes.push_back(mid + 0.5 * h * xs[k]);
            q.weights.push_back(0.5 * h * ws[k]);
        }
    }
    return q;
}

} // namespace mlr
