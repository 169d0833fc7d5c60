#include "mlr/frames.hpp"

#include "mlr/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mlr {

Frame Frame::create(const std::vector<Vec>& normals, double nu) {
    if (normals.empty()) throw InvalidArgument("frame needs at least one normal");
    const auto d = normals.front().size();
    if (d < 2 || static_cast<std::size_t>(d) != normals.size())
        throw InvalidArgument("frame needs n+1 normals in R^{n+1} with n >= 1");
    if (!(nu > 0)) throw InvalidArgument("nu must be positive");
    Frame f;
    f.basis_.resize(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (normals[i].size() != d) throw InvalidArgument("normal dimension mismatch");
        if (std::abs(normals[i].norm() - 1.0) > 1e-12) throw InvalidArgument("normal is not unit length");
        f.basis_.col(i) = normals[i];
    }
    double det = std::abs(f.basis_.determinant());
    if (det < nu) throw InvalidArgument("frame determinant below nu");
    f.inverse_ = f.basis_.inverse();
    Mat check = f.basis_ * f.inverse_ - Mat::Identity(d, d);
    if (check.cwiseAbs().maxCoeff() > 1e-10) throw InvalidArgument("frame inverse inaccurate");
    f.nu_ = nu;
    return f;
}

Frame Frame::orthonormal(int ambient_dim) {
    std::vector<Vec> normals;
    for (int i = 0; i < ambient_dim; ++i) normals.push_back(Vec::Unit(ambient_dim, i));
    return create(normals, 1.0);
}

Mat gram_schmidt_hyperplane(const Vec& normal, const std::vector<Vec>& preferred) {
    const auto d = normal.size();
    Vec nrm = normal.normalized();
    std::vector<Vec> basis;
    auto try_add = [&](Vec v) {
        v -= nrm.dot(v) * nrm;
        for (const auto& b : basis) v -= b.dot(v) * b;
        double len = v.norm();
        if (len > 1e-10) basis.push_back(v / len);
    };
    for (const auto& v : preferred) {
        if (static_cast<Eigen::Index>(basis.size()) == d - 1) break;
        try_add(v);
    }
    for (Eigen::Index a = 0; a < d && static_cast<Eigen::Index>(basis.size()) < d - 1; ++a) try_add(Vec::Unit(d, a));
    Mat e(d, d - 1);
    for (Eigen::Index j = 0; j < d - 1; ++j) e.col(j) = basis[j];
    return e;
}

Mat Frame::hyperplane_basis(int i) const {
    if (i < 0 || i >= ambient_dim()) throw InvalidArgument("direction index out of range");
    std::vector<Vec> others;
    for (int j = 0; j < ambient_dim(); ++j)
        if (j != i) others.push_back(basis_.col(j));
    return gram_schmidt_hyperplane(basis_.col(i), others);
}

Mat orthonormal_complement(const Mat& basis) {
    const auto d = basis.rows();
    std::vector<Vec> cols;
    for (Eigen::Index j = 0; j < basis.cols(); ++j) cols.push_back(basis.col(j));
    std::vector<Vec> out;
    for (Eigen::Index a = 0; a < d && static_cast<Eigen::Index>(out.size()) < d - basis.cols(); ++a) {
        Vec v = Vec::Unit(d, a);
        for (const auto& b : cols) v -= b.dot(v) * b;
        for (const auto& b : out) v -= b.dot(v) * b;
        double len = v.norm();
        if (len > 1e-8) out.push_back(v / len);
    }
    Mat c(d, static_cast<Eigen::Index>(out.size()));
    for (std::size_t j = 0; j < out.size(); ++j) c.col(static_cast<Eigen::Index>(j)) = out[j];
    return c;
}

double transversality_det(const Frame& frame) { return std::abs(frame.basis().determinant()); }

double transversality_det(const std::vector<Vec>& vectors) {
    if (vectors.empty()) throw InvalidArgument("empty vector list");
    const auto d = vectors.front().size();
    if (static_cast<std::size_t>(d) != vectors.size()) throw InvalidArgument("need n+1 vectors in R^{n+1}");
    Mat m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        if (vectors[i].size() != d) throw InvalidArgument("dimension mismatch");
        m.col(i) = vectors[i];
    }
    return std::abs(m.determinant());
}

double k_volume(const std::vector<Vec>& vectors) {
    if (vectors.empty()) throw InvalidArgument("k_volume of empty list");
    const auto k = static_cast<Eigen::Index>(vectors.size());
    const auto d = vectors.front().size();
    if (k > d) throw InvalidArgument("more vectors than ambient dimension");
    Mat g(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        if (vectors[a].size() != d) throw InvalidArgument("dimension mismatch");
        for (Eigen::Index b = 0; b < k; ++b) g(a, b) = vectors[a].dot(vectors[b]);
    }
    return std::sqrt(std::max(0.0, g.determinant()));
}

Domain Domain::box(Vec half_widths) {
    if (half_widths.size() < 1 || (half_widths.array() <= 0).any()) throw InvalidArgument("box half widths must be positive");
    Domain d;
    d.kind = Kind::Box;
    d.half_widths = std::move(half_widths);
    return d;
}

Domain Domain::ball(int dim, double radius) {
    if (dim < 1 || !(radius > 0)) throw InvalidArgument("ball needs dim >= 1 and positive radius");
    Domain d;
    d.kind = Kind::Ball;
    d.radius = radius;
    d.half_widths = Vec::Constant(dim, radius);
    return d;
}

int Domain::dim() const { return static_cast<int>(half_widths.size()); }

bool Domain::contains(const Vec& xi, double tol) const {
    if (xi.size() != half_widths.size()) throw InvalidArgument("domain dimension mismatch");
    if (kind == Kind::Ball) return xi.norm() <= radius + tol;
    for (Eigen::Index a = 0; a < xi.size(); ++a)
        if (std::abs(xi[a]) > half_widths[a] + tol) return false;
    return true;
}

double Domain::diameter() const { return kind == Kind::Ball ? 2 * radius : 2 * half_widths.norm(); }

Vec Domain::bounding_half_widths() const { return half_widths; }

Graph Graph::flat() { return Graph{}; }

Graph Graph::quadratic_form(Mat a) {
    if (a.rows() != a.cols()) throw InvalidArgument("quadratic graph matrix must be square");
    Graph g;
    g.kind = Kind::Quadratic;
    g.quadratic = 0.5 * (a + a.transpose());
    return g;
}

Graph Graph::custom(std::function<double(const Vec&)> value, std::function<Vec(const Vec&)> gradient) {
    if (!value || !gradient) throw InvalidArgument("custom graph needs value and gradient");
    Graph g;
    g.kind = Kind::Custom;
    g.value_fn = std::move(value);
    g.gradient_fn = std::move(gradient);
    return g;
}

double Graph::value(const Vec& xi) const {
    switch (kind) {
    case Kind::Flat: return 0.0;
    case Kind::Quadratic: return 0.5 * xi.dot(quadratic * xi);
    case Kind::Custom: return value_fn(xi);
    }
    return 0.0;
}

Vec Graph::gradient(const Vec& xi) const {
    switch (kind) {
    case Kind::Flat: return Vec::Zero(xi.size());
    case Kind::Quadratic: return quadratic * xi;
    case Kind::Custom: return gradient_fn(xi);
    }
    return Vec::Zero(xi.size());
}

Hypersurface::Hypersurface(int index, Vec normal, Mat tangent_basis, Domain domain, Graph graph, Vec base,
                           double derivative_bound)
    : index_(index), normal_(std::move(normal)), tangent_(std::move(tangent_basis)), domain_(std::move(domain)),
      graph_(std::move(graph)), base_(std::move(base)), derivative_bound_(derivative_bound) {
    const auto d = normal_.size();
    if (d < 2) throw InvalidArgument("ambient dimension must be >= 2");
    if (std::abs(normal_.norm() - 1.0) > 1e-12) throw InvalidArgument("surface normal must be unit length");
    if (tangent_.rows() != d || tangent_.cols() != d - 1) throw InvalidArgument("tangent basis shape mismatch");
    if ((tangent_.transpose() * tangent_ - Mat::Identity(d - 1, d - 1)).cwiseAbs().maxCoeff() > 1e-10 ||
        (tangent_.transpose() * normal_).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("tangent basis must be orthonormal and orthogonal to the normal");
    if (domain_.dim() != d - 1) throw InvalidArgument("domain dimension mismatch");
    if (graph_.kind == Graph::Kind::Quadratic && graph_.quadratic.rows() != d - 1)
        throw InvalidArgument("quadratic graph dimension mismatch");
    if (base_.size() == 0) base_ = Vec::Zero(d);
    if (base_.size() != d) throw InvalidArgument("base point dimension mismatch");
}

Hypersurface Hypersurface::from_frame(const Frame& frame, int index, Domain domain, Graph graph, Vec base,
                                      double derivative_bound) {
    return Hypersurface(index, frame.normal(index), frame.hyperplane_basis(index), std::move(domain),
                        std::move(graph), std::move(base), derivative_bound);
}

Vec Hypersurface::point(const Vec& xi) const { return base_ + tangent_ * xi + graph_.value(xi) * normal_; }

double Hypersurface::frequency_bound() const {
    double best = 0;
    for (const auto& xi : domain_samples(domain_, 9)) best = std::max(best, point(xi).norm());
    return best;
}

double Hypersurface::gradient_oscillation() const {
    auto pts = domain_samples(domain_, 5);
    double best = 0;
    for (const auto& a : pts)
        for (const auto& b : pts) best = std::max(best, (graph_.gradient(a) - graph_.gradient(b)).norm());
    return best;
}

Vec surface_normal(const Hypersurface& surface, const Vec& xi) {
    if (!surface.domain().contains(xi)) throw InvalidArgument("point outside the surface domain");
    Vec g = surface.graph().gradient(xi);
    Vec v = surface.normal() - surface.tangent_basis() * g;
    return v / std::sqrt(1.0 + g.squaredNorm());
}

std::vector<Vec> domain_samples(const Domain& domain, int per_axis) {
    const int d = domain.dim();
    const Vec hw = domain.bounding_half_widths();
    std::vector<Vec> out;
    std::vector<int> idx(d, 0);
    for (;;) {
        Vec xi(d);
        for (int a = 0; a < d; ++a)
            xi[a] = per_axis == 1 ? 0.0 : -hw[a] + 2 * hw[a] * idx[a] / static_cast<double>(per_axis - 1);
        if (domain.kind == Domain::Kind::Ball && xi.norm() > domain.radius) xi *= domain.radius / xi.norm();
        out.push_back(xi);
        int a = 0;
        while (a < d && ++idx[a] == per_axis) idx[a++] = 0;
        if (a == d) break;
    }
    return out;
}

namespace {

Vec random_point(const Domain& domain, Rng& rng) {
    const int d = domain.dim();
    for (;;) {
        Vec xi(d);
        for (int a = 0; a < d; ++a) xi[a] = rng.uniform(-domain.half_widths[a], domain.half_widths[a]);
        if (domain.contains(xi)) return xi;
    }
}

double normal_measure(const std::vector<Vec>& normals, Eigen::Index ambient) {
    if (static_cast<Eigen::Index>(normals.size()) == ambient) return transversality_det(normals);
    return k_volume(normals);
}

} // namespace

double verify_transversality(const std::vector<Hypersurface>& surfaces, double /*nu*/, int sample_count) {
    if (surfaces.empty()) throw InvalidArgument("no surfaces");
    const auto ambient = surfaces.front().ambient_dim();
    const std::size_t k = surfaces.size();
    // Tensor grid: shrink the per-axis count if the tuple count would exceed 2^20.
    int per_axis = 8;
    auto tuples = [&](int p) {
        double t = 1;
        for (const auto& s : surfaces) t *= std::pow(p, s.dim());
        return t;
    };
    while (per_axis > 2 && tuples(per_axis) > (1 << 20)) --per_axis;
    std::vector<std::vector<Vec>> normals_per_surface(k);
    for (std::size_t s = 0; s < k; ++s)
        for (const auto& xi : domain_samples(surfaces[s].domain(), per_axis))
            normals_per_surface[s].push_back(surface_normal(surfaces[s], xi));

    double best = 1e300;
    std::vector<std::size_t> idx(k, 0);
    std::vector<Vec> tuple(k);
    for (;;) {
        for (std::size_t s = 0; s < k; ++s) tuple[s] = normals_per_surface[s][idx[s]];
        best = std::min(best, normal_measure(tuple, ambient));
        std::size_t s = 0;
        while (s < k && ++idx[s] == normals_per_surface[s].size()) idx[s++] = 0;
        if (s == k) break;
    }
    Rng rng(0x7a5e11u);
    for (int t = 0; t < sample_count; ++t) {
        for (std::size_t s = 0; s < k; ++s) tuple[s] = surface_normal(surfaces[s], random_point(surfaces[s].domain(), rng));
        best = std::min(best, normal_measure(tuple, ambient));
    }
    return best;
}

SlabCondition SlabCondition::create(Mat subspace, double mu, Vec point) {
    const auto d = subspace.rows();
    const auto k = subspace.cols();
    if (k < 1 || k >= d) throw InvalidArgument("slab subspace dimension must be in [1, n]");
    // mu = 0 is accepted so that exact containment can be tested.
    if (!(mu >= 0)) throw InvalidArgument("slab half-width must be non-negative");
    if ((subspace.transpose() * subspace - Mat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-10)
        throw InvalidArgument("slab subspace basis must be orthonormal");
    SlabCondition s;
    s.subspace = std::move(subspace);
    s.normal_complement = orthonormal_complement(s.subspace);
    s.point = point.size() == 0 ? Vec::Zero(d) : std::move(point);
    if (s.point.size() != d) throw InvalidArgument("slab point dimension mismatch");
    s.mu = mu;
    return s;
}

double SlabCondition::distance(const Vec& x) const { return (normal_complement.transpose() * (x - point)).norm(); }

std::pair<bool, double> verify_slab_condition(const Hypersurface& surface, const SlabCondition& slab) {
    if (slab.subspace.rows() != surface.ambient_dim()) throw InvalidArgument("slab dimension mismatch");
    double worst = 0;
    int per_axis = surface.dim() <= 2 ? 33 : 9;
    for (const auto& xi : domain_samples(surface.domain(), per_axis))
        worst = std::max(worst, slab.distance(surface.point(xi)));
    return {worst <= slab.mu + 1e-12, worst};
}

} // namespace mlr
