#pragma once

#include "mlr/core.hpp"

#include <functional>
#include <memory>
#include <utility>

namespace mlr {

// Transversal set of unit normals N_1..N_{n+1}; columns of basis() map lattice
// coordinates to standard coordinates.
class Frame {
public:
    // Validates unit length, |det| >= nu > 0 and B * B^{-1} = I.
    static Frame create(const std::vector<Vec>& normals, double nu);
    static Frame orthonormal(int ambient_dim);

    int ambient_dim() const { return static_cast<int>(basis_.rows()); }
    int n() const { return ambient_dim() - 1; }
    double nu() const { return nu_; }
    Vec normal(int i) const { return basis_.col(i); }
    const Mat& basis() const { return basis_; }
    const Mat& inverse_basis() const { return inverse_; }

    // Orthonormal basis (columns) of H_i = N_i^perp obtained by Gram-Schmidt on
    // the remaining normals in order. For the standard frame these are the
    // remaining coordinate axes.
    Mat hyperplane_basis(int i) const;

private:
    Mat basis_;
    Mat inverse_;
    double nu_ = 0;
};

double transversality_det(const Frame& frame);
// |det| of n+1 vectors in R^{n+1}; no transversality requirement.
double transversality_det(const std::vector<Vec>& vectors);
// sqrt(det Gram) of k vectors.
double k_volume(const std::vector<Vec>& vectors);

// Orthonormal basis of the complement of span(columns of `basis`).
Mat orthonormal_complement(const Mat& basis);
Mat gram_schmidt_hyperplane(const Vec& normal, const std::vector<Vec>& preferred);

struct Domain {
    enum class Kind { Box, Ball };
    Kind kind = Kind::Box;
    Vec half_widths;  // Box
    double radius = 0;  // Ball

    static Domain box(Vec half_widths);
    static Domain ball(int dim, double radius);
    int dim() const;
    bool contains(const Vec& xi, double tol = 1e-12) const;
    double diameter() const;
    Vec bounding_half_widths() const;
};

struct Graph {
    enum class Kind { Flat, Quadratic, Custom };
    Kind kind = Kind::Flat;
    Mat quadratic;  // phi = 0.5 xi^T A xi
    std::function<double(const Vec&)> value_fn;
    std::function<Vec(const Vec&)> gradient_fn;

    static Graph flat();
    static Graph quadratic_form(Mat a);
    static Graph custom(std::function<double(const Vec&)> value, std::function<Vec(const Vec&)> gradient);

    double value(const Vec& xi) const;
    Vec gradient(const Vec& xi) const;
    bool is_flat() const { return kind == Kind::Flat; }
};

// Graph hypersurface Sigma(xi) = base + E xi + phi(xi) N over a domain U of H.
class Hypersurface {
public:
    Hypersurface(int index, Vec normal, Mat tangent_basis, Domain domain, Graph graph, Vec base = Vec(),
                 double derivative_bound = 1.0);
    static Hypersurface from_frame(const Frame& frame, int index, Domain domain, Graph graph, Vec base = Vec(),
                                   double derivative_bound = 1.0);

    int index() const { return index_; }
    int ambient_dim() const { return static_cast<int>(normal_.size()); }
    int dim() const { return ambient_dim() - 1; }
    const Vec& normal() const { return normal_; }
    const Mat& tangent_basis() const { return tangent_; }
    const Vec& base() const { return base_; }
    const Domain& domain() const { return domain_; }
    const Graph& graph() const { return graph_; }
    double derivative_bound() const { return derivative_bound_; }

    Vec point(const Vec& xi) const;
    // Bound on sup |Sigma(xi)| over the domain (sampled corners plus base).
    double frequency_bound() const;
    // sup |grad phi(x) - grad phi(y)| over sampled pairs; compared to C*delta.
    double gradient_oscillation() const;

private:
    int index_;
    Vec normal_;
    Mat tangent_;
    Domain domain_;
    Graph graph_;
    Vec base_;
    double derivative_bound_;
};

Vec surface_normal(const Hypersurface& surface, const Vec& xi);

// Minimum of |det| (k = n+1 surfaces) or k-volume (k <= n) of the surface normals
// over an 8-per-axis tensor grid plus `sample_count` seeded random tuples.
double verify_transversality(const std::vector<Hypersurface>& surfaces, double nu, int sample_count = 256);

struct SlabCondition {
    Mat subspace;           // (n+1) x k orthonormal columns
    Mat normal_complement;  // (n+1) x (n+1-k) orthonormal columns
    Vec point;              // affine offset of H
    double mu = 0;

    static SlabCondition create(Mat subspace, double mu, Vec point = Vec());
    int k() const { return static_cast<int>(subspace.cols()); }
    double distance(const Vec& x) const;
};

std::pair<bool, double> verify_slab_condition(const Hypersurface& surface, const SlabCondition& slab);

// Points of the domain used for certification: tensor grid with `per_axis` nodes
// per coordinate (boundary included), restricted to the domain.
std::vector<Vec> domain_samples(const Domain& domain, int per_axis);

} // namespace mlr
