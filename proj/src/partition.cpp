#include "mlr/partition.hpp"

#include "mlr/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>

namespace mlr {

double mollifier(double radius) {
    double t = 4 * radius * radius;
    if (t >= 1) return 0.0;
    return std::exp(-1.0 / (1.0 - t));
}

namespace {

constexpr double kTableSpacing = 1.0 / 16;
constexpr double kTableExtent = 400.0;

double sphere_area(int m) {
    // |S^{m-1}| = 2 pi^{m/2} / Gamma(m/2)
    return 2 * std::pow(kPi, m / 2.0) / std::tgamma(m / 2.0);
}

struct RadialRule {
    std::vector<double> rho, w;
};

const RadialRule& radial_rule() {
    static const RadialRule rule = [] {
        auto q = gauss_legendre(0.0, 0.5, 64, 8);
        RadialRule r;
        for (std::size_t k = 0; k < q.nodes.size(); ++k) {
            r.rho.push_back(q.nodes[k]);
            r.w.push_back(q.weights[k] * mollifier(q.nodes[k]));
        }
        return r;
    }();
    return rule;
}

// psi_check(s) for the radial mollifier in R^m.
double hankel(int m, double s) {
    const auto& rule = radial_rule();
    double acc = 0;
    if (s == 0.0) {
        for (std::size_t k = 0; k < rule.rho.size(); ++k) acc += rule.w[k] * std::pow(rule.rho[k], m - 1);
        return sphere_area(m) * acc;
    }
    switch (m) {
    case 1:
        for (std::size_t k = 0; k < rule.rho.size(); ++k) acc += rule.w[k] * std::cos(s * rule.rho[k]);
        return 2 * acc;
    case 2:
        for (std::size_t k = 0; k < rule.rho.size(); ++k) acc += rule.w[k] * ::j0(s * rule.rho[k]) * rule.rho[k];
        return 2 * kPi * acc;
    case 3:
        for (std::size_t k = 0; k < rule.rho.size(); ++k) acc += rule.w[k] * std::sin(s * rule.rho[k]) * rule.rho[k];
        return 4 * kPi * acc / s;
    default: {
        double nu = m / 2.0 - 1;
        for (std::size_t k = 0; k < rule.rho.size(); ++k)
            acc += rule.w[k] * std::cyl_bessel_j(nu, s * rule.rho[k]) * std::pow(rule.rho[k], m / 2.0);
        return std::pow(2 * kPi, m / 2.0) * std::pow(s, 1 - m / 2.0) * acc;
    }
    }
}

double psi_l2_squared(int m) {
    const auto& rule = radial_rule();
    double acc = 0;
    for (std::size_t k = 0; k < rule.rho.size(); ++k)
        acc += rule.w[k] * mollifier(rule.rho[k]) * std::pow(rule.rho[k], m - 1);
    return sphere_area(m) * acc;
}

} // namespace

std::shared_ptr<const BumpProfile> make_bump(int m) {
    if (m < 1) throw InvalidArgument("bump dimension must be >= 1");
    static std::mutex lock;
    static std::map<int, std::shared_ptr<const BumpProfile>> cache;
    std::lock_guard<std::mutex> g(lock);
    if (auto it = cache.find(m); it != cache.end()) return it->second;

    auto b = std::shared_ptr<BumpProfile>(new BumpProfile());
    b->m_ = m;
    b->ds_ = kTableSpacing;
    b->s_max_ = kTableExtent;
    b->far_order_ = std::max(12, 2 * kMaxWeightOrder + m + 2);
    b->c_ = 1.0 / (std::pow(2 * kPi, m) * psi_l2_squared(m));
    const std::size_t count = static_cast<std::size_t>(std::llround(b->s_max_ / b->ds_)) + 1;
    b->table_.resize(count);
    parallel_for(count, [&](std::size_t k) { b->table_[k] = hankel(m, static_cast<double>(k) * b->ds_); });
    b->envelope_.resize(count);
    double run = 0;
    for (std::size_t k = count; k-- > 0;) {
        run = std::max(run, b->c_ * b->table_[k] * b->table_[k]);
        b->envelope_[k] = run;
    }
    double cmax = 0;
    for (std::size_t k = count / 2; k < count; ++k) {
        double s = static_cast<double>(k) * b->ds_;
        cmax = std::max(cmax, b->envelope_[k] * std::pow(s, b->far_order_));
    }
    b->model_constant_ = cmax;
    cache[m] = b;
    return b;
}

double BumpProfile::psi_check(double s) const {
    s = std::abs(s);
    if (s >= s_max_) return std::sqrt(model_constant_ * std::pow(s, -far_order_) / c_);
    const long n = static_cast<long>(table_.size());
    long k = static_cast<long>(std::floor(s / ds_));
    long first = k - 2;
    if (first + 5 > n - 1) first = n - 6;
    double acc = 0;
    for (long a = 0; a < 6; ++a) {
        long ia = first + a;
        double l = 1;
        for (long b = 0; b < 6; ++b) {
            if (b == a) continue;
            l *= (s - static_cast<double>(first + b) * ds_) / (static_cast<double>(ia - (first + b)) * ds_);
        }
        // Even extension across s = 0.
        acc += l * table_[static_cast<std::size_t>(std::labs(ia))];
    }
    return acc;
}

double BumpProfile::radial(double s) const {
    s = std::abs(s);
    if (s >= s_max_) return model_constant_ * std::pow(s, -far_order_);
    double v = psi_check(s);
    return c_ * v * v;
}

double BumpProfile::envelope(double s) const {
    s = std::max(0.0, s);
    if (s >= s_max_) return model_constant_ * std::pow(s, -far_order_);
    auto k = static_cast<std::size_t>(std::floor(s / ds_));
    // Slack for interpolated maxima between nodes.
    return envelope_[k] * 1.001;
}

namespace {

double shell_count(int m, double t) { return std::pow(2 * t + 1, m) - std::pow(2 * t - 1, m); }

} // namespace

double BumpProfile::tail_bound(int J, int power, double weight_exponent, double weight_scale) const {
    if (J < 0) throw InvalidArgument("negative truncation");
    const double t_stop = 4 * s_max_;
    double total = 0;
    for (double t = J + 1; t <= t_stop; t += 1) {
        double w = std::pow(japanese(weight_scale * std::sqrt(static_cast<double>(m_)) * (t + 0.5)), weight_exponent);
        total += shell_count(m_, t) * std::pow(envelope(t - 0.5), power) * w;
    }
    // Remainder beyond t_stop from the model: sum of A t^{-e} over t > T is below A T^{1-e} / (e - 1).
    double e = far_order_ * power - (m_ - 1) - weight_exponent;
    if (e <= 1) throw ContractViolation("far-field model too weak for the requested weight");
    double amp = 2 * m_ * std::pow(3.0, m_ - 1) * std::pow(model_constant_, power) *
                 std::pow(2 * weight_scale * std::sqrt(static_cast<double>(m_)) + 2, weight_exponent) *
                 std::pow(2.0, far_order_ * power);
    total += amp * std::pow(t_stop, 1 - e) / (e - 1);
    return total;
}

int BumpProfile::truncation_for(double tol, int power, double weight_exponent, double weight_scale) const {
    // Tail bounds are non-increasing in J; bisect on [1, s_max].
    int lo = 1, hi = static_cast<int>(s_max_);
    if (tail_bound(hi, power, weight_exponent, weight_scale) > tol)
        throw ContractViolation("no truncation within the table reaches the requested tolerance");
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (tail_bound(mid, power, weight_exponent, weight_scale) <= tol)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

double psi_check_tensor(int m, const Vec& x, int nodes_per_axis) {
    if (m < 1 || m > 2 || x.size() != m) throw InvalidArgument("tensor oracle supports m in {1, 2}");
    // Trapezoid rule on [-1/2, 1/2]^m; endpoints carry zero weight since psi vanishes there.
    const double h = 1.0 / (nodes_per_axis - 1);
    double acc = 0;
    if (m == 1) {
        for (int a = 0; a < nodes_per_axis; ++a) {
            double xi = -0.5 + a * h;
            acc += mollifier(std::abs(xi)) * std::cos(x[0] * xi);
        }
        return acc * h;
    }
    for (int a = 0; a < nodes_per_axis; ++a) {
        double xi = -0.5 + a * h;
        for (int b = 0; b < nodes_per_axis; ++b) {
            double eta = -0.5 + b * h;
            double rho = std::sqrt(xi * xi + eta * eta);
            if (rho >= 0.5) continue;
            acc += mollifier(rho) * std::cos(x[0] * xi + x[1] * eta);
        }
    }
    return acc * h * h;
}

double eval_window(const BumpProfile& bump, const Cell& q, const InducedLattice& lattice, const Vec& x) {
    if (q.owner != CellOwner::induced(lattice.i) || bump.dim() != lattice.dim() || q.dim() != lattice.dim())
        throw InvalidArgument("window owner mismatch");
    Vec y = lattice.to_integer * lattice.hyperplane_coords(x) / q.r;
    for (int m = 0; m < q.dim(); ++m) y[m] -= static_cast<double>(q.j[m]);
    return bump(y);
}

double eval_window(const BumpProfile& bump, const Cell& q, const Frame& frame, const Vec& x) {
    if (q.owner != CellOwner::ambient() || bump.dim() != frame.ambient_dim() || q.dim() != frame.ambient_dim())
        throw InvalidArgument("window owner mismatch");
    Vec y = frame.inverse_basis() * x / q.r;
    for (int m = 0; m < q.dim(); ++m) y[m] -= static_cast<double>(q.j[m]);
    return bump(y);
}

double eval_window(const BumpProfile& bump, const Strip& s, const StripGeometry& geometry, const Vec& x) {
    if (bump.dim() != geometry.k - 1 || static_cast<int>(s.base.size()) != geometry.k - 1)
        throw InvalidArgument("window owner mismatch");
    Vec y = geometry.strip_coords(x) / s.r;
    for (int m = 0; m < geometry.k - 1; ++m) y[m] -= static_cast<double>(s.base[m]);
    return bump(y);
}

namespace {

template <class F>
void for_each_offset(int m, int J, F&& fn) {
    std::vector<long> off(m, -J);
    for (;;) {
        fn(off);
        int a = m - 1;
        while (a >= 0 && ++off[a] > J) off[a--] = -J;
        if (a < 0) return;
    }
}

} // namespace

PartitionSum partition_sum_coords(const BumpProfile& bump, const Vec& y, int J, double tol) {
    const int m = bump.dim();
    if (y.size() != m) throw InvalidArgument("point dimension mismatch");
    PartitionSum out;
    out.truncation = J > 0 ? J : bump.truncation_for(tol / 10);
    out.tail_bound = bump.tail_bound(out.truncation);
    if (out.tail_bound > tol) throw ContractViolation("truncation J too small for the requested tolerance");
    IVec j0 = round_half_up(y);
    Vec d(m);
    CompensatedSum acc;
    for_each_offset(m, out.truncation, [&](const std::vector<long>& off) {
        for (int a = 0; a < m; ++a) d[a] = y[a] - static_cast<double>(j0[a] + off[a]);
        acc.add(bump.radial(d.norm()));
    });
    out.value = acc.value();
    return out;
}

PartitionSum partition_sum(const BumpProfile& bump, const InducedLattice& lattice, double r, const Vec& x, int J,
                           double tol) {
    if (!(r > 0)) throw InvalidArgument("scale must be positive");
    return partition_sum_coords(bump, lattice.to_integer * lattice.hyperplane_coords(x) / r, J, tol);
}

double GridFunction::l2_norm() const {
    CompensatedSum acc;
    for (const auto& v : values) acc.add(std::norm(v));
    return std::sqrt(acc.value() * weight());
}

namespace {

GridFunction transform(const GridFunction& g, const GridSpec* target, double band, double sign, double prefactor) {
    const int m = g.grid.dim();
    if (g.values.size() != g.grid.size()) throw InvalidArgument("grid function sample count mismatch");
    if (band > 0)
        for (int a = 0; a < m; ++a)
            if (band >= kPi / g.grid.spacing[a]) throw GridRuleViolation("grid too coarse for the declared band limit");
    GridSpec out_grid = target ? *target : g.grid.dual();
    if (out_grid.dim() != m) throw InvalidArgument("target grid dimension mismatch");
    std::vector<cplx> data = g.values;
    std::vector<int> dims = g.grid.counts;
    for (int a = 0; a < m; ++a) {
        Eigen::MatrixXcd mat(out_grid.counts[a], g.grid.counts[a]);
        for (int k = 0; k < out_grid.counts[a]; ++k)
            for (int l = 0; l < g.grid.counts[a]; ++l)
                mat(k, l) = std::polar(g.grid.spacing[a], sign * out_grid.coord(a, k) * g.grid.coord(a, l));
        data = apply_along_axis(data, dims, a, mat);
        dims[a] = out_grid.counts[a];
    }
    for (auto& v : data) v *= prefactor;
    return {g.owner, out_grid, std::move(data)};
}

} // namespace

GridFunction fourier_forward(const GridFunction& g, const GridSpec* target, double band) {
    return transform(g, target, band, -1.0, 1.0);
}

GridFunction fourier_inverse(const GridFunction& g, const GridSpec* target, double band) {
    return transform(g, target, band, 1.0, std::pow(2 * kPi, -g.grid.dim()));
}

double verify_SN(const BumpProfile& bump, const InducedLattice& lattice, const GridFunction& g, double r, int N, int J) {
    const int m = lattice.dim();
    if (N < 0) throw InvalidArgument("weight order must be non-negative");
    if (N > kMaxWeightOrder) throw ContractViolation("weight order exceeds the decay model (divergent tail)");
    if (g.grid.dim() != m || bump.dim() != m) throw InvalidArgument("grid function dimension mismatch");
    const double gnorm = lattice.generator.norm();
    if (J <= 0) J = bump.truncation_for(1e-10, 2, 2.0 * N, gnorm);
    double den = 0, num = 0;
    std::vector<double> contrib(g.values.size(), 0.0);
    parallel_for(g.values.size(), [&](std::size_t p) {
        double w = std::norm(g.values[p]);
        if (w == 0) return;
        Vec y = lattice.to_integer * g.grid.point(p) / r;
        IVec j0 = round_half_up(y);
        Vec d(m);
        CompensatedSum phi;
        for_each_offset(m, J, [&](const std::vector<long>& off) {
            for (int a = 0; a < m; ++a) d[a] = y[a] - static_cast<double>(j0[a] + off[a]);
            double chi = bump.radial(d.norm());
            double wt = std::pow(1.0 + (lattice.generator * d).squaredNorm(), N);
            phi.add(wt * chi * chi);
        });
        contrib[p] = w * phi.value();
    });
    CompensatedSum a, b;
    for (std::size_t p = 0; p < g.values.size(); ++p) {
        a.add(contrib[p]);
        b.add(std::norm(g.values[p]));
    }
    num = a.value();
    den = b.value();
    if (!(den > 0)) throw InvalidArgument("zero grid function");
    return num / den;
}

} // namespace mlr
