#pragma once

#include "mlr/frames.hpp"
#include "mlr/lattice.hpp"

#include <cstdint>

namespace mlr {

// Nonnegative values on the window [-m, m]^dim of an induced lattice (row-major).
struct LatticeDensity {
    CellOwner owner;
    int dim = 1;
    long m = 0;
    std::vector<double> values;

    static LatticeDensity zeros(CellOwner owner, int dim, long m);
    std::size_t size() const { return values.size(); }
    std::size_t flat(const IVec& idx) const;  // idx entries in [-m, m]
    double l2_norm() const;
};

// sum_z prod_i g_i(z|kept_i)^p over z in [-m, m]^ambient, ratio (sum)^{1/p} / prod ||g_i||.
// Projections act on indices: factor i sees the coordinates listed in kept[i].
struct LWProblem {
    int ambient = 2;
    std::vector<std::vector<int>> kept;
    double p = 2;
    long m = 1;

    int factor_dim(std::size_t i) const { return static_cast<int>(kept[i].size()); }
};

// n+1 factors, factor i drops coordinate i; p = 2/n.
LWProblem lw_plain(int n, long m);
// Factor 1 keeps coordinates 2..k (pi), factors i = 2..k drop coordinate i; p = 2/(k-1).
LWProblem lw_refined(int n, int k, long m);

double lw_lhs(const LWProblem& problem, const std::vector<LatticeDensity>& g);
double lw_ratio(const LWProblem& problem, const std::vector<LatticeDensity>& g);

double discrete_lw_ratio(const Frame& frame, const std::vector<LatticeDensity>& g, long m);
// g[0] lives on L(H), g[1..k-1] on L(H_i); validates the refined frame geometry.
double refined_lw_ratio(const Frame& frame, const SlabCondition& slab, const std::vector<LatticeDensity>& g, long m);

// Slicing oracle: the same left side accumulated slice by slice in the last ambient
// coordinate (the xi'' direction when k = n), each slice an LW sum in one lower dimension.
double lw_lhs_sliced(const LWProblem& problem, const std::vector<LatticeDensity>& g);
// n = 2: ||g3|| sum_{z3} ||g1(., z3)|| ||g2(., z3)|| / prod ||g_i||, the iterated
// Cauchy-Schwarz bound; dominates the plain ratio and is at most 1.
double lw_cauchy_schwarz_bound(const std::vector<LatticeDensity>& g);

std::vector<LatticeDensity> random_lw_densities(const LWProblem& problem, std::uint64_t seed);

struct OracleResult {
    double best = 0;
    std::size_t best_trial = 0;
};
enum class LWMode { Plain, Refined };
// Random restarts plus coordinate ascent (factors {0, 0.5, 2} on single entries, stop
// after a full sweep without improvement). Trials run in parallel; the max is
// reduced in trial order.
OracleResult lw_constant_oracle(const LWProblem& problem, int trials, std::uint64_t seed);
OracleResult lw_constant_oracle(const Frame& frame, long m, int trials, LWMode mode, std::uint64_t seed, int k = 2);
// Ascent from a given starting tuple; never returns less than its starting ratio.
double lw_ascend(const LWProblem& problem, std::vector<LatticeDensity>& g);

struct HolderResult {
    bool pass = false;
    double lhs = 0, rhs = 0;
};
// ||a b||_{l^{2/n}} <= ||a||_{l^2} ||b||_{l^{2/(n-1)}} (l^infinity when n = 1).
HolderResult sequence_holder_check(const std::vector<double>& a, const std::vector<double>& b, int n);

// ||<d(j)/R>^{-n^2/2}||_{l^{2/(n-1)}} over j in [-W, W]^n with d = R max(0, |j|_inf - 1).
double companion_window_sum(int n, long W);

} // namespace mlr
