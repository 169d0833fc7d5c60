#pragma once

#include "mlr/config.hpp"
#include "mlr/family.hpp"
#include "mlr/report.hpp"

namespace mlr {

inline constexpr const char* kToolVersion = "mlr-lab 0.1.0";

struct ScaleResult {
    double scale = 0;
    std::vector<double> ratios;
    std::vector<std::string> labels;
    double max = 0;
    std::size_t argmax = 0;
    std::vector<double> oracle;  // Plancherel-route ratios per tuple (k = 2, n = 1 only)
};

// Margin requirement margin(f) >= delta - R^{-1/2}; throws ContractViolation.
void require_margin(const FrequencyDensity& f, double delta, double R, bool refined);

// Frequency spacing per axis for a given spatial grid (oscillation rule or config value).
Vec density_spacing(const Scenario& scenario, int surface, const SpatialGrid& grid);

// max over the family of ||prod E_i f_i||_{L^{2/(k-1)}(Q)} / prod ||f_i||, Q the cell of
// size R at the origin (in the region frame).
ScaleResult estimate_A(const Scenario& scenario, double R);

// ||E1 f1 E2 f2||_{L^2(Q)} for n = 1 by the Plancherel route:
// sum_{a,b} c_a conj(c_b) K_Q(zeta_a - zeta_b) with Gauss-Legendre nodes on U_1 x U_2.
double plancherel_product_norm(const Scenario& scenario, const DensitySpec& f1, const DensitySpec& f2, double R,
                               int panels = 12);
double gauss_legendre_l2(const Domain& domain, const DensitySpec& f, int panels = 12);

SweepReport sweep_R(const ScenarioConfig& config);
SweepReport sweep_mu(const ScenarioConfig& config);

struct Fit {
    double slope = 0, intercept = 0, residual = 0;
};
Fit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct DecayRow {
    std::string ray;
    long steps = 0;      // |delta j|_inf
    double distance = 0; // d~ = R max(0, steps - 1)
    double value = 0;
    double weight = 0;   // <d/R>^{-N}
};

struct OffdiagResult {
    double R = 0;
    int N = 2;
    std::vector<DecayRow> rows;
    double total_p = 0;   // ||undecomposed||_p^p
    double pieces_p = 0;  // sum ||piece||_p^p over the window plus the remainder
    double tail_p = 0;    // ||remainder||_p^p, remainder = f1 - sum of window pieces
    double diagonal_share = 0;
    bool diagonal_largest = false;
    double recomposition_error = 0;  // relative L2 norm of the remainder
    double p = 1;
};

// Wave-packet pieces f1^{q'} = F(chi_{q'} F^{-1} f1) and their products with the other
// fields on the cell q of size R at the origin.
OffdiagResult offdiagonal_decay(const ScenarioConfig& config, double R, const std::vector<long>& steps, int J);

struct InductionResult {
    double R = 0;
    double A_emp = 0;
    double max_ratio = 0;      // max over q, tuples of LHS / RHS
    double trivial_ratio = 0;  // same with all weights replaced by one
    std::size_t cells = 0;
    bool support_preserved = true;  // strip variant
    std::string variant;
    int J = 0;
};

InductionResult induction_step_check(const ScenarioConfig& config, double R, const std::string& variant, int J);

} // namespace mlr
