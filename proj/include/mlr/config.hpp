#pragma once

#include "mlr/extension.hpp"
#include "mlr/frames.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace mlr {

struct SurfaceSpec {
    std::string graph = "flat";  // flat | quadratic
    Mat matrix;                  // quadratic form A, phi = xi^T A xi / 2
    std::string domain_kind = "box";
    Vec half_widths;
    double radius = 0;
    Vec base;
    double derivative_bound = 1.0;  // C in sup |grad phi(x) - grad phi(y)| <= C diam(U)
};

struct SlabSpec {
    std::vector<Vec> subspace;  // orthonormal spanning vectors of H
    Vec point;
    std::vector<int> xi_double_prime_axes;  // density axes of surface 1 across the slab
};

// Mirrors the JSON scenario file; unknown subcommand sections stay in `raw`.
struct ScenarioConfig {
    int n = 1;
    int k = 2;
    double delta = 0.25;
    double nu = 0.1;
    std::optional<double> mu;
    std::vector<double> mu_list;
    std::vector<Vec> normals;
    bool allow_degenerate = false;
    std::string region_frame = "lattice";  // lattice | standard
    std::vector<SurfaceSpec> surfaces;
    std::optional<SlabSpec> slab;
    std::vector<double> R;
    double h_x = 0.5;
    double h_xi = 0;  // 0: use 1 / (4 R_max)
    int tuples = 8;
    std::vector<std::string> kinds{"constant", "bump", "signs"};
    std::uint64_t seed = 1;
    int weight_order = 2;
    std::optional<double> weight_exponent;  // default 2N - n^2
    int truncation = 0;
    bool plancherel_check = true;
    nlohmann::json raw;

    static ScenarioConfig from_json(const nlohmann::json& j);
    static ScenarioConfig load(const std::string& path);
    double effective_weight_exponent() const { return weight_exponent.value_or(2.0 * weight_order - n * n); }
    std::string hash() const;
};

// Geometric objects built from a config.
struct Scenario {
    ScenarioConfig config;
    std::optional<Frame> frame;  // absent for degenerate controls
    std::vector<Hypersurface> surfaces;
    Mat region_basis;
    std::optional<SlabCondition> slab;
};

// Builds frame, surfaces and slab. If mu_override is set, the slab half-width and the
// extent of surface 1 across the slab (xi'' axes) become mu / 2.
Scenario build_scenario(const ScenarioConfig& config, std::optional<double> mu_override = std::nullopt);

std::string fnv1a_hex(const std::string& text);

} // namespace mlr
