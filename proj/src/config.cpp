#include "mlr/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mlr {

using nlohmann::json;

namespace {

Vec to_vec(const json& j, const char* what) {
    if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t a = 0; a < j.size(); ++a) {
        if (!j[a].is_number()) throw ConfigError(std::string(what) + " must contain numbers");
        v[static_cast<Eigen::Index>(a)] = j[a].get<double>();
    }
    return v;
}

Mat to_mat(const json& j, const char* what) {
    if (!j.is_array() || j.empty()) throw ConfigError(std::string(what) + " must be a non-empty matrix");
    Mat m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
        Vec row = to_vec(j[r], what);
        if (row.size() != m.cols()) throw ConfigError(std::string(what) + " rows differ in length");
        m.row(static_cast<Eigen::Index>(r)) = row;
    }
    return m;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    try {
        return j[key].get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

} // namespace

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    ScenarioConfig c;
    c.raw = j;
    c.n = get_or<int>(j, "n", 1);
    c.k = get_or<int>(j, "k", c.n + 1);
    if (c.n < 1 || c.n > 3) throw ConfigError("n must be in [1, 3]");
    if (c.k < 2 || c.k > c.n + 1) throw ConfigError("k must be in [2, n + 1]");
    c.delta = get_or<double>(j, "delta", 0.25);
    if (!(c.delta > 0)) throw ConfigError("delta must be positive");
    c.nu = get_or<double>(j, "nu", 0.1);
    if (j.contains("mu") && !j["mu"].is_null()) c.mu = j["mu"].get<double>();
    if (j.contains("mu_list")) c.mu_list = j["mu_list"].get<std::vector<double>>();
    c.allow_degenerate = get_or<bool>(j, "allow_degenerate", false);
    c.region_frame = get_or<std::string>(j, "region_frame", c.allow_degenerate ? "standard" : "lattice");
    if (c.region_frame != "lattice" && c.region_frame != "standard") throw ConfigError("region_frame must be lattice or standard");
    if (j.contains("normals")) {
        for (const auto& v : j["normals"]) {
            Vec nrm = to_vec(v, "normals");
            if (nrm.size() != c.n + 1) throw ConfigError("normals must live in R^{n+1}");
            if (!(nrm.norm() > 0)) throw ConfigError("zero normal");
            c.normals.push_back(nrm.normalized());
        }
        if (static_cast<int>(c.normals.size()) != c.n + 1) throw ConfigError("need n + 1 normals");
    } else {
        for (int i = 0; i <= c.n; ++i) c.normals.push_back(Vec::Unit(c.n + 1, i));
    }
    if (!j.contains("surfaces") || !j["surfaces"].is_array()) throw ConfigError("missing surfaces array");
    for (const auto& s : j["surfaces"]) {
        SurfaceSpec spec;
        spec.graph = get_or<std::string>(s, "graph", "flat");
        if (spec.graph == "quadratic") {
            if (!s.contains("matrix")) throw ConfigError("quadratic surface needs a matrix");
            spec.matrix = to_mat(s["matrix"], "matrix");
            if (spec.matrix.rows() != c.n || spec.matrix.cols() != c.n) throw ConfigError("matrix must be n x n");
        } else if (spec.graph != "flat") {
            throw ConfigError("graph must be flat or quadratic");
        }
        const json d = s.value("domain", json::object());
        spec.domain_kind = get_or<std::string>(d, "kind", "box");
        if (spec.domain_kind == "box") {
            if (!d.contains("half_widths")) throw ConfigError("box domain needs half_widths");
            spec.half_widths = to_vec(d["half_widths"], "half_widths");
            if (spec.half_widths.size() != c.n) throw ConfigError("half_widths must have n entries");
        } else if (spec.domain_kind == "ball") {
            spec.radius = get_or<double>(d, "radius", 0.0);
            if (!(spec.radius > 0)) throw ConfigError("ball radius must be positive");
        } else {
            throw ConfigError("domain kind must be box or ball");
        }
        spec.base = s.contains("base") ? to_vec(s["base"], "base") : Vec::Zero(c.n + 1);
        if (spec.base.size() != c.n + 1) throw ConfigError("base must live in R^{n+1}");
        spec.derivative_bound = get_or<double>(s, "derivative_bound", 1.0);
        if (!(spec.derivative_bound > 0)) throw ConfigError("derivative_bound must be positive");
        c.surfaces.push_back(spec);
    }
    if (static_cast<int>(c.surfaces.size()) != c.k) throw ConfigError("need exactly k surfaces");
    if (j.contains("slab") && !j["slab"].is_null()) {
        SlabSpec s;
        for (const auto& v : j["slab"].at("subspace")) s.subspace.push_back(to_vec(v, "slab.subspace"));
        s.point = j["slab"].contains("point") ? to_vec(j["slab"]["point"], "slab.point") : Vec::Zero(c.n + 1);
        s.xi_double_prime_axes = get_or<std::vector<int>>(j["slab"], "xi_double_prime_axes", {});
        c.slab = s;
    }
    c.R = get_or<std::vector<double>>(j, "R", {});
    for (double r : c.R)
        if (!(r > 0)) throw ConfigError("R values must be positive");
    c.h_x = get_or<double>(j, "h_x", 0.5);
    if (!(c.h_x > 0)) throw ConfigError("h_x must be positive");
    c.h_xi = get_or<double>(j, "h_xi", 0.0);
    if (c.h_xi < 0) throw ConfigError("h_xi must be non-negative");
    if (j.contains("family")) {
        c.tuples = get_or<int>(j["family"], "tuples", 8);
        c.kinds = get_or<std::vector<std::string>>(j["family"], "kinds", c.kinds);
    }
    if (c.tuples < 1) throw ConfigError("family needs at least one tuple");
    for (const auto& kind : c.kinds)
        if (kind != "constant" && kind != "bump" && kind != "signs" && kind != "slab")
            throw ConfigError("unknown density kind: " + kind);
    c.seed = get_or<std::uint64_t>(j, "seed", 1);
    c.weight_order = get_or<int>(j, "weight_order", 2);
    if (j.contains("weight_exponent") && !j["weight_exponent"].is_null()) c.weight_exponent = j["weight_exponent"].get<double>();
    c.truncation = get_or<int>(j, "truncation", 0);
    c.plancherel_check = get_or<bool>(j, "plancherel_check", true);
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string ScenarioConfig::hash() const { return fnv1a_hex(raw.dump()); }

Scenario build_scenario(const ScenarioConfig& config, std::optional<double> mu_override) {
    Scenario sc;
    sc.config = config;
    const int d = config.n + 1;
    try {
        if (!config.allow_degenerate) sc.frame = Frame::create(config.normals, config.nu);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("invalid frame: ") + e.what());
    }
    if (config.region_frame == "lattice") {
        if (!sc.frame) throw ConfigError("lattice region frame needs a valid frame");
        sc.region_basis = sc.frame->basis();
    } else {
        sc.region_basis = Mat::Identity(d, d);
    }
    std::optional<double> mu = mu_override ? mu_override : config.mu;
    if (config.slab) {
        Mat sub(d, static_cast<Eigen::Index>(config.slab->subspace.size()));
        for (std::size_t c = 0; c < config.slab->subspace.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = config.slab->subspace[c];
        try {
            sc.slab = SlabCondition::create(sub, mu.value_or(config.delta), config.slab->point);
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("invalid slab: ") + e.what());
        }
    }
    for (int i = 0; i < config.k; ++i) {
        const SurfaceSpec& s = config.surfaces[i];
        Graph graph = s.graph == "quadratic" ? Graph::quadratic_form(s.matrix) : Graph::flat();
        Domain domain = s.domain_kind == "box" ? Domain::box(s.half_widths) : Domain::ball(config.n, s.radius);
        if (i == 0 && mu_override && config.slab) {
            if (domain.kind != Domain::Kind::Box) throw ConfigError("mu sweep needs a box domain for surface 1");
            for (int a : config.slab->xi_double_prime_axes) domain.half_widths[a] = *mu_override / 2;
        }
        if (domain.diameter() > config.delta * (1 + 1e-12))
            throw ConfigError("surface domain diameter exceeds delta");
        try {
            if (sc.frame) {
                sc.surfaces.push_back(Hypersurface::from_frame(*sc.frame, i, domain, graph, s.base, s.derivative_bound));
            } else {
                std::vector<Vec> others;
                for (int m = 0; m < d; ++m)
                    if (m != i) others.push_back(config.normals[m]);
                sc.surfaces.emplace_back(i, config.normals[i], gram_schmidt_hyperplane(config.normals[i], others), domain,
                                         graph, s.base, s.derivative_bound);
            }
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string("invalid surface: ") + e.what());
        }
        if (sc.surfaces.back().gradient_oscillation() > s.derivative_bound * domain.diameter() * (1 + 1e-12) + 1e-15)
            throw ConfigError("surface " + std::to_string(i + 1) + " gradient oscillation exceeds derivative_bound * diam(U)");
    }
    return sc;
}

} // namespace mlr
