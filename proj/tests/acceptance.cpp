// Acceptance run: drives the mlr_lab CLI over the shipped configs and prints one
// PASS/FAIL line per criterion. Every tolerance below is fixed here, independent of
// the thresholds written into the configs.

#include <json.hpp>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kLab = MLR_LAB_PATH;
const std::string kConfigs = MLR_CONFIG_DIR;

struct Run {
    std::string command, config, stem;
    int exit_code = -1;
    double seconds = 0;
    json report;
    bool identical = false;  // second invocation matched byte for byte
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

int invoke(const Run& r, const fs::path& dir) {
    fs::create_directories(dir);
    std::string cmd = "\"" + kLab + "\" " + r.command + " --config \"" + kConfigs + "/" + r.config +
                      ".json\" --out \"" + dir.string() + "\" --format both > \"" + (dir / "stdout.txt").string() + "\" 2>&1";
    int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Run execute(const std::string& command, const std::string& config, const fs::path& root) {
    Run r{command, config, command};
    for (auto& c : r.stem)
        if (c == '-') c = '_';
    const fs::path a = root / (config + "_a"), b = root / (config + "_b");
    auto t0 = std::chrono::steady_clock::now();
    r.exit_code = invoke(r, a);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    int second = invoke(r, b);
    const fs::path ja = a / (r.stem + ".json"), ca = a / (r.stem + ".csv");
    if (fs::exists(ja)) r.report = json::parse(slurp(ja));
    r.identical = second == r.exit_code && fs::exists(ja) && fs::exists(ca) &&
                  slurp(ja) == slurp(b / (r.stem + ".json")) && slurp(ca) == slurp(b / (r.stem + ".csv"));
    return r;
}

// Values of every contract whose name starts with the prefix.
std::vector<double> values(const Run& r, const std::string& prefix) {
    std::vector<double> out;
    if (!r.report.contains("contracts")) return out;
    for (const auto& c : r.report["contracts"])
        if (c["name"].get<std::string>().rfind(prefix, 0) == 0) out.push_back(c["value"].get<double>());
    return out;
}

bool all_le(const std::vector<double>& v, double bound, std::size_t expected) {
    if (v.size() != expected) return false;
    for (double x : v)
        if (!(x <= bound)) return false;
    return true;
}

double fit_field(const Run& r, const std::string& key) {
    if (!r.report.contains("summary") || !r.report["summary"].contains("fit")) return std::nan("");
    const json& f = r.report["summary"]["fit"];
    return f.contains(key) && f[key].is_number() ? f[key].get<double>() : std::nan("");
}

struct Outcome {
    bool passed;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

int main() {
    const fs::path root = fs::temp_directory_path() / "mlr_acceptance";
    fs::remove_all(root);

    std::map<std::string, Run> runs;
    auto run = [&](const std::string& command, const std::string& config) -> const Run& {
        auto it = runs.find(config);
        if (it == runs.end()) {
            std::cout << "running " << command << " " << config << "\n" << std::flush;
            it = runs.emplace(config, execute(command, config, root)).first;
        }
        return it->second;
    };

    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;

    criteria.push_back({"1 partition of unity", [&] {
        const Run& r = run("check-partition", "check_partition");
        auto v = values(r, "partition of unity");
        bool ok = r.exit_code == 0 && all_le(v, 1e-6, 6) && r.seconds <= 60;
        double worst = 0;
        for (double x : v) worst = std::max(worst, x);
        return Outcome{ok, "max |sum - 1| = " + num(worst) + " over 6 (m, r) cases, " + num(r.seconds) + " s"};
    }});

    criteria.push_back({"2 commutator identity", [&] {
        const Run& r = run("check-commutator", "check_commutator");
        auto full = values(r, "commutator |x1|<=8");
        auto slice = values(r, "commutator x1=0 slice");
        bool ok = r.exit_code == 0 && all_le(full, 1e-4, 2) && all_le(slice, 1e-8, 4) && r.seconds <= 120;
        return Outcome{ok, "n=1 " + num(full.empty() ? NAN : full[0]) + ", n=2 " + num(full.size() < 2 ? NAN : full[1]) +
                               ", " + num(r.seconds) + " s"};
    }});

    criteria.push_back({"3 discrete Loomis-Whitney", [&] {
        const Run& r = run("check-lw", "check_lw");
        auto oracle = values(r, "n=1 oracle max ratio");
        auto product = values(r, "product extremizer");
        auto n2 = values(r, "n=2 direct vs slicing");
        bool ok = r.exit_code == 0 && oracle.size() == 1 && oracle[0] >= 1 - 1e-12 && oracle[0] <= 1.05 &&
                  all_le(product, 1e-12, 1) && all_le(n2, 1e-10, 1) && r.seconds <= 120;
        return Outcome{ok, "oracle max " + num(oracle.empty() ? NAN : oracle[0]) + ", n=2 agreement " +
                               num(n2.empty() ? NAN : n2[0])};
    }});

    criteria.push_back({"4 refined discrete Loomis-Whitney", [&] {
        const Run& r = run("check-lw", "check_lw");
        auto v = values(r, "refined k=n=2");
        bool ok = r.exit_code == 0 && all_le(v, 1e-10, 1) && r.seconds <= 60;
        return Outcome{ok, "direct vs per-slice " + num(v.empty() ? NAN : v[0])};
    }});

    criteria.push_back({"5 sequence Hoelder step", [&] {
        const Run& r = run("check-lw", "check_lw");
        auto fails = values(r, "sequence Hoelder failures");
        auto change = values(r, "companion sum doubling change");
        bool ok = r.exit_code == 0 && all_le(fails, 0, 3) && all_le(change, 0.02, 3) && r.seconds <= 30;
        double worst = 0;
        for (double x : change) worst = std::max(worst, x);
        return Outcome{ok, "Hoelder failures 0 for n=1,2,3; companion change " + num(worst)};
    }});

    criteria.push_back({"6 flat baseline", [&] {
        const Run& a = run("sweep-ar", "sweep_flat_n1");
        const Run& b = run("sweep-ar", "sweep_flat_n2");
        const Run& neg = run("sweep-ar", "sweep_degenerate");
        double ea = fit_field(a, "exponent"), eb = fit_field(b, "exponent"), en = fit_field(neg, "exponent");
        bool residuals = std::isfinite(fit_field(a, "residual")) && std::isfinite(fit_field(b, "residual"));
        bool ok = a.exit_code == 0 && b.exit_code == 0 && neg.exit_code == 0 && ea <= 0.1 && eb <= 0.1 && en > 0.3 &&
                  residuals && b.seconds <= 1200;
        return Outcome{ok, "eps n=1 " + num(ea) + " (res " + num(fit_field(a, "residual")) + "), n=2 " + num(eb) +
                               " (res " + num(fit_field(b, "residual")) + "), degenerate " + num(en)};
    }});

    criteria.push_back({"7 curved case", [&] {
        const Run& r = run("sweep-ar", "sweep_curved_n1");
        double e = fit_field(r, "exponent");
        auto oracle = values(r, "Plancherel oracle agreement");
        bool ok = r.exit_code == 0 && e <= 0.2 && all_le(oracle, 0.05, 1) && r.seconds <= 600;
        return Outcome{ok, "eps " + num(e) + ", worst oracle rel diff " + num(oracle.empty() ? NAN : oracle[0]) + ", " +
                               num(r.seconds) + " s"};
    }});

    criteria.push_back({"8 mu gain", [&] {
        const Run& r = run("sweep-mu", "sweep_mu");
        double s = fit_field(r, "exponent");
        bool ok = r.exit_code == 0 && s >= 0.35 && s <= 0.65 && r.seconds <= 900;
        return Outcome{ok, "slope " + num(s) + " against 0.5"};
    }});

    criteria.push_back({"9 off-diagonal decay", [&] {
        const Run& r = run("offdiag", "offdiag");
        auto mono = values(r, "decay monotone");
        auto drop = values(r, "drop per doubling");
        auto tri = values(r, "quasi-triangle");
        bool ok = r.exit_code == 0 && all_le(mono, 1.0, 1) && drop.size() == 1 && drop[0] >= 3 &&
                  all_le(tri, 1 + 1e-9, 1) && r.seconds <= 600;
        return Outcome{ok, "max successive ratio " + num(mono.empty() ? NAN : mono[0]) + ", min drop " +
                               num(drop.empty() ? NAN : drop[0]) + ", triangle " + num(tri.empty() ? NAN : tri[0])};
    }});

    criteria.push_back({"10 L-infinity endpoint", [&] {
        const Run& r = run("sweep-mu", "sweep_mu");
        auto plain = values(r, "L-infinity endpoint ratio");
        auto law = values(r, "slab indicator");
        bool ok = r.exit_code == 0 && all_le(plain, 1 + 1e-3, 1) && all_le(law, 0.1, 1) && r.seconds <= 120;
        return Outcome{ok, "plain max " + num(plain.empty() ? NAN : plain[0]) + ", law deviation " +
                               num(law.empty() ? NAN : law[0])};
    }});

    std::vector<std::pair<std::string, Outcome>> results;
    for (const auto& [name, check] : criteria) results.push_back({name, check()});

    // 11: every invocation above was run twice.
    {
        bool ok = !runs.empty();
        std::string bad;
        for (const auto& [config, r] : runs)
            if (!r.identical) {
                ok = false;
                bad += " " + config;
            }
        results.push_back({"11 determinism", {ok, std::to_string(runs.size()) + " configs, JSON and CSV byte-identical" +
                                                      (bad.empty() ? std::string() : "; differs:" + bad)}});
    }

    int failed = 0;
    for (const auto& [name, o] : results) {
        std::cout << (o.passed ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
        failed += o.passed ? 0 : 1;
    }
    fs::remove_all(root);
    return failed == 0 ? 0 : 1;
}
