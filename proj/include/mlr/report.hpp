#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace mlr {

struct Contract {
    std::string name;
    bool passed = false;
    double value = 0;
    double threshold = 0;
    std::string relation;  // e.g. "<=", ">=", "in"
};

Contract make_contract(const std::string& name, double value, const std::string& relation, double threshold,
                       double upper = 0);

// Generic report: JSON body plus a CSV table.
struct Report {
    std::string kind;
    nlohmann::json metadata;
    nlohmann::json config;
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> columns;
    std::vector<std::vector<nlohmann::json>> rows;
    std::vector<Contract> contracts;

    bool all_passed() const;
    nlohmann::json to_json() const;
    static Report from_json(const nlohmann::json& j);
    std::string to_csv() const;
};

struct SweepRecord {
    double scale = 0;
    int tuple = 0;
    std::string label;
    double ratio = 0;
};

struct SweepReport {
    std::string abscissa = "R";  // R or mu
    std::vector<SweepRecord> records;
    std::vector<double> scales;
    std::vector<double> maxima;
    std::vector<double> oracle;           // per scale; empty if not applicable
    std::vector<double> oracle_rel_diff;  // per scale
    double exponent = 0, intercept = 0, residual = 0;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string tool_version;
    nlohmann::json config;
    std::vector<Contract> contracts;

    nlohmann::json to_json() const;
    static SweepReport from_json(const nlohmann::json& j);
    Report to_report() const;
};

enum class ReportFormat { Json, Csv, Both };

// Writes <dir>/<stem>.json and/or <dir>/<stem>.csv.
void emit_report(const Report& report, const std::string& dir, const std::string& stem, ReportFormat format);

std::string format_double(double v);

} // namespace mlr
