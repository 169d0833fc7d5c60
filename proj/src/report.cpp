#include "mlr/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace mlr {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Contract make_contract(const std::string& name, double value, const std::string& relation, double threshold,
                       double upper) {
    Contract c{name, false, value, threshold, relation};
    if (relation == "<=")
        c.passed = value <= threshold;
    else if (relation == ">=")
        c.passed = value >= threshold;
    else if (relation == "<")
        c.passed = value < threshold;
    else if (relation == ">")
        c.passed = value > threshold;
    else if (relation == "in") {
        c.passed = value >= threshold && value <= upper;
        c.relation = "in [" + format_double(threshold) + ", " + format_double(upper) + "]";
    } else
        throw std::invalid_argument("unknown contract relation: " + relation);
    if (std::isnan(value)) c.passed = false;
    return c;
}

namespace {

json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

json contract_json(const Contract& c) {
    return {{"name", c.name}, {"passed", c.passed}, {"value", number(c.value)}, {"threshold", number(c.threshold)},
            {"relation", c.relation}};
}

Contract contract_from(const json& j) {
    Contract c;
    c.name = j.at("name").get<std::string>();
    c.passed = j.at("passed").get<bool>();
    c.value = j.at("value").is_number() ? j.at("value").get<double>() : std::nan("");
    c.threshold = j.at("threshold").is_number() ? j.at("threshold").get<double>() : std::nan("");
    c.relation = j.at("relation").get<std::string>();
    return c;
}

std::string csv_cell(const json& v) {
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_number()) return v.dump();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

} // namespace

bool Report::all_passed() const {
    for (const auto& c : contracts)
        if (!c.passed) return false;
    return true;
}

json Report::to_json() const {
    json j;
    j["kind"] = kind;
    j["metadata"] = metadata;
    j["config"] = config;
    j["summary"] = summary;
    j["columns"] = columns;
    json rs = json::array();
    for (const auto& r : rows) rs.push_back(r);
    j["records"] = rs;
    json cs = json::array();
    for (const auto& c : contracts) cs.push_back(contract_json(c));
    j["contracts"] = cs;
    j["all_passed"] = all_passed();
    return j;
}

Report Report::from_json(const json& j) {
    Report r;
    r.kind = j.at("kind").get<std::string>();
    r.metadata = j.at("metadata");
    r.config = j.at("config");
    r.summary = j.at("summary");
    r.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& row : j.at("records")) r.rows.push_back(row.get<std::vector<json>>());
    for (const auto& c : j.at("contracts")) r.contracts.push_back(contract_from(c));
    return r;
}

std::string Report::to_csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + csv_cell(row[c]);
        out += "\n";
    }
    return out;
}

json SweepReport::to_json() const {
    json j;
    j["kind"] = abscissa == "R" ? "sweep_R" : "sweep_mu";
    j["abscissa"] = abscissa;
    json recs = json::array();
    for (const auto& r : records)
        recs.push_back({{"scale", r.scale}, {"tuple", r.tuple}, {"label", r.label}, {"ratio", number(r.ratio)}});
    j["records"] = recs;
    json per = json::array();
    for (std::size_t s = 0; s < scales.size(); ++s) {
        json e = {{"scale", scales[s]}, {"max_ratio", number(maxima[s])}};
        if (s < oracle.size()) {
            e["oracle_ratio"] = number(oracle[s]);
            e["oracle_rel_diff"] = number(oracle_rel_diff[s]);
        }
        per.push_back(e);
    }
    j["per_scale"] = per;
    j["fit"] = {{"exponent", number(exponent)}, {"intercept", number(intercept)}, {"residual", number(residual)},
                {"points", scales.size()}};
    j["metadata"] = {{"config_hash", config_hash}, {"seed", seed}, {"tool_version", tool_version}};
    j["config"] = config;
    json cs = json::array();
    for (const auto& c : contracts) cs.push_back(contract_json(c));
    j["contracts"] = cs;
    return j;
}

SweepReport SweepReport::from_json(const json& j) {
    SweepReport r;
    auto num = [](const json& v) { return v.is_number() ? v.get<double>() : std::stod(v.get<std::string>()); };
    r.abscissa = j.at("abscissa").get<std::string>();
    for (const auto& e : j.at("records"))
        r.records.push_back({e.at("scale").get<double>(), e.at("tuple").get<int>(), e.at("label").get<std::string>(),
                             num(e.at("ratio"))});
    for (const auto& e : j.at("per_scale")) {
        r.scales.push_back(e.at("scale").get<double>());
        r.maxima.push_back(num(e.at("max_ratio")));
        if (e.contains("oracle_ratio")) {
            r.oracle.push_back(num(e.at("oracle_ratio")));
            r.oracle_rel_diff.push_back(num(e.at("oracle_rel_diff")));
        }
    }
    r.exponent = num(j.at("fit").at("exponent"));
    r.intercept = num(j.at("fit").at("intercept"));
    r.residual = num(j.at("fit").at("residual"));
    r.config_hash = j.at("metadata").at("config_hash").get<std::string>();
    r.seed = j.at("metadata").at("seed").get<std::uint64_t>();
    r.tool_version = j.at("metadata").at("tool_version").get<std::string>();
    r.config = j.at("config");
    for (const auto& c : j.at("contracts")) r.contracts.push_back(contract_from(c));
    return r;
}

Report SweepReport::to_report() const {
    Report rep;
    json j = to_json();
    rep.kind = j["kind"].get<std::string>();
    rep.metadata = j["metadata"];
    rep.config = config;
    rep.summary = {{"fit", j["fit"]}, {"per_scale", j["per_scale"]}, {"abscissa", abscissa}};
    rep.columns = {abscissa, "tuple", "label", "ratio"};
    for (const auto& r : records) rep.rows.push_back({r.scale, r.tuple, r.label, number(r.ratio)});
    rep.contracts = contracts;
    return rep;
}

void emit_report(const Report& report, const std::string& dir, const std::string& stem, ReportFormat format) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
    auto write = [](const fs::path& path, const std::string& text) {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
        os << text;
        if (!os) throw std::runtime_error("write failed: " + path.string());
    };
    if (format != ReportFormat::Csv) write(fs::path(dir) / (stem + ".json"), report.to_json().dump(2) + "\n");
    if (format != ReportFormat::Json) write(fs::path(dir) / (stem + ".csv"), report.to_csv());
}

} // namespace mlr
