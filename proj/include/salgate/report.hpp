#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "salgate/analysis.hpp"
#include "salgate/cluster.hpp"
#include "salgate/errors.hpp"
#include "salgate/evaluate.hpp"

namespace salgate {

namespace detail {

inline std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
    if (v)
        return *v;
    return nullptr;
}

inline void write_text(const std::filesystem::path& path, const std::string& text,
                       const char* what) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoFailure(std::string("cannot open ") + what + " for writing: " + path.string());
    out << text;
    if (!out)
        throw IoFailure(std::string(what) + " write failed: " + path.string());
}

inline nlohmann::json read_json(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure(std::string("cannot open ") + what + ": " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedReport(std::string(what) + " " + path.string() + ": " + e.what());
    }
    return j;
}

} // namespace detail

inline nlohmann::ordered_json box_stats_to_json(const BoxStats& b) {
    nlohmann::ordered_json j;
    j["min"] = b.min;
    j["q1"] = b.q1;
    j["median"] = b.median;
    j["q3"] = b.q3;
    j["max"] = b.max;
    j["whisker_low"] = b.whisker_low;
    j["whisker_high"] = b.whisker_high;
    j["outliers"] = b.outliers;
    return j;
}

inline nlohmann::ordered_json density_to_json(const DensityCurve& d) {
    nlohmann::ordered_json j;
    j["bandwidth"] = d.bandwidth;
    j["grid"] = d.grid;
    j["density"] = d.density;
    return j;
}

inline nlohmann::ordered_json cluster_report_to_json(const ClusterReport& rep) {
    nlohmann::ordered_json j;
    j["cluster_id"] = rep.cluster_id;
    j["n"] = rep.n;
    j["n_unscored"] = rep.n_unscored;
    j["aberrancy_rate"] = rep.aberrancy_rate;
    j["gated"] = rep.gated;
    j["precision"] = detail::opt_json(rep.precision);
    j["recall_contribution"] = rep.recall_contribution;
    j["sca_values"] = rep.sca_values;
    j["box"] = rep.box ? box_stats_to_json(*rep.box) : nlohmann::ordered_json(nullptr);
    j["density"] = rep.density ? density_to_json(*rep.density) : nlohmann::ordered_json(nullptr);
    return j;
}

inline ClusterReport cluster_report_from_json(const nlohmann::json& j) {
    ClusterReport rep;
    try {
        rep.cluster_id = j.at("cluster_id").get<int>();
        rep.n = j.at("n").get<std::uint64_t>();
        rep.n_unscored = j.at("n_unscored").get<std::uint64_t>();
        rep.aberrancy_rate = j.at("aberrancy_rate").get<double>();
        rep.gated = j.at("gated").get<bool>();
        if (!j.at("precision").is_null())
            rep.precision = j.at("precision").get<double>();
        rep.recall_contribution = j.at("recall_contribution").get<double>();
        rep.sca_values = j.at("sca_values").get<std::vector<double>>();
        if (!j.at("box").is_null()) {
            const auto& b = j.at("box");
            BoxStats box;
            box.min = b.at("min").get<double>();
            box.q1 = b.at("q1").get<double>();
            box.median = b.at("median").get<double>();
            box.q3 = b.at("q3").get<double>();
            box.max = b.at("max").get<double>();
            box.whisker_low = b.at("whisker_low").get<double>();
            box.whisker_high = b.at("whisker_high").get<double>();
            box.outliers = b.at("outliers").get<std::vector<double>>();
            rep.box = box;
        }
        if (!j.at("density").is_null()) {
            const auto& d = j.at("density");
            DensityCurve density;
            density.bandwidth = d.at("bandwidth").get<double>();
            density.grid = d.at("grid").get<std::vector<double>>();
            density.density = d.at("density").get<std::vector<double>>();
            rep.density = density;
        }
    } catch (const nlohmann::json::exception& e) {
        throw MalformedReport(std::string("cluster report: ") + e.what());
    }
    return rep;
}

inline nlohmann::ordered_json gate_to_json(const GateDecision& d) {
    nlohmann::ordered_json j;
    j["rate_threshold"] = d.rate_threshold;
    j["kept"] = d.kept;
    j["gated"] = d.gated;
    return j;
}

inline GateDecision gate_from_json(const nlohmann::json& j) {
    GateDecision d;
    try {
        d.rate_threshold = j.at("rate_threshold").get<double>();
        for (int c : j.at("kept").get<std::vector<int>>())
            d.kept.insert(c);
        for (int c : j.at("gated").get<std::vector<int>>())
            d.gated.insert(c);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedReport(std::string("gate decision: ") + e.what());
    }
    return d;
}

inline nlohmann::ordered_json metrics_to_json(const ProductionMetrics& m) {
    nlohmann::ordered_json j;
    j["n_records"] = m.n_records;
    j["actual_positives"] = m.actual_positives;
    j["predicted_positives"] = m.predicted_positives;
    j["true_positives"] = m.true_positives;
    j["kept_predicted_positives"] = m.kept_predicted_positives;
    j["kept_true_positives"] = m.kept_true_positives;
    j["precision_baseline"] = detail::opt_json(m.precision_baseline);
    j["precision_gated"] = detail::opt_json(m.precision_gated);
    j["recall_baseline"] = detail::opt_json(m.recall_baseline);
    j["recall_gated"] = detail::opt_json(m.recall_gated);
    j["precision_delta"] = detail::opt_json(m.precision_delta);
    j["recall_delta"] = detail::opt_json(m.recall_delta);
    nlohmann::ordered_json per;
    for (const auto& [cluster, row] : m.per_cluster) {
        nlohmann::ordered_json r;
        r["n"] = row.n;
        r["predicted_positives"] = row.predicted_positives;
        r["true_positives"] = row.true_positives;
        r["precision"] = detail::opt_json(row.precision);
        r["recall_contribution"] = row.recall_contribution;
        per[std::to_string(cluster)] = std::move(r);
    }
    j["per_cluster"] = std::move(per);
    return j;
}

inline nlohmann::ordered_json report_to_json(const PipelineReport& report) {
    nlohmann::ordered_json j;
    j["n_records"] = report.n_records;
    j["tau"] = report.tau;
    j["rho"] = report.rho;
    j["ari_vs_class_tags"] = detail::opt_json(report.ari_vs_class_tags);
    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    for (const auto& rep : report.clusters)
        clusters.push_back(cluster_report_to_json(rep));
    j["clusters"] = std::move(clusters);
    j["gate"] = gate_to_json(report.gate);
    j["metrics"] = metrics_to_json(report.metrics);
    return j;
}

inline void write_report_json(const PipelineReport& report, const std::filesystem::path& path) {
    detail::write_text(path, report_to_json(report).dump(2) + "\n", "report");
}

// Row table: one line per record, empty cells where SCA is undefined.
inline void write_report_csv(const PipelineReport& report, const std::filesystem::path& path) {
    std::string text = "id,cluster,sca,aberrant,kept\n";
    for (const auto& row : report.rows) {
        text += row.id;
        text += ',';
        text += std::to_string(row.cluster);
        text += ',';
        if (row.sca) {
            text += detail::format_full(*row.sca);
            text += ',';
            text += row.aberrant ? "true" : "false";
        } else {
            text += ",";
        }
        text += ',';
        text += row.kept ? "true" : "false";
        text += '\n';
    }
    detail::write_text(path, text, "report csv");
}

inline void write_sca_csv(const std::vector<PredictionRecord>& records,
                          const std::vector<std::optional<double>>& sca_values, double tau,
                          const std::filesystem::path& path) {
    if (sca_values.size() != records.size())
        throw LengthMismatch("write_sca_csv: records and sca values must have equal length");
    std::string text = "id,sca,aberrant\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!sca_values[i])
            continue;
        text += records[i].id;
        text += ',';
        text += detail::format_full(*sca_values[i]);
        text += ',';
        text += *sca_values[i] < tau ? "true" : "false";
        text += '\n';
    }
    detail::write_text(path, text, "sca csv");
}

inline std::vector<std::pair<std::string, double>> read_sca_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure("cannot open sca table: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "id,sca,aberrant")
        throw MalformedReport("sca table " + path.string() +
                              ": expected header 'id,sca,aberrant'");
    std::vector<std::pair<std::string, double>> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                                       : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos || c1 == 0)
            throw MalformedReport("sca table line " + std::to_string(line_no) +
                                  ": expected 'id,sca,aberrant'");
        const std::string cell = line.substr(c1 + 1, c2 - c1 - 1);
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
            throw MalformedReport("sca table line " + std::to_string(line_no) +
                                  ": bad sca value '" + cell + "'");
        out.emplace_back(line.substr(0, c1), v);
    }
    return out;
}

inline void write_assignments_csv(const std::vector<PredictionRecord>& records,
                                  const std::vector<int>& assignments,
                                  const std::filesystem::path& path) {
    if (assignments.size() != records.size())
        throw LengthMismatch("write_assignments_csv: records and assignments must have equal "
                             "length");
    std::string text = "id,cluster\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        text += records[i].id;
        text += ',';
        text += std::to_string(assignments[i]);
        text += '\n';
    }
    detail::write_text(path, text, "assignments csv");
}

inline std::vector<std::pair<std::string, int>> read_assignments_csv(
    const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure("cannot open assignments: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "id,cluster")
        throw MalformedReport("assignments " + path.string() +
                              ": expected header 'id,cluster'");
    std::vector<std::pair<std::string, int>> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const std::size_t comma = line.rfind(',');
        if (comma == std::string::npos || comma == 0)
            throw MalformedReport("assignments line " + std::to_string(line_no) +
                                  ": expected 'id,cluster'");
        try {
            out.emplace_back(line.substr(0, comma), std::stoi(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw MalformedReport("assignments line " + std::to_string(line_no) +
                                  ": bad cluster id");
        }
    }
    return out;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            const std::filesystem::path& path) {
    std::string text = "k,silhouette,ari_vs_reference,inertia\n";
    for (const auto& row : rows) {
        text += std::to_string(row.k);
        text += ',';
        text += detail::format_full(row.silhouette);
        text += ',';
        if (row.ari_vs_reference)
            text += detail::format_full(*row.ari_vs_reference);
        text += ',';
        text += detail::format_full(row.inertia);
        text += '\n';
    }
    detail::write_text(path, text, "sweep csv");
}

inline void write_evaluation_json(const std::vector<ClusterReport>& reports, double tau,
                                  const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["tau"] = tau;
    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    for (const auto& rep : reports)
        clusters.push_back(cluster_report_to_json(rep));
    j["clusters"] = std::move(clusters);
    detail::write_text(path, j.dump(2) + "\n", "evaluation");
}

inline std::pair<std::vector<ClusterReport>, double> read_evaluation_json(
    const std::filesystem::path& path) {
    const nlohmann::json j = detail::read_json(path, "evaluation");
    std::pair<std::vector<ClusterReport>, double> out;
    try {
        out.second = j.at("tau").get<double>();
        for (const auto& c : j.at("clusters"))
            out.first.push_back(cluster_report_from_json(c));
    } catch (const nlohmann::json::exception& e) {
        throw MalformedReport("evaluation " + path.string() + ": " + e.what());
    }
    return out;
}

inline void write_gate_json(const GateDecision& decision, const std::filesystem::path& path) {
    detail::write_text(path, gate_to_json(decision).dump(2) + "\n", "gate decision");
}

inline GateDecision read_gate_json(const std::filesystem::path& path) {
    return gate_from_json(detail::read_json(path, "gate decision"));
}

} // namespace salgate
