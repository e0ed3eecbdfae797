#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "salgate/analysis.hpp"
#include "salgate/errors.hpp"
#include "salgate/manifest.hpp"
#include "salgate/report.hpp"
#include "salgate/svg.hpp"
#include "salgate/syngen.hpp"

namespace salgate {

inline constexpr const char* kManifestName = "manifest.jsonl";
inline constexpr const char* kEmbeddingsName = "embeddings.csv";
inline constexpr const char* kModelName = "cluster_model.json";
inline constexpr const char* kAssignmentsName = "assignments.csv";
inline constexpr const char* kScaName = "sca.csv";
inline constexpr const char* kEvaluationName = "evaluation.json";
inline constexpr const char* kGateName = "gate.json";
inline constexpr const char* kSweepName = "sweep.csv";
inline constexpr const char* kReportJsonName = "report.json";
inline constexpr const char* kReportCsvName = "report.csv";
inline constexpr const char* kKdeSvgName = "kde.svg";
inline constexpr const char* kBoxSvgName = "boxplot.svg";
inline constexpr const char* kPrecisionSvgName = "precision.svg";

struct CliOptions {
    std::string manifest;
    std::string out = ".";
    std::uint64_t seed = 42;
    int k = 6;
    int knn = 5;
    double tau = 0.1;
    double rho = 0.2;
    double theta = 0.5;
    double cap = 0.1;
    int stack_size = 32;
    std::string k_range = "2:10";
    std::string format = "json,csv";
    int n_per_class = 100;
    int image_size = 128;
};

namespace cli_detail {

inline CropConfig crop_config(const CliOptions& o) {
    CropConfig cfg;
    cfg.threshold_fraction = o.theta;
    cfg.stack_size = o.stack_size;
    cfg.validate();
    return cfg;
}

inline ScaConfig sca_config(const CliOptions& o) {
    ScaConfig cfg;
    cfg.no_overlap_cap = o.cap;
    cfg.aberrancy_threshold = o.tau;
    cfg.validate();
    return cfg;
}

inline GenConfig gen_config(const CliOptions& o) {
    GenConfig cfg;
    cfg.n_per_class = o.n_per_class;
    cfg.image_size = o.image_size;
    cfg.seed = o.seed;
    cfg.validate();
    return cfg;
}

inline std::vector<std::string> parse_formats(const std::string& spec) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = spec.find(',', pos);
        const std::string item =
            spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (!item.empty()) {
            if (item != "json" && item != "csv" && item != "svg")
                throw InvalidConfig("unknown report format '" + item +
                                    "' (expected json, csv, svg)");
            if (std::find(out.begin(), out.end(), item) == out.end())
                out.push_back(item);
        }
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    if (out.empty())
        throw InvalidConfig("--format must name at least one of json, csv, svg");
    return out;
}

inline std::pair<int, int> parse_k_range(const std::string& spec) {
    const std::size_t colon = spec.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= spec.size())
        throw InvalidConfig("--k-range must look like lo:hi, got '" + spec + "'");
    try {
        const int lo = std::stoi(spec.substr(0, colon));
        const int hi = std::stoi(spec.substr(colon + 1));
        return {lo, hi};
    } catch (const std::exception&) {
        throw InvalidConfig("--k-range must look like lo:hi, got '" + spec + "'");
    }
}

// Joins an embeddings CSV back onto manifest records, in record order.
inline std::vector<EmbeddingVector> embeddings_for_records(
    const std::vector<PredictionRecord>& records, const std::filesystem::path& path) {
    const auto loaded = load_embeddings(path);
    std::map<std::string, const EmbeddingVector*> by_id;
    for (const auto& e : loaded)
        by_id[e.record_id] = &e;
    std::vector<EmbeddingVector> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        const auto it = by_id.find(r.id);
        if (it == by_id.end())
            throw MalformedEmbeddings("no embedding for record '" + r.id + "' in " +
                                      path.string());
        out.push_back(*it->second);
    }
    return out;
}

inline std::vector<int> assignments_for_records(const std::vector<PredictionRecord>& records,
                                                const std::filesystem::path& path) {
    const auto rows = read_assignments_csv(path);
    std::map<std::string, int> by_id;
    for (const auto& [id, cluster] : rows)
        by_id[id] = cluster;
    std::vector<int> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        const auto it = by_id.find(r.id);
        if (it == by_id.end())
            throw MalformedReport("no cluster assignment for record '" + r.id + "' in " +
                                  path.string());
        out.push_back(it->second);
    }
    return out;
}

// Cluster count for evaluation: the fitted model's k when a model file is
// present in the output directory, otherwise inferred from the data.
inline int cluster_count_hint(const std::filesystem::path& out_dir,
                              const std::vector<int>& assignments) {
    const auto model_path = out_dir / kModelName;
    if (std::filesystem::exists(model_path)) {
        try {
            const nlohmann::json j = detail::read_json(model_path, "cluster model");
            return j.at("k").get<int>();
        } catch (const std::exception&) {
        }
    }
    int max_id = -1;
    for (int a : assignments)
        max_id = std::max(max_id, a);
    return max_id + 1;
}

inline nlohmann::ordered_json do_gen(const CliOptions& o) {
    const GenConfig cfg = gen_config(o);
    const GenSummary summary = generate_corpus(cfg, o.out);
    nlohmann::ordered_json j;
    j["subcommand"] = "gen";
    j["manifest"] = summary.manifest_path.string();
    j["n_records"] = summary.n_records;
    j["n_train"] = summary.n_train;
    j["n_test"] = summary.n_test;
    nlohmann::ordered_json per;
    for (std::size_t c = 0; c < kClassTags.size(); ++c)
        per[kClassTags[c]] = summary.aberrant_per_class[c];
    j["aberrant_per_class"] = std::move(per);
    return j;
}

inline nlohmann::ordered_json do_sca(const CliOptions& o) {
    const auto records = load_manifest(o.manifest);
    const auto boxes = compute_crop_boxes(records, crop_config(o));
    const auto scas = compute_sca_values(records, boxes, sca_config(o));
    std::filesystem::create_directories(o.out);
    write_sca_csv(records, scas, o.tau, std::filesystem::path(o.out) / kScaName);

    std::uint64_t scored = 0, aberrant = 0;
    for (const auto& v : scas) {
        if (!v)
            continue;
        ++scored;
        if (*v < o.tau)
            ++aberrant;
    }
    nlohmann::ordered_json j;
    j["subcommand"] = "sca";
    j["sca_csv"] = (std::filesystem::path(o.out) / kScaName).string();
    j["scored"] = scored;
    j["aberrant"] = aberrant;
    j["skipped_no_truth_box"] = records.size() - scored;
    return j;
}

inline nlohmann::ordered_json do_embed(const CliOptions& o) {
    const auto records = load_manifest(o.manifest);
    const auto boxes = compute_crop_boxes(records, crop_config(o));
    const auto embeddings = embed_records(records, boxes, crop_config(o));
    std::filesystem::create_directories(o.out);
    const auto path = std::filesystem::path(o.out) / kEmbeddingsName;
    save_embeddings(embeddings, path);
    nlohmann::ordered_json j;
    j["subcommand"] = "embed";
    j["embeddings"] = path.string();
    j["n"] = embeddings.size();
    j["dim"] = embeddings.empty() ? kReferenceDim : static_cast<int>(embeddings[0].values.size());
    return j;
}

inline nlohmann::ordered_json do_cluster(const CliOptions& o) {
    const auto records = load_manifest(o.manifest);
    const auto embeddings =
        embeddings_for_records(records, std::filesystem::path(o.out) / kEmbeddingsName);
    const ClusterModel model = fit_train_clusters(records, embeddings, o.k, o.seed);
    const auto path = std::filesystem::path(o.out) / kModelName;
    save_cluster_model(model, path);
    nlohmann::ordered_json j;
    j["subcommand"] = "cluster";
    j["model"] = path.string();
    j["k"] = model.k;
    j["n_train"] = model.train_ids.size();
    j["inertia"] = model.inertia;
    return j;
}

inline nlohmann::ordered_json do_sweep(const CliOptions& o) {
    const auto records = load_manifest(o.manifest);
    const auto embeddings =
        embeddings_for_records(records, std::filesystem::path(o.out) / kEmbeddingsName);
    std::vector<std::vector<double>> X;
    std::vector<int> reference;
    std::map<std::string, int> tag_ids;
    bool all_tagged = true;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].split != Split::train)
            continue;
        X.push_back(embeddings[i].values);
        if (records[i].class_tag)
            reference.push_back(
                tag_ids.emplace(*records[i].class_tag, static_cast<int>(tag_ids.size()))
                    .first->second);
        else
            all_tagged = false;
    }
    const auto [lo, hi] = parse_k_range(o.k_range);
    const auto rows = sweep_k(X, lo, hi, o.seed, all_tagged ? &reference : nullptr);
    const auto path = std::filesystem::path(o.out) / kSweepName;
    write_sweep_csv(rows, path);

    int best_k = rows.front().k;
    double best_sil = rows.front().silhouette;
    for (const auto& row : rows)
        if (row.silhouette > best_sil) {
            best_sil = row.silhouette;
            best_k = row.k;
        }
    nlohmann::ordered_json j;
    j["subcommand"] = "sweep";
    j["sweep_csv"] = path.string();
    j["rows"] = rows.size();
    j["best_k_by_silhouette"] = best_k;
    return j;
}

inline nlohmann::ordered_json do_assign(const CliOptions& o) {
    const auto records = load_manifest(o.manifest);
    const auto embeddings =
        embeddings_for_records(records, std::filesystem::path(o.out) / kEmbeddingsName);
    const ClusterModel model =
        load_cluster_model(std::filesystem::path(o.out) / kModelName, embeddings);
    const auto assignments = assign_records(records, embeddings, model, o.knn);
    const auto path = std::filesystem::path(o.out) / kAssignmentsName;
    write_assignments_csv(records, assignments, path);
    nlohmann::ordered_json j;
    j["subcommand"] = "assign";
    j["assignments"] = path.string();
    j["n"] = assignments.size();
    return j;
}

inline nlohmann::ordered_json do_evaluate(const CliOptions& o) {
    const auto records = load_manifest(o.manifest);
    const auto assignments =
        assignments_for_records(records, std::filesystem::path(o.out) / kAssignmentsName);
    const auto boxes = compute_crop_boxes(records, crop_config(o));
    const auto scas = compute_sca_values(records, boxes, sca_config(o));
    const int k = cluster_count_hint(o.out, assignments);
    const auto reports = cluster_aberrancy(records, scas, assignments, o.tau, k);
    write_evaluation_json(reports, o.tau, std::filesystem::path(o.out) / kEvaluationName);
    write_sca_csv(records, scas, o.tau, std::filesystem::path(o.out) / kScaName);

    std::uint64_t scored = 0, unscored = 0;
    for (const auto& rep : reports) {
        scored += rep.n;
        unscored += rep.n_unscored;
    }
    nlohmann::ordered_json j;
    j["subcommand"] = "evaluate";
    j["evaluation"] = (std::filesystem::path(o.out) / kEvaluationName).string();
    j["clusters"] = reports.size();
    j["scored"] = scored;
    j["unscored"] = unscored;
    return j;
}

inline nlohmann::ordered_json do_gate(const CliOptions& o) {
    const auto [reports, tau] = read_evaluation_json(std::filesystem::path(o.out) /
                                                     kEvaluationName);
    (void)tau;
    const GateDecision decision = gate_clusters(reports, o.rho);
    write_gate_json(decision, std::filesystem::path(o.out) / kGateName);
    nlohmann::ordered_json j;
    j["subcommand"] = "gate";
    j["gate"] = (std::filesystem::path(o.out) / kGateName).string();
    j["kept"] = decision.kept;
    j["gated"] = decision.gated;
    return j;
}

inline nlohmann::ordered_json do_report(const CliOptions& o) {
    const auto records = load_manifest(o.manifest);
    const auto out_dir = std::filesystem::path(o.out);
    const auto assignments = assignments_for_records(records, out_dir / kAssignmentsName);
    auto [clusters, tau] = read_evaluation_json(out_dir / kEvaluationName);
    const GateDecision decision = read_gate_json(out_dir / kGateName);
    const auto sca_rows = read_sca_csv(out_dir / kScaName);
    std::map<std::string, double> sca_by_id;
    for (const auto& [id, v] : sca_rows)
        sca_by_id[id] = v;

    PipelineReport report;
    report.n_records = records.size();
    report.tau = tau;
    report.rho = decision.rate_threshold;
    report.clusters = std::move(clusters);
    report.gate = decision;
    report.metrics = production_metrics(records, assignments, decision);
    report.ari_vs_class_tags = ari_vs_class_tags(records, assignments);
    for (auto& rep : report.clusters) {
        rep.gated = report.gate.gated.count(rep.cluster_id) > 0;
        const auto it = report.metrics.per_cluster.find(rep.cluster_id);
        if (it != report.metrics.per_cluster.end()) {
            rep.precision = it->second.precision;
            rep.recall_contribution = it->second.recall_contribution;
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) {
        RecordRow row;
        row.id = records[i].id;
        row.cluster = assignments[i];
        const auto it = sca_by_id.find(row.id);
        if (it != sca_by_id.end()) {
            row.sca = it->second;
            row.aberrant = it->second < tau;
        }
        row.kept = report.gate.kept.count(row.cluster) > 0;
        report.rows.push_back(std::move(row));
    }

    const auto formats = parse_formats(o.format);
    nlohmann::ordered_json written = nlohmann::ordered_json::array();
    for (const auto& fmt : formats) {
        if (fmt == "json") {
            write_report_json(report, out_dir / kReportJsonName);
            written.push_back((out_dir / kReportJsonName).string());
        } else if (fmt == "csv") {
            write_report_csv(report, out_dir / kReportCsvName);
            written.push_back((out_dir / kReportCsvName).string());
        } else {
            write_kde_svg(report.clusters, out_dir / kKdeSvgName);
            write_box_svg(report.clusters, out_dir / kBoxSvgName);
            write_precision_svg(report, out_dir / kPrecisionSvgName);
            written.push_back((out_dir / kKdeSvgName).string());
            written.push_back((out_dir / kBoxSvgName).string());
            written.push_back((out_dir / kPrecisionSvgName).string());
        }
    }

    nlohmann::ordered_json j;
    j["subcommand"] = "report";
    j["written"] = std::move(written);
    j["n_records"] = report.n_records;
    j["kept"] = report.gate.kept;
    j["gated"] = report.gate.gated;
    j["precision_baseline"] = detail::opt_json(report.metrics.precision_baseline);
    j["precision_gated"] = detail::opt_json(report.metrics.precision_gated);
    j["precision_delta"] = detail::opt_json(report.metrics.precision_delta);
    j["recall_baseline"] = detail::opt_json(report.metrics.recall_baseline);
    j["recall_gated"] = detail::opt_json(report.metrics.recall_gated);
    j["recall_delta"] = detail::opt_json(report.metrics.recall_delta);
    j["ari_vs_class_tags"] = detail::opt_json(report.ari_vs_class_tags);
    return j;
}

inline nlohmann::ordered_json do_pipeline(CliOptions o) {
    std::filesystem::create_directories(o.out);
    o.manifest = (std::filesystem::path(o.out) / kManifestName).string();
    const auto gen_summary = do_gen(o);
    do_embed(o);
    do_cluster(o);
    do_assign(o);
    do_evaluate(o);
    do_gate(o);
    nlohmann::ordered_json j = do_report(o);
    j["subcommand"] = "pipeline";
    j["manifest"] = gen_summary.at("manifest");
    return j;
}

} // namespace cli_detail

// Entry point shared by the binary and the in-process tests. args excludes
// the program name. Exit codes: 0 success, 1 data error, 2 usage error.
inline int run_cli(const std::vector<std::string>& args) {
    CliOptions o;
    CLI::App app{"saliency-crop audit: score, embed, cluster and gate model predictions"};
    app.require_subcommand(1);

    auto add_manifest = [&](CLI::App* cmd) {
        cmd->add_option("--manifest", o.manifest, "manifest JSONL path")->required();
    };
    auto add_out = [&](CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--out", o.out, "output directory");
        if (required)
            opt->required();
    };

    auto* gen = app.add_subcommand("gen", "generate a synthetic corpus");
    add_out(gen, true);
    gen->add_option("--seed", o.seed, "corpus seed");
    gen->add_option("--n-per-class", o.n_per_class, "records per class");
    gen->add_option("--image-size", o.image_size, "square image size in pixels");

    auto* scacmd = app.add_subcommand("sca", "score crop accuracy per record");
    add_manifest(scacmd);
    add_out(scacmd, false);
    scacmd->add_option("--tau", o.tau, "aberrancy threshold");
    scacmd->add_option("--cap", o.cap, "no-overlap score cap");
    scacmd->add_option("--theta", o.theta, "saliency threshold fraction");

    auto* embedcmd = app.add_subcommand("embed", "embed saliency crops");
    add_manifest(embedcmd);
    add_out(embedcmd, false);
    embedcmd->add_option("--theta", o.theta, "saliency threshold fraction");
    embedcmd->add_option("--stack-size", o.stack_size, "crop stack resolution");

    auto* clustercmd = app.add_subcommand("cluster", "fit k-means on train embeddings");
    add_manifest(clustercmd);
    add_out(clustercmd, false);
    clustercmd->add_option("--k", o.k, "cluster count");
    clustercmd->add_option("--seed", o.seed, "clustering seed");

    auto* sweepcmd = app.add_subcommand("sweep", "sweep cluster counts");
    add_manifest(sweepcmd);
    add_out(sweepcmd, false);
    sweepcmd->add_option("--k-range", o.k_range, "inclusive k range, lo:hi");
    sweepcmd->add_option("--seed", o.seed, "clustering seed");

    auto* assigncmd = app.add_subcommand("assign", "assign all records to clusters");
    add_manifest(assigncmd);
    add_out(assigncmd, false);
    assigncmd->add_option("--knn", o.knn, "neighbor count for test-split assignment");

    auto* evalcmd = app.add_subcommand("evaluate", "per-cluster SCA distributions and rates");
    add_manifest(evalcmd);
    add_out(evalcmd, false);
    evalcmd->add_option("--tau", o.tau, "aberrancy threshold");
    evalcmd->add_option("--cap", o.cap, "no-overlap score cap");
    evalcmd->add_option("--theta", o.theta, "saliency threshold fraction");

    auto* gatecmd = app.add_subcommand("gate", "gate clusters by aberrancy rate");
    add_out(gatecmd, false);
    gatecmd->add_option("--rho", o.rho, "gating rate threshold");

    auto* reportcmd = app.add_subcommand("report", "assemble the final report");
    add_manifest(reportcmd);
    add_out(reportcmd, false);
    reportcmd->add_option("--format", o.format, "comma list of json, csv, svg");

    auto* pipelinecmd = app.add_subcommand("pipeline", "run the whole flow on one seed");
    add_out(pipelinecmd, true);
    pipelinecmd->add_option("--seed", o.seed, "seed for every stochastic stage");
    pipelinecmd->add_option("--k", o.k, "cluster count");
    pipelinecmd->add_option("--knn", o.knn, "neighbor count for test-split assignment");
    pipelinecmd->add_option("--tau", o.tau, "aberrancy threshold");
    pipelinecmd->add_option("--rho", o.rho, "gating rate threshold");
    pipelinecmd->add_option("--theta", o.theta, "saliency threshold fraction");
    pipelinecmd->add_option("--cap", o.cap, "no-overlap score cap");
    pipelinecmd->add_option("--stack-size", o.stack_size, "crop stack resolution");
    pipelinecmd->add_option("--format", o.format, "comma list of json, csv, svg");
    pipelinecmd->add_option("--n-per-class", o.n_per_class, "records per class");
    pipelinecmd->add_option("--image-size", o.image_size, "square image size in pixels");

    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("salgate");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const auto& s : full)
        argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        nlohmann::ordered_json summary;
        if (gen->parsed())
            summary = cli_detail::do_gen(o);
        else if (scacmd->parsed())
            summary = cli_detail::do_sca(o);
        else if (embedcmd->parsed())
            summary = cli_detail::do_embed(o);
        else if (clustercmd->parsed())
            summary = cli_detail::do_cluster(o);
        else if (sweepcmd->parsed())
            summary = cli_detail::do_sweep(o);
        else if (assigncmd->parsed())
            summary = cli_detail::do_assign(o);
        else if (evalcmd->parsed())
            summary = cli_detail::do_evaluate(o);
        else if (gatecmd->parsed())
            summary = cli_detail::do_gate(o);
        else if (reportcmd->parsed())
            summary = cli_detail::do_report(o);
        else
            summary = cli_detail::do_pipeline(o);
        std::cout << summary.dump() << "\n";
        return 0;
    } catch (const InvalidConfig& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace salgate
