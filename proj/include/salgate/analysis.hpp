#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "salgate/cluster.hpp"
#include "salgate/crop.hpp"
#include "salgate/embed.hpp"
#include "salgate/errors.hpp"
#include "salgate/evaluate.hpp"
#include "salgate/record.hpp"
#include "salgate/sca.hpp"

namespace salgate {

struct AnalysisConfig {
    ScaConfig sca;
    CropConfig crop;
    int k = 6;
    int k_nn = 5;
    std::uint64_t seed = 42;
    double rho = 0.2;

    void validate() const {
        sca.validate();
        crop.validate();
        if (k < 1)
            throw InvalidConfig("k must be at least 1");
        if (k_nn < 1)
            throw InvalidConfig("knn must be at least 1");
        if (!(rho >= 0.0 && rho <= 1.0))
            throw InvalidConfig("rho must be in [0,1]");
    }
};

struct RecordRow {
    std::string id;
    int cluster = -1;
    std::optional<double> sca;
    bool aberrant = false;
    bool kept = true;
};

struct PipelineReport {
    std::uint64_t n_records = 0;
    double tau = 0.1;
    double rho = 0.2;
    std::optional<double> ari_vs_class_tags;
    std::vector<ClusterReport> clusters;
    GateDecision gate;
    ProductionMetrics metrics;
    std::vector<RecordRow> rows;
};

inline std::vector<Box2D> compute_crop_boxes(const std::vector<PredictionRecord>& records,
                                             const CropConfig& cfg) {
    std::vector<Box2D> boxes;
    boxes.reserve(records.size());
    for (const auto& r : records)
        boxes.push_back(extract_crop_box(r.saliency, cfg));
    return boxes;
}

// One optional SCA per record, absent where there is no truth box.
inline std::vector<std::optional<double>> compute_sca_values(
    const std::vector<PredictionRecord>& records, const std::vector<Box2D>& crop_boxes,
    const ScaConfig& cfg) {
    if (crop_boxes.size() != records.size())
        throw LengthMismatch("compute_sca_values: records and crop boxes must have equal "
                             "length");
    std::vector<std::optional<double>> out(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].truth_box)
            out[i] = sca(crop_boxes[i], *records[i].truth_box, cfg);
    return out;
}

inline std::vector<EmbeddingVector> embed_records(const std::vector<PredictionRecord>& records,
                                                  const std::vector<Box2D>& crop_boxes,
                                                  const CropConfig& cfg) {
    if (crop_boxes.size() != records.size())
        throw LengthMismatch("embed_records: records and crop boxes must have equal length");
    std::vector<EmbeddingVector> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const CropStack stack =
            crop_and_stack(records[i].image, records[i].saliency, crop_boxes[i], cfg);
        out.push_back(embed_reference(stack, records[i].id));
    }
    return out;
}

// k-means on the train-split embeddings only, in manifest order.
inline ClusterModel fit_train_clusters(const std::vector<PredictionRecord>& records,
                                       const std::vector<EmbeddingVector>& embeddings, int k,
                                       std::uint64_t seed) {
    if (embeddings.size() != records.size())
        throw LengthMismatch("fit_train_clusters: records and embeddings must have equal "
                             "length");
    std::vector<EmbeddingVector> train;
    for (std::size_t i = 0; i < records.size(); ++i)
        if (records[i].split == Split::train)
            train.push_back(embeddings[i]);
    if (train.empty())
        throw TooFewPoints("fit_train_clusters: manifest has no train-split records");
    return kmeans_fit(train, k, seed);
}

// Train records reuse their fitted assignment; everything else routes
// through KNN over the training embeddings.
inline std::vector<int> assign_records(const std::vector<PredictionRecord>& records,
                                       const std::vector<EmbeddingVector>& embeddings,
                                       const ClusterModel& model, int k_nn) {
    if (embeddings.size() != records.size())
        throw LengthMismatch("assign_records: records and embeddings must have equal length");
    std::map<std::string, int> fitted;
    for (std::size_t i = 0; i < model.train_ids.size(); ++i)
        fitted[model.train_ids[i]] = model.train_assignments[i];
    std::vector<int> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto it = fitted.find(records[i].id);
        if (records[i].split == Split::train && it != fitted.end())
            out.push_back(it->second);
        else
            out.push_back(knn_assign(model, embeddings[i], k_nn));
    }
    return out;
}

// Clustering agreement against the generator's class tags; absent when any
// record lacks one.
inline std::optional<double> ari_vs_class_tags(const std::vector<PredictionRecord>& records,
                                               const std::vector<int>& assignments) {
    if (records.size() != assignments.size())
        throw LengthMismatch("ari_vs_class_tags: records and assignments must have equal "
                             "length");
    if (records.size() < 2)
        return std::nullopt;
    std::map<std::string, int> tag_ids;
    std::vector<int> tags;
    tags.reserve(records.size());
    for (const auto& r : records) {
        if (!r.class_tag)
            return std::nullopt;
        tags.push_back(tag_ids.emplace(*r.class_tag, static_cast<int>(tag_ids.size()))
                           .first->second);
    }
    return ari(assignments, tags);
}

// Assembles the full evaluation: per-cluster distributions and rates, the
// gate decision, production metrics, and the per-record row table.
inline PipelineReport build_report(const std::vector<PredictionRecord>& records,
                                   const std::vector<std::optional<double>>& sca_values,
                                   const std::vector<int>& assignments, int k, double tau,
                                   double rho) {
    PipelineReport report;
    report.n_records = records.size();
    report.tau = tau;
    report.rho = rho;
    report.clusters = cluster_aberrancy(records, sca_values, assignments, tau, k);
    report.gate = gate_clusters(report.clusters, rho);
    report.metrics = production_metrics(records, assignments, report.gate);
    report.ari_vs_class_tags = ari_vs_class_tags(records, assignments);

    for (auto& rep : report.clusters) {
        rep.gated = report.gate.gated.count(rep.cluster_id) > 0;
        const auto it = report.metrics.per_cluster.find(rep.cluster_id);
        if (it != report.metrics.per_cluster.end()) {
            rep.precision = it->second.precision;
            rep.recall_contribution = it->second.recall_contribution;
        }
    }

    report.rows.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        RecordRow row;
        row.id = records[i].id;
        row.cluster = assignments[i];
        row.sca = sca_values[i];
        row.aberrant = sca_values[i] && *sca_values[i] < tau;
        row.kept = report.gate.kept.count(assignments[i]) > 0;
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace salgate
