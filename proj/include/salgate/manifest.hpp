#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "salgate/errors.hpp"
#include "salgate/pgm.hpp"
#include "salgate/record.hpp"

namespace salgate {

// Corpus manifest: one UTF-8 JSON object per line (JSONL) with exactly the
// fields id, image, saliency, truth_box, predicted_label, true_label,
// score, class_tag, split. Asset paths are relative to the manifest file.

namespace detail {

inline PredictionRecord parse_manifest_line(const std::string& line, std::size_t line_no,
                                            const std::filesystem::path& base) {
    const std::string where = "manifest line " + std::to_string(line_no) + ": ";

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedManifest(where + "invalid JSON (" + e.what() + ")");
    }
    if (!j.is_object())
        throw MalformedManifest(where + "record is not a JSON object");

    static constexpr std::array<const char*, 9> kFields = {
        "id", "image", "saliency", "truth_box", "predicted_label",
        "true_label", "score", "class_tag", "split"};
    for (const char* f : kFields)
        if (!j.contains(f))
            throw MalformedManifest(where + "missing field '" + f + "'");
    if (j.size() != kFields.size())
        throw MalformedManifest(where + "unexpected extra fields");

    auto require_string = [&](const char* f) -> std::string {
        if (!j[f].is_string())
            throw MalformedManifest(where + "field '" + std::string(f) + "' must be a string");
        return j[f].get<std::string>();
    };

    PredictionRecord r;
    r.id = require_string("id");
    if (r.id.empty())
        throw MalformedManifest(where + "empty id");
    r.image_path = require_string("image");
    r.saliency_path = require_string("saliency");

    const auto& tb = j["truth_box"];
    if (!tb.is_null()) {
        if (!tb.is_array() || tb.size() != 4 || !tb[0].is_number() || !tb[1].is_number() ||
            !tb[2].is_number() || !tb[3].is_number())
            throw MalformedManifest(where + "truth_box must be null or [x0,y0,x1,y1]");
        try {
            r.truth_box.emplace(tb[0].get<double>(), tb[1].get<double>(),
                                tb[2].get<double>(), tb[3].get<double>());
        } catch (const std::invalid_argument& e) {
            throw MalformedManifest(where + e.what());
        }
    }

    try {
        r.predicted_label = parse_label(require_string("predicted_label"));
        r.true_label = parse_label(require_string("true_label"));
        r.split = parse_split(require_string("split"));
    } catch (const MalformedManifest& e) {
        throw MalformedManifest(where + e.what());
    }

    if (!j["score"].is_number())
        throw MalformedManifest(where + "score must be a number");
    r.score = j["score"].get<double>();
    if (!(std::isfinite(r.score) && r.score >= 0.0 && r.score <= 1.0))
        throw MalformedManifest(where + "score outside [0,1]");

    const auto& tag = j["class_tag"];
    if (tag.is_string())
        r.class_tag = tag.get<std::string>();
    else if (!tag.is_null())
        throw MalformedManifest(where + "class_tag must be a string or null");

    const auto image_file = base / r.image_path;
    if (!std::filesystem::exists(image_file))
        throw MissingAsset("record " + r.id + ": missing image " + image_file.string());
    const auto saliency_file = base / r.saliency_path;
    if (!std::filesystem::exists(saliency_file))
        throw MissingAsset("record " + r.id + ": missing saliency " + saliency_file.string());
    r.image = read_pgm(image_file);
    r.saliency = read_saliency_pgm(saliency_file);

    if (r.image.width != r.saliency.width || r.image.height != r.saliency.height)
        throw DimensionMismatch("record " + r.id + ": image " + std::to_string(r.image.width) +
                                "x" + std::to_string(r.image.height) + " vs saliency " +
                                std::to_string(r.saliency.width) + "x" +
                                std::to_string(r.saliency.height));
    if (r.truth_box &&
        (r.truth_box->x1 > r.image.width || r.truth_box->y1 > r.image.height))
        throw MalformedManifest(where + "truth_box exceeds image bounds (record " + r.id + ")");

    return r;
}

} // namespace detail

// Loads and validates a corpus. Records come back in file order; every
// referenced asset is read and checked against the record's invariants.
inline std::vector<PredictionRecord> load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure("cannot open manifest: " + path.string());
    const auto base = path.parent_path();

    std::vector<PredictionRecord> records;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        records.push_back(detail::parse_manifest_line(line, line_no, base));
        if (!seen.insert(records.back().id).second)
            throw MalformedManifest("manifest line " + std::to_string(line_no) +
                                    ": duplicate id '" + records.back().id + "'");
    }
    return records;
}

// Writes the manifest lines only (assets stay wherever image/saliency
// paths point). Output is byte-deterministic for equal input.
inline void save_manifest(const std::vector<PredictionRecord>& records,
                          const std::filesystem::path& path) {
    for (const auto& r : records) {
        r.image.validate();
        r.saliency.validate();
        if (!(std::isfinite(r.score) && r.score >= 0.0 && r.score <= 1.0))
            throw std::invalid_argument("record " + r.id + ": score outside [0,1]");
        if (r.truth_box && (r.truth_box->x1 > r.image.width || r.truth_box->y1 > r.image.height))
            throw std::invalid_argument("record " + r.id + ": truth_box exceeds image bounds");
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoFailure("cannot open manifest for writing: " + path.string());
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["image"] = r.image_path;
        j["saliency"] = r.saliency_path;
        if (r.truth_box)
            j["truth_box"] = {r.truth_box->x0, r.truth_box->y0, r.truth_box->x1, r.truth_box->y1};
        else
            j["truth_box"] = nullptr;
        j["predicted_label"] = to_string(r.predicted_label);
        j["true_label"] = to_string(r.true_label);
        j["score"] = r.score;
        if (r.class_tag)
            j["class_tag"] = *r.class_tag;
        else
            j["class_tag"] = nullptr;
        j["split"] = to_string(r.split);
        out << j.dump() << '\n';
    }
    if (!out)
        throw IoFailure("manifest write failed: " + path.string());
}

} // namespace salgate
