#pragma once

#include <optional>
#include <string>

#include "salgate/errors.hpp"
#include "salgate/geometry.hpp"
#include "salgate/image.hpp"

namespace salgate {

// Two-class labels: "pos" means fracture present.
enum class Label { positive, negative };
enum class Split { train, test };

inline const char* to_string(Label l) { return l == Label::positive ? "pos" : "neg"; }
inline const char* to_string(Split s) { return s == Split::train ? "train" : "test"; }

inline Label parse_label(const std::string& s) {
    if (s == "pos") return Label::positive;
    if (s == "neg") return Label::negative;
    throw MalformedManifest("unknown label '" + s + "' (want \"pos\" or \"neg\")");
}

inline Split parse_split(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "test") return Split::test;
    throw MalformedManifest("unknown split '" + s + "' (want \"train\" or \"test\")");
}

// One classifier output with its assets loaded: the input image, the
// saliency map explaining the prediction, and (when annotated) the
// ground-truth region. `score` is the positive-class probability, so the
// two-class simplex constraint holds by construction.
struct PredictionRecord {
    std::string id;
    std::string image_path;    // manifest-relative, '/' separators
    std::string saliency_path; // manifest-relative, '/' separators
    GrayImage image;
    SaliencyMap saliency;
    std::optional<Box2D> truth_box;
    Label predicted_label = Label::negative;
    Label true_label = Label::negative;
    double score = 0.0;
    std::optional<std::string> class_tag; // generator/inspection visual-feature label
    Split split = Split::train;

    bool operator==(const PredictionRecord&) const = default;
};

} // namespace salgate
