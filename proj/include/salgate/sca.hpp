#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "salgate/errors.hpp"
#include "salgate/geometry.hpp"

namespace salgate {

enum class DistanceScale { truth_diagonal };

// Knobs of the crop-accuracy score and of the aberrancy test built on it.
// no_overlap_cap bounds the score of disjoint box pairs from above;
// aberrancy_threshold is the tau below which a prediction counts as
// aberrant (tau = 1 - lambda in dissimilarity terms).
struct ScaConfig {
    double no_overlap_cap = 0.1;      // (0, 1]
    DistanceScale distance_scale_mode = DistanceScale::truth_diagonal;
    double aberrancy_threshold = 0.1; // tau, [0, 1)

    void validate() const {
        if (!(no_overlap_cap > 0.0 && no_overlap_cap <= 1.0))
            throw InvalidConfig("no_overlap_cap must be in (0,1]");
        if (!(aberrancy_threshold >= 0.0 && aberrancy_threshold < 1.0))
            throw InvalidConfig("aberrancy_threshold must be in [0,1)");
    }
};

// Plain intersection-over-union. Zero for disjoint or edge-touching boxes.
inline double iou(const Box2D& a, const Box2D& b) {
    const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    if (iw <= 0.0 || ih <= 0.0)
        return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

inline double centroid_distance(const Box2D& a, const Box2D& b) {
    return std::hypot(a.center_x() - b.center_x(), a.center_y() - b.center_y());
}

// Saliency Crop Accuracy. Equals IoU whenever the boxes overlap with
// positive area; for disjoint pairs it falls back to a bounded score that
// decays with the centroid distance measured in truth-box diagonals:
//
//     cap / (1 + d_c / diag(truth))
//
// The scale is taken from the truth box, deliberately asymmetric: how far
// a crop strayed is judged relative to the size of the true region.
inline double sca(const Box2D& pred, const Box2D& truth, const ScaConfig& cfg = {}) {
    const double overlap = iou(pred, truth);
    if (overlap > 0.0)
        return overlap;
    const double d = centroid_distance(pred, truth);
    return cfg.no_overlap_cap / (1.0 + d / truth.diagonal());
}

// The concrete dissimilarity d(C_y, C_x) used by the aberrancy test.
inline double dissimilarity(double sca_value) {
    if (!(std::isfinite(sca_value) && sca_value >= 0.0 && sca_value <= 1.0))
        throw std::invalid_argument("dissimilarity: input outside [0,1]");
    return 1.0 - sca_value;
}

// A prediction is aberrant when its crop accuracy falls strictly below
// tau; equivalently dissimilarity exceeds lambda = 1 - tau.
inline bool is_aberrant(const Box2D& pred, const Box2D& truth, const ScaConfig& cfg = {}) {
    return sca(pred, truth, cfg) < cfg.aberrancy_threshold;
}

} // namespace salgate
