#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "salgate/errors.hpp"
#include "salgate/record.hpp"
#include "salgate/sca.hpp"

namespace salgate {

// Gaussian KDE sampled on a fixed grid. The grid deliberately overhangs
// [0,1] so boundary kernel mass stays under the curve instead of being
// renormalized away; the trapezoid integral stays near 1.
struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;

    double trapezoid_integral() const {
        double s = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            s += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
        return s;
    }
};

struct BoxStats {
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    double whisker_low = 0.0, whisker_high = 0.0;
    std::vector<double> outliers;
};

// Per-cluster slice of the evaluation. n counts scored records (those with
// a truth box); records without one are tallied in n_unscored and excluded
// from the rate. density/box are absent when the cluster has no scored
// records.
struct ClusterReport {
    int cluster_id = 0;
    std::uint64_t n = 0;
    std::uint64_t n_unscored = 0;
    std::vector<double> sca_values;
    std::optional<DensityCurve> density;
    std::optional<BoxStats> box;
    double aberrancy_rate = 0.0;
    bool gated = false;
    std::optional<double> precision;
    double recall_contribution = 0.0;
};

struct GateDecision {
    std::set<int> kept;
    std::set<int> gated;
    double rate_threshold = 0.2;
};

struct ClusterProductionRow {
    std::uint64_t n = 0;
    std::uint64_t predicted_positives = 0;
    std::uint64_t true_positives = 0;
    std::optional<double> precision;
    double recall_contribution = 0.0;
};

// Before/after gating counts and rates over the full record set. Optional
// rates are absent when their denominator is zero (no positive predictions
// in scope, or no actual positives).
struct ProductionMetrics {
    std::uint64_t n_records = 0;
    std::uint64_t actual_positives = 0;

    std::uint64_t predicted_positives = 0;
    std::uint64_t true_positives = 0;
    std::uint64_t kept_predicted_positives = 0;
    std::uint64_t kept_true_positives = 0;

    std::optional<double> precision_baseline;
    std::optional<double> precision_gated;
    std::optional<double> recall_baseline;
    std::optional<double> recall_gated;
    std::optional<double> precision_delta;
    std::optional<double> recall_delta;

    std::map<int, ClusterProductionRow> per_cluster;
};

inline std::vector<double> default_kde_grid(int points = 256, double lo = -0.2,
                                            double hi = 1.2) {
    if (points < 2 || !(lo < hi))
        throw InvalidConfig("default_kde_grid: need at least 2 points and lo < hi");
    std::vector<double> grid(static_cast<std::size_t>(points));
    const double step = (hi - lo) / (points - 1);
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = lo + step * i;
    return grid;
}

namespace detail {

// Order-statistic quantile with linear interpolation between ranks
// (position p*(n-1)); the midpoint-inclusive convention used everywhere
// quartiles appear in this library.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1)
        return sorted[0];
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= n)
        return sorted[n - 1];
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace detail

inline BoxStats box_stats(const std::vector<double>& values) {
    if (values.empty())
        throw EmptyInput("box_stats: no values");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());

    BoxStats b;
    b.min = sorted.front();
    b.max = sorted.back();
    b.q1 = detail::quantile_sorted(sorted, 0.25);
    b.median = detail::quantile_sorted(sorted, 0.5);
    b.q3 = detail::quantile_sorted(sorted, 0.75);

    const double iqr = b.q3 - b.q1;
    const double fence_lo = b.q1 - 1.5 * iqr;
    const double fence_hi = b.q3 + 1.5 * iqr;
    b.whisker_low = b.max;
    b.whisker_high = b.min;
    for (double v : sorted) {
        if (v < fence_lo || v > fence_hi) {
            b.outliers.push_back(v);
        } else {
            b.whisker_low = std::min(b.whisker_low, v);
            b.whisker_high = std::max(b.whisker_high, v);
        }
    }
    return b;
}

// Gaussian-kernel density estimate. Bandwidth defaults to Silverman's
// rule h = 0.9 * min(sd, IQR/1.34) * n^(-1/5), falling back to 0.01 when
// that degenerates (constant or single-value input).
inline DensityCurve kde(const std::vector<double>& values, const std::vector<double>& grid,
                        std::optional<double> bandwidth = std::nullopt) {
    if (values.empty())
        throw EmptyInput("kde: no values");
    if (grid.size() < 2)
        throw InvalidConfig("kde: grid needs at least 2 points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw InvalidConfig("kde: grid must be strictly ascending");

    const std::size_t n = values.size();
    double h;
    if (bandwidth) {
        h = *bandwidth;
        if (!(h > 0.0))
            throw InvalidConfig("kde: bandwidth must be positive");
    } else {
        double sd = 0.0;
        if (n > 1) {
            double mean = 0.0;
            for (double v : values)
                mean += v;
            mean /= static_cast<double>(n);
            double ss = 0.0;
            for (double v : values)
                ss += (v - mean) * (v - mean);
            sd = std::sqrt(ss / static_cast<double>(n - 1));
        }
        std::vector<double> sorted = values;
        std::sort(sorted.begin(), sorted.end());
        const double iqr =
            detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
        h = 0.9 * std::min(sd, iqr / 1.34) * std::pow(static_cast<double>(n), -0.2);
        // floor: kernels narrower than the default grid spacing break the
        // integral invariant
        if (!(h >= 0.01))
            h = 0.01;
    }

    DensityCurve curve;
    curve.grid = grid;
    curve.bandwidth = h;
    curve.density.resize(grid.size());
    constexpr double kInvSqrt2Pi = 0.3989422804014327;
    const double scale = kInvSqrt2Pi / (static_cast<double>(n) * h);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double s = 0.0;
        for (double v : values) {
            const double z = (grid[g] - v) / h;
            s += std::exp(-0.5 * z * z);
        }
        curve.density[g] = scale * s;
    }
    return curve;
}

// Slices records by cluster and fills the distribution side of each
// ClusterReport. sca entries are absent for records without a truth box;
// those records count toward n_unscored only. Clusters 0..k-1 all appear
// even when empty; pass k <= 0 to infer k from the assignments.
inline std::vector<ClusterReport> cluster_aberrancy(
    const std::vector<PredictionRecord>& records,
    const std::vector<std::optional<double>>& sca_values, const std::vector<int>& assignments,
    double tau, int k = -1) {
    if (sca_values.size() != records.size() || assignments.size() != records.size())
        throw LengthMismatch("cluster_aberrancy: records, sca values and assignments must "
                             "have equal length");
    int max_id = -1;
    for (int a : assignments) {
        if (a < 0)
            throw InvalidConfig("cluster_aberrancy: negative cluster id");
        max_id = std::max(max_id, a);
    }
    if (k <= 0)
        k = max_id + 1;
    if (max_id >= k)
        throw InvalidConfig("cluster_aberrancy: assignment " + std::to_string(max_id) +
                            " outside [0, k)");

    std::vector<ClusterReport> reports(static_cast<std::size_t>(std::max(k, 0)));
    for (int c = 0; c < k; ++c)
        reports[static_cast<std::size_t>(c)].cluster_id = c;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto& rep = reports[static_cast<std::size_t>(assignments[i])];
        if (sca_values[i]) {
            ++rep.n;
            rep.sca_values.push_back(*sca_values[i]);
        } else {
            ++rep.n_unscored;
        }
    }
    for (auto& rep : reports) {
        if (rep.n == 0)
            continue;
        std::uint64_t aberrant = 0;
        for (double v : rep.sca_values)
            if (v < tau)
                ++aberrant;
        rep.aberrancy_rate = static_cast<double>(aberrant) / static_cast<double>(rep.n);
        rep.density = kde(rep.sca_values, default_kde_grid());
        rep.box = box_stats(rep.sca_values);
    }
    return reports;
}

// gated = clusters whose aberrancy rate strictly exceeds the threshold.
inline GateDecision gate_clusters(const std::vector<ClusterReport>& reports, double rho) {
    if (reports.empty())
        throw EmptyInput("gate_clusters: no cluster reports");
    if (!(rho >= 0.0 && rho <= 1.0))
        throw InvalidConfig("gate_clusters: rho must be in [0,1]");
    GateDecision d;
    d.rate_threshold = rho;
    for (const auto& rep : reports) {
        if (rep.aberrancy_rate > rho)
            d.gated.insert(rep.cluster_id);
        else
            d.kept.insert(rep.cluster_id);
    }
    return d;
}

// Precision/recall before and after dropping the gated clusters. Recall
// keeps the full actual-positive denominator, so gating can only lower it;
// the per-cluster recall_contribution is exactly the recall lost by gating
// that cluster alone.
inline ProductionMetrics production_metrics(const std::vector<PredictionRecord>& records,
                                            const std::vector<int>& assignments,
                                            const GateDecision& decision) {
    if (assignments.size() != records.size())
        throw LengthMismatch("production_metrics: records and assignments must have equal "
                             "length");
    ProductionMetrics m;
    m.n_records = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        const int c = assignments[i];
        const bool kept = decision.kept.count(c) > 0;
        auto& row = m.per_cluster[c];
        ++row.n;
        if (r.true_label == Label::positive)
            ++m.actual_positives;
        if (r.predicted_label == Label::positive) {
            ++m.predicted_positives;
            ++row.predicted_positives;
            const bool correct = r.true_label == Label::positive;
            if (correct) {
                ++m.true_positives;
                ++row.true_positives;
            }
            if (kept) {
                ++m.kept_predicted_positives;
                if (correct)
                    ++m.kept_true_positives;
            }
        }
    }

    if (m.predicted_positives > 0)
        m.precision_baseline = static_cast<double>(m.true_positives) /
                               static_cast<double>(m.predicted_positives);
    if (m.kept_predicted_positives > 0)
        m.precision_gated = static_cast<double>(m.kept_true_positives) /
                            static_cast<double>(m.kept_predicted_positives);
    if (m.actual_positives > 0) {
        m.recall_baseline = static_cast<double>(m.true_positives) /
                            static_cast<double>(m.actual_positives);
        m.recall_gated = static_cast<double>(m.kept_true_positives) /
                         static_cast<double>(m.actual_positives);
    }
    if (m.precision_baseline && m.precision_gated)
        m.precision_delta = *m.precision_gated - *m.precision_baseline;
    if (m.recall_baseline && m.recall_gated)
        m.recall_delta = *m.recall_gated - *m.recall_baseline;

    for (auto& [cluster, row] : m.per_cluster) {
        if (row.predicted_positives > 0)
            row.precision = static_cast<double>(row.true_positives) /
                            static_cast<double>(row.predicted_positives);
        if (m.actual_positives > 0)
            row.recall_contribution = static_cast<double>(row.true_positives) /
                                      static_cast<double>(m.actual_positives);
    }
    return m;
}

} // namespace salgate
