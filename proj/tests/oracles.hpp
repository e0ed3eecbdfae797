#pragma once

// Reference implementations the suites compare library results against.
// Each one recomputes the quantity by a different route (rasterization,
// exhaustive pair counting, brute-force enumeration) so agreement is
// evidence, not tautology.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "salgate/evaluate.hpp"
#include "salgate/geometry.hpp"

namespace oracles {

// IoU by counting unit pixels on a w x h canvas. Exact for boxes with
// integer coordinates inside the canvas.
inline double raster_iou(const salgate::Box2D& a, const salgate::Box2D& b, int w, int h) {
    std::uint64_t na = 0, nb = 0, ni = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool in_a = x >= a.x0 && x + 1 <= a.x1 && y >= a.y0 && y + 1 <= a.y1;
            const bool in_b = x >= b.x0 && x + 1 <= b.x1 && y >= b.y0 && y + 1 <= b.y1;
            na += in_a ? 1 : 0;
            nb += in_b ? 1 : 0;
            ni += (in_a && in_b) ? 1 : 0;
        }
    const std::uint64_t nu = na + nb - ni;
    return nu == 0 ? 0.0 : static_cast<double>(ni) / static_cast<double>(nu);
}

// Adjusted Rand index from the four pairwise agreement counts,
// 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)). Zero denominator covers the
// degenerate all-singleton / single-block cases.
inline double pair_counting_ari(const std::vector<int>& A, const std::vector<int>& B) {
    const std::size_t n = A.size();
    std::uint64_t a = 0, b = 0, c = 0, d = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool same_a = A[i] == A[j];
            const bool same_b = B[i] == B[j];
            if (same_a && same_b)
                ++a;
            else if (same_a)
                ++b;
            else if (same_b)
                ++c;
            else
                ++d;
        }
    const double ad = static_cast<double>(a) * static_cast<double>(d);
    const double bc = static_cast<double>(b) * static_cast<double>(c);
    const double den = (static_cast<double>(a) + static_cast<double>(b)) *
                           (static_cast<double>(b) + static_cast<double>(d)) +
                       (static_cast<double>(a) + static_cast<double>(c)) *
                           (static_cast<double>(c) + static_cast<double>(d));
    return den == 0.0 ? 0.0 : 2.0 * (ad - bc) / den;
}

inline double point_distance(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += (p[i] - q[i]) * (p[i] - q[i]);
    return std::sqrt(s);
}

// Textbook mean silhouette, every pair distance recomputed in place.
// Assumes at least two distinct labels.
inline double direct_silhouette(const std::vector<std::vector<double>>& X,
                                const std::vector<int>& labels) {
    const std::size_t n = X.size();
    std::vector<int> distinct = labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t own_size = 0;
        for (int l : labels)
            if (l == labels[i])
                ++own_size;
        if (own_size == 1)
            continue;

        double a = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i && labels[j] == labels[i])
                a += point_distance(X[i], X[j]);
        a /= static_cast<double>(own_size - 1);

        double b = std::numeric_limits<double>::infinity();
        for (int l : distinct) {
            if (l == labels[i])
                continue;
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (labels[j] == l) {
                    sum += point_distance(X[i], X[j]);
                    ++count;
                }
            b = std::min(b, sum / static_cast<double>(count));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0)
            total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

inline double quantile7(const std::vector<double>& sorted, double p) {
    const double idx = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(idx));
    const auto hi = static_cast<std::size_t>(std::ceil(idx));
    return std::lerp(sorted[lo], sorted[hi], idx - std::floor(idx));
}

inline salgate::BoxStats direct_box_stats(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    salgate::BoxStats b;
    b.min = v.front();
    b.max = v.back();
    if (v.size() == 1) {
        b.q1 = b.median = b.q3 = v[0];
    } else {
        b.q1 = quantile7(v, 0.25);
        b.median = quantile7(v, 0.5);
        b.q3 = quantile7(v, 0.75);
    }
    const double fence_lo = b.q1 - 1.5 * (b.q3 - b.q1);
    const double fence_hi = b.q3 + 1.5 * (b.q3 - b.q1);
    b.whisker_low = *std::find_if(v.begin(), v.end(),
                                  [&](double x) { return x >= fence_lo; });
    b.whisker_high = *std::find_if(v.rbegin(), v.rend(),
                                   [&](double x) { return x <= fence_hi; });
    for (double x : v)
        if (x < fence_lo || x > fence_hi)
            b.outliers.push_back(x);
    return b;
}

struct TwoPartition {
    double wcss = std::numeric_limits<double>::infinity();
    std::array<std::vector<double>, 2> means;
};

// Exhaustive optimum over all 2-partitions of up to ~20 points.
inline TwoPartition best_two_partition(const std::vector<std::vector<double>>& X) {
    const std::size_t n = X.size();
    const std::size_t dim = X[0].size();
    TwoPartition best;
    for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
        std::array<std::vector<double>, 2> sum = {std::vector<double>(dim, 0.0),
                                                  std::vector<double>(dim, 0.0)};
        std::array<std::size_t, 2> count{};
        for (std::size_t i = 0; i < n; ++i) {
            const int side = (mask >> i) & 1u;
            ++count[static_cast<std::size_t>(side)];
            for (std::size_t d = 0; d < dim; ++d)
                sum[static_cast<std::size_t>(side)][d] += X[i][d];
        }
        std::array<std::vector<double>, 2> mean = sum;
        for (int side = 0; side < 2; ++side)
            for (std::size_t d = 0; d < dim; ++d)
                mean[static_cast<std::size_t>(side)][d] /=
                    static_cast<double>(count[static_cast<std::size_t>(side)]);
        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const int side = (mask >> i) & 1u;
            const double dist =
                point_distance(X[i], mean[static_cast<std::size_t>(side)]);
            wcss += dist * dist;
        }
        if (wcss < best.wcss) {
            best.wcss = wcss;
            best.means = mean;
        }
    }
    return best;
}

inline double trapezoid(const std::vector<double>& xs, const std::vector<double>& ys) {
    double s = 0.0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        s += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
    return s;
}

} // namespace oracles
