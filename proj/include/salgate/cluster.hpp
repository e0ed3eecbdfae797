#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "salgate/embed.hpp"
#include "salgate/errors.hpp"
#include "salgate/rng.hpp"

namespace salgate {

// Fitted k-means model over the training split. Assignments always index
// nonempty clusters; inertia is recomputable from centroids + assignments.
struct ClusterModel {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> centroids;
    std::vector<std::vector<double>> train_embeddings;
    std::vector<std::string> train_ids;
    std::vector<int> train_assignments;
    double inertia = 0.0;
};

struct SweepRow {
    int k = 0;
    double silhouette = 0.0;
    std::optional<double> ari_vs_reference;
    double inertia = 0.0;
};

namespace detail {

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Nearest centroid by squared Euclidean distance; ties go to the lowest
// centroid index (strict < while scanning ascending).
inline int nearest_centroid(const std::vector<double>& x,
                            const std::vector<std::vector<double>>& centroids) {
    int best = 0;
    double best_d = squared_distance(x, centroids[0]);
    for (std::size_t c = 1; c < centroids.size(); ++c) {
        const double d = squared_distance(x, centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

// k-means++ seeding: first centroid uniform, the rest sampled proportional
// to squared distance from the nearest already-chosen centroid. A zero
// total (all points coincide with a centroid) falls back to uniform.
inline std::vector<std::vector<double>> kmeanspp_init(const std::vector<std::vector<double>>& X,
                                                      int k, Rng& rng) {
    const std::size_t n = X.size();
    std::vector<std::vector<double>> centroids;
    centroids.reserve(static_cast<std::size_t>(k));
    centroids.push_back(X[static_cast<std::size_t>(rng.next_below(n))]);

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i)
        d2[i] = squared_distance(X[i], centroids[0]);

    while (static_cast<int>(centroids.size()) < k) {
        double total = 0.0;
        for (double d : d2)
            total += d;
        std::size_t pick;
        if (total <= 0.0) {
            pick = static_cast<std::size_t>(rng.next_below(n));
        } else {
            const double r = rng.next_double() * total;
            pick = n - 1;
            double cum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                cum += d2[i];
                if (cum > r) {
                    pick = i;
                    break;
                }
            }
        }
        centroids.push_back(X[pick]);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], squared_distance(X[i], centroids.back()));
    }
    return centroids;
}

} // namespace detail

// Lloyd's algorithm from a k-means++ start. Converges when an assignment
// pass changes nothing, with a 300-iteration cap. A cluster emptied by a
// pass is reseeded with the point farthest from its assigned centroid,
// drawn from clusters that can spare one.
inline ClusterModel kmeans_fit(const std::vector<std::vector<double>>& X, int k,
                               std::uint64_t seed) {
    if (k < 1)
        throw InvalidConfig("kmeans_fit: k must be at least 1, got " + std::to_string(k));
    const std::size_t n = X.size();
    if (n < static_cast<std::size_t>(k))
        throw TooFewPoints("kmeans_fit: " + std::to_string(n) + " points for k = " +
                           std::to_string(k));
    const std::size_t dim = X[0].size();
    for (const auto& x : X)
        if (x.size() != dim)
            throw DimensionMismatch("kmeans_fit: inconsistent embedding dimensions");

    Rng rng(seed);
    auto centroids = detail::kmeanspp_init(X, k, rng);

    std::vector<int> assignments(n, -1);
    std::vector<int> prev;
    for (int iter = 0; iter < 300; ++iter) {
        for (std::size_t i = 0; i < n; ++i)
            assignments[i] = detail::nearest_centroid(X[i], centroids);

        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (int a : assignments)
            ++counts[static_cast<std::size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0)
                continue;
            std::size_t steal = n;
            double steal_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assignments[i])] < 2)
                    continue;
                const double d = detail::squared_distance(
                    X[i], centroids[static_cast<std::size_t>(assignments[i])]);
                if (d > steal_d) {
                    steal_d = d;
                    steal = i;
                }
            }
            --counts[static_cast<std::size_t>(assignments[steal])];
            assignments[steal] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            centroids[static_cast<std::size_t>(c)] = X[steal];
        }

        if (assignments == prev)
            break;
        prev = assignments;

        std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                              std::vector<double>(dim, 0.0));
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = static_cast<std::size_t>(assignments[i]);
            ++counts[c];
            for (std::size_t d = 0; d < dim; ++d)
                sums[c][d] += X[i][d];
        }
        for (int c = 0; c < k; ++c)
            for (std::size_t d = 0; d < dim; ++d)
                centroids[static_cast<std::size_t>(c)][d] =
                    sums[static_cast<std::size_t>(c)][d] / counts[static_cast<std::size_t>(c)];
    }

    ClusterModel model;
    model.k = k;
    model.seed = seed;
    model.centroids = std::move(centroids);
    model.train_embeddings = X;
    model.train_assignments = assignments;
    model.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        model.inertia += detail::squared_distance(
            X[i], model.centroids[static_cast<std::size_t>(assignments[i])]);
    return model;
}

inline ClusterModel kmeans_fit(const std::vector<EmbeddingVector>& embeddings, int k,
                               std::uint64_t seed) {
    std::vector<std::vector<double>> X;
    X.reserve(embeddings.size());
    std::vector<std::string> ids;
    ids.reserve(embeddings.size());
    for (const auto& e : embeddings) {
        X.push_back(e.values);
        ids.push_back(e.record_id);
    }
    ClusterModel model = kmeans_fit(X, k, seed);
    model.train_ids = std::move(ids);
    return model;
}

// Mean silhouette over all points: (b - a) / max(a, b), where a is the
// mean intra-cluster distance excluding self and b the smallest mean
// distance to another cluster. Singleton-cluster points contribute 0.
inline double silhouette(const std::vector<std::vector<double>>& X,
                         const std::vector<int>& labels) {
    const std::size_t n = X.size();
    if (labels.size() != n)
        throw LengthMismatch("silhouette: " + std::to_string(n) + " points vs " +
                             std::to_string(labels.size()) + " labels");
    if (n < 3)
        throw TooFewPoints("silhouette: need at least 3 points");
    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i)
        clusters[labels[i]].push_back(i);
    if (clusters.size() < 2)
        throw DegenerateLabeling("silhouette: a single cluster has no separation");

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& own = clusters.at(labels[i]);
        if (own.size() == 1)
            continue;
        double a = 0.0;
        for (std::size_t j : own)
            if (j != i)
                a += std::sqrt(detail::squared_distance(X[i], X[j]));
        a /= static_cast<double>(own.size() - 1);

        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, members] : clusters) {
            if (label == labels[i])
                continue;
            double mean = 0.0;
            for (std::size_t j : members)
                mean += std::sqrt(detail::squared_distance(X[i], X[j]));
            mean /= static_cast<double>(members.size());
            b = std::min(b, mean);
        }
        const double denom = std::max(a, b);
        if (denom > 0.0)
            total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

// Adjusted Rand index from the pair-counting contingency table. The two
// all-trivial situations (both partitions all-singletons, or both a single
// block) make the correction degenerate and return 0 by convention.
inline double ari(const std::vector<int>& labels_a, const std::vector<int>& labels_b) {
    if (labels_a.size() != labels_b.size())
        throw LengthMismatch("ari: " + std::to_string(labels_a.size()) + " vs " +
                             std::to_string(labels_b.size()) + " labels");
    const std::size_t n = labels_a.size();
    if (n < 2)
        throw TooFewPoints("ari: need at least 2 points");

    std::map<std::pair<int, int>, std::uint64_t> joint;
    std::map<int, std::uint64_t> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        ++joint[{labels_a[i], labels_b[i]}];
        ++rows[labels_a[i]];
        ++cols[labels_b[i]];
    }
    auto choose2 = [](std::uint64_t m) { return m * (m - 1) / 2; };
    std::uint64_t sum_ij = 0, sum_a = 0, sum_b = 0;
    for (const auto& [key, count] : joint)
        sum_ij += choose2(count);
    for (const auto& [label, count] : rows)
        sum_a += choose2(count);
    for (const auto& [label, count] : cols)
        sum_b += choose2(count);
    const std::uint64_t pairs = choose2(static_cast<std::uint64_t>(n));

    if ((sum_a == 0 && sum_b == 0) || (sum_a == pairs && sum_b == pairs))
        return 0.0;
    const double expected =
        static_cast<double>(sum_a) * static_cast<double>(sum_b) / static_cast<double>(pairs);
    const double max_index = 0.5 * (static_cast<double>(sum_a) + static_cast<double>(sum_b));
    return (static_cast<double>(sum_ij) - expected) / (max_index - expected);
}

// One kmeans_fit per k over an inclusive range, all with the same seed.
inline std::vector<SweepRow> sweep_k(const std::vector<std::vector<double>>& X, int k_lo,
                                     int k_hi, std::uint64_t seed,
                                     const std::vector<int>* reference_labels = nullptr) {
    const std::size_t n = X.size();
    if (k_lo < 2 || k_lo > k_hi || static_cast<std::size_t>(k_hi) >= n)
        throw InvalidConfig("sweep_k: range " + std::to_string(k_lo) + ":" +
                            std::to_string(k_hi) + " must lie within [2, N-1], N = " +
                            std::to_string(n));
    std::vector<SweepRow> rows;
    rows.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (int k = k_lo; k <= k_hi; ++k) {
        const ClusterModel model = kmeans_fit(X, k, seed);
        SweepRow row;
        row.k = k;
        row.silhouette = silhouette(X, model.train_assignments);
        if (reference_labels)
            row.ari_vs_reference = ari(model.train_assignments, *reference_labels);
        row.inertia = model.inertia;
        rows.push_back(row);
    }
    return rows;
}

// Majority vote over the k_nn nearest training embeddings. Neighbor order
// breaks distance ties by lower training index; a tied vote falls back to
// the single nearest neighbor's cluster. k_nn larger than the training set
// uses the whole set.
inline int knn_assign(const ClusterModel& model, const std::vector<double>& x, int k_nn = 5) {
    const std::size_t n = model.train_embeddings.size();
    if (n == 0)
        throw EmptyModel("knn_assign: model has no training embeddings");
    if (k_nn < 1)
        throw InvalidConfig("knn_assign: k_nn must be at least 1");
    if (x.size() != model.train_embeddings[0].size())
        throw DimensionMismatch("knn_assign: query dimension " + std::to_string(x.size()) +
                                " != model dimension " +
                                std::to_string(model.train_embeddings[0].size()));
    const std::size_t kn = std::min(static_cast<std::size_t>(k_nn), n);

    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = {detail::squared_distance(x, model.train_embeddings[i]), i};
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kn),
                      order.end());

    std::map<int, int> votes;
    for (std::size_t i = 0; i < kn; ++i)
        ++votes[model.train_assignments[order[i].second]];
    int best_cluster = -1, best_votes = -1;
    bool tie = false;
    for (const auto& [cluster, count] : votes) {
        if (count > best_votes) {
            best_votes = count;
            best_cluster = cluster;
            tie = false;
        } else if (count == best_votes) {
            tie = true;
        }
    }
    if (tie)
        return model.train_assignments[order[0].second];
    return best_cluster;
}

inline int knn_assign(const ClusterModel& model, const EmbeddingVector& x, int k_nn = 5) {
    return knn_assign(model, x.values, k_nn);
}

// Model file: JSON with the centroids and the training partition by record
// id. Embeddings travel separately (the CSV), so loading joins them back
// on by id.

inline void save_cluster_model(const ClusterModel& model, const std::filesystem::path& path) {
    if (model.train_ids.size() != model.train_assignments.size())
        throw std::invalid_argument("save_cluster_model: train ids and assignments differ");
    nlohmann::ordered_json j;
    j["k"] = model.k;
    j["seed"] = model.seed;
    j["centroids"] = model.centroids;
    j["train_ids"] = model.train_ids;
    j["train_assignments"] = model.train_assignments;
    j["inertia"] = model.inertia;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoFailure("cannot open cluster model for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out)
        throw IoFailure("cluster model write failed: " + path.string());
}

inline ClusterModel load_cluster_model(const std::filesystem::path& path,
                                       const std::vector<EmbeddingVector>& embeddings) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure("cannot open cluster model: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw MalformedModel("cluster model " + path.string() + ": " + e.what());
    }

    ClusterModel model;
    try {
        model.k = j.at("k").get<int>();
        model.seed = j.at("seed").get<std::uint64_t>();
        model.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
        model.train_ids = j.at("train_ids").get<std::vector<std::string>>();
        model.train_assignments = j.at("train_assignments").get<std::vector<int>>();
        model.inertia = j.at("inertia").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw MalformedModel("cluster model " + path.string() + ": " + e.what());
    }
    if (model.k < 1 || model.centroids.size() != static_cast<std::size_t>(model.k))
        throw MalformedModel("cluster model: centroid count != k");
    if (model.train_ids.size() != model.train_assignments.size())
        throw MalformedModel("cluster model: train id and assignment counts differ");
    for (int a : model.train_assignments)
        if (a < 0 || a >= model.k)
            throw MalformedModel("cluster model: assignment " + std::to_string(a) +
                                 " outside [0, k)");

    std::map<std::string, const EmbeddingVector*> by_id;
    for (const auto& e : embeddings)
        by_id[e.record_id] = &e;
    const std::size_t dim = model.centroids.empty() ? 0 : model.centroids[0].size();
    for (const auto& c : model.centroids)
        if (c.size() != dim)
            throw MalformedModel("cluster model: ragged centroid rows");
    model.train_embeddings.reserve(model.train_ids.size());
    for (const auto& id : model.train_ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end())
            throw MalformedModel("cluster model: train id '" + id +
                                 "' not present in embeddings");
        if (it->second->values.size() != dim)
            throw DimensionMismatch("cluster model: embedding '" + id + "' has dimension " +
                                    std::to_string(it->second->values.size()) +
                                    ", centroids have " + std::to_string(dim));
        model.train_embeddings.push_back(it->second->values);
    }
    return model;
}

} // namespace salgate
