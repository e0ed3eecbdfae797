#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "salgate/crop.hpp"
#include "salgate/errors.hpp"

namespace salgate {

inline constexpr int kIntensityBins = 16;
inline constexpr int kOrientationBins = 8;
inline constexpr int kReferenceDim = 32;

// Fixed-dimension crop descriptor. Unit Euclidean norm unless the raw
// feature vector was identically zero, in which case it is left as-is and
// flagged degenerate.
struct EmbeddingVector {
    std::string record_id;
    std::vector<double> values;
    bool degenerate = false;

    bool operator==(const EmbeddingVector&) const = default;
};

// Handcrafted 32-D reference descriptor, replacing a learned encoder.
// Feature layout (frozen; the embeddings CSV depends on it):
//   [0..15]  intensity histogram of channel_image, bins over [0,1], each
//            count / S^2
//   [16..23] gradient-orientation histogram of channel_image: central
//            differences on interior pixels, orientations folded to
//            [0,pi), magnitude-weighted, normalized to sum 1 (all zero
//            when the crop has no gradient)
//   [24]     log aspect ratio of the source box, log(w/h)
//   [25]     source box area / source frame area
//   [26,27]  saliency-weighted centroid offset from the stack center,
//            x and y, in units of S
//   [28,29]  saliency-weighted coordinate standard deviations, x and y,
//            in units of S
//   [30]     mean saliency
//   [31]     orientation anisotropy, max - min of [16..23]
inline EmbeddingVector embed_reference(const CropStack& stack, std::string record_id = {}) {
    const int S = stack.size;
    const std::size_t n = static_cast<std::size_t>(S) * S;
    std::vector<double> f;
    f.reserve(kReferenceDim);

    // (a) intensity histogram
    std::array<double, kIntensityBins> ihist{};
    for (double v : stack.channel_image) {
        int b = static_cast<int>(v * kIntensityBins);
        b = std::clamp(b, 0, kIntensityBins - 1);
        ihist[b] += 1.0;
    }
    for (double& b : ihist)
        b /= static_cast<double>(n);
    f.insert(f.end(), ihist.begin(), ihist.end());

    // (b) gradient-orientation histogram, folded to [0, pi)
    std::array<double, kOrientationBins> ohist{};
    double mag_total = 0.0;
    constexpr double kPi = 3.14159265358979323846;
    auto px = [&](int x, int y) {
        return stack.channel_image[static_cast<std::size_t>(y) * S + x];
    };
    for (int y = 1; y + 1 < S; ++y) {
        for (int x = 1; x + 1 < S; ++x) {
            const double gx = 0.5 * (px(x + 1, y) - px(x - 1, y));
            const double gy = 0.5 * (px(x, y + 1) - px(x, y - 1));
            const double mag = std::hypot(gx, gy);
            if (mag <= 0.0)
                continue;
            double ang = std::atan2(gy, gx);
            if (ang < 0.0)
                ang += kPi;
            if (ang >= kPi)
                ang -= kPi;
            int b = static_cast<int>(ang / (kPi / kOrientationBins));
            b = std::clamp(b, 0, kOrientationBins - 1);
            ohist[b] += mag;
            mag_total += mag;
        }
    }
    if (mag_total > 0.0)
        for (double& b : ohist)
            b /= mag_total;
    f.insert(f.end(), ohist.begin(), ohist.end());

    // (c), (d) source-box shape relative to its frame
    f.push_back(std::log(stack.source_box.width() / stack.source_box.height()));
    f.push_back(stack.source_box.area() /
                (static_cast<double>(stack.source_width) * stack.source_height));

    // (e), (f) saliency-weighted moments over the stack grid
    double wsum = 0.0, cx = 0.0, cy = 0.0;
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) {
            const double wgt = stack.channel_saliency[static_cast<std::size_t>(y) * S + x];
            wsum += wgt;
            cx += wgt * (x + 0.5);
            cy += wgt * (y + 0.5);
        }
    double off_x = 0.0, off_y = 0.0, sd_x = 0.0, sd_y = 0.0;
    if (wsum > 0.0) {
        cx /= wsum;
        cy /= wsum;
        off_x = (cx - 0.5 * S) / S;
        off_y = (cy - 0.5 * S) / S;
        double vx = 0.0, vy = 0.0;
        for (int y = 0; y < S; ++y)
            for (int x = 0; x < S; ++x) {
                const double wgt = stack.channel_saliency[static_cast<std::size_t>(y) * S + x];
                vx += wgt * (x + 0.5 - cx) * (x + 0.5 - cx);
                vy += wgt * (y + 0.5 - cy) * (y + 0.5 - cy);
            }
        sd_x = std::sqrt(vx / wsum) / S;
        sd_y = std::sqrt(vy / wsum) / S;
    }
    f.push_back(off_x);
    f.push_back(off_y);
    f.push_back(sd_x);
    f.push_back(sd_y);

    // (g) mean saliency
    double ssum = 0.0;
    for (double v : stack.channel_saliency)
        ssum += v;
    f.push_back(ssum / static_cast<double>(n));

    // (h) orientation anisotropy
    double omax = 0.0, omin = 0.0;
    if (mag_total > 0.0) {
        omax = *std::max_element(ohist.begin(), ohist.end());
        omin = *std::min_element(ohist.begin(), ohist.end());
    }
    f.push_back(omax - omin);

    EmbeddingVector e{std::move(record_id), std::move(f), false};
    double norm2 = 0.0;
    for (double v : e.values)
        norm2 += v * v;
    if (norm2 > 0.0) {
        const double inv = 1.0 / std::sqrt(norm2);
        for (double& v : e.values)
            v *= inv;
    } else {
        e.degenerate = true;
    }
    return e;
}

// Embeddings CSV: header `id,e0,...,e{D-1}`, one row per record, numbers
// printed with enough digits to round-trip doubles exactly.

inline void save_embeddings(const std::vector<EmbeddingVector>& embeddings,
                            const std::filesystem::path& path, int dim = kReferenceDim) {
    if (!embeddings.empty())
        dim = static_cast<int>(embeddings.front().values.size());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoFailure("cannot open embeddings for writing: " + path.string());
    out << "id";
    for (int i = 0; i < dim; ++i)
        out << ",e" << i;
    out << '\n';
    char buf[64];
    for (const auto& e : embeddings) {
        if (static_cast<int>(e.values.size()) != dim)
            throw DimensionMismatch("embedding " + e.record_id + ": dimension " +
                                    std::to_string(e.values.size()) + " != " + std::to_string(dim));
        out << e.record_id;
        for (double v : e.values) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out)
        throw IoFailure("embeddings write failed: " + path.string());
}

inline std::vector<EmbeddingVector> load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoFailure("cannot open embeddings: " + path.string());

    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (true) {
            const std::size_t c = line.find(',', pos);
            if (c == std::string::npos) {
                cells.push_back(line.substr(pos));
                break;
            }
            cells.push_back(line.substr(pos, c - pos));
            pos = c + 1;
        }
        return cells;
    };

    std::string line;
    if (!std::getline(in, line))
        throw MalformedEmbeddings("embeddings file has no header: " + path.string());
    const auto header = split(line);
    if (header.empty() || header[0] != "id")
        throw MalformedEmbeddings("embeddings header must start with 'id'");
    const int dim = static_cast<int>(header.size()) - 1;
    for (int i = 0; i < dim; ++i)
        if (header[static_cast<std::size_t>(i) + 1] != "e" + std::to_string(i))
            throw MalformedEmbeddings("embeddings header column " + std::to_string(i + 1) +
                                      " must be e" + std::to_string(i));

    std::vector<EmbeddingVector> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto cells = split(line);
        const std::string where = "embeddings line " + std::to_string(line_no) + ": ";
        if (static_cast<int>(cells.size()) - 1 != dim)
            throw DimensionMismatch(where + "row has " + std::to_string(cells.size() - 1) +
                                    " values, header says " + std::to_string(dim));
        EmbeddingVector e;
        e.record_id = cells[0];
        e.values.reserve(static_cast<std::size_t>(dim));
        double norm2 = 0.0;
        for (int i = 0; i < dim; ++i) {
            const std::string& cell = cells[static_cast<std::size_t>(i) + 1];
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v))
                throw MalformedEmbeddings(where + "bad number '" + cell + "'");
            e.values.push_back(v);
            norm2 += v * v;
        }
        e.degenerate = norm2 == 0.0;
        out.push_back(std::move(e));
    }
    return out;
}

} // namespace salgate
