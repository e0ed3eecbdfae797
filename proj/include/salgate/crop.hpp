#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "salgate/errors.hpp"
#include "salgate/geometry.hpp"
#include "salgate/image.hpp"

namespace salgate {

// How a saliency map becomes a crop box, and how big the resampled stack is.
struct CropConfig {
    double threshold_fraction = 0.5; // theta in (0,1), relative to max(saliency)
    double pad_fraction = 0.1;       // context margin per side, fraction of box size
    int stack_size = 32;             // S

    void validate() const {
        if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
            throw InvalidConfig("threshold_fraction must be in (0,1)");
        if (!(pad_fraction >= 0.0))
            throw InvalidConfig("pad_fraction must be >= 0");
        if (stack_size < 1)
            throw InvalidConfig("stack_size must be >= 1");
    }
};

// The 2-channel patch handed to the embedder: cropped image and cropped
// saliency, both resampled to S x S and scaled to [0,1]. Source geometry
// is kept so descriptors can relate the crop back to the full frame.
struct CropStack {
    int size = 0;
    std::vector<double> channel_image;
    std::vector<double> channel_saliency;
    Box2D source_box;
    int source_width = 0;  // dimensions of the frame the box was cut from
    int source_height = 0;

    bool operator==(const CropStack&) const = default;
};

// Discriminative-region recovery: threshold the map at theta * max, keep
// the largest 4-connected supra-threshold component (ties: the component
// seen first in row-major order), take its tight pixel bounding box,
// expand by pad_fraction per side and clamp to the frame.
inline Box2D extract_crop_box(const SaliencyMap& s, const CropConfig& cfg = {}) {
    cfg.validate();
    s.validate();

    const double max_v = *std::max_element(s.data.begin(), s.data.end());
    if (max_v <= 0.0)
        throw EmptySaliency("saliency map is identically zero");
    const double thr = cfg.threshold_fraction * max_v;

    const int w = s.width, h = s.height;
    const std::size_t n = s.data.size();
    std::vector<int> comp(n, -1);
    std::vector<std::size_t> stack;

    int best_comp = -1;
    std::size_t best_size = 0;
    int next_comp = 0;
    long best_minx = 0, best_miny = 0, best_maxx = 0, best_maxy = 0;

    for (std::size_t start = 0; start < n; ++start) {
        if (comp[start] >= 0 || s.data[start] < thr)
            continue;
        // flood fill one component
        const int id = next_comp++;
        std::size_t size = 0;
        long minx = w, miny = h, maxx = -1, maxy = -1;
        comp[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            const int x = static_cast<int>(p % static_cast<std::size_t>(w));
            const int y = static_cast<int>(p / static_cast<std::size_t>(w));
            ++size;
            minx = std::min<long>(minx, x);
            maxx = std::max<long>(maxx, x);
            miny = std::min<long>(miny, y);
            maxy = std::max<long>(maxy, y);
            const int nx[4] = {x - 1, x + 1, x, x};
            const int ny[4] = {y, y, y - 1, y + 1};
            for (int k = 0; k < 4; ++k) {
                if (nx[k] < 0 || nx[k] >= w || ny[k] < 0 || ny[k] >= h)
                    continue;
                const std::size_t q =
                    static_cast<std::size_t>(ny[k]) * static_cast<std::size_t>(w) +
                    static_cast<std::size_t>(nx[k]);
                if (comp[q] < 0 && s.data[q] >= thr) {
                    comp[q] = id;
                    stack.push_back(q);
                }
            }
        }
        // strict > keeps the earliest component on size ties; components are
        // discovered in row-major order of their first pixel
        if (size > best_size) {
            best_size = size;
            best_comp = id;
            best_minx = minx;
            best_miny = miny;
            best_maxx = maxx;
            best_maxy = maxy;
        }
    }
    (void)best_comp;

    // tight box in real coordinates: pixel (i,j) spans [i,i+1) x [j,j+1)
    double x0 = static_cast<double>(best_minx);
    double y0 = static_cast<double>(best_miny);
    double x1 = static_cast<double>(best_maxx + 1);
    double y1 = static_cast<double>(best_maxy + 1);
    const double pw = cfg.pad_fraction * (x1 - x0);
    const double ph = cfg.pad_fraction * (y1 - y0);
    x0 = std::max(0.0, x0 - pw);
    y0 = std::max(0.0, y0 - ph);
    x1 = std::min(static_cast<double>(w), x1 + pw);
    y1 = std::min(static_cast<double>(h), y1 + ph);
    return Box2D(x0, y0, x1, y1);
}

namespace detail {

// Bilinear sample at continuous point (x, y) in local crop coordinates,
// pixel centers at (i+0.5, j+0.5). Support is clamped to the crop, and the
// nested-lerp form keeps every output inside [min, max] of the inputs.
template <typename GetPixel>
double bilinear(GetPixel&& get, int w, int h, double x, double y) {
    const double fx = x - 0.5;
    const double fy = y - 0.5;
    const double bx = std::floor(fx);
    const double by = std::floor(fy);
    const double tx = fx - bx;
    const double ty = fy - by;
    const int x0 = std::clamp(static_cast<int>(bx), 0, w - 1);
    const int x1 = std::clamp(static_cast<int>(bx) + 1, 0, w - 1);
    const int y0 = std::clamp(static_cast<int>(by), 0, h - 1);
    const int y1 = std::clamp(static_cast<int>(by) + 1, 0, h - 1);
    const double top = std::lerp(get(x0, y0), get(x1, y0), tx);
    const double bot = std::lerp(get(x0, y1), get(x1, y1), tx);
    return std::lerp(top, bot, ty);
}

} // namespace detail

// Crops both channels to `box` and resamples them to S x S. Intensities
// are scaled to [0,1]. The sample grid puts output pixel (u,v) at the
// source point box_origin + ((u+0.5) w/S, (v+0.5) h/S), so an integer
// aligned S x S box reproduces the raw crop exactly.
inline CropStack crop_and_stack(const GrayImage& img, const SaliencyMap& s, const Box2D& box,
                                const CropConfig& cfg = {}) {
    cfg.validate();
    img.validate();
    s.validate();
    if (img.width != s.width || img.height != s.height)
        throw DimensionMismatch("crop_and_stack: image and saliency dimensions differ");
    if (box.x1 > img.width || box.y1 > img.height)
        throw BoxOutOfBounds("crop box exceeds image bounds");

    // pixels overlapped by the box; sampling never reaches outside them
    const int ox = static_cast<int>(std::floor(box.x0));
    const int oy = static_cast<int>(std::floor(box.y0));
    const int ex = std::min(img.width, static_cast<int>(std::ceil(box.x1)));
    const int ey = std::min(img.height, static_cast<int>(std::ceil(box.y1)));
    const int cw = ex - ox;
    const int ch = ey - oy;

    const int S = cfg.stack_size;
    CropStack out{S,
                  std::vector<double>(static_cast<std::size_t>(S) * S),
                  std::vector<double>(static_cast<std::size_t>(S) * S),
                  box,
                  img.width,
                  img.height};

    auto img_px = [&](int x, int y) { return img.at(ox + x, oy + y) / 255.0; };
    auto sal_px = [&](int x, int y) { return s.at(ox + x, oy + y); };

    for (int v = 0; v < S; ++v) {
        const double sy = box.y0 + (v + 0.5) * box.height() / S - oy;
        for (int u = 0; u < S; ++u) {
            const double sx = box.x0 + (u + 0.5) * box.width() / S - ox;
            const std::size_t i = static_cast<std::size_t>(v) * S + u;
            out.channel_image[i] = detail::bilinear(img_px, cw, ch, sx, sy);
            out.channel_saliency[i] = detail::bilinear(sal_px, cw, ch, sx, sy);
        }
    }
    return out;
}

} // namespace salgate
