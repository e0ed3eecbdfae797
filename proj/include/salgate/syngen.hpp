#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "salgate/errors.hpp"
#include "salgate/geometry.hpp"
#include "salgate/image.hpp"
#include "salgate/manifest.hpp"
#include "salgate/pgm.hpp"
#include "salgate/record.hpp"
#include "salgate/rng.hpp"

namespace salgate {

inline constexpr std::array<const char*, 6> kClassTags = {
    "device-screws", "no-lines", "vertical", "device-plate", "zoomed-out",
    "horizontal-oblique"};

// Synthetic corpus knobs. Per-class aberrancy defaults follow the rate
// profile the evaluation stage is expected to gate on (two classes high,
// the rest low). Everything downstream of the seed is deterministic.
struct GenConfig {
    int n_per_class = 100;
    int image_size = 128;
    std::array<double, 6> aberrancy_rate_per_class = {0.0, 0.25, 0.05, 0.01, 0.81, 0.05};
    double positive_fraction = 0.8;
    double noise_sigma = 0.05;
    std::uint64_t seed = 42;
    double train_fraction = 0.8;

    void validate() const {
        if (n_per_class < 1)
            throw InvalidConfig("gen: n_per_class must be at least 1");
        if (image_size < 32)
            throw InvalidConfig("gen: image_size must be at least 32");
        for (double r : aberrancy_rate_per_class)
            if (!(r >= 0.0 && r <= 1.0))
                throw InvalidConfig("gen: aberrancy rates must be in [0,1]");
        if (!(positive_fraction >= 0.0 && positive_fraction <= 1.0))
            throw InvalidConfig("gen: positive_fraction must be in [0,1]");
        if (!(noise_sigma >= 0.0))
            throw InvalidConfig("gen: noise_sigma must be nonnegative");
        if (!(train_fraction > 0.0 && train_fraction < 1.0))
            throw InvalidConfig("gen: train_fraction must be in (0,1)");
    }
};

struct GenSummary {
    std::filesystem::path manifest_path;
    std::uint64_t n_records = 0;
    std::uint64_t n_train = 0;
    std::uint64_t n_test = 0;
    std::array<std::uint64_t, 6> aberrant_per_class{};
};

namespace detail {

// Even striping of a fraction across indices: member iff the running
// count floor(r * i) steps at i. Gives exactly floor-or-ceil(n * r)
// members for any prefix, so realized per-class rates match the config
// instead of wobbling like a Bernoulli draw would.
inline bool stripe_member(int index, double rate) {
    return std::floor(rate * (index + 1)) > std::floor(rate * index);
}

struct Canvas {
    int n = 0;
    std::vector<double> px;

    explicit Canvas(int size, double fill) : n(size), px(static_cast<std::size_t>(size) * size, fill) {}

    double& at(int x, int y) { return px[static_cast<std::size_t>(y) * n + x]; }
};

inline double band_profile(double t) {
    const double q = 1.0 - t * t;
    return q <= 0.0 ? 0.0 : std::pow(q, 0.7);
}

// Vertical bone band, full height, smooth quadratic falloff toward the
// edges. Brightening elements compose with max so overlaps stay in range.
inline void draw_band(Canvas& c, double cx, double half_width, double amp) {
    for (int y = 0; y < c.n; ++y)
        for (int x = 0; x < c.n; ++x) {
            const double v = amp * band_profile((x + 0.5 - cx) / half_width);
            c.at(x, y) = std::max(c.at(x, y), v);
        }
}

// Localized band segment, used for shrunken bone and for backing decoys.
inline void draw_patch(Canvas& c, double cx, double cy, double hw, double hh, double amp) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - hw)));
    const int x1 = std::min(c.n, static_cast<int>(std::ceil(cx + hw)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - hh)));
    const int y1 = std::min(c.n, static_cast<int>(std::ceil(cy + hh)) + 1);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const double v = amp * band_profile((x + 0.5 - cx) / hw) *
                             band_profile((y + 0.5 - cy) / hh);
            c.at(x, y) = std::max(c.at(x, y), v);
        }
}

inline void draw_rect(Canvas& c, double cx, double cy, double hx, double hy, double amp) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - hx)));
    const int x1 = std::min(c.n, static_cast<int>(std::ceil(cx + hx)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - hy)));
    const int y1 = std::min(c.n, static_cast<int>(std::ceil(cy + hy)) + 1);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
            if (std::abs(x + 0.5 - cx) <= hx && std::abs(y + 0.5 - cy) <= hy)
                c.at(x, y) = std::max(c.at(x, y), amp);
}

// Dark elements (screw heads, fracture lines) compose with min.
inline void draw_disc_dark(Canvas& c, double cx, double cy, double r, double value) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
    const int x1 = std::min(c.n, static_cast<int>(std::ceil(cx + r)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
    const int y1 = std::min(c.n, static_cast<int>(std::ceil(cy + r)) + 1);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            if (dx * dx + dy * dy <= r * r)
                c.at(x, y) = std::min(c.at(x, y), value);
        }
}

inline void draw_line_dark(Canvas& c, double cx, double cy, double ux, double uy,
                           double half_len, double half_thick, double value) {
    const double reach = half_len + half_thick + 1.0;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - reach)));
    const int x1 = std::min(c.n, static_cast<int>(std::ceil(cx + reach)) + 1);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - reach)));
    const int y1 = std::min(c.n, static_cast<int>(std::ceil(cy + reach)) + 1);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            const double along = dx * ux + dy * uy;
            const double across = std::abs(dx * uy - dy * ux);
            if (std::abs(along) <= half_len && across <= half_thick)
                c.at(x, y) = std::min(c.at(x, y), value);
        }
}

// Per-record geometry, drawn once so the decoy reuses the exact shape
// parameters of the record's own motif.
struct MotifParams {
    double band_hw = 0.0, band_amp = 0.0;
    double rect_hx = 0.0, rect_hy = 0.0;
    double stud_r = 0.0;
    double line_ux = 0.0, line_uy = 0.0, line_half_len = 0.0, line_half_thick = 0.0;
    double blob_hw = 0.0, blob_hh = 0.0;
    double box_hw = 0.0, box_hh = 0.0;
};

inline MotifParams draw_motif_params(int class_idx, int n, Rng& rng) {
    MotifParams p;
    const double N = n;
    p.band_hw = 0.11 * N * (1.0 + 0.10 * rng.next_double());
    p.band_amp = 0.55 + 0.05 * rng.next_double();
    const double j1 = 1.0 + 0.15 * rng.next_double();
    const double j2 = 1.0 + 0.15 * rng.next_double();
    switch (class_idx) {
    case 0: // device-screws: squarish bright implant with dark stud grid
        p.rect_hx = 0.10 * N * j1;
        p.rect_hy = 0.10 * N * j2;
        p.stud_r = 0.030 * N;
        p.box_hw = 1.15 * p.rect_hx;
        p.box_hh = 1.15 * p.rect_hy;
        break;
    case 1: // no-lines: plain midshaft, box wider than the band
        p.box_hw = 0.15 * N * j1;
        p.box_hh = 0.10 * N * j2;
        break;
    case 2: { // vertical fracture line
        const double tilt = 0.07 * (2.0 * rng.next_double() - 1.0);
        p.line_ux = std::sin(tilt);
        p.line_uy = std::cos(tilt);
        p.line_half_len = 0.16 * N * j1;
        p.line_half_thick = 0.012 * N;
        p.box_hw = 0.05 * N * j2;
        p.box_hh = 1.05 * p.line_half_len;
        break;
    }
    case 3: // device-plate: tall narrow bright implant
        p.rect_hx = 0.055 * N * j1;
        p.rect_hy = 0.13 * N * j2;
        p.box_hw = 1.15 * p.rect_hx;
        p.box_hh = 1.15 * p.rect_hy;
        break;
    case 4: // zoomed-out: shrunken bone inside a loose, mostly dark box
        p.blob_hw = 0.05 * N * j1;
        p.blob_hh = 0.14 * N * j2;
        p.box_hw = 2.2 * p.blob_hw;
        p.box_hh = 1.43 * p.blob_hh;
        break;
    case 5: { // horizontal or oblique fracture line
        const double mag = (20.0 + 35.0 * rng.next_double()) * 3.14159265358979323846 / 180.0;
        const double ang = rng.next_double() < 0.5 ? mag : -mag;
        p.line_ux = std::cos(ang);
        p.line_uy = std::sin(ang);
        p.line_half_len = 0.16 * N * j1;
        p.line_half_thick = 0.012 * N;
        p.box_hw = 1.05 * p.line_half_len * std::abs(p.line_ux);
        p.box_hh = std::max(1.05 * p.line_half_len * std::abs(p.line_uy), 0.04 * N);
        break;
    }
    default:
        throw InvalidConfig("gen: class index out of range");
    }
    return p;
}

inline void draw_motif(Canvas& c, int class_idx, const MotifParams& p, double cx, double cy) {
    switch (class_idx) {
    case 0:
        draw_rect(c, cx, cy, p.rect_hx, p.rect_hy, 0.85);
        for (int sy = -1; sy <= 1; sy += 2)
            for (int sx = -1; sx <= 1; sx += 2)
                draw_disc_dark(c, cx + 0.5 * sx * p.rect_hx, cy + 0.5 * sy * p.rect_hy,
                               p.stud_r, 0.15);
        break;
    case 1:
        break;
    case 2:
    case 5:
        draw_line_dark(c, cx, cy, p.line_ux, p.line_uy, p.line_half_len, p.line_half_thick,
                       0.12);
        break;
    case 3:
        draw_rect(c, cx, cy, p.rect_hx, p.rect_hy, 0.85);
        break;
    case 4:
        draw_patch(c, cx, cy, p.blob_hw, p.blob_hh, p.band_amp);
        break;
    default:
        break;
    }
}

} // namespace detail

// Renders one record as a pure function of (cfg.seed, class, index).
// Layout: the class motif sits at an off-center quadrant point M; aberrant
// records place the saliency bump (and a decoy copy of the motif) at the
// quadrant mirror of M, which is farther from M than half the image
// diagonal by construction. In-memory pixels already carry the 8-bit
// quantization the PGM files will have.
inline PredictionRecord generate_record(const GenConfig& cfg, int class_idx, int index) {
    const int n = cfg.image_size;
    const double N = n;
    Rng rng(mix64(mix64(cfg.seed, static_cast<std::uint64_t>(class_idx)),
                  static_cast<std::uint64_t>(index)));
    const bool aberrant = detail::stripe_member(index, cfg.aberrancy_rate_per_class[
        static_cast<std::size_t>(class_idx)]);
    const bool low_positive_class = class_idx == 1 || class_idx == 4;

    // label draws first, geometry after; order is frozen
    const double u_true = rng.next_double();
    const double u_pred = rng.next_double();
    const double u_score = rng.next_double();

    const double pf = low_positive_class ? 1.0 - cfg.positive_fraction : cfg.positive_fraction;
    const Label true_label = u_true < pf ? Label::positive : Label::negative;
    Label predicted_label;
    if (aberrant) {
        predicted_label = u_pred < 0.9 ? Label::positive : Label::negative;
    } else {
        const bool correct = u_pred < 0.9;
        predicted_label = correct ? true_label
                                  : (true_label == Label::positive ? Label::negative
                                                                   : Label::positive);
    }
    const double score = predicted_label == Label::positive ? 0.5 + 0.5 * u_score
                                                            : 0.5 * u_score;

    detail::MotifParams p = detail::draw_motif_params(class_idx, n, rng);

    const double dx = N * (0.27 + 0.03 * rng.next_double());
    const double dy = N * (0.27 + 0.03 * rng.next_double());
    const double sx = rng.next_double() < 0.5 ? -1.0 : 1.0;
    const double sy = rng.next_double() < 0.5 ? -1.0 : 1.0;
    const double mx = 0.5 * N + sx * dx;
    const double my = 0.5 * N + sy * dy;

    detail::Canvas canvas(n, 0.06);
    if (class_idx == 4) {
        detail::draw_motif(canvas, class_idx, p, mx, my);
    } else {
        detail::draw_band(canvas, mx, p.band_hw, p.band_amp);
        detail::draw_motif(canvas, class_idx, p, mx, my);
    }

    const Box2D truth_box(std::max(0.0, mx - p.box_hw), std::max(0.0, my - p.box_hh),
                          std::min(N, mx + p.box_hw), std::min(N, my + p.box_hh));

    // saliency bump: sized to the truth box so the derived crop matches it
    const double sig_x = 0.35 * truth_box.width();
    const double sig_y = 0.35 * truth_box.height();
    const double jx = (2.0 * rng.next_double() - 1.0) * 0.03 * truth_box.width();
    const double jy = (2.0 * rng.next_double() - 1.0) * 0.03 * truth_box.height();
    double cx_s, cy_s;
    if (aberrant) {
        const double fx = N - mx + (2.0 * rng.next_double() - 1.0) * 0.01 * N;
        const double fy = N - my + (2.0 * rng.next_double() - 1.0) * 0.01 * N;
        cx_s = fx;
        cy_s = fy;
        if (class_idx == 4) {
            detail::draw_motif(canvas, class_idx, p, fx, fy);
        } else {
            detail::draw_patch(canvas, fx, fy, p.band_hw, 1.6 * p.box_hh, p.band_amp);
            detail::draw_motif(canvas, class_idx, p, fx, fy);
        }
    } else {
        cx_s = truth_box.center_x() + jx;
        cy_s = truth_box.center_y() + jy;
    }

    if (cfg.noise_sigma > 0.0) {
        for (double& v : canvas.px)
            v = std::clamp(v + cfg.noise_sigma * rng.normal(), 0.0, 1.0);
    }

    PredictionRecord rec;
    char idbuf[64];
    std::snprintf(idbuf, sizeof(idbuf), "%s-%04d", kClassTags[static_cast<std::size_t>(
                                                       class_idx)],
                  index);
    rec.id = idbuf;
    rec.image_path = rec.id + ".pgm";
    rec.saliency_path = rec.id + "-sal.pgm";

    rec.image.width = n;
    rec.image.height = n;
    rec.image.data.resize(static_cast<std::size_t>(n) * n);
    for (std::size_t i = 0; i < canvas.px.size(); ++i)
        rec.image.data[i] = static_cast<std::uint8_t>(std::lround(canvas.px[i] * 255.0));

    rec.saliency.width = n;
    rec.saliency.height = n;
    rec.saliency.data.resize(static_cast<std::size_t>(n) * n);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
            const double zx = (x + 0.5 - cx_s) / sig_x;
            const double zy = (y + 0.5 - cy_s) / sig_y;
            const double s = std::exp(-0.5 * (zx * zx + zy * zy));
            rec.saliency.data[static_cast<std::size_t>(y) * n + x] =
                static_cast<double>(std::lround(s * 255.0)) / 255.0;
        }

    rec.truth_box = truth_box;
    rec.predicted_label = predicted_label;
    rec.true_label = true_label;
    rec.score = score;
    rec.class_tag = kClassTags[static_cast<std::size_t>(class_idx)];
    rec.split = detail::stripe_member(index, cfg.train_fraction) ? Split::train : Split::test;
    return rec;
}

inline GenSummary generate_corpus(const GenConfig& cfg, const std::filesystem::path& out_dir) {
    cfg.validate();
    std::filesystem::create_directories(out_dir);

    GenSummary summary;
    std::vector<PredictionRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.n_per_class) * kClassTags.size());
    for (int c = 0; c < static_cast<int>(kClassTags.size()); ++c) {
        for (int i = 0; i < cfg.n_per_class; ++i) {
            PredictionRecord rec = generate_record(cfg, c, i);
            write_pgm(rec.image, out_dir / rec.image_path);
            write_saliency_pgm(rec.saliency, out_dir / rec.saliency_path);
            if (detail::stripe_member(i, cfg.aberrancy_rate_per_class[static_cast<std::size_t>(
                                             c)]))
                ++summary.aberrant_per_class[static_cast<std::size_t>(c)];
            if (rec.split == Split::train)
                ++summary.n_train;
            else
                ++summary.n_test;
            records.push_back(std::move(rec));
        }
    }
    summary.n_records = records.size();
    summary.manifest_path = out_dir / "manifest.jsonl";
    save_manifest(records, summary.manifest_path);
    return summary;
}

} // namespace salgate
