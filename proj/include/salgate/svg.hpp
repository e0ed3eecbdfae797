#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "salgate/report.hpp"

namespace salgate {

namespace svg_detail {

inline constexpr const char* kPalette[8] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                            "#59a14f", "#edc948", "#b07aa1", "#9c755f"};

inline const char* cluster_color(int cluster_id) {
    return kPalette[static_cast<std::size_t>(cluster_id) % 8];
}

inline std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline std::string label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// Fixed plot frame shared by the figures: outer 720x440, inner axes box.
struct Frame {
    double width = 720, height = 440;
    double left = 60, right = 560, top = 48, bottom = 390;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

    double x(double v) const { return left + (v - x_lo) / (x_hi - x_lo) * (right - left); }
    double y(double v) const { return bottom - (v - y_lo) / (y_hi - y_lo) * (bottom - top); }
};

inline void open_figure(std::string& s, const Frame& f, const std::string& title) {
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width) + "\" height=\"" +
         num(f.height) + "\" viewBox=\"0 0 " + num(f.width) + " " + num(f.height) + "\">\n";
    s += "<rect width=\"" + num(f.width) + "\" height=\"" + num(f.height) +
         "\" fill=\"#ffffff\"/>\n";
    s += "<text x=\"" + num(f.left) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" "
         "fill=\"#222222\">" +
         title + "</text>\n";
    s += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" +
         num(f.right - f.left) + "\" height=\"" + num(f.bottom - f.top) +
         "\" fill=\"none\" stroke=\"#444444\"/>\n";
}

inline void x_tick(std::string& s, const Frame& f, double v, const std::string& text) {
    const double px = f.x(v);
    s += "<line x1=\"" + num(px) + "\" y1=\"" + num(f.bottom) + "\" x2=\"" + num(px) +
         "\" y2=\"" + num(f.bottom + 5) + "\" stroke=\"#444444\"/>\n";
    s += "<text x=\"" + num(px) + "\" y=\"" + num(f.bottom + 20) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\" "
         "text-anchor=\"middle\">" +
         text + "</text>\n";
}

inline void y_tick(std::string& s, const Frame& f, double v, const std::string& text) {
    const double py = f.y(v);
    s += "<line x1=\"" + num(f.left - 5) + "\" y1=\"" + num(py) + "\" x2=\"" + num(f.left) +
         "\" y2=\"" + num(py) + "\" stroke=\"#444444\"/>\n";
    s += "<text x=\"" + num(f.left - 9) + "\" y=\"" + num(py + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\" "
         "text-anchor=\"end\">" +
         text + "</text>\n";
}

inline void axis_titles(std::string& s, const Frame& f, const std::string& x_title,
                        const std::string& y_title) {
    s += "<text x=\"" + num(0.5 * (f.left + f.right)) + "\" y=\"" + num(f.bottom + 40) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\" "
         "text-anchor=\"middle\">" +
         x_title + "</text>\n";
    s += "<text x=\"16\" y=\"" + num(0.5 * (f.top + f.bottom)) +
         "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(0.5 * (f.top + f.bottom)) + ")\">" + y_title + "</text>\n";
}

inline void legend_entry(std::string& s, const Frame& f, int slot, const char* color,
                         const std::string& text) {
    const double y = f.top + 14 + 20 * slot;
    s += "<rect x=\"" + num(f.right + 14) + "\" y=\"" + num(y - 9) +
         "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
    s += "<text x=\"" + num(f.right + 31) + "\" y=\"" + num(y + 1) +
         "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">" + text +
         "</text>\n";
}

} // namespace svg_detail

// Overlaid per-cluster SCA density curves.
inline void write_kde_svg(const std::vector<ClusterReport>& clusters,
                          const std::filesystem::path& path) {
    namespace sd = svg_detail;
    sd::Frame f;
    f.x_lo = -0.2;
    f.x_hi = 1.2;
    double ymax = 0.0;
    for (const auto& rep : clusters)
        if (rep.density)
            for (double d : rep.density->density)
                ymax = std::max(ymax, d);
    f.y_hi = ymax > 0.0 ? 1.05 * ymax : 1.0;

    std::string s;
    sd::open_figure(s, f, "SCA density by cluster");
    for (double tick : {-0.2, 0.0, 0.25, 0.5, 0.75, 1.0, 1.2})
        sd::x_tick(s, f, tick, sd::label(tick));
    for (int i = 0; i <= 4; ++i) {
        const double v = f.y_hi * i / 4.0;
        sd::y_tick(s, f, v, sd::label(v));
    }
    sd::axis_titles(s, f, "saliency crop accuracy", "density");

    int slot = 0;
    for (const auto& rep : clusters) {
        const char* color = sd::cluster_color(rep.cluster_id);
        if (rep.density) {
            s += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                 "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < rep.density->grid.size(); ++i) {
                if (i)
                    s += ' ';
                s += sd::num(f.x(rep.density->grid[i])) + "," +
                     sd::num(f.y(rep.density->density[i]));
            }
            s += "\"/>\n";
        }
        sd::legend_entry(s, f, slot++, color,
                         "cluster " + std::to_string(rep.cluster_id) + " (n=" +
                             std::to_string(rep.n) + ")");
    }
    s += "</svg>\n";
    detail::write_text(path, s, "kde figure");
}

// Standard box-and-whisker glyphs, one slot per cluster.
inline void write_box_svg(const std::vector<ClusterReport>& clusters,
                          const std::filesystem::path& path) {
    namespace sd = svg_detail;
    sd::Frame f;
    f.right = 660;
    f.x_lo = 0;
    f.x_hi = static_cast<double>(std::max<std::size_t>(clusters.size(), 1));

    std::string s;
    sd::open_figure(s, f, "SCA distribution by cluster");
    for (int i = 0; i <= 5; ++i)
        sd::y_tick(s, f, i / 5.0, sd::label(i / 5.0));
    sd::axis_titles(s, f, "cluster", "saliency crop accuracy");

    for (std::size_t i = 0; i < clusters.size(); ++i) {
        const auto& rep = clusters[i];
        const double cx = f.x(static_cast<double>(i) + 0.5);
        sd::x_tick(s, f, static_cast<double>(i) + 0.5, std::to_string(rep.cluster_id));
        if (!rep.box) {
            s += "<text x=\"" + sd::num(cx) + "\" y=\"" + sd::num(f.y(0.5)) +
                 "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#888888\" "
                 "text-anchor=\"middle\">n=0</text>\n";
            continue;
        }
        const char* color = sd::cluster_color(rep.cluster_id);
        const BoxStats& b = *rep.box;
        const double half = 0.32 * (f.x(1) - f.x(0));
        s += "<line x1=\"" + sd::num(cx) + "\" y1=\"" + sd::num(f.y(b.whisker_low)) +
             "\" x2=\"" + sd::num(cx) + "\" y2=\"" + sd::num(f.y(b.whisker_high)) +
             "\" stroke=\"#444444\"/>\n";
        for (double w : {b.whisker_low, b.whisker_high})
            s += "<line x1=\"" + sd::num(cx - 0.5 * half) + "\" y1=\"" + sd::num(f.y(w)) +
                 "\" x2=\"" + sd::num(cx + 0.5 * half) + "\" y2=\"" + sd::num(f.y(w)) +
                 "\" stroke=\"#444444\"/>\n";
        s += "<rect x=\"" + sd::num(cx - half) + "\" y=\"" + sd::num(f.y(b.q3)) +
             "\" width=\"" + sd::num(2 * half) + "\" height=\"" +
             sd::num(f.y(b.q1) - f.y(b.q3)) + "\" fill=\"" + color +
             "\" fill-opacity=\"0.45\" stroke=\"" + color + "\"/>\n";
        s += "<line x1=\"" + sd::num(cx - half) + "\" y1=\"" + sd::num(f.y(b.median)) +
             "\" x2=\"" + sd::num(cx + half) + "\" y2=\"" + sd::num(f.y(b.median)) +
             "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        for (double o : b.outliers)
            s += "<circle cx=\"" + sd::num(cx) + "\" cy=\"" + sd::num(f.y(o)) +
                 "\" r=\"2.5\" fill=\"none\" stroke=\"" + color + "\"/>\n";
    }
    s += "</svg>\n";
    detail::write_text(path, s, "box figure");
}

// Per-cluster precision bars; gated clusters draw hatched-red, kept blue.
// Baseline and gated overall precision appear as dashed reference lines.
inline void write_precision_svg(const PipelineReport& report,
                                const std::filesystem::path& path) {
    namespace sd = svg_detail;
    sd::Frame f;
    f.x_lo = 0;
    f.x_hi = static_cast<double>(std::max<std::size_t>(report.clusters.size(), 1));

    std::string s;
    sd::open_figure(s, f, "Per-cluster precision");
    for (int i = 0; i <= 5; ++i)
        sd::y_tick(s, f, i / 5.0, sd::label(i / 5.0));
    sd::axis_titles(s, f, "cluster", "precision");

    for (std::size_t i = 0; i < report.clusters.size(); ++i) {
        const auto& rep = report.clusters[i];
        const double cx = f.x(static_cast<double>(i) + 0.5);
        const double half = 0.36 * (f.x(1) - f.x(0));
        sd::x_tick(s, f, static_cast<double>(i) + 0.5, std::to_string(rep.cluster_id));
        if (!rep.precision) {
            s += "<text x=\"" + sd::num(cx) + "\" y=\"" + sd::num(f.y(0.0) - 6) +
                 "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#888888\" "
                 "text-anchor=\"middle\">n/a</text>\n";
            continue;
        }
        const char* fill = rep.gated ? "#e15759" : "#4e79a7";
        s += "<rect x=\"" + sd::num(cx - half) + "\" y=\"" + sd::num(f.y(*rep.precision)) +
             "\" width=\"" + sd::num(2 * half) + "\" height=\"" +
             sd::num(f.y(0.0) - f.y(*rep.precision)) + "\" fill=\"" + fill +
             "\" fill-opacity=\"0.8\"/>\n";
        s += "<text x=\"" + sd::num(cx) + "\" y=\"" + sd::num(f.y(*rep.precision) - 5) +
             "\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#222222\" "
             "text-anchor=\"middle\">" +
             sd::label(*rep.precision) + "</text>\n";
    }

    int slot = 0;
    sd::legend_entry(s, f, slot++, "#4e79a7", "kept cluster");
    sd::legend_entry(s, f, slot++, "#e15759", "gated cluster");
    const struct {
        const std::optional<double>& value;
        const char* color;
        const char* name;
    } lines[] = {{report.metrics.precision_baseline, "#666666", "baseline"},
                 {report.metrics.precision_gated, "#59a14f", "after gating"}};
    for (const auto& line : lines) {
        if (!line.value)
            continue;
        s += "<line x1=\"" + sd::num(f.left) + "\" y1=\"" + sd::num(f.y(*line.value)) +
             "\" x2=\"" + sd::num(f.right) + "\" y2=\"" + sd::num(f.y(*line.value)) +
             "\" stroke=\"" + line.color + "\" stroke-dasharray=\"6 4\"/>\n";
        sd::legend_entry(s, f, slot++, line.color,
                         std::string(line.name) + " " + sd::label(*line.value));
    }
    s += "</svg>\n";
    detail::write_text(path, s, "precision figure");
}

} // namespace salgate
