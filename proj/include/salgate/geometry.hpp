#pragma once

#include <cmath>
#include <stdexcept>

namespace salgate {

// Axis-aligned rectangle in pixel coordinates. Origin is the image
// top-left corner, y grows downward. Coordinates are real-valued; a pixel
// (i, j) occupies the unit square [i, i+1) x [j, j+1).
struct Box2D {
    double x0, y0, x1, y1;

    Box2D(double x0_, double y0_, double x1_, double y1_)
        : x0(x0_), y0(y0_), x1(x1_), y1(y1_) {
        if (!(std::isfinite(x0) && std::isfinite(y0) && std::isfinite(x1) && std::isfinite(y1)))
            throw std::invalid_argument("Box2D: non-finite coordinate");
        if (x0 < 0.0 || y0 < 0.0)
            throw std::invalid_argument("Box2D: negative coordinate");
        if (!(x0 < x1 && y0 < y1))
            throw std::invalid_argument("Box2D: empty or inverted box");
    }

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    double center_x() const { return 0.5 * (x0 + x1); }
    double center_y() const { return 0.5 * (y0 + y1); }
    double diagonal() const { return std::hypot(width(), height()); }

    bool operator==(const Box2D&) const = default;
};

} // namespace salgate
