#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace salgate {

// 8-bit grayscale raster, row-major, top-left origin.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }

    void validate() const {
        if (width < 1 || height < 1)
            throw std::invalid_argument("GrayImage: width and height must be >= 1");
        if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw std::invalid_argument("GrayImage: data length must equal width*height");
    }

    bool operator==(const GrayImage&) const = default;
};

// Real-valued saliency raster in [0, 1], same layout and dimensions as the
// image it was computed from.
struct SaliencyMap {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    double at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }

    void validate() const {
        if (width < 1 || height < 1)
            throw std::invalid_argument("SaliencyMap: width and height must be >= 1");
        if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
            throw std::invalid_argument("SaliencyMap: data length must equal width*height");
        for (double v : data)
            if (!(std::isfinite(v) && v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("SaliencyMap: values must be finite and in [0,1]");
    }

    bool operator==(const SaliencyMap&) const = default;
};

} // namespace salgate
