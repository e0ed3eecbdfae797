#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "salgate/crop.hpp"
#include "salgate/rng.hpp"

using Catch::Matchers::WithinAbs;
using salgate::Box2D;
using salgate::CropConfig;
using salgate::GrayImage;
using salgate::Rng;
using salgate::SaliencyMap;

namespace {

SaliencyMap map_from(int w, int h, std::vector<double> v) {
    SaliencyMap s;
    s.width = w;
    s.height = h;
    s.data = std::move(v);
    return s;
}

GrayImage image_from(int w, int h, std::vector<std::uint8_t> v) {
    GrayImage img;
    img.width = w;
    img.height = h;
    img.data = std::move(v);
    return img;
}

CropConfig no_pad(int stack = 32) {
    CropConfig cfg;
    cfg.pad_fraction = 0.0;
    cfg.stack_size = stack;
    return cfg;
}

} // namespace

TEST_CASE("extract_crop_box thresholds at theta * max inclusively") {
    // max = 1.0, threshold 0.5: the 0.5 pixel is included
    const auto s = map_from(4, 1, {0.2, 0.5, 1.0, 0.0});
    const Box2D box = salgate::extract_crop_box(s, no_pad());
    CHECK(box == Box2D(1, 0, 3, 1));
}

TEST_CASE("extract_crop_box scales the threshold by the map maximum") {
    // max = 0.4: threshold is 0.2, so 0.2 and 0.4 are both selected
    const auto s = map_from(4, 1, {0.1, 0.2, 0.4, 0.1});
    CHECK(salgate::extract_crop_box(s, no_pad()) == Box2D(1, 0, 3, 1));
}

TEST_CASE("extract_crop_box keeps the largest 4-connected component") {
    // sizes: left component 2 pixels, right component 3; right wins even
    // though the left is seen first
    const auto s = map_from(7, 1, {1, 1, 0, 1, 1, 1, 0});
    CHECK(salgate::extract_crop_box(s, no_pad()) == Box2D(3, 0, 6, 1));
}

TEST_CASE("extract_crop_box breaks size ties toward the first component in row-major order") {
    const auto s = map_from(4, 2, {0, 0, 0, 1, //
                                   1, 0, 0, 0});
    CHECK(salgate::extract_crop_box(s, no_pad()) == Box2D(3, 0, 4, 1));
}

TEST_CASE("diagonal pixels are separate components") {
    const auto s = map_from(2, 2, {1, 0, //
                                   0, 1});
    // two singletons; the (0,0) one is first in row-major order
    CHECK(salgate::extract_crop_box(s, no_pad()) == Box2D(0, 0, 1, 1));
}

TEST_CASE("padding expands per side and clamps to the frame") {
    SaliencyMap s = map_from(10, 10, std::vector<double>(100, 0.0));
    for (int y = 2; y <= 5; ++y)
        for (int x = 3; x <= 6; ++x)
            s.data[static_cast<std::size_t>(y) * 10 + x] = 1.0;
    CropConfig cfg;
    cfg.pad_fraction = 0.25; // tight box 4x4, pad 1 per side
    const Box2D box = salgate::extract_crop_box(s, cfg);
    CHECK_THAT(box.x0, WithinAbs(2.0, 1e-12));
    CHECK_THAT(box.y0, WithinAbs(1.0, 1e-12));
    CHECK_THAT(box.x1, WithinAbs(8.0, 1e-12));
    CHECK_THAT(box.y1, WithinAbs(7.0, 1e-12));

    // component touching the border: padding clamps to the frame
    SaliencyMap edge = map_from(4, 4, std::vector<double>(16, 0.0));
    edge.data[0] = 1.0;
    CropConfig wide;
    wide.pad_fraction = 3.0;
    const Box2D clamped = salgate::extract_crop_box(edge, wide);
    CHECK(clamped.x0 == 0.0);
    CHECK(clamped.y0 == 0.0);
    CHECK_THAT(clamped.x1, WithinAbs(4.0, 1e-12));
    CHECK_THAT(clamped.y1, WithinAbs(4.0, 1e-12));
}

TEST_CASE("zero saliency map is rejected") {
    const auto s = map_from(3, 3, std::vector<double>(9, 0.0));
    CHECK_THROWS_AS(salgate::extract_crop_box(s), salgate::EmptySaliency);
}

TEST_CASE("crop config validation") {
    CropConfig cfg;
    cfg.threshold_fraction = 0.0;
    CHECK_THROWS_AS(cfg.validate(), salgate::InvalidConfig);
    cfg = CropConfig{};
    cfg.threshold_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), salgate::InvalidConfig);
    cfg = CropConfig{};
    cfg.pad_fraction = -0.1;
    CHECK_THROWS_AS(cfg.validate(), salgate::InvalidConfig);
    cfg = CropConfig{};
    cfg.stack_size = 0;
    CHECK_THROWS_AS(cfg.validate(), salgate::InvalidConfig);
}

TEST_CASE("raising theta never grows the selected pixel set") {
    Rng rng(314);
    for (int trial = 0; trial < 20; ++trial) {
        SaliencyMap s = map_from(16, 16, std::vector<double>(256));
        for (double& v : s.data)
            v = static_cast<double>(rng.next_below(256)) / 255.0;
        const double max_v = *std::max_element(s.data.begin(), s.data.end());
        if (max_v <= 0.0)
            continue;
        std::size_t prev = s.data.size() + 1;
        for (double theta : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const std::size_t selected = static_cast<std::size_t>(
                std::count_if(s.data.begin(), s.data.end(),
                              [&](double v) { return v >= theta * max_v; }));
            REQUIRE(selected <= prev);
            REQUIRE(selected >= 1);
            prev = selected;
        }
    }
}

TEST_CASE("crop_and_stack reproduces an integer-aligned crop exactly") {
    const int S = 4;
    GrayImage img = image_from(8, 8, std::vector<std::uint8_t>(64));
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = static_cast<std::uint8_t>((i * 13 + 5) % 256);
    SaliencyMap s = map_from(8, 8, std::vector<double>(64));
    for (std::size_t i = 0; i < s.data.size(); ++i)
        s.data[i] = static_cast<double>((i * 7) % 256) / 255.0;

    const Box2D box(2, 1, 2 + S, 1 + S);
    const auto stack = salgate::crop_and_stack(img, s, box, no_pad(S));
    REQUIRE(stack.size == S);
    CHECK(stack.source_box == box);
    CHECK(stack.source_width == 8);
    CHECK(stack.source_height == 8);
    for (int v = 0; v < S; ++v)
        for (int u = 0; u < S; ++u) {
            const std::size_t i = static_cast<std::size_t>(v) * S + u;
            REQUIRE(stack.channel_image[i] == img.at(2 + u, 1 + v) / 255.0);
            REQUIRE(stack.channel_saliency[i] == s.at(2 + u, 1 + v));
        }
}

TEST_CASE("crop_and_stack averages when downsampling") {
    GrayImage img = image_from(2, 2, {10, 20, 30, 40});
    SaliencyMap s = map_from(2, 2, {0.1, 0.2, 0.3, 0.4});
    const auto stack = salgate::crop_and_stack(img, s, Box2D(0, 0, 2, 2), no_pad(1));
    REQUIRE(stack.channel_image.size() == 1);
    CHECK_THAT(stack.channel_image[0], WithinAbs((10 + 20 + 30 + 40) / 4.0 / 255.0, 1e-12));
    CHECK_THAT(stack.channel_saliency[0], WithinAbs(0.25, 1e-12));
}

TEST_CASE("crop_and_stack keeps samples inside the source range") {
    Rng rng(2718);
    for (int trial = 0; trial < 10; ++trial) {
        const int w = 12, h = 9;
        GrayImage img = image_from(w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h));
        SaliencyMap s = map_from(w, h, std::vector<double>(static_cast<std::size_t>(w) * h));
        for (std::size_t i = 0; i < img.data.size(); ++i) {
            img.data[i] = static_cast<std::uint8_t>(rng.next_below(256));
            s.data[i] = static_cast<double>(rng.next_below(256)) / 255.0;
        }
        const double x0 = rng.uniform(0.0, 5.0);
        const double y0 = rng.uniform(0.0, 4.0);
        const Box2D box(x0, y0, x0 + rng.uniform(1.0, 6.0), y0 + rng.uniform(1.0, 4.0));
        const auto stack = salgate::crop_and_stack(img, s, box, no_pad(5));
        for (double v : stack.channel_image) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
        for (double v : stack.channel_saliency) {
            REQUIRE(v >= 0.0);
            REQUIRE(v <= 1.0);
        }
    }
}

TEST_CASE("constant source yields a constant stack") {
    GrayImage img = image_from(6, 6, std::vector<std::uint8_t>(36, 200));
    SaliencyMap s = map_from(6, 6, std::vector<double>(36, 0.75));
    const auto stack = salgate::crop_and_stack(img, s, Box2D(0.7, 1.3, 5.2, 4.9), no_pad(8));
    for (double v : stack.channel_image)
        REQUIRE_THAT(v, WithinAbs(200.0 / 255.0, 1e-12));
    for (double v : stack.channel_saliency)
        REQUIRE_THAT(v, WithinAbs(0.75, 1e-12));
}

TEST_CASE("crop_and_stack rejects inconsistent inputs") {
    GrayImage img = image_from(4, 4, std::vector<std::uint8_t>(16, 1));
    SaliencyMap s = map_from(3, 4, std::vector<double>(12, 0.5));
    CHECK_THROWS_AS(salgate::crop_and_stack(img, s, Box2D(0, 0, 2, 2)),
                    salgate::DimensionMismatch);

    SaliencyMap ok = map_from(4, 4, std::vector<double>(16, 0.5));
    CHECK_THROWS_AS(salgate::crop_and_stack(img, ok, Box2D(0, 0, 5, 2)),
                    salgate::BoxOutOfBounds);
    CHECK_THROWS_AS(salgate::crop_and_stack(img, ok, Box2D(0, 0, 2, 4.5)),
                    salgate::BoxOutOfBounds);
}
