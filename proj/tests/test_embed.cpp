#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <vector>

#include "salgate/embed.hpp"
#include "salgate/rng.hpp"
#include "testutil.hpp"

using Catch::Matchers::WithinAbs;
using salgate::Box2D;
using salgate::CropStack;
using salgate::EmbeddingVector;
using salgate::Rng;
using testutil::TempDir;

namespace {

CropStack blank_stack(int S, double image_value, double saliency_value) {
    CropStack stack{S,
                    std::vector<double>(static_cast<std::size_t>(S) * S, image_value),
                    std::vector<double>(static_cast<std::size_t>(S) * S, saliency_value),
                    Box2D(0, 0, S, S),
                    2 * S,
                    2 * S};
    return stack;
}

double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s);
}

} // namespace

TEST_CASE("descriptor layout on a constant stack") {
    const int S = 4;
    const auto stack = blank_stack(S, 0.5, 0.25);
    const EmbeddingVector e = salgate::embed_reference(stack, "const");
    REQUIRE(static_cast<int>(e.values.size()) == salgate::kReferenceDim);
    CHECK(e.record_id == "const");
    CHECK_FALSE(e.degenerate);
    CHECK_THAT(norm(e.values), WithinAbs(1.0, 1e-12));

    // expected raw features, normalized here
    std::vector<double> raw(salgate::kReferenceDim, 0.0);
    raw[8] = 1.0;                     // all intensity mass in bin floor(0.5*16)
    raw[24] = 0.0;                    // square box: log aspect 0
    raw[25] = 16.0 / 64.0;            // box area over frame area (4x4 in 8x8)
    raw[26] = 0.0;                    // symmetric weights: zero centroid offset
    raw[27] = 0.0;
    const double sd = std::sqrt(1.25) / S; // sd of {0.5,1.5,2.5,3.5} about 2
    raw[28] = sd;
    raw[29] = sd;
    raw[30] = 0.25;                   // mean saliency
    raw[31] = 0.0;                    // no gradient: zero anisotropy
    const double n = norm(raw);
    for (std::size_t i = 0; i < raw.size(); ++i)
        CHECK_THAT(e.values[i], WithinAbs(raw[i] / n, 1e-12));
}

TEST_CASE("gradient orientation bins distinguish edge directions") {
    const int S = 8;
    auto vertical_edge = blank_stack(S, 0.0, 0.5);
    auto horizontal_edge = blank_stack(S, 0.0, 0.5);
    for (int y = 0; y < S; ++y)
        for (int x = 0; x < S; ++x) {
            vertical_edge.channel_image[static_cast<std::size_t>(y) * S + x] =
                x < S / 2 ? 0.0 : 1.0;
            horizontal_edge.channel_image[static_cast<std::size_t>(y) * S + x] =
                y < S / 2 ? 0.0 : 1.0;
        }

    const auto ev = salgate::embed_reference(vertical_edge, "v");
    const auto eh = salgate::embed_reference(horizontal_edge, "h");

    // a vertical edge has a horizontal gradient: angle 0, bin 0; a
    // horizontal edge has a vertical gradient: angle pi/2, bin 4
    for (int b = 0; b < salgate::kOrientationBins; ++b) {
        if (b == 0)
            CHECK(ev.values[16 + b] > 0.0);
        else
            CHECK(ev.values[16 + b] == 0.0);
        if (b == 4)
            CHECK(eh.values[16 + b] > 0.0);
        else
            CHECK(eh.values[16 + b] == 0.0);
    }
    // single populated bin: anisotropy equals that bin's mass
    CHECK_THAT(ev.values[31], WithinAbs(ev.values[16], 1e-12));
    CHECK_THAT(eh.values[31], WithinAbs(eh.values[20], 1e-12));
}

TEST_CASE("saliency centroid offset tracks the mass") {
    const int S = 8;
    auto stack = blank_stack(S, 0.3, 0.0);
    // all saliency mass in the right half, lower rows
    for (int y = 5; y < S; ++y)
        for (int x = 6; x < S; ++x)
            stack.channel_saliency[static_cast<std::size_t>(y) * S + x] = 1.0;
    const auto e = salgate::embed_reference(stack, "off");
    CHECK(e.values[26] > 0.0); // x offset to the right
    CHECK(e.values[27] > 0.0); // y offset downward
}

TEST_CASE("unit norm holds on random stacks") {
    Rng rng(606);
    for (int trial = 0; trial < 20; ++trial) {
        const int S = 5 + static_cast<int>(rng.next_below(12));
        auto stack = blank_stack(S, 0.0, 0.0);
        for (auto& v : stack.channel_image)
            v = rng.next_double();
        for (auto& v : stack.channel_saliency)
            v = rng.next_double();
        const double w = rng.uniform(1.0, 20.0);
        const double h = rng.uniform(1.0, 20.0);
        stack.source_box = Box2D(0, 0, w, h);
        const auto e = salgate::embed_reference(stack);
        REQUIRE_FALSE(e.degenerate);
        REQUIRE_THAT(norm(e.values), WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("all-dark stack still embeds (intensity histogram is never empty)") {
    const auto e = salgate::embed_reference(blank_stack(6, 0.0, 0.0), "dark");
    CHECK_FALSE(e.degenerate);
    CHECK_THAT(norm(e.values), WithinAbs(1.0, 1e-12));
    CHECK(e.values[0] > 0.0); // bin 0 holds every pixel
}

TEST_CASE("embeddings CSV round trip is exact") {
    TempDir tmp("embed");
    Rng rng(31337);
    std::vector<EmbeddingVector> vecs;
    for (int i = 0; i < 7; ++i) {
        EmbeddingVector e;
        e.record_id = "rec-" + std::to_string(i);
        for (int d = 0; d < 5; ++d)
            e.values.push_back(rng.uniform(-2.0, 2.0) * std::pow(10.0, -(i % 4)));
        vecs.push_back(std::move(e));
    }
    const auto path = tmp.path / "embeddings.csv";
    salgate::save_embeddings(vecs, path);

    const auto loaded = salgate::load_embeddings(path);
    REQUIRE(loaded.size() == vecs.size());
    for (std::size_t i = 0; i < vecs.size(); ++i) {
        CHECK(loaded[i].record_id == vecs[i].record_id);
        REQUIRE(loaded[i].values == vecs[i].values); // %.17g round-trips doubles
        CHECK_FALSE(loaded[i].degenerate);
    }

    // header matches the dimension
    const auto text = testutil::slurp(path);
    CHECK(text.rfind("id,e0,e1,e2,e3,e4\n", 0) == 0);
}

TEST_CASE("all-zero embedding row loads as degenerate") {
    TempDir tmp("embedzero");
    const auto path = tmp.path / "e.csv";
    testutil::spit(path, "id,e0,e1\nz,0,0\nok,0.6,0.8\n");
    const auto loaded = salgate::load_embeddings(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].degenerate);
    CHECK_FALSE(loaded[1].degenerate);
}

TEST_CASE("embeddings CSV validation") {
    TempDir tmp("embederr");
    const auto path = tmp.path / "e.csv";

    testutil::spit(path, "");
    CHECK_THROWS_AS(salgate::load_embeddings(path), salgate::MalformedEmbeddings);
    testutil::spit(path, "id,e1,e0\na,1,2\n");
    CHECK_THROWS_AS(salgate::load_embeddings(path), salgate::MalformedEmbeddings);
    testutil::spit(path, "name,e0\na,1\n");
    CHECK_THROWS_AS(salgate::load_embeddings(path), salgate::MalformedEmbeddings);
    testutil::spit(path, "id,e0,e1\na,1\n");
    CHECK_THROWS_AS(salgate::load_embeddings(path), salgate::DimensionMismatch);
    testutil::spit(path, "id,e0,e1\na,1,2,3\n");
    CHECK_THROWS_AS(salgate::load_embeddings(path), salgate::DimensionMismatch);
    testutil::spit(path, "id,e0,e1\na,1,zzz\n");
    CHECK_THROWS_AS(salgate::load_embeddings(path), salgate::MalformedEmbeddings);
    testutil::spit(path, "id,e0,e1\na,1,nan\n");
    CHECK_THROWS_AS(salgate::load_embeddings(path), salgate::MalformedEmbeddings);
    testutil::spit(path, "id,e0,e1\na,1,inf\n");
    CHECK_THROWS_AS(salgate::load_embeddings(path), salgate::MalformedEmbeddings);
    CHECK_THROWS_AS(salgate::load_embeddings(tmp.path / "gone.csv"), salgate::IoFailure);

    // ragged save input
    std::vector<EmbeddingVector> bad(2);
    bad[0].record_id = "a";
    bad[0].values = {1.0, 2.0};
    bad[1].record_id = "b";
    bad[1].values = {1.0};
    CHECK_THROWS_AS(salgate::save_embeddings(bad, path), salgate::DimensionMismatch);
}
