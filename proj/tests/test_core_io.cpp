#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>

#include "salgate/manifest.hpp"
#include "salgate/pgm.hpp"
#include "salgate/rng.hpp"
#include "testutil.hpp"

using Catch::Matchers::WithinAbs;
using salgate::GrayImage;
using salgate::Rng;
using salgate::SaliencyMap;
using testutil::TempDir;

TEST_CASE("Rng streams are reproducible") {
    Rng a(7), b(7), c(8);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("Rng draws stay in range") {
    Rng rng(99);
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double v = rng.uniform(-3.0, 5.0);
        REQUIRE(v >= -3.0);
        REQUIRE(v < 5.0);
        REQUIRE(rng.next_below(17) < 17);
    }
}

TEST_CASE("Rng normal moments") {
    Rng rng(4242);
    const int n = 20000;
    double sum = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        REQUIRE(std::isfinite(z));
        sum += z;
        ss += z * z;
    }
    const double mean = sum / n;
    const double var = ss / n - mean * mean;
    CHECK_THAT(mean, WithinAbs(0.0, 0.05));
    CHECK_THAT(var, WithinAbs(1.0, 0.05));
}

TEST_CASE("mix64 derives order-sensitive substreams") {
    CHECK(salgate::mix64(1, 2) != salgate::mix64(2, 1));
    CHECK(salgate::mix64(0, 0) != salgate::mix64(0, 1));
    CHECK(salgate::mix64(42, 3) != salgate::mix64(42, 4));
}

TEST_CASE("raster validation") {
    GrayImage img;
    img.width = 2;
    img.height = 2;
    img.data = {1, 2, 3};
    CHECK_THROWS_AS(img.validate(), std::invalid_argument);
    img.data = {1, 2, 3, 4};
    CHECK_NOTHROW(img.validate());
    img.width = 0;
    CHECK_THROWS_AS(img.validate(), std::invalid_argument);

    SaliencyMap s;
    s.width = 2;
    s.height = 1;
    s.data = {0.5, 1.5};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.data = {0.5, -0.1};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.data = {0.0, 1.0};
    CHECK_NOTHROW(s.validate());
}

TEST_CASE("PGM round trip and exact file bytes") {
    TempDir tmp("pgm");
    GrayImage img;
    img.width = 3;
    img.height = 2;
    img.data = {0, 128, 255, 7, 77, 177};
    const auto path = tmp.path / "img.pgm";
    salgate::write_pgm(img, path);

    const std::string bytes = testutil::slurp(path);
    std::string expect = "P5\n3 2\n255\n";
    expect += std::string("\x00", 1);
    expect += static_cast<char>(128);
    expect += static_cast<char>(255);
    expect += static_cast<char>(7);
    expect += static_cast<char>(77);
    expect += static_cast<char>(177);
    CHECK(bytes == expect);

    CHECK(salgate::read_pgm(path) == img);
}

TEST_CASE("PGM header tolerance and errors") {
    TempDir tmp("pgmerr");
    const auto path = tmp.path / "f.pgm";

    testutil::spit(path, "P5\n# a comment line\n 2 1 \n255\nAB");
    const GrayImage img = salgate::read_pgm(path);
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.data == std::vector<std::uint8_t>{'A', 'B'});

    testutil::spit(path, "P2\n2 1\n255\nAB");
    CHECK_THROWS_AS(salgate::read_pgm(path), salgate::MalformedImage);
    testutil::spit(path, "P5\n2 1\n65535\nAB");
    CHECK_THROWS_AS(salgate::read_pgm(path), salgate::MalformedImage);
    testutil::spit(path, "P5\n2 1\n255\nA");
    CHECK_THROWS_AS(salgate::read_pgm(path), salgate::MalformedImage);
    testutil::spit(path, "P5\n2 x\n255\nAB");
    CHECK_THROWS_AS(salgate::read_pgm(path), salgate::MalformedImage);
    testutil::spit(path, "P5");
    CHECK_THROWS_AS(salgate::read_pgm(path), salgate::MalformedImage);
    CHECK_THROWS_AS(salgate::read_pgm(tmp.path / "absent.pgm"), salgate::IoFailure);
}

TEST_CASE("saliency PGM preserves the 255-step lattice") {
    TempDir tmp("sal");
    SaliencyMap s;
    s.width = 4;
    s.height = 1;
    s.data = {0.0, 17.0 / 255.0, 200.0 / 255.0, 1.0};
    const auto path = tmp.path / "s.pgm";
    salgate::write_saliency_pgm(s, path);
    CHECK(salgate::read_saliency_pgm(path) == s);
}

namespace {

salgate::PredictionRecord make_record(const std::filesystem::path& dir, const std::string& id,
                                      bool with_box, bool with_tag) {
    salgate::PredictionRecord r;
    r.id = id;
    r.image_path = id + ".pgm";
    r.saliency_path = id + "-sal.pgm";
    r.image.width = 6;
    r.image.height = 5;
    r.image.data.assign(30, 0);
    for (std::size_t i = 0; i < r.image.data.size(); ++i)
        r.image.data[i] = static_cast<std::uint8_t>((i * 37) % 256);
    r.saliency.width = 6;
    r.saliency.height = 5;
    r.saliency.data.assign(30, 0.0);
    for (std::size_t i = 0; i < r.saliency.data.size(); ++i)
        r.saliency.data[i] = static_cast<double>((i * 11) % 256) / 255.0;
    if (with_box)
        r.truth_box.emplace(1.0, 1.0, 4.5, 4.0);
    r.predicted_label = salgate::Label::positive;
    r.true_label = salgate::Label::negative;
    r.score = 0.625;
    if (with_tag)
        r.class_tag = "vertical";
    r.split = salgate::Split::test;
    salgate::write_pgm(r.image, dir / r.image_path);
    salgate::write_saliency_pgm(r.saliency, dir / r.saliency_path);
    return r;
}

} // namespace

TEST_CASE("manifest round trip") {
    TempDir tmp("manifest");
    std::vector<salgate::PredictionRecord> records;
    records.push_back(make_record(tmp.path, "rec-a", true, true));
    records.push_back(make_record(tmp.path, "rec-b", false, false));
    const auto path = tmp.path / "manifest.jsonl";
    salgate::save_manifest(records, path);

    const auto loaded = salgate::load_manifest(path);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0] == records[0]);
    CHECK(loaded[1] == records[1]);

    // byte determinism of the writer
    const std::string first = testutil::slurp(path);
    salgate::save_manifest(records, path);
    CHECK(testutil::slurp(path) == first);
}

TEST_CASE("manifest validation failures") {
    TempDir tmp("manifesterr");
    const auto rec = make_record(tmp.path, "ok", true, true);
    const auto path = tmp.path / "manifest.jsonl";

    const std::string good =
        R"({"id":"ok","image":"ok.pgm","saliency":"ok-sal.pgm","truth_box":[1,1,4.5,4],)"
        R"("predicted_label":"pos","true_label":"neg","score":0.625,"class_tag":"vertical",)"
        R"("split":"test"})";

    auto expect_throw = [&](const std::string& line, auto tag) {
        testutil::spit(path, line + "\n");
        CHECK_THROWS_AS(salgate::load_manifest(path), decltype(tag));
    };

    testutil::spit(path, good + "\n");
    CHECK(salgate::load_manifest(path).size() == 1);

    // blank lines are skipped
    testutil::spit(path, "\n" + good + "\n\n");
    CHECK(salgate::load_manifest(path).size() == 1);

    expect_throw("not json", salgate::MalformedManifest{""});
    expect_throw("[1,2]", salgate::MalformedManifest{""});

    auto mutate = [&](const std::string& from, const std::string& to) {
        std::string s = good;
        const auto pos = s.find(from);
        REQUIRE(pos != std::string::npos);
        s.replace(pos, from.size(), to);
        return s;
    };

    // missing field / extra field
    expect_throw(mutate(R"("score":0.625,)", ""), salgate::MalformedManifest{""});
    expect_throw(mutate(R"("score":0.625)", R"("score":0.625,"bonus":1)"),
                 salgate::MalformedManifest{""});
    // type and range violations
    expect_throw(mutate(R"("score":0.625)", R"("score":"x")"), salgate::MalformedManifest{""});
    expect_throw(mutate(R"("score":0.625)", R"("score":1.5)"), salgate::MalformedManifest{""});
    expect_throw(mutate(R"("score":0.625)", R"("score":-0.1)"), salgate::MalformedManifest{""});
    expect_throw(mutate(R"("predicted_label":"pos")", R"("predicted_label":"maybe")"),
                 salgate::MalformedManifest{""});
    expect_throw(mutate(R"("split":"test")", R"("split":"validate")"),
                 salgate::MalformedManifest{""});
    expect_throw(mutate(R"("id":"ok")", R"("id":"")"), salgate::MalformedManifest{""});
    expect_throw(mutate(R"("class_tag":"vertical")", R"("class_tag":7)"),
                 salgate::MalformedManifest{""});
    // truth box shape, emptiness, bounds
    expect_throw(mutate("[1,1,4.5,4]", "[1,1,4.5]"), salgate::MalformedManifest{""});
    expect_throw(mutate("[1,1,4.5,4]", "[1,1,1,4]"), salgate::MalformedManifest{""});
    expect_throw(mutate("[1,1,4.5,4]", "[1,1,4.5,99]"), salgate::MalformedManifest{""});
    // duplicate id
    testutil::spit(path, good + "\n" + good + "\n");
    CHECK_THROWS_AS(salgate::load_manifest(path), salgate::MalformedManifest);
    // missing assets
    expect_throw(mutate(R"("image":"ok.pgm")", R"("image":"gone.pgm")"),
                 salgate::MissingAsset{""});
    expect_throw(mutate(R"("saliency":"ok-sal.pgm")", R"("saliency":"gone.pgm")"),
                 salgate::MissingAsset{""});
    // image/saliency dimension mismatch
    salgate::GrayImage small;
    small.width = 2;
    small.height = 2;
    small.data = {1, 2, 3, 4};
    salgate::write_pgm(small, tmp.path / "small.pgm");
    expect_throw(mutate(R"("saliency":"ok-sal.pgm")", R"("saliency":"small.pgm")"),
                 salgate::DimensionMismatch{""});

    CHECK_THROWS_AS(salgate::load_manifest(tmp.path / "absent.jsonl"), salgate::IoFailure);
    (void)rec;
}

TEST_CASE("save_manifest validates records") {
    TempDir tmp("manifestsave");
    auto rec = make_record(tmp.path, "r", true, true);
    rec.score = 2.0;
    CHECK_THROWS_AS(salgate::save_manifest({rec}, tmp.path / "m.jsonl"),
                    std::invalid_argument);
    rec.score = 0.5;
    rec.truth_box.emplace(0.0, 0.0, 7.0, 5.0);
    CHECK_THROWS_AS(salgate::save_manifest({rec}, tmp.path / "m.jsonl"),
                    std::invalid_argument);
}
