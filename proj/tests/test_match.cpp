#include "creekline/match.hpp"

#include "creekline/image_ops.hpp"
#include "creekline/pipeline.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

namespace creekline {
namespace {

EdgeMap noise_map(Index h, Index w, std::uint64_t seed) {
    Rng rng(seed);
    GrayImage values(h, w);
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) values(y, x) = rng.uniform01();
    }
    return EdgeMap{std::move(values), EdgeSource::external};
}

Template template_from(const EdgeMap& map) {
    Template tmpl;
    tmpl.patch = map;
    return tmpl;
}

// Direct evaluation of the correlation formula, the oracle for the matcher.
double brute_score(const GrayImage& patch, const GrayImage& img, Index x, Index y) {
    double num = 0.0, t_sq = 0.0, w_sq = 0.0;
    for (Index r = 0; r < patch.rows(); ++r) {
        for (Index c = 0; c < patch.cols(); ++c) {
            const double t = patch(r, c);
            const double v = img(y + r, x + c);
            num += t * v;
            t_sq += t * t;
            w_sq += v * v;
        }
    }
    const double den_sq = t_sq * w_sq;
    return den_sq > 0.0 ? num / std::sqrt(den_sq) : 0.0;
}

TEST_CASE("a template scores 1 on its own window") {
    const EdgeMap img = noise_map(50, 50, 3);
    Template tmpl;
    tmpl.patch = EdgeMap{crop(img.values, Rect{12, 20, 16, 10}), img.source};
    CHECK(ncc_score(tmpl, img, 12, 20) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("an all-zero template scores 0 by the zero-denominator convention") {
    const EdgeMap img = noise_map(30, 30, 4);
    Template tmpl;
    tmpl.patch = EdgeMap{GrayImage::Zero(5, 5), EdgeSource::external};
    CHECK(ncc_score(tmpl, img, 3, 3) == 0.0);
}

TEST_CASE("hand-evaluated 2x2 case gives 1/sqrt(2)") {
    GrayImage patch(2, 2);
    patch << 1, 0, 0, 1;
    GrayImage image = GrayImage::Zero(4, 4);
    image(0, 0) = 1.0;
    Template tmpl = template_from(EdgeMap{patch, EdgeSource::external});
    const double score = ncc_score(tmpl, EdgeMap{image, EdgeSource::external}, 0, 0);
    CHECK(score == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("hand-evaluated 3x3 case") {
    GrayImage patch(3, 3);
    patch << 1, 0.5, 0, 0, 1, 0, 0, 0, 1;
    GrayImage image = GrayImage::Zero(5, 5);
    image(1, 1) = 1.0;  // placement (1,1): window [[1,0,0],[0,1,0],[0,0,0]]
    image(2, 2) = 1.0;
    Template tmpl = template_from(EdgeMap{patch, EdgeSource::external});
    const double score = ncc_score(tmpl, EdgeMap{image, EdgeSource::external}, 1, 1);
    // num = 2, sum T^2 = 3.25, sum W^2 = 2
    CHECK(score == doctest::Approx(2.0 / std::sqrt(6.5)).epsilon(1e-12));
}

TEST_CASE("out-of-bounds placements are rejected") {
    const EdgeMap img = noise_map(20, 20, 5);
    Template tmpl = template_from(noise_map(6, 6, 6));
    CHECK_THROWS_AS(static_cast<void>(ncc_score(tmpl, img, 15, 0)), BoundsError);
    CHECK_THROWS_AS(static_cast<void>(ncc_score(tmpl, img, 0, -1)), BoundsError);
}

TEST_CASE("a planted template is found exactly") {
    EdgeMap img = noise_map(120, 120, 7);
    const Template tmpl = template_from(noise_map(20, 20, 8));
    img.values.block(21, 37, 20, 20) = tmpl.patch.values;
    const MatchResult result = match_template(tmpl, img);
    CHECK(result.location.x == 37);
    CHECK(result.location.y == 21);
    CHECK(result.score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.accepted);
}

TEST_CASE("independent noise is rejected at the default threshold") {
    // structured template (sparse blocky texture, like a pier edge map)
    // against a frame of unrelated noise
    Rng rng(10);
    GrayImage patch = GrayImage::Zero(24, 24);
    for (Index y = 0; y < 24; y += 4) {
        for (Index x = 0; x < 24; x += 4) {
            const double v = rng.uniform01();
            if (v > 0.55) patch.block(y, x, 4, 4).setConstant(v);
        }
    }
    const Template tmpl = template_from(EdgeMap{patch, EdgeSource::external});
    const MatchResult result = match_template(tmpl, noise_map(150, 150, 9));
    CHECK(!result.accepted);
    CHECK(result.score < 0.8);
}

TEST_CASE("an upside-down scene is rejected") {
    // blocky texture gives the template 2-d structure to anchor on
    Rng rng(11);
    GrayImage scene = GrayImage::Zero(100, 100);
    for (Index y = 0; y < 100; y += 4) {
        for (Index x = 0; x < 100; x += 4) {
            const double v = rng.uniform01();
            scene.block(y, x, std::min<Index>(4, 100 - y), std::min<Index>(4, 100 - x))
                .setConstant(v > 0.5 ? v : 0.0);
        }
    }
    const EdgeMap img{scene, EdgeSource::external};
    Template tmpl;
    tmpl.patch = EdgeMap{crop(scene, Rect{30, 20, 40, 30}), EdgeSource::external};
    CHECK(match_template(tmpl, img).accepted);

    const EdgeMap flipped{scene.colwise().reverse(), EdgeSource::external};
    const MatchResult result = match_template(tmpl, flipped);
    CHECK(!result.accepted);
}

TEST_CASE("ties break toward the smallest y then the smallest x") {
    GrayImage patch(4, 4);
    patch.setConstant(0.0);
    patch(1, 1) = 1.0;
    patch(2, 2) = 0.5;
    const Template tmpl = template_from(EdgeMap{patch, EdgeSource::external});

    GrayImage image = GrayImage::Zero(30, 30);
    image.block(10, 4, 4, 4) = patch;   // (x=4,  y=10)
    image.block(10, 20, 4, 4) = patch;  // (x=20, y=10) same row, larger x
    image.block(20, 4, 4, 4) = patch;   // larger y
    const MatchResult result = match_template(tmpl, EdgeMap{image, EdgeSource::external});
    CHECK(result.score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.location.y == 10);
    CHECK(result.location.x == 4);
}

TEST_CASE("window scaling leaves scores unchanged") {
    const EdgeMap img = noise_map(60, 60, 12);
    EdgeMap scaled{GrayImage(img.values * 0.35), EdgeSource::external};
    const Template tmpl = template_from(noise_map(9, 9, 13));
    const MatchResult a = match_template(tmpl, img, 0.99);
    const MatchResult b = match_template(tmpl, scaled, 0.99);
    CHECK(a.location == b.location);
    CHECK(a.score == doctest::Approx(b.score).epsilon(1e-12));
    CHECK(ncc_score(tmpl, img, 7, 11) ==
          doctest::Approx(ncc_score(tmpl, scaled, 7, 11)).epsilon(1e-12));
}

TEST_CASE("match equals the brute-force argmax over all placements") {
    for (std::uint64_t seed = 40; seed < 44; ++seed) {
        const EdgeMap img = noise_map(40, 40, seed);
        const Template tmpl = template_from(noise_map(11, 7, seed + 100));
        const MatchResult fast = match_template(tmpl, img);

        double best = -1.0;
        Index best_x = 0, best_y = 0;
        for (Index y = 0; y + 11 <= 40; ++y) {
            for (Index x = 0; x + 7 <= 40; ++x) {
                const double s = brute_score(tmpl.patch.values, img.values, x, y);
                if (s > best) {
                    best = s;
                    best_x = x;
                    best_y = y;
                }
            }
        }
        CHECK(fast.location.x == best_x);
        CHECK(fast.location.y == best_y);
        CHECK(fast.score == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("templates must be strictly smaller than the image") {
    const EdgeMap img = noise_map(20, 20, 14);
    CHECK_THROWS_AS(static_cast<void>(match_template(template_from(noise_map(20, 5, 15)), img)),
                    SizeError);
    CHECK_THROWS_AS(static_cast<void>(match_template(template_from(noise_map(5, 20, 16)), img)),
                    SizeError);
}

TEST_CASE("matching is deterministic") {
    const EdgeMap img = noise_map(80, 80, 17);
    const Template tmpl = template_from(noise_map(13, 13, 18));
    const MatchResult a = match_template(tmpl, img);
    const MatchResult b = match_template(tmpl, img);
    CHECK(a.score == b.score);
    CHECK(a.location == b.location);
    CHECK(a.accepted == b.accepted);
}

TEST_CASE("template files round-trip through the sidecar") {
    Rng rng(19);
    GrayImage patch(12, 9);
    for (Index y = 0; y < 12; ++y) {
        for (Index x = 0; x < 9; ++x) {
            patch(y, x) = static_cast<double>(rng.index(256)) / 255.0;
        }
    }
    Template tmpl;
    tmpl.patch = EdgeMap{patch, EdgeSource::sobel};
    tmpl.origin_in_reference = Rect{140, 0, 9, 12};
    tmpl.waterline_row_offset = 7;
    tmpl.reference_slope = 0.0625;
    CalibrationModel cal;
    cal.h_r = 200.0;
    cal.reference_row = 63.0;
    cal.cm_per_pixel = 0.5;

    const std::string meta =
        (std::filesystem::temp_directory_path() / "creekline_tmpl.meta").string();
    save_template(meta, tmpl, cal);
    const auto [loaded, loaded_cal] = load_template(meta);
    CHECK((loaded.patch.values - patch).abs().maxCoeff() == 0.0);
    CHECK(loaded.patch.source == EdgeSource::sobel);
    CHECK(loaded.origin_in_reference == tmpl.origin_in_reference);
    CHECK(loaded.waterline_row_offset == 7);
    CHECK(loaded.reference_slope == doctest::Approx(0.0625).epsilon(1e-15));
    CHECK(loaded_cal.h_r == 200.0);
    CHECK(loaded_cal.reference_row == 63.0);
    CHECK(loaded_cal.cm_per_pixel == 0.5);
    std::filesystem::remove(meta);
    std::filesystem::remove(
        (std::filesystem::temp_directory_path() / "creekline_tmpl.pgm").string());
}

}  // namespace
}  // namespace creekline
