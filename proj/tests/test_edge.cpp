#include "creekline/edge.hpp"
#include "creekline/image_io.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <numbers>

namespace creekline {
namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

TEST_CASE("sobel of a constant image is all zero") {
    const EdgeMap map = sobel(GrayImage::Constant(8, 8, 0.5));
    CHECK(map.values.maxCoeff() == 0.0);
    CHECK(map.source == EdgeSource::sobel);
}

TEST_CASE("sobel peaks on a vertical step") {
    GrayImage img = GrayImage::Zero(12, 12);
    img.rightCols(6).setConstant(1.0);  // step between columns 5 and 6
    const EdgeMap map = sobel(img);
    CHECK(map.values.maxCoeff() == doctest::Approx(1.0));
    // response concentrated at the step columns, zero far away
    for (Index y = 1; y < 11; ++y) {
        CHECK(map.values(y, 5) > 0.9);
        CHECK(map.values(y, 6) > 0.9);
        CHECK(map.values(y, 2) == 0.0);
        CHECK(map.values(y, 9) == 0.0);
    }
    // border rows/cols forced to zero
    CHECK(map.values.row(0).maxCoeff() == 0.0);
    CHECK(map.values.col(11).maxCoeff() == 0.0);
}

TEST_CASE("sobel transposes with its input") {
    Rng rng(21);
    GrayImage img(9, 14);
    for (Index y = 0; y < 9; ++y) {
        for (Index x = 0; x < 14; ++x) img(y, x) = rng.uniform01();
    }
    const GrayImage a = sobel(img).values;
    const GrayImage b = sobel(GrayImage(img.transpose())).values;
    CHECK((a - b.transpose()).abs().maxCoeff() < 1e-12);
}

TEST_CASE("sobel requires at least 3x3") {
    CHECK_THROWS_AS(static_cast<void>(sobel(GrayImage::Zero(2, 5))), SizeError);
}

// Straightforward re-statement of the canny stages used as the oracle.
GrayImage reference_canny(const GrayImage& img, double sigma, double low, double high) {
    const Index h = img.rows(), w = img.cols();
    const int r = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    GrayImage smooth(h, w);
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            double acc = 0.0, wsum = 0.0;
            for (int ky = -r; ky <= r; ++ky) {
                if (y + ky < 0 || y + ky >= h) continue;
                const double wy = std::exp(-(ky * ky) / (2.0 * sigma * sigma));
                double acc_row = 0.0, wsum_row = 0.0;
                for (int kx = -r; kx <= r; ++kx) {
                    if (x + kx < 0 || x + kx >= w) continue;
                    const double wx = std::exp(-(kx * kx) / (2.0 * sigma * sigma));
                    acc_row += wx * img(y + ky, x + kx);
                    wsum_row += wx;
                }
                acc += wy * (acc_row / wsum_row);
                wsum += wy;
            }
            smooth(y, x) = acc / wsum;
        }
    }
    GrayImage gx = GrayImage::Zero(h, w), gy = GrayImage::Zero(h, w);
    for (Index y = 1; y + 1 < h; ++y) {
        for (Index x = 1; x + 1 < w; ++x) {
            gx(y, x) = (smooth(y - 1, x + 1) + 2 * smooth(y, x + 1) + smooth(y + 1, x + 1)) -
                       (smooth(y - 1, x - 1) + 2 * smooth(y, x - 1) + smooth(y + 1, x - 1));
            gy(y, x) = (smooth(y + 1, x - 1) + 2 * smooth(y + 1, x) + smooth(y + 1, x + 1)) -
                       (smooth(y - 1, x - 1) + 2 * smooth(y - 1, x) + smooth(y - 1, x + 1));
        }
    }
    GrayImage mag = (gx.square() + gy.square()).sqrt();
    if (mag.maxCoeff() > 0) mag /= mag.maxCoeff();
    GrayImage nms = GrayImage::Zero(h, w);
    for (Index y = 1; y + 1 < h; ++y) {
        for (Index x = 1; x + 1 < w; ++x) {
            if (mag(y, x) <= 0) continue;
            double deg = std::atan2(gy(y, x), gx(y, x)) * 180.0 / std::numbers::pi;
            if (deg < 0) deg += 180.0;
            Index dy = 0, dx = 0;
            if (deg < 22.5 || deg >= 157.5) {
                dx = 1;
            } else if (deg < 67.5) {
                dx = 1;
                dy = 1;
            } else if (deg < 112.5) {
                dy = 1;
            } else {
                dx = -1;
                dy = 1;
            }
            if (mag(y, x) >= mag(y - dy, x - dx) && mag(y, x) > mag(y + dy, x + dx)) {
                nms(y, x) = mag(y, x);
            }
        }
    }
    GrayImage out = GrayImage::Zero(h, w);
    std::deque<std::pair<Index, Index>> frontier;
    for (Index y = 0; y < h; ++y) {
        for (Index x = 0; x < w; ++x) {
            if (nms(y, x) > high) {
                out(y, x) = 1.0;
                frontier.emplace_back(y, x);
            }
        }
    }
    while (!frontier.empty()) {
        auto [y, x] = frontier.front();
        frontier.pop_front();
        for (Index dy = -1; dy <= 1; ++dy) {
            for (Index dx = -1; dx <= 1; ++dx) {
                Index yy = y + dy, xx = x + dx;
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                if (out(yy, xx) == 0.0 && nms(yy, xx) > low) {
                    out(yy, xx) = 1.0;
                    frontier.emplace_back(yy, xx);
                }
            }
        }
    }
    return out;
}

TEST_CASE("canny of a constant image is all zero") {
    EdgeProviderConfig cfg;
    cfg.kind = EdgeKind::canny;
    const EdgeMap map = canny(GrayImage::Constant(10, 10, 0.8), cfg);
    CHECK(map.values.maxCoeff() == 0.0);
}

TEST_CASE("canny traces a clean step as a single-pixel chain") {
    GrayImage img = GrayImage::Zero(20, 20);
    img.rightCols(10).setConstant(1.0);
    EdgeProviderConfig cfg;
    cfg.kind = EdgeKind::canny;
    cfg.gaussian_sigma = 1.0;
    cfg.canny_low = 0.1;
    cfg.canny_high = 0.3;
    const EdgeMap map = canny(img, cfg);
    for (Index y = 1; y + 1 < 20; ++y) {
        CHECK(map.values.row(y).sum() == doctest::Approx(1.0));  // one pixel per row
    }
    const GrayImage oracle = reference_canny(img, 1.0, 0.1, 0.3);
    CHECK((map.values - oracle).abs().maxCoeff() == 0.0);
}

TEST_CASE("canny matches the stage-by-stage oracle on a structured scene") {
    Rng rng(77);
    GrayImage img(40, 40);
    for (Index y = 0; y < 40; ++y) {
        for (Index x = 0; x < 40; ++x) {
            const double blob =
                std::exp(-((y - 20.0) * (y - 20.0) + (x - 14.0) * (x - 14.0)) / 60.0);
            img(y, x) = 0.2 + 0.6 * blob + (y > 28 ? 0.3 : 0.0) + 0.02 * rng.uniform01();
        }
    }
    EdgeProviderConfig cfg;
    cfg.kind = EdgeKind::canny;
    cfg.gaussian_sigma = 1.4;
    const EdgeMap map = canny(img, cfg);
    const GrayImage oracle = reference_canny(img, 1.4, cfg.canny_low, cfg.canny_high);
    CHECK((map.values - oracle).abs().maxCoeff() == 0.0);
    // binary output
    for (Index y = 0; y < 40; ++y) {
        for (Index x = 0; x < 40; ++x) {
            CHECK((map.values(y, x) == 0.0 || map.values(y, x) == 1.0));
        }
    }
}

TEST_CASE("nothing passes an unreachable strong threshold") {
    GrayImage img = GrayImage::Zero(20, 20);
    img.rightCols(10).setConstant(1.0);
    EdgeProviderConfig cfg;
    cfg.kind = EdgeKind::canny;
    cfg.canny_low = 0.5;
    cfg.canny_high = 1.0;
    const EdgeMap map = canny(img, cfg);
    CHECK(map.values.maxCoeff() == 0.0);
}

TEST_CASE("canny validates thresholds and size") {
    EdgeProviderConfig cfg;
    cfg.kind = EdgeKind::canny;
    cfg.canny_low = 0.4;
    cfg.canny_high = 0.2;
    CHECK_THROWS_AS(static_cast<void>(canny(GrayImage::Zero(10, 10), cfg)), ConfigError);
    EdgeProviderConfig ok;
    ok.kind = EdgeKind::canny;
    CHECK_THROWS_AS(static_cast<void>(canny(GrayImage::Zero(4, 10), ok)), SizeError);
}

TEST_CASE("external maps load with scaled values and provenance") {
    const std::string path = temp_path("creekline_checker.pgm");
    GrayImage checker(6, 6);
    for (Index y = 0; y < 6; ++y) {
        for (Index x = 0; x < 6; ++x) checker(y, x) = ((x + y) % 2 == 0) ? 0.0 : 128.0 / 255.0;
    }
    write_gray8(path, checker);
    const EdgeMap map = load_external(path);
    CHECK(map.source == EdgeSource::external);
    CHECK((map.values - checker).abs().maxCoeff() == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("an all-white external file is an all-one edge map") {
    const std::string path = temp_path("creekline_white.pgm");
    write_gray8(path, GrayImage::Constant(400, 400, 1.0));
    const EdgeMap map = load_external(path);
    CHECK(map.width() == 400);
    CHECK(map.height() == 400);
    CHECK(map.values.minCoeff() == 1.0);
    std::filesystem::remove(path);
}

TEST_CASE("a missing external file is an ingestion error with the path") {
    const std::string path = temp_path("creekline_does_not_exist.pgm");
    try {
        static_cast<void>(load_external(path));
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(e.path() == path);
    }
}

TEST_CASE("load after save is the identity on quantized maps") {
    Rng rng(4);
    GrayImage values(15, 13);
    for (Index y = 0; y < 15; ++y) {
        for (Index x = 0; x < 13; ++x) {
            values(y, x) = static_cast<double>(rng.index(256)) / 255.0;  // already quantized
        }
    }
    for (const char* name : {"creekline_rt.pgm", "creekline_rt.png"}) {
        const std::string path = temp_path(name);
        write_gray8(path, values);
        const EdgeMap map = load_external(path);
        CHECK((map.values - values).abs().maxCoeff() == 0.0);
        std::filesystem::remove(path);
    }
}

TEST_CASE("provider pipeline applies the sobel noise floor") {
    Rng rng(8);
    GrayImage img(30, 30);
    for (Index y = 0; y < 30; ++y) {
        for (Index x = 0; x < 30; ++x) img(y, x) = 0.5 + 0.01 * rng.uniform01();
    }
    img.bottomRows(10).setConstant(0.1);  // one strong edge to set the scale
    EdgeProviderConfig cfg;
    cfg.kind = EdgeKind::sobel;
    cfg.noise_floor = 0.2;
    const EdgeMap floored = make_edge_map(img, cfg);
    const EdgeMap raw = sobel(img);
    CHECK(raw.values.unaryExpr([](double v) { return v > 0.0 && v <= 0.2 ? 1.0 : 0.0; }).sum() >
          0.0);
    for (Index y = 0; y < 30; ++y) {
        for (Index x = 0; x < 30; ++x) {
            CHECK((floored.values(y, x) == 0.0 || floored.values(y, x) > 0.2));
        }
    }
}

TEST_CASE("external provider enforces the ROI dimensions") {
    const std::string path = temp_path("creekline_small_map.pgm");
    write_gray8(path, GrayImage::Constant(10, 10, 0.5));
    EdgeProviderConfig cfg;
    cfg.kind = EdgeKind::external;
    cfg.external_path_template = temp_path("creekline_{stem}_map.pgm");
    const GrayImage roi = GrayImage::Zero(20, 20);
    CHECK_THROWS_AS(static_cast<void>(make_edge_map(roi, cfg, "small")), IngestError);
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace creekline
