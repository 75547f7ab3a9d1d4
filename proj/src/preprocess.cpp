#include "creekline/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace creekline {

void ScreeningConfig::validate() const {
    if (sample_count < 1) throw ConfigError("screening sample_count must be >= 1");
    if (!(dark_threshold > 0.0 && dark_threshold <= boost_threshold && boost_threshold <= 255.0)) {
        throw ConfigError("screening thresholds must satisfy 0 < dark <= boost <= 255");
    }
    if (boost_factor < 1.0) throw ConfigError("screening boost_factor must be >= 1");
}

std::string to_string(ScreeningVerdict v) {
    switch (v) {
        case ScreeningVerdict::rejected_dark: return "rejected_dark";
        case ScreeningVerdict::boosted: return "boosted";
        case ScreeningVerdict::passed: return "passed";
    }
    return "unknown";
}

GrayImage box_filter(const GrayImage& img, int radius) {
    if (radius < 0) throw ConfigError("box_filter radius must be >= 0");
    if (radius == 0) return img;
    const Index h = img.rows(), w = img.cols();

    // Summed-area table with a zero top row/left column.
    Plane<double> integral = Plane<double>::Zero(h + 1, w + 1);
    for (Index y = 0; y < h; ++y) {
        double run = 0.0;
        for (Index x = 0; x < w; ++x) {
            run += img(y, x);
            integral(y + 1, x + 1) = integral(y, x + 1) + run;
        }
    }

    GrayImage out(h, w);
    const Index r = radius;
    for (Index y = 0; y < h; ++y) {
        const Index y0 = std::max<Index>(0, y - r);
        const Index y1 = std::min<Index>(h - 1, y + r);
        for (Index x = 0; x < w; ++x) {
            const Index x0 = std::max<Index>(0, x - r);
            const Index x1 = std::min<Index>(w - 1, x + r);
            const double sum = integral(y1 + 1, x1 + 1) - integral(y0, x1 + 1) -
                               integral(y1 + 1, x0) + integral(y0, x0);
            out(y, x) = sum / static_cast<double>((y1 - y0 + 1) * (x1 - x0 + 1));
        }
    }
    return out;
}

std::pair<ScreeningOutcome, ColorImage> screen_brightness(const ColorImage& img,
                                                          const ScreeningConfig& cfg,
                                                          Rng& rng) {
    cfg.validate();
    const Index w = img.width(), h = img.height();
    if (w < 1 || h < 1) throw SizeError("screen_brightness: empty image");

    const std::uint64_t cells = static_cast<std::uint64_t>(w) * static_cast<std::uint64_t>(h);
    double sum_r = 0.0, sum_g = 0.0, sum_b = 0.0;
    for (int i = 0; i < cfg.sample_count; ++i) {
        const std::uint64_t cell = rng.index(cells);
        const Index y = static_cast<Index>(cell / static_cast<std::uint64_t>(w));
        const Index x = static_cast<Index>(cell % static_cast<std::uint64_t>(w));
        sum_r += img.r(y, x);
        sum_g += img.g(y, x);
        sum_b += img.b(y, x);
    }
    const double n = static_cast<double>(cfg.sample_count);
    ScreeningOutcome outcome;
    outcome.mean_rgb = {sum_r / n, sum_g / n, sum_b / n};

    const double min_channel =
        std::min({outcome.mean_rgb[0], outcome.mean_rgb[1], outcome.mean_rgb[2]});
    if (min_channel < cfg.dark_threshold) {
        outcome.verdict = ScreeningVerdict::rejected_dark;
        return {outcome, img};
    }

    const double overall = (outcome.mean_rgb[0] + outcome.mean_rgb[1] + outcome.mean_rgb[2]) / 3.0;
    if (overall <= cfg.boost_threshold) {
        outcome.verdict = ScreeningVerdict::boosted;
        ColorImage boosted = img;
        auto boost = [&cfg](BytePlane& plane) {
            for (Index y = 0; y < plane.rows(); ++y) {
                for (Index x = 0; x < plane.cols(); ++x) {
                    const long v = std::lround(plane(y, x) * cfg.boost_factor);
                    plane(y, x) = static_cast<std::uint8_t>(std::min(255l, v));
                }
            }
        };
        boost(boosted.r);
        boost(boosted.g);
        boost(boosted.b);
        return {outcome, boosted};
    }

    outcome.verdict = ScreeningVerdict::passed;
    return {outcome, img};
}

}  // namespace creekline
