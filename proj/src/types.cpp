#include "creekline/types.hpp"

#include <cmath>
#include <numbers>

namespace creekline {

void require_inside(const Rect& roi, Index host_width, Index host_height,
                    const std::string& what) {
    if (roi.width < 1 || roi.height < 1) {
        throw BoundsError(what + ": degenerate rectangle (width and height must be >= 1)");
    }
    if (roi.x < 0) {
        throw BoundsError(what + ": left edge at x=" + std::to_string(roi.x) + " is negative");
    }
    if (roi.y < 0) {
        throw BoundsError(what + ": top edge at y=" + std::to_string(roi.y) + " is negative");
    }
    if (roi.x + roi.width > host_width) {
        throw BoundsError(what + ": right edge at x=" + std::to_string(roi.x + roi.width) +
                          " exceeds image width " + std::to_string(host_width));
    }
    if (roi.y + roi.height > host_height) {
        throw BoundsError(what + ": bottom edge at y=" + std::to_string(roi.y + roi.height) +
                          " exceeds image height " + std::to_string(host_height));
    }
}

ColorImage ColorImage::constant(Index width, Index height, std::uint8_t red,
                                std::uint8_t green, std::uint8_t blue) {
    ColorImage img;
    img.r = BytePlane::Constant(height, width, red);
    img.g = BytePlane::Constant(height, width, green);
    img.b = BytePlane::Constant(height, width, blue);
    return img;
}

std::string to_string(EdgeSource s) {
    switch (s) {
        case EdgeSource::sobel: return "sobel";
        case EdgeSource::canny: return "canny";
        case EdgeSource::external: return "external";
    }
    return "unknown";
}

double Rng::normal(double mean, double sigma) {
    // Box-Muller; guard against log(0).
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * radius * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

}  // namespace creekline
